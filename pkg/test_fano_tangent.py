#!/usr/bin/env python3
"""
Tests for fano_tangent
Tests:
1. Tangent space and splitting data at l0 on the Fermat cubic
2. h0(N(j)) against a sympy construction of the same linear system
3. Splitting dichotomy and the Euler-characteristic pattern on random lines
4. Independence of frame and parameterization
5. Error paths (singular lines, impossible h0(N(-1)))
"""

import pytest
import sympy

from cubic_geometry import (
    COORDINATE_LINE_ROWS,
    FERMAT_LINE_ROWS,
    CubicFourfold,
    JacobianRestriction,
    Line,
    cubic_through_line,
    fermat_cubic,
    jacobian_on_line,
    random_line,
)
from exact_algebra import QQ, BinaryForm, ExactMatrix, SingularAlongLineError, SplittingInconsistencyError
from fano_tangent import (
    TWIST_RANGE,
    SplittingKind,
    TangentVector,
    classify_splitting,
    h0_table,
    section_basis,
    splitting_basis,
    splitting_from_quadrics,
    splitting_type,
    tangent_coordinates,
    tangent_space_basis,
    twisted_section_dim,
)

SAMPLED_LINES = 50


def sympy_h0(jr, j):
    """h0(N(j)) from a symbolic expansion of sum n_i q_i with unknown coefficients."""
    if j + 1 < 0:
        return 0
    s, t = sympy.symbols("s t")
    width = j + 2
    unknowns = sympy.symbols(f"c0:{4 * width}")
    total = sympy.Integer(0)
    for i, q in enumerate(jr.quadrics):
        q_expr = sum(sympy.Rational(str(c)) * s ** (2 - k) * t**k for k, c in enumerate(q.coeffs))
        n_expr = sum(unknowns[i * width + k] * s ** (j + 1 - k) * t**k for k in range(width))
        total += n_expr * q_expr
    total = sympy.expand(total)
    if total == 0:
        return len(unknowns)
    equations = sympy.Poly(total, s, t).coeffs()
    matrix, _ = sympy.linear_eq_to_matrix(equations, unknowns)
    return len(unknowns) - matrix.rank()


@pytest.fixture(scope="module")
def samples():
    out = []
    for seed in range(SAMPLED_LINES):
        line = random_line(seed)
        jr = jacobian_on_line(cubic_through_line(line, seed), line)
        if jr.is_smooth():
            out.append(jr)
    return out


@pytest.fixture
def fermat():
    return fermat_cubic()


@pytest.fixture
def l0():
    return Line.from_span(FERMAT_LINE_ROWS)


# Worked example


def test_tangent_basis(fermat, l0):
    expected = [TangentVector.from_vector(QQ, 1, [int(i == k) for i in range(8)]) for k in range(4, 8)]
    assert tangent_space_basis(fermat, l0) == expected


def test_h0_table(fermat, l0):
    assert h0_table(jacobian_on_line(fermat, l0)) == {-2: 0, -1: 2, 0: 4, 1: 7, 2: 10}
    assert twisted_section_dim(fermat, l0, 1) == 7


def test_splitting(fermat, l0):
    sd = splitting_basis(fermat, l0)
    assert sd.kind is SplittingKind.TYPE2
    assert splitting_type(fermat, l0) == SplittingKind.TYPE2
    assert sd.generators == (TangentVector.constant(QQ, [0, 0, 1, 0]), TangentVector.constant(QQ, [0, 0, 0, 1]))
    e1 = TangentVector.from_vector(QQ, 2, [0, 0, -1, 1, 0, 0, 0, 0, 0, 0, 0, 0])
    assert sd.complements == (e1,)
    assert sd.summands == (e1,) + sd.generators


def test_coordinate_basis_is_tangent_basis(fermat, l0):
    sd = splitting_basis(fermat, l0)
    basis = tangent_space_basis(fermat, l0)
    assert list(sd.coordinate_basis()) == basis
    assert tangent_coordinates(basis[2].scale(5), sd) == (0, 0, 5, 0)


def test_vector_operations():
    v = TangentVector.from_vector(QQ, 1, [1, 2, 0, 0, 0, 0, 3, -1])
    assert all(c.is_zero() for c in (v + v.scale(-1)).components)
    assert (v - v).coefficient_vector() == [0] * 8
    assert v.multiply(BinaryForm.linear(QQ, 0, 1)).degree == 2
    assert v.to_json()[0] == ["1", "2"]


# Random lines


def test_enough_smooth_samples(samples):
    assert len(samples) >= SAMPLED_LINES - 2


def test_h0_matches_sympy(samples):
    for jr in samples:
        table = h0_table(jr)
        for j in TWIST_RANGE:
            assert table[j] == sympy_h0(jr, j), f"twist {j}"


def test_dichotomy_and_euler_pattern(samples):
    for jr in samples:
        table = h0_table(jr)
        assert table[-1] in (1, 2)
        assert table[-2] == 0
        assert table[0] == 4
        assert [table[j] for j in (1, 2)] == [7, 10]


def test_splitting_bases(samples):
    for jr in samples[:15]:
        sd = splitting_from_quadrics(jr)
        basis = sd.coordinate_basis()
        assert all(v.in_kernel(jr) and v.degree == 1 for v in basis)
        assert ExactMatrix(jr.field, [v.coefficient_vector() for v in basis]).rank() == 4
        for k, v in enumerate(basis):
            assert tangent_coordinates(v, sd) == tuple(int(i == k) for i in range(4))
        if sd.kind is SplittingKind.TYPE1:
            assert (len(sd.generators), len(sd.complements)) == (1, 2)
        else:
            assert (len(sd.generators), len(sd.complements)) == (2, 1)
            assert sd.complements[0].in_kernel(jr)


# Invariance


def test_frame_independence():
    line = random_line(21)
    Y = cubic_through_line(line, 21)
    f, s = line.frame, line.span
    frame = ExactMatrix(
        QQ,
        [
            list(f.row(0)),
            [a + b for a, b in zip(f.row(0), f.row(1))],
            [a + b for a, b in zip(f.row(2), s.row(0))],
            list(f.row(3)),
        ],
    )
    assert h0_table(jacobian_on_line(Y, line)) == h0_table(jacobian_on_line(Y, line, frame))
    assert splitting_type(Y, line) == splitting_type(Y, line, frame)


@pytest.mark.parametrize("g", [[[1, 1], [0, 1]], [[0, 1], [1, 0]], [[2, 1], [1, 3]]])
def test_reparameterization_independence(g):
    line = random_line(21)
    jr = jacobian_on_line(cubic_through_line(line, 21), line)
    moved_jr = jr.reparameterize(g)
    assert h0_table(moved_jr) == h0_table(jr)
    assert all(v.reparameterize(g).in_kernel(moved_jr) for v in section_basis(jr, 0))


def test_generic_coordinate_line_is_type1():
    line = Line.from_span(COORDINATE_LINE_ROWS)
    kinds = []
    for seed in range(10):
        jr = jacobian_on_line(cubic_through_line(line, seed), line)
        if jr.is_smooth():
            kinds.append(classify_splitting(jr))
    assert kinds.count(SplittingKind.TYPE1) >= 8


# Errors


def test_singular_line():
    Y = CubicFourfold.from_terms(
        {(1, 0, 2, 0, 0, 0): 1, (0, 1, 0, 2, 0, 0): 1, (0, 0, 0, 0, 3, 0): 1, (0, 0, 0, 0, 0, 3): 1}
    )
    line = Line.from_span(COORDINATE_LINE_ROWS)
    with pytest.raises(SingularAlongLineError):
        tangent_space_basis(Y, line)
    with pytest.raises(SingularAlongLineError):
        splitting_type(Y, line)


def test_impossible_splitting():
    zero = BinaryForm.zero(QQ, 2)
    jr = JacobianRestriction((BinaryForm(QQ, 2, (1, 0, 0)), zero, zero, zero))
    with pytest.raises(SplittingInconsistencyError):
        classify_splitting(jr)
