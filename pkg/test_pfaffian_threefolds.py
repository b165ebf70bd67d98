#!/usr/bin/env python3
"""
Tests for pfaffian_threefolds
Tests:
1. Pfaffians: numeric and symbolic, Pf^2 = det against sympy
2. Hyperplane sections of cubic fourfolds
3. Rank profiles, kernels and zero loci at F_p-points of X
4. Cohomology table of E(1 + d): h0(E(1)) = 6, h0(E(2)) = 24, vanishing band, Euler check
5. Validation and JSON codecs
"""

import json
import os

import numpy as np
import pytest
import sympy

from cubic_geometry import fermat_cubic
from exact_algebra import (
    QQ,
    DegenerateRepresentationError,
    ExactMatrix,
    GeometryError,
    GradingError,
    MultiForm,
    PointOffThreefoldError,
    PrimeField,
)
from pfaffian_threefolds import (
    CubicThreefold,
    SkewLinearMatrix,
    expected_euler_characteristic,
    generic_skew_linear_matrix,
    graded_cohomology_table,
    kernel_at,
    matrix_to_json,
    numeric_pfaffian,
    perfect_matchings,
    pfaffian,
    pfaffian_threefold,
    points_on_threefold_mod_p,
    polynomial_binomial4,
    projective_points,
    random_skew_linear_matrix,
    rank_profile,
    restrict_to_hyperplane,
    skew_matrix_from_json,
    table_to_json,
    vanishing_band_holds,
    zero_locus_member,
)

SAMPLES = os.path.join(os.path.dirname(os.path.abspath(__file__)), "data", "samples")
Y_VARS = sympy.symbols("y0:5")
FIXED_POINTS = [(1, 0, 0, 0, 0), (1, 2, -1, 3, 1), (2, -3, 5, 1, -1)]


def unit(i, coeff=1):
    return [coeff if k == i else 0 for k in range(5)]


def load_m():
    with open(os.path.join(SAMPLES, "m.json"), "r", encoding="utf-8") as handle:
        return skew_matrix_from_json(json.load(handle))


def to_sympy(form):
    return sum(sympy.Rational(str(c)) * sympy.prod([v**e for v, e in zip(Y_VARS, exp)]) for exp, c in form.terms)


def check_table(table):
    assert table.loc[0, "h0"] == 6
    assert table.loc[1, "h0"] == 24
    assert table["euler_ok"].all()
    assert vanishing_band_holds(table)
    for d in (-1, -2, -3):
        assert table.loc[d, ["h0", "h1", "h2", "h3", "h4"]].tolist() == [0, 0, 0, 0, 0]


@pytest.fixture(scope="module")
def mod7():
    field = PrimeField(7)
    M = generic_skew_linear_matrix(0).change_field(field)
    X = pfaffian_threefold(M)
    return field, M, X, points_on_threefold_mod_p(X, limit=200)


# Pfaffians


def test_matchings():
    assert len(list(perfect_matchings(range(6)))) == 15
    assert list(perfect_matchings(range(4))) == [[(0, 1), (2, 3)], [(0, 2), (1, 3)], [(0, 3), (1, 2)]]


def test_standard_symplectic_matrix():
    J = [[0] * 6 for _ in range(6)]
    for k in range(0, 6, 2):
        J[k][k + 1], J[k + 1][k] = 1, -1
    assert numeric_pfaffian(J) == 1
    assert numeric_pfaffian([[0, 2], [-2, 0]]) == 2


def test_block_matrix():
    M = SkewLinearMatrix.from_upper(QQ, {(0, 1): unit(0), (2, 3): unit(1), (4, 5): unit(2)})
    assert pfaffian(M) == MultiForm(QQ, 5, 3, {(1, 1, 1, 0, 0): 1})


def test_zero_row_gives_zero():
    M = SkewLinearMatrix.from_upper(QQ, {(0, 1): unit(0), (2, 3): unit(1), (0, 4): unit(2), (1, 2): unit(3)})
    assert pfaffian(M).is_zero()
    with pytest.raises(DegenerateRepresentationError):
        graded_cohomology_table(M, (0, 0))


@pytest.mark.parametrize("seed", range(50))
def test_pf_squared_is_det_at_points(seed):
    M = random_skew_linear_matrix(seed)
    pf = pfaffian(M)
    rng = np.random.default_rng(1000 + seed)
    points = [tuple(int(x) for x in row) for row in rng.integers(-10**6, 10**6 + 1, size=(10, 5))]
    for point in FIXED_POINTS + points:
        value = M.at(point)
        det = sympy.Matrix([[int(x) for x in row] for row in value.tolist()]).det()
        assert numeric_pfaffian(value) ** 2 == int(det)
        assert pf.evaluate(point) == numeric_pfaffian(value)


@pytest.mark.parametrize("seed", range(2))
def test_pf_squared_is_det_symbolically(seed):
    M = random_skew_linear_matrix(seed, coeff_bound=1)
    symbolic = sympy.Matrix([[to_sympy(cell) for cell in row] for row in M.entries])
    det = sympy.expand(symbolic.det(method="berkowitz"))
    assert sympy.expand(to_sympy(pfaffian(M)) ** 2 - det) == 0


# Hyperplane sections


def test_coordinate_hyperplane():
    X = restrict_to_hyperplane(fermat_cubic(), [0, 0, 0, 0, 0, 1])
    expected = {tuple(3 if k == i else 0 for k in range(5)): 1 for i in range(5)}
    assert X.form == MultiForm(QQ, 5, 3, expected)


def test_eliminates_last_variable():
    X = restrict_to_hyperplane(fermat_cubic(), MultiForm.linear(QQ, [0, 0, 0, 0, 1, -1]))
    assert X.form.coefficient((0, 0, 0, 0, 3)) == 2
    assert X.form.coefficient((3, 0, 0, 0, 0)) == 1


def test_bad_hyperplanes():
    with pytest.raises(GeometryError):
        restrict_to_hyperplane(fermat_cubic(), [0] * 6)
    with pytest.raises(ValueError):
        restrict_to_hyperplane(fermat_cubic(), [1, 0, 0])


# Pointwise data over GF(7)


def test_points_lie_on_x(mod7):
    _, _, X, points = mod7
    assert len(points) == 200
    assert all(X.contains(p) for p in points)


def test_rank_parity(mod7):
    _, M, X, points = mod7
    ranks = rank_profile(M, X, points)
    assert all(r in (0, 2, 4) for r in ranks)
    assert ranks.count(4) > len(ranks) // 2


def test_kernel(mod7):
    _, M, _, points = mod7
    point = next(p for p in points if M.at(p).rank() == 4)
    basis = kernel_at(M, point)
    assert len(basis) == 2
    for v in basis:
        assert all(x == 0 for x in M.at(point) @ v)


def test_zero_locus(mod7):
    _, M, _, points = mod7
    point = next(p for p in points if M.at(p).rank() == 4)
    image = M.at(point) @ [1, 2, 3, 4, 5, 6]
    assert zero_locus_member(M, image, point)
    assert zero_locus_member(M, [0] * 6, point)
    assert not all(zero_locus_member(M, [int(i == k) for i in range(6)], point) for k in range(6))


def test_point_off_x(mod7):
    field, M, X, _ = mod7
    off = next(p for p in projective_points(field) if not X.contains(p))
    with pytest.raises(PointOffThreefoldError):
        kernel_at(M, off)
    with pytest.raises(PointOffThreefoldError):
        rank_profile(M, None, [off])


def test_rational_threefold_needs_prime():
    X = pfaffian_threefold(load_m())
    with pytest.raises(ValueError):
        points_on_threefold_mod_p(X)
    assert len(points_on_threefold_mod_p(X, 5, limit=3)) == 3


# Cohomology tables


def test_sample_matrix_table():
    M = load_m()
    assert pfaffian(M).coefficient((1, 1, 1, 0, 0)) == 1
    table = graded_cohomology_table(M, (-4, 2))
    check_table(table)
    assert table.loc[-4, "h3"] == 6
    assert table.loc[2, "h0"] == 60


@pytest.mark.parametrize("seed", range(3))
def test_generic_matrix_table(seed):
    check_table(graded_cohomology_table(generic_skew_linear_matrix(seed), (-3, 1)))


def test_euler_polynomial():
    assert [polynomial_binomial4(n) for n in (-5, -1, 0, 1, 2)] == [1, 0, 1, 5, 15]
    assert expected_euler_characteristic(0) == 6
    assert expected_euler_characteristic(1) == 24
    assert expected_euler_characteristic(-2) == 0


def test_table_json():
    rows = table_to_json(graded_cohomology_table(load_m(), (0, 1)))
    assert [r["d"] for r in rows] == [0, 1]
    assert rows[0]["twist"] == 1
    assert rows[1]["euler_ok"] is True
    json.dumps(rows)


# Validation and codecs


def test_skew_symmetry_required():
    cells = [[[0] * 5 for _ in range(6)] for _ in range(6)]
    cells[0][1] = unit(0)
    with pytest.raises(ValueError):
        SkewLinearMatrix.from_coefficients(QQ, cells)
    with pytest.raises(ValueError):
        SkewLinearMatrix.from_upper(QQ, {(1, 0): unit(0)})


def test_threefold_degree():
    with pytest.raises(GradingError):
        CubicThreefold(MultiForm.linear(QQ, unit(0)))


def test_matrix_json():
    M = random_skew_linear_matrix(5)
    doc = json.loads(json.dumps(matrix_to_json(M)))
    assert skew_matrix_from_json(doc) == M
    assert skew_matrix_from_json(doc["entries"]) == M
    point = (1, 1, 1, 1, 1)
    assert M.transpose().at(point) == M.at(point).scale(-1)
    f5 = PrimeField(5)
    assert M.change_field(f5).at((1, 0, 0, 0, 0)) == ExactMatrix(f5, M.at((1, 0, 0, 0, 0)).tolist())
