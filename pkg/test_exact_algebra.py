#!/usr/bin/env python3
"""
Tests for exact_algebra
Tests:
1. Prime fields and rational scalars
2. Univariate polynomial helpers and unit combinations
3. Binary and Laurent forms (division, H^1 coordinates, residue sweep)
4. ExactMatrix rank/kernel/determinant against independent oracles over QQ and GF(p)
5. Multivariate forms and restriction to lines (a ring homomorphism)
"""

from fractions import Fraction

import numpy as np
import pytest
import sympy

from exact_algebra import (
    QQ,
    BinaryForm,
    DegenerateLineError,
    ExactMatrix,
    FieldMismatchError,
    GradingError,
    InconsistencyError,
    LaurentBivariate,
    MultiForm,
    NoUnitError,
    PrimeField,
    format_scalar,
    h1_coordinates,
    leibniz_determinant,
    make_field,
    monomial_exponents,
    poly_gcd,
    poly_mul,
    residue,
    restrict_to_line,
    unit_combination,
)


def naive_rank(rows, p=None):
    """Plain Gaussian elimination over Fractions, or over the integers mod p."""
    m = [[Fraction(x) if p is None else x % p for x in r] for r in rows]
    rank = 0
    ncols = len(m[0]) if m else 0
    for c in range(ncols):
        pivot = next((i for i in range(rank, len(m)) if m[i][c] != 0), None)
        if pivot is None:
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        for i in range(len(m)):
            if i != rank and m[i][c] != 0:
                if p is None:
                    f = m[i][c] / m[rank][c]
                    m[i] = [a - f * b for a, b in zip(m[i], m[rank])]
                else:
                    f = m[i][c] * pow(m[rank][c], -1, p) % p
                    m[i] = [(a - f * b) % p for a, b in zip(m[i], m[rank])]
        rank += 1
    return rank


def random_matrices(count=100):
    rng = np.random.default_rng(7)
    for _ in range(count):
        rows, inner, cols = (int(x) for x in rng.integers(1, 7, size=3))
        left = rng.integers(-4, 5, size=(rows, inner))
        right = rng.integers(-4, 5, size=(inner, cols))
        yield [[int(x) for x in r] for r in left @ right]


def combination_is_one(cofactors, polys, field):
    total = [field.zero]
    for c, p in zip(cofactors, polys):
        product = poly_mul(c, p, field) if c and p else []
        width = max(len(total), len(product))
        total = [
            (total[i] if i < len(total) else field.zero) + (product[i] if i < len(product) else field.zero)
            for i in range(width)
        ]
    while len(total) > 1 and total[-1] == 0:
        total.pop()
    return total == [field.one]


@pytest.fixture
def fermat_form():
    return MultiForm(QQ, 6, 3, {tuple(3 if k == i else 0 for k in range(6)): 1 for i in range(6)})


# Fields


@pytest.mark.parametrize("bad", [2, 9, 1, 0])
def test_prime_field_requires_odd_prime(bad):
    with pytest.raises(ValueError):
        PrimeField(bad)


def test_prime_field_arithmetic():
    f = PrimeField(7)
    assert f.p == 7
    assert f(3) * f(5) == f(1)
    assert f(1) / f(3) == f(5)
    assert f(Fraction(1, 9)) == f(4)
    assert -f(2) == f(5)
    with pytest.raises(ZeroDivisionError):
        f(Fraction(1, 7))


def test_mixing_fields_fails():
    with pytest.raises(FieldMismatchError):
        PrimeField(5)(3) + PrimeField(7)(3)
    with pytest.raises(FieldMismatchError):
        QQ(PrimeField(5)(3))


def test_scalar_strings():
    assert QQ("-3/7") == Fraction(-3, 7)
    assert QQ("−3/7") == Fraction(-3, 7)
    assert format_scalar(Fraction(-3, 7)) == "-3/7"
    assert format_scalar(Fraction(5)) == "5"
    assert format_scalar(PrimeField(7)("1/9")) == "4"
    assert make_field() is QQ
    assert make_field(11) == PrimeField(11)


# Polynomials


def test_gcd_is_monic():
    # (u - 1)(u + 2) and 3(u - 1)
    assert poly_gcd([QQ(-2), QQ(1), QQ(1)], [QQ(-3), QQ(3)], QQ) == [QQ(-1), QQ(1)]


def test_unit_combination_fermat_chart():
    polys = [[3], [0, 0, 3]]
    cofactors = unit_combination(polys)
    assert combination_is_one(cofactors, [[QQ(x) for x in p] for p in polys], QQ)
    assert cofactors[0] == [Fraction(1, 3)]


def test_unit_combination_random_coprime():
    polys = [[1, 2, 1], [3, 0, 1], [0, 1]]
    assert combination_is_one(unit_combination(polys), [[QQ(x) for x in p] for p in polys], QQ)


def test_unit_combination_over_prime_field():
    f = PrimeField(5)
    polys = [[f(1), f(0), f(1)], [f(0), f(1)]]
    assert combination_is_one(unit_combination(polys, f), polys, f)


def test_common_root_has_no_unit():
    with pytest.raises(NoUnitError):
        unit_combination([[-1, 1], [-1, 0, 1]])


# Binary and Laurent forms


def test_product_and_evaluation():
    a = BinaryForm.linear(QQ, 1, 1)
    b = BinaryForm.linear(QQ, 1, -1)
    assert (a * b).coeffs == (1, 0, -1)
    assert (a**3).evaluate(QQ(2), QQ(1)) == 27


def test_degree_mismatch():
    with pytest.raises(GradingError):
        BinaryForm.linear(QQ, 1, 0) + BinaryForm.monomial(QQ, 2, 0)


def test_compose_linear_swaps_variables():
    q = BinaryForm(QQ, 2, (1, 2, 3))
    t0, t1 = BinaryForm.linear(QQ, 1, 0), BinaryForm.linear(QQ, 0, 1)
    assert q.compose_linear(t1, t0).coeffs == (3, 2, 1)


def test_exact_divide():
    x = LaurentBivariate(QQ, 0, {(1, -1): Fraction(1, 3)})
    q = BinaryForm(QQ, 2, (3, 0, 0))
    assert x.exact_divide(q) == LaurentBivariate(QQ, -2, {(-1, -1): Fraction(1, 9)})


def test_exact_divide_by_binomial():
    # (t0 + t1) * t0^-3 = t0^-2 + t0^-3 t1
    x = LaurentBivariate(QQ, -2, {(-2, 0): 1, (-3, 1): 1})
    assert x.exact_divide(BinaryForm.linear(QQ, 1, 1)) == LaurentBivariate.monomial(QQ, -3, 0)


def test_non_divisible_raises():
    with pytest.raises(InconsistencyError):
        LaurentBivariate.monomial(QQ, -1, -1).exact_divide(BinaryForm.linear(QQ, 1, 1))


def test_charts_and_cohomology_part():
    x = LaurentBivariate(QQ, -2, {(-2, 0): 1, (-1, -1): 5, (0, -2): 2})
    assert not x.regular_on_chart(0)
    assert not x.regular_on_chart(1)
    assert x.cohomology_part() == LaurentBivariate.monomial(QQ, -1, -1, 5)
    assert LaurentBivariate.monomial(QQ, -2, 0).is_coboundary()


def test_h1_coordinates_order():
    x = LaurentBivariate(QQ, -4, {(-3, -1): 2, (-2, -2): 5, (-1, -3): 7, (-4, 0): 1})
    assert h1_coordinates(x) == [2, 5, 7]
    assert h1_coordinates(LaurentBivariate.monomial(QQ, -1, 0)) == []


def test_residue():
    assert residue(LaurentBivariate(QQ, -2, {(-1, -1): Fraction(1, 9), (1, -3): 4})) == Fraction(1, 9)
    with pytest.raises(GradingError):
        residue(LaurentBivariate.monomial(QQ, -2, -1))


@pytest.mark.parametrize("i", range(-8, 7))
def test_residue_sees_only_the_polar_monomial(i):
    x = LaurentBivariate.monomial(QQ, i, -2 - i, 5)
    assert residue(x) == (5 if i == -1 else 0)


def test_residue_of_sum():
    rng = np.random.default_rng(3)
    terms = {(i, -2 - i): int(c) for i, c in zip(range(-6, 5), rng.integers(1, 9, size=11))}
    assert residue(LaurentBivariate(QQ, -2, terms)) == terms[(-1, -1)]


def test_binary_times_laurent():
    x = LaurentBivariate.monomial(QQ, -2, 0, 3)
    t1 = BinaryForm.linear(QQ, 0, 1)
    assert t1 * x == LaurentBivariate.monomial(QQ, -2, 1, 3)
    assert x * t1 == t1 * x


# ExactMatrix


@pytest.mark.parametrize("p", [None, 7, 101])
def test_rank_matches_naive_elimination(p):
    field = make_field(p)
    for rows in random_matrices():
        assert ExactMatrix(field, rows).rank() == naive_rank(rows, p)


def test_rank_with_fractions():
    assert ExactMatrix(QQ, [[Fraction(1, 3), Fraction(2, 3)], [Fraction(1, 2), 1]]).rank() == 1


@pytest.mark.parametrize("p", [None, 7, 101])
def test_kernel_basis(p):
    for rows in random_matrices():
        m = ExactMatrix(make_field(p), rows)
        basis = m.kernel_basis()
        assert len(basis) == m.cols - m.rank()
        for v in basis:
            assert all(x == 0 for x in m @ v)


@pytest.mark.parametrize("n", range(1, 6))
def test_determinant_matches_sympy(n):
    rng = np.random.default_rng(11 + n)
    rows = [[int(x) for x in r] for r in rng.integers(-5, 6, size=(n, n))]
    expected = Fraction(int(sympy.Matrix(rows).det()))
    assert ExactMatrix(QQ, rows).determinant() == expected
    columns = [[QQ(x) for x in col] for col in zip(*rows)]
    assert leibniz_determinant(columns, QQ.zero) == expected


def test_prime_field_rank_and_determinant():
    f = PrimeField(5)
    m = ExactMatrix(f, [[1, 2], [3, 1]])  # det = -5
    assert m.rank() == 1
    assert m.determinant() == f(0)
    assert ExactMatrix(QQ, [[1, 2], [3, 1]]).rank() == 2


def test_solve_and_inverse():
    m = ExactMatrix(QQ, [[2, 1], [1, 1]])
    assert m.solve([3, 2]) == (1, 1)
    assert m @ m.inverse() == ExactMatrix.identity(QQ, 2)
    assert ExactMatrix(QQ, [[1, 1], [1, 1]]).solve([1, 0]) is None


# Multivariate forms


def test_monomial_count():
    assert len(monomial_exponents(6, 3)) == 56
    assert len(monomial_exponents(5, 2)) == 15
    assert monomial_exponents(5, -1) == ()


def test_partial_derivative(fermat_form):
    assert fermat_form.partial_derivative(2) == MultiForm(QQ, 6, 2, {(0, 0, 2, 0, 0, 0): 3})


def test_substitute():
    x = [MultiForm.variable(QQ, 2, 0), MultiForm.variable(QQ, 2, 1)]
    f = MultiForm(QQ, 2, 2, {(2, 0): 1, (0, 2): -1})
    assert f.substitute([x[1], x[0]]) == f.scale(-1)


def test_restrict_fermat_to_l0(fermat_form):
    assert restrict_to_line(fermat_form, [[1, -1, 0, 0, 0, 0], [0, 0, 1, -1, 0, 0]]).is_zero()
    assert restrict_to_line(fermat_form, [[1, 0, 0, 0, 0, 0], [0, 1, 0, 0, 0, 0]]).coeffs == (1, 0, 0, 1)


def test_restrict_degenerate(fermat_form):
    with pytest.raises(DegenerateLineError):
        restrict_to_line(fermat_form, [[1, 0, 0, 0, 0, 0], [2, 0, 0, 0, 0, 0]])


def random_form(rng, field, degree, size=8):
    exps = monomial_exponents(6, degree)
    picks = rng.choice(len(exps), size=size, replace=False)
    return MultiForm(field, 6, degree, {exps[int(k)]: int(rng.integers(-9, 10)) for k in picks})


def random_parameterization(rng, field):
    while True:
        rows = [[int(x) for x in r] for r in rng.integers(-5, 6, size=(2, 6))]
        if ExactMatrix(field, rows).rank() == 2:
            return rows


@pytest.mark.parametrize("p", [None, 101])
def test_restriction_is_a_ring_homomorphism(p):
    field = make_field(p)
    rng = np.random.default_rng(19)
    for _ in range(100):
        f, f2 = random_form(rng, field, 3), random_form(rng, field, 3)
        g = random_form(rng, field, 2)
        A = random_parameterization(rng, field)
        assert restrict_to_line(f * g, A) == restrict_to_line(f, A) * restrict_to_line(g, A)
        assert restrict_to_line(f + f2, A) == restrict_to_line(f, A) + restrict_to_line(f2, A)


def test_change_field():
    f = MultiForm(QQ, 2, 1, {(1, 0): Fraction(1, 2), (0, 1): 7})
    assert f.change_field(PrimeField(7)).linear_coefficients() == [PrimeField(7)(4), PrimeField(7)(0)]
