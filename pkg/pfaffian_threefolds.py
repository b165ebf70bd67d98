"""
Pfaffian Threefolds Module
==========================
Cubic threefolds X = {Pf(M) = 0} in P^4 given by a 6x6 skew-symmetric
matrix M of linear forms, the cokernel sheaf E(1) of

    0 -> O(-1)^6 --M--> O^6 -> E(1) -> 0,

and the graded cohomology table of its twists. Also hyperplane sections of
cubic fourfolds, which is where such threefolds come from.
"""

from __future__ import annotations

import dataclasses
import itertools
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from cubic_geometry import CubicFourfold
from exact_algebra import (
    QQ,
    DegenerateRepresentationError,
    ExactMatrix,
    GeometryError,
    GradingError,
    MultiForm,
    NonLocallyFreePointError,
    PointOffThreefoldError,
    PrimeField,
    format_scalar,
    monomial_exponents,
    permutation_sign,
)

NVARS = 5
SIZE = 6
DEFAULT_PROBE_PRIME = 7
DEFAULT_TWISTS = (-3, 3)
DEFAULT_MATRIX_BOUND = 2
MAX_GENERIC_ATTEMPTS = 200


@dataclasses.dataclass(frozen=True)
class CubicThreefold:
    """A cubic form in y0..y4."""

    form: MultiForm

    def __post_init__(self):
        if self.form.nvars != NVARS or self.form.degree != 3:
            raise GradingError("a cubic threefold needs a degree 3 form in 5 variables")

    @property
    def field(self):
        return self.form.field

    def contains(self, point: Sequence) -> bool:
        return self.form.evaluate(point) == 0

    def change_field(self, field) -> "CubicThreefold":
        return CubicThreefold(self.form.change_field(field))


@dataclasses.dataclass(frozen=True)
class SkewLinearMatrix:
    """6x6 skew-symmetric matrix whose entries are linear forms in y0..y4."""

    entries: Tuple[Tuple[MultiForm, ...], ...]

    def __post_init__(self):
        if len(self.entries) != SIZE or any(len(row) != SIZE for row in self.entries):
            raise ValueError("a skew linear matrix is 6x6")
        for i, j in itertools.product(range(SIZE), repeat=2):
            entry = self.entries[i][j]
            if entry.nvars != NVARS or entry.degree != 1:
                raise GradingError(f"entry ({i}, {j}) is not a linear form in 5 variables")
            if entry != -self.entries[j][i]:
                raise ValueError(f"matrix is not skew-symmetric at ({i}, {j})")

    @property
    def field(self):
        return self.entries[0][1].field

    @classmethod
    def from_coefficients(cls, field, coeffs: Sequence[Sequence[Sequence]]) -> "SkewLinearMatrix":
        """Build from a 6x6 grid of 5-vectors of linear-form coefficients."""
        return cls(tuple(tuple(MultiForm.linear(field, [field(c) for c in cell]) for cell in row) for row in coeffs))

    @classmethod
    def from_upper(cls, field, upper) -> "SkewLinearMatrix":
        """Build from {(i, j): 5-vector} for i < j; other entries follow by skew symmetry."""
        zero = MultiForm.zero(field, NVARS, 1)
        rows = [[zero] * SIZE for _ in range(SIZE)]
        for (i, j), cell in upper.items():
            if i >= j:
                raise ValueError("upper-triangular keys need i < j")
            form = MultiForm.linear(field, [field(c) for c in cell])
            rows[i][j] = form
            rows[j][i] = -form
        return cls(tuple(tuple(r) for r in rows))

    def coefficients(self) -> List[List[List]]:
        return [[cell.linear_coefficients() for cell in row] for row in self.entries]

    def at(self, point: Sequence) -> ExactMatrix:
        """The numeric skew matrix M(x)."""
        return ExactMatrix(self.field, [[cell.evaluate(point) for cell in row] for row in self.entries], cols=SIZE)

    def transpose(self) -> "SkewLinearMatrix":
        return SkewLinearMatrix(tuple(tuple(self.entries[j][i] for j in range(SIZE)) for i in range(SIZE)))

    def change_field(self, field) -> "SkewLinearMatrix":
        return SkewLinearMatrix(tuple(tuple(cell.change_field(field) for cell in row) for row in self.entries))

    def graded_piece(self, e: int) -> ExactMatrix:
        """
        Matrix of p -> M*p from S_{e-1}^6 to S_e^6.

        Row i*dim(S_e) + r is monomial r of slot i; column j*dim(S_{e-1}) + c
        is monomial c of slot j.
        """
        out_monomials = monomial_exponents(NVARS, e)
        in_monomials = monomial_exponents(NVARS, e - 1)
        index = {m: r for r, m in enumerate(out_monomials)}
        nrows, ncols = SIZE * len(out_monomials), SIZE * len(in_monomials)
        field = self.field
        rows = [[field.zero] * ncols for _ in range(nrows)]
        for i, j in itertools.product(range(SIZE), repeat=2):
            for exp, c in self.entries[i][j].terms:
                v = exp.index(1)
                for col, m in enumerate(in_monomials):
                    target = tuple(x + (k == v) for k, x in enumerate(m))
                    r = i * len(out_monomials) + index[target]
                    rows[r][j * len(in_monomials) + col] += c
        return ExactMatrix(field, rows, cols=ncols)

    def to_json(self) -> List[List[List[str]]]:
        return [[[format_scalar(c) for c in cell] for cell in row] for row in self.coefficients()]


# ---------------------------------------------------------------------------
# Pfaffians
# ---------------------------------------------------------------------------


def perfect_matchings(items: Sequence) -> Iterator[List[Tuple]]:
    """
    Yields all perfect matchings of the given items, each as a list of
    pairs (first item of every pair is the smallest remaining one).
    """
    items = list(items)
    if not items:
        yield []
        return
    first = items.pop(0)
    for i, partner in enumerate(items):
        for rest in perfect_matchings(items[:i] + items[i + 1:]):
            yield [(first, partner)] + rest


def matching_sign(matching: Sequence[Tuple[int, int]]) -> int:
    """Sign of the permutation (i1, j1, i2, j2, ...) of a matching."""
    return permutation_sign([x for pair in matching for x in pair])


def pfaffian(M: SkewLinearMatrix) -> MultiForm:
    """Pf(M) as a cubic form, summed over the 15 perfect matchings of six indices."""
    field = M.field
    total = MultiForm.zero(field, NVARS, 3)
    for matching in perfect_matchings(range(SIZE)):
        term = MultiForm.constant(field, NVARS, matching_sign(matching))
        for i, j in matching:
            term = term * M.entries[i][j]
        total = total + term
    return total


def numeric_pfaffian(matrix) -> object:
    """Pfaffian of a numeric skew matrix of even size."""
    if not isinstance(matrix, ExactMatrix):
        matrix = ExactMatrix(QQ, matrix)
    n = matrix.rows
    if n % 2:
        return matrix.field.zero
    total = matrix.field.zero
    for matching in perfect_matchings(range(n)):
        term = matrix.field.one * matching_sign(matching)
        for i, j in matching:
            term = term * matrix[i, j]
        total = total + term
    return total


def pfaffian_threefold(M: SkewLinearMatrix) -> CubicThreefold:
    return CubicThreefold(pfaffian(M))


def restrict_to_hyperplane(Y: CubicFourfold, h) -> CubicThreefold:
    """
    Restrict Y to the hyperplane {h = 0} identified with P^4.

    The last variable x_k with h_k != 0 is eliminated; the other five keep
    their order as y0..y4.

    Args:
        Y: The cubic fourfold
        h: Six coefficients of the linear form (or a linear MultiForm)

    Returns:
        CubicThreefold of F restricted to the hyperplane

    Raises:
        GeometryError: If h is zero
    """
    field = Y.field
    coeffs = h.linear_coefficients() if isinstance(h, MultiForm) else [field(c) for c in h]
    if len(coeffs) != 6:
        raise ValueError("a hyperplane in P^5 needs six coefficients")
    nonzero = [i for i, c in enumerate(coeffs) if c != 0]
    if not nonzero:
        raise GeometryError("hyperplane form is zero")
    k = nonzero[-1]
    kept = [i for i in range(6) if i != k]
    images: List[MultiForm] = [None] * 6
    for pos, i in enumerate(kept):
        images[i] = MultiForm.variable(field, NVARS, pos)
    images[k] = MultiForm.linear(field, [-coeffs[i] / coeffs[k] for i in kept])
    return CubicThreefold(Y.form.substitute(images))


# ---------------------------------------------------------------------------
# Pointwise checks
# ---------------------------------------------------------------------------


def _check_on_threefold(M: SkewLinearMatrix, point: Sequence, X: Optional[CubicThreefold] = None):
    X = pfaffian_threefold(M) if X is None else X
    if not X.contains(point):
        raise PointOffThreefoldError(f"point {tuple(format_scalar(x) for x in point)} is not on X")


def rank_profile(M: SkewLinearMatrix, X: Optional[CubicThreefold], points: Sequence[Sequence]) -> List[int]:
    """
    Rank of M(x) at each point of X.

    Raises:
        PointOffThreefoldError: If a point is not on X
    """
    X = pfaffian_threefold(M) if X is None else X
    ranks = []
    for point in points:
        _check_on_threefold(M, point, X)
        ranks.append(M.at(point).rank())
    return ranks


def kernel_at(M: SkewLinearMatrix, point: Sequence) -> List[Tuple]:
    """
    The 2-dimensional kernel of the rank-4 map M(x).

    Raises:
        PointOffThreefoldError: If x is not on X
        NonLocallyFreePointError: If rank M(x) != 4
    """
    _check_on_threefold(M, point)
    basis = M.at(point).kernel_basis()
    if len(basis) != 2:
        raise NonLocallyFreePointError(f"rank of M(x) is {SIZE - len(basis)}, expected 4")
    return basis


def zero_locus_member(M: SkewLinearMatrix, s: Sequence, point: Sequence) -> bool:
    """
    True iff the section of E(1) represented by s vanishes at x,
    i.e. s lies in the image of M(x).

    Raises:
        PointOffThreefoldError: If x is not on X
        NonLocallyFreePointError: If rank M(x) != 4
    """
    _check_on_threefold(M, point)
    value = M.at(point)
    rank = value.rank()
    if rank != 4:
        raise NonLocallyFreePointError(f"rank of M(x) is {rank}, expected 4")
    return value.with_column([M.field(c) for c in s]).rank() == 4


def projective_points(field: PrimeField, nvars: int = NVARS) -> Iterator[Tuple]:
    """Normalized points of P^(nvars-1)(F_p): first nonzero coordinate is 1."""
    elements = field.elements()
    for lead in range(nvars):
        for tail in itertools.product(elements, repeat=nvars - lead - 1):
            yield (field.zero,) * lead + (field.one,) + tail


def points_on_threefold_mod_p(X: CubicThreefold, p: Optional[int] = None, limit: Optional[int] = None) -> List[Tuple]:
    """
    F_p-points of X in lexicographic order of normalized coordinates.

    Args:
        X: Threefold over QQ (reduced mod p) or over a prime field
        p: Prime, required when X is defined over QQ
        limit: Stop after this many points
    """
    if p is not None:
        X = X.change_field(PrimeField(p))
    elif not X.field.characteristic:
        raise ValueError("a prime is needed to enumerate points of a rational threefold")
    points = []
    for point in projective_points(X.field):
        if X.contains(point):
            points.append(point)
            if limit is not None and len(points) >= limit:
                break
    return points


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------


def _draw_matrix(rng: np.random.Generator, coeff_bound: int, field) -> SkewLinearMatrix:
    upper = {}
    for i, j in itertools.combinations(range(SIZE), 2):
        upper[(i, j)] = [int(x) for x in rng.integers(-coeff_bound, coeff_bound + 1, size=NVARS)]
    return SkewLinearMatrix.from_upper(field, upper)


def random_skew_linear_matrix(seed: int, coeff_bound: int = DEFAULT_MATRIX_BOUND, field=QQ) -> SkewLinearMatrix:
    return _draw_matrix(np.random.default_rng(seed), coeff_bound, field)


def generic_skew_linear_matrix(
    seed: int,
    coeff_bound: int = DEFAULT_MATRIX_BOUND,
    probe_prime: int = DEFAULT_PROBE_PRIME,
    probes: int = 10,
) -> SkewLinearMatrix:
    """
    A random skew linear matrix with Pf != 0 and rank M(x) = 4 at the
    first F_p-points of X.

    Raises:
        DegenerateRepresentationError: If no draw passes within the attempt limit
    """
    rng = np.random.default_rng(seed)
    fp = PrimeField(probe_prime)
    for _ in range(MAX_GENERIC_ATTEMPTS):
        M = _draw_matrix(rng, coeff_bound, QQ)
        if pfaffian(M).is_zero():
            continue
        reduced = M.change_field(fp)
        X = pfaffian_threefold(reduced)
        if X.form.is_zero():
            continue
        points = points_on_threefold_mod_p(X, limit=probes)
        if points and all(r == 4 for r in rank_profile(reduced, X, points)):
            return M
    raise DegenerateRepresentationError(f"no generic matrix found in {MAX_GENERIC_ATTEMPTS} draws")


# ---------------------------------------------------------------------------
# Cohomology of E(1 + d)
# ---------------------------------------------------------------------------


def polynomial_binomial4(n: int) -> int:
    """binom(n + 4, 4) as a polynomial in n, i.e. chi(O_{P^4}(n))."""
    return (n + 1) * (n + 2) * (n + 3) * (n + 4) // 24


def expected_euler_characteristic(d: int) -> int:
    return SIZE * polynomial_binomial4(d) - SIZE * polynomial_binomial4(d - 1)


def _cokernel_and_kernel(M: SkewLinearMatrix, e: int) -> Tuple[int, int]:
    """(dim coker, dim ker) of S_{e-1}^6 -> S_e^6."""
    matrix = M.graded_piece(e)
    rank = matrix.rank()
    return matrix.rows - rank, matrix.cols - rank


def graded_cohomology_table(M: SkewLinearMatrix, d_range: Tuple[int, int] = DEFAULT_TWISTS) -> pd.DataFrame:
    """
    h^i(E(1 + d)) for d in an inclusive range.

    h0 is the cokernel of M on S_{d-1}^6 -> S_d^6; h3 and h4 are the
    cokernel and kernel of the Serre-dual map M^T on S_{-d-5}^6 -> S_{-d-4}^6;
    h1 = h2 = 0.

    Raises:
        DegenerateRepresentationError: If Pf(M) = 0
    """
    if pfaffian(M).is_zero():
        raise DegenerateRepresentationError("Pf(M) vanishes identically")
    low, high = d_range
    dual = M.transpose()
    records = []
    for d in range(low, high + 1):
        h0, _ = _cokernel_and_kernel(M, d)
        h3, h4 = _cokernel_and_kernel(dual, -d - 4)
        euler = h0 - h3 + h4
        expected = expected_euler_characteristic(d)
        records.append(
            {
                "d": d,
                "twist": 1 + d,
                "h0": h0,
                "h1": 0,
                "h2": 0,
                "h3": h3,
                "h4": h4,
                "euler": euler,
                "expected_euler": expected,
                "euler_ok": euler == expected,
            }
        )
    return pd.DataFrame.from_records(records).set_index("d")


def vanishing_band_holds(table: pd.DataFrame) -> bool:
    """All h^i vanish on E, E(-1), E(-2) (rows d = -1, -2, -3) present in the table."""
    band = table.loc[table.index.isin([-1, -2, -3]), ["h0", "h1", "h2", "h3", "h4"]]
    return bool((band == 0).all().all())


# ---------------------------------------------------------------------------
# JSON codecs
# ---------------------------------------------------------------------------


def matrix_to_json(M: SkewLinearMatrix) -> dict:
    return {"entries": M.to_json()}


def skew_matrix_from_json(doc, field=QQ) -> SkewLinearMatrix:
    grid = doc["entries"] if isinstance(doc, dict) else doc
    return SkewLinearMatrix.from_coefficients(field, [[[str(c) for c in cell] for cell in row] for row in grid])


def table_to_json(table: pd.DataFrame) -> List[dict]:
    rows = []
    for d, row in table.iterrows():
        rows.append({"d": int(d), **{k: (bool(v) if k == "euler_ok" else int(v)) for k, v in row.items()}})
    return rows
