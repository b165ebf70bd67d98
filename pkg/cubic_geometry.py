"""
Cubic Geometry Module
=====================
Cubic fourfolds Y = {F = 0} in P^5, lines on them, and the Jacobian map
restricted to a line:

    N_{l/P^5} = O(1)^4  --(q_1..q_4)-->  N_{Y/P^5}|_l = O(3)

whose kernel is the normal bundle N_{l/Y}. Also contains the test-instance
generators (cubics through a prescribed line, random lines) and the mod-p
line enumeration harness.

Smoothness is only ever checked along the given line.
"""

from __future__ import annotations

import dataclasses
import itertools
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from exact_algebra import (
    QQ,
    BinaryForm,
    DegenerateLineError,
    ExactMatrix,
    LineNotOnCubicError,
    MultiForm,
    PrimeField,
    format_scalar,
    monomial_exponents,
    poly_gcd_all,
    restrict_to_line,
)

# Worked-example line l0 on the Fermat cubic
FERMAT_LINE_ROWS = ((1, -1, 0, 0, 0, 0), (0, 0, 1, -1, 0, 0))
# The line x2 = ... = x5 = 0
COORDINATE_LINE_ROWS = ((1, 0, 0, 0, 0, 0), (0, 1, 0, 0, 0, 0))

DEFAULT_COEFF_BOUND = 5
WORKERS_ENV = "FANO_WORKERS"


def worker_count(workers: Optional[int] = None) -> int:
    """Worker count from the argument or the FANO_WORKERS environment variable."""
    if workers is not None:
        return max(int(workers), 1)
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(int(raw), 1)
    except ValueError:
        warnings.warn(f"{WORKERS_ENV}={raw!r} is not an integer; using 1 worker")
        return 1


# ---------------------------------------------------------------------------
# Cubic fourfolds
# ---------------------------------------------------------------------------


@dataclasses.dataclass(frozen=True)
class CubicFourfold:
    """A cubic form F in x0..x5 together with its six partial derivatives."""

    form: MultiForm
    gradient: Tuple[MultiForm, ...] = dataclasses.field(default=(), compare=False)

    def __post_init__(self):
        if self.form.nvars != 6 or self.form.degree != 3:
            raise ValueError("a cubic fourfold needs a degree 3 form in 6 variables")
        object.__setattr__(self, "gradient", tuple(self.form.partial_derivative(i) for i in range(6)))

    @property
    def field(self):
        return self.form.field

    @classmethod
    def from_terms(cls, terms: Dict[Tuple[int, ...], object], field=QQ) -> "CubicFourfold":
        return cls(MultiForm(field, 6, 3, terms))

    def euler_identity_holds(self) -> bool:
        """Check sum x_i * dF/dx_i == 3F exactly."""
        total = MultiForm.zero(self.field, 6, 3)
        for i, partial in enumerate(self.gradient):
            total = total + MultiForm.variable(self.field, 6, i) * partial
        return total == self.form.scale(3)

    def change_field(self, field) -> "CubicFourfold":
        return CubicFourfold(self.form.change_field(field))

    def scale(self, factor) -> "CubicFourfold":
        return CubicFourfold(self.form.scale(factor))


def fermat_cubic(field=QQ) -> CubicFourfold:
    """x0^3 + ... + x5^3."""
    terms = {tuple(3 if k == i else 0 for k in range(6)): 1 for i in range(6)}
    return CubicFourfold.from_terms(terms, field)


# ---------------------------------------------------------------------------
# Lines
# ---------------------------------------------------------------------------


@dataclasses.dataclass(frozen=True)
class Line:
    """
    A line in P^5.

    ``span`` is the unique reduced row-echelon 2x6 matrix of the line and
    ``frame`` holds the four standard basis vectors at the non-pivot columns,
    so that [span; frame] is invertible.
    """

    span: ExactMatrix
    frame: ExactMatrix

    def __post_init__(self):
        if (self.span.rows, self.span.cols) != (2, 6) or (self.frame.rows, self.frame.cols) != (4, 6):
            raise DegenerateLineError("a line needs a 2x6 span and a 4x6 frame")
        if not self.basis_matrix().is_invertible():
            raise DegenerateLineError("span and frame do not form a basis")

    @classmethod
    def from_span(cls, rows, field=QQ) -> "Line":
        """
        Canonicalize any rank-2 parameterization of a line.

        Raises:
            DegenerateLineError: If the rows do not have rank 2
        """
        matrix = rows if isinstance(rows, ExactMatrix) else ExactMatrix(field, rows)
        if (matrix.rows, matrix.cols) != (2, 6):
            raise DegenerateLineError(f"expected a 2x6 matrix, got {matrix.rows}x{matrix.cols}")
        reduced, pivots = matrix.rref()
        if len(pivots) != 2:
            raise DegenerateLineError("parameterization matrix has rank < 2")
        f = matrix.field
        frame = [[f.one if j == c else f.zero for j in range(6)] for c in range(6) if c not in pivots]
        return cls(reduced, ExactMatrix(f, frame))

    @property
    def field(self):
        return self.span.field

    @property
    def pivots(self) -> Tuple[int, int]:
        return tuple(next(j for j in range(6) if self.span[i, j] != 0) for i in range(2))

    def basis_matrix(self) -> ExactMatrix:
        return self.span.stack(self.frame)

    def point(self, t0, t1) -> Tuple:
        return tuple(t0 * a + t1 * b for a, b in zip(self.span.row(0), self.span.row(1)))

    def change_field(self, field) -> "Line":
        return Line.from_span(ExactMatrix(field, self.span.tolist()))

    def sort_key(self) -> Tuple:
        return (self.pivots, tuple(getattr(x, "value", x) for x in itertools.chain(*self.span.entries)))


def random_line(seed: int, coeff_bound: int = DEFAULT_COEFF_BOUND, field=QQ) -> Line:
    """A pseudo-random line with small integer spanning vectors."""
    rng = np.random.default_rng(seed)
    while True:
        rows = rng.integers(-coeff_bound, coeff_bound + 1, size=(2, 6))
        matrix = ExactMatrix(field, [[int(x) for x in r] for r in rows])
        if matrix.rank() == 2:
            return Line.from_span(matrix)


def contains_line(Y: CubicFourfold, A) -> bool:
    """
    Check whether the line spanned by A lies on Y.

    Args:
        Y: The cubic fourfold
        A: A Line, a 2x6 ExactMatrix or nested rows

    Returns:
        True iff F restricted to the line is the zero binary cubic

    Raises:
        DegenerateLineError: If A does not have rank 2
    """
    span = A.span if isinstance(A, Line) else A
    return restrict_to_line(Y.form, span).is_zero()


# ---------------------------------------------------------------------------
# Jacobian restricted to a line
# ---------------------------------------------------------------------------


@dataclasses.dataclass(frozen=True)
class JacobianRestriction:
    """The four quadrics q_i(t0, t1) = grad F(t0*A0 + t1*A1) . B_i."""

    quadrics: Tuple[BinaryForm, ...]

    def __post_init__(self):
        if len(self.quadrics) != 4:
            raise ValueError("a Jacobian restriction has four quadrics")
        for q in self.quadrics:
            if q.degree != 2:
                raise ValueError("Jacobian quadrics must have degree 2")

    @property
    def field(self):
        return self.quadrics[0].field

    def pairing(self, components: Sequence):
        """sum n_i * q_i for binary or Laurent forms n_i."""
        total = None
        for n, q in zip(components, self.quadrics):
            term = n * q
            total = term if total is None else total + term
        return total

    def first_nonzero_index(self) -> int:
        return next(k for k, q in enumerate(self.quadrics) if not q.is_zero())

    def is_smooth(self) -> bool:
        return quadrics_without_common_zero(self.quadrics)

    def reparameterize(self, g: Sequence[Sequence]) -> "JacobianRestriction":
        """Pull back along (t0, t1) -> (t0, t1) * g for g in GL_2."""
        a, b = _reparameterization_forms(self.field, g)
        return JacobianRestriction(tuple(q.compose_linear(a, b) for q in self.quadrics))

    def scale(self, factor) -> "JacobianRestriction":
        return JacobianRestriction(tuple(q.scale(factor) for q in self.quadrics))


def _reparameterization_forms(field, g: Sequence[Sequence]) -> Tuple[BinaryForm, BinaryForm]:
    matrix = ExactMatrix(field, g)
    if (matrix.rows, matrix.cols) != (2, 2) or matrix.determinant() == 0:
        raise ValueError("reparameterization needs an invertible 2x2 matrix")
    a = BinaryForm.linear(field, matrix[0, 0], matrix[1, 0])
    b = BinaryForm.linear(field, matrix[0, 1], matrix[1, 1])
    return a, b


def quadrics_without_common_zero(forms: Sequence[BinaryForm]) -> bool:
    """True iff the binary forms have no common zero on P^1 (checked on both charts)."""
    field = forms[0].field
    for chart in (0, 1):
        if len(poly_gcd_all([f.dehomogenize(chart) for f in forms], field)) != 1:
            return False
    return True


def jacobian_on_line(Y: CubicFourfold, line: Line, frame=None) -> JacobianRestriction:
    """
    Restrict the Jacobian of F to the line and pair it with a complement frame.

    Args:
        Y: The cubic fourfold
        line: A line on Y
        frame: Optional 4x6 complement (defaults to the line's standard frame)

    Returns:
        JacobianRestriction with q_i = grad F(t0*A0 + t1*A1) . B_i

    Raises:
        LineNotOnCubicError: If the line is not on Y
        DegenerateLineError: If the frame does not complement the span
    """
    if not contains_line(Y, line):
        raise LineNotOnCubicError("line is not contained in the cubic")
    if frame is None:
        frame = line.frame
    elif not isinstance(frame, ExactMatrix):
        frame = ExactMatrix(Y.field, frame)
    if (frame.rows, frame.cols) != (4, 6) or not line.span.stack(frame).is_invertible():
        raise DegenerateLineError("frame does not complement the line")

    restricted = [restrict_to_line(partial, line.span) for partial in Y.gradient]
    quadrics = []
    for i in range(4):
        q = BinaryForm.zero(Y.field, 2)
        for j in range(6):
            if frame[i, j] != 0:
                q = q + restricted[j].scale(frame[i, j])
        quadrics.append(q)
    return JacobianRestriction(tuple(quadrics))


def smooth_along_line(Y: CubicFourfold, line: Line) -> bool:
    """True iff Y is smooth at every point of the line."""
    return jacobian_on_line(Y, line).is_smooth()


# ---------------------------------------------------------------------------
# Generators and search
# ---------------------------------------------------------------------------


def cubic_through_line(line: Line, seed: int, coeff_bound: int = DEFAULT_COEFF_BOUND) -> CubicFourfold:
    """
    Pseudo-random cubic containing the given line.

    In coordinates y = x * P^-1 with P = [span; frame] the line is
    y2 = ... = y5 = 0. Every cubic monomial in y gets a random coefficient in
    [-coeff_bound, coeff_bound] except the four pure (y0, y1) monomials, which
    are zero; the result is transported back to x.

    Args:
        line: Line the cubic must contain
        seed: Seed for numpy.random.default_rng
        coeff_bound: Bound on the absolute value of the coefficients

    Returns:
        CubicFourfold over the line's field
    """
    field = line.field
    rng = np.random.default_rng(seed)
    terms = {}
    for exp in monomial_exponents(6, 3):
        value = int(rng.integers(-coeff_bound, coeff_bound + 1))
        if any(exp[2:]):
            terms[exp] = value
    in_line_coordinates = MultiForm(field, 6, 3, terms)

    inverse = line.basis_matrix().inverse()
    if inverse == ExactMatrix.identity(field, 6):
        return CubicFourfold(in_line_coordinates)
    images = [MultiForm.linear(field, inverse.column(j)) for j in range(6)]
    return CubicFourfold(in_line_coordinates.substitute(images))


def _echelon_candidates(p: int, pivots: Tuple[int, int]):
    c0, c1 = pivots
    free0 = [j for j in range(c0 + 1, 6) if j != c1]
    free1 = list(range(c1 + 1, 6))
    for values in itertools.product(range(p), repeat=len(free0) + len(free1)):
        row0 = [0] * 6
        row1 = [0] * 6
        row0[c0] = 1
        row1[c1] = 1
        for j, v in zip(free0, values[: len(free0)]):
            row0[j] = v
        for j, v in zip(free1, values[len(free0):]):
            row1[j] = v
        yield row0, row1


def _lines_for_pivots(args) -> List[Tuple[Tuple[int, ...], Tuple[int, ...]]]:
    form, p, pivots, limit = args
    found = []
    for row0, row1 in _echelon_candidates(p, pivots):
        if restrict_to_line(form, [row0, row1]).is_zero():
            found.append((tuple(row0), tuple(row1)))
            if limit is not None and len(found) >= limit:
                break
    return found


def enumerate_lines_mod_p(Y: CubicFourfold, p: int, limit: Optional[int] = None, workers: Optional[int] = None) -> List[Line]:
    """
    Enumerate lines on Y over F_p by running through all reduced row-echelon
    2x6 matrices.

    Args:
        Y: Cubic fourfold (reduced mod p if given over QQ)
        p: Odd prime
        limit: Maximal number of lines returned (None for all)
        workers: Worker processes (defaults to FANO_WORKERS)

    Returns:
        Lines sorted by canonical form
    """
    field = PrimeField(p)
    form = Y.form if Y.field == field else Y.form.change_field(field)
    pivot_pairs = list(itertools.combinations(range(6), 2))
    jobs = [(form, p, pivots, limit) for pivots in pivot_pairs]

    n_workers = worker_count(workers)
    if n_workers > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            chunks = list(pool.map(_lines_for_pivots, jobs))
    else:
        chunks = []
        total = 0
        for job in jobs:
            if limit is not None and total >= limit:
                break
            chunk = _lines_for_pivots((job[0], job[1], job[2], None if limit is None else limit - total))
            chunks.append(chunk)
            total += len(chunk)

    lines = [Line.from_span(ExactMatrix(field, rows)) for chunk in chunks for rows in chunk]
    lines.sort(key=Line.sort_key)
    return lines if limit is None else lines[:limit]


# ---------------------------------------------------------------------------
# JSON codecs
# ---------------------------------------------------------------------------


def cubic_to_json(Y: CubicFourfold) -> dict:
    return {
        "nvars": 6,
        "degree": 3,
        "terms": [{"exp": list(exp), "coeff": format_scalar(c)} for exp, c in Y.form.terms],
    }


def cubic_from_json(doc: dict, field=QQ) -> CubicFourfold:
    if doc.get("nvars", 6) != 6 or doc.get("degree", 3) != 3:
        raise ValueError("cubic JSON must have nvars 6 and degree 3")
    terms = {}
    for term in doc["terms"]:
        exp = tuple(int(e) for e in term["exp"])
        terms[exp] = terms.get(exp, field.zero) + field(str(term["coeff"]))
    return CubicFourfold(MultiForm(field, 6, 3, terms))


def line_to_json(line: Line) -> dict:
    return {"span": [[format_scalar(x) for x in line.span.row(i)] for i in range(2)]}


def line_from_json(doc: dict, field=QQ) -> Line:
    return Line.from_span([[field(str(x)) for x in row] for row in doc["span"]], field)
