"""
Fano Tangent Module
===================
Tangent spaces of the Fano scheme F(Y) at a line and the splitting of the
normal bundle N = N_{l/Y}.

Everything here is a kernel of an explicit coefficient matrix: a section of
N(j) is a 4-tuple (n_1..n_4) of binary forms of degree j+1 with
sum n_i * q_i == 0, so h0(N(j)) is the dimension of that kernel.

On a line along which Y is smooth N is a subbundle of O(1)^4 of degree 1,
so it splits as either
    Type1:  O + O + O(1)        (h0(N(-1)) = 1)
    Type2:  O(-1) + O(1) + O(1) (h0(N(-1)) = 2)
"""

from __future__ import annotations

import dataclasses
from enum import Enum
from typing import Dict, List, Sequence, Tuple

from cubic_geometry import (
    CubicFourfold,
    JacobianRestriction,
    Line,
    _reparameterization_forms,
    jacobian_on_line,
)
from exact_algebra import (
    BinaryForm,
    ExactMatrix,
    GradingError,
    InconsistencyError,
    SingularAlongLineError,
    SplittingInconsistencyError,
    format_scalar,
)

TWIST_RANGE = range(-2, 3)


class SplittingKind(str, Enum):
    TYPE1 = "Type1"
    TYPE2 = "Type2"


@dataclasses.dataclass(frozen=True)
class TangentVector:
    """
    A 4-tuple of binary forms of a common degree, read in the line's frame.

    Degree-1 tuples in the kernel of the Jacobian pairing are tangent
    vectors, i.e. elements of H0(N); other degrees are sections of twists.
    """

    components: Tuple[BinaryForm, ...]

    def __post_init__(self):
        if len(self.components) != 4:
            raise ValueError("a normal section has four components")
        if len({c.degree for c in self.components}) != 1:
            raise GradingError("components must share one degree")

    @property
    def field(self):
        return self.components[0].field

    @property
    def degree(self) -> int:
        return self.components[0].degree

    @classmethod
    def from_vector(cls, field, degree: int, flat: Sequence) -> "TangentVector":
        width = degree + 1
        return cls(tuple(BinaryForm(field, degree, tuple(flat[i * width:(i + 1) * width])) for i in range(4)))

    @classmethod
    def constant(cls, field, values: Sequence) -> "TangentVector":
        return cls.from_vector(field, 0, values)

    def coefficient_vector(self) -> List:
        return [c for form in self.components for c in form.coeffs]

    def __add__(self, other: "TangentVector") -> "TangentVector":
        return TangentVector(tuple(a + b for a, b in zip(self.components, other.components)))

    def __sub__(self, other: "TangentVector") -> "TangentVector":
        return TangentVector(tuple(a - b for a, b in zip(self.components, other.components)))

    def scale(self, c) -> "TangentVector":
        return TangentVector(tuple(a.scale(c) for a in self.components))

    def multiply(self, form: BinaryForm) -> "TangentVector":
        """Multiply every component by a binary form (e.g. t0 * g)."""
        return TangentVector(tuple(a * form for a in self.components))

    def in_kernel(self, jr: JacobianRestriction) -> bool:
        return jr.pairing(self.components).is_zero()

    def reparameterize(self, g: Sequence[Sequence]) -> "TangentVector":
        a, b = _reparameterization_forms(self.field, g)
        return TangentVector(tuple(c.compose_linear(a, b) for c in self.components))

    def to_json(self) -> List[List[str]]:
        return [[format_scalar(c) for c in form.coeffs] for form in self.components]


def t0(field) -> BinaryForm:
    return BinaryForm.monomial(field, 1, 0)


def t1(field) -> BinaryForm:
    return BinaryForm.monomial(field, 1, 1)


@dataclasses.dataclass(frozen=True)
class SplittingData:
    """
    Explicit splitting of N.

    Type1: ``generators = (g,)`` spans h0(N(-1)) (the O(1) summand) and
    ``complements = (e1, e2)`` are degree-0 sections of N with
    H0(N) = span{e1, e2} + span{t0*g, t1*g}.

    Type2: ``generators = (g1, g2)`` span h0(N(-1)) (the two O(1) summands)
    and ``complements = (e1,)`` is a section of N(1) generating the O(-1)
    summand.
    """

    kind: SplittingKind
    generators: Tuple[TangentVector, ...]
    complements: Tuple[TangentVector, ...]
    h0_table: Dict[int, int]

    @property
    def summands(self) -> Tuple[TangentVector, TangentVector, TangentVector]:
        """(e1, e2, e3) in the order O, O, O(1) or O(-1), O(1), O(1)."""
        if self.kind is SplittingKind.TYPE1:
            return (self.complements[0], self.complements[1], self.generators[0])
        return (self.complements[0], self.generators[0], self.generators[1])

    def coordinate_basis(self) -> Tuple[TangentVector, ...]:
        """
        Basis of H0(N) adapted to the splitting.

        Type1: e1, e2, t0*g, t1*g. Type2: t0*g1, t1*g1, t0*g2, t1*g2.
        """
        f = self.generators[0].field
        if self.kind is SplittingKind.TYPE1:
            g = self.generators[0]
            return (self.complements[0], self.complements[1], g.multiply(t0(f)), g.multiply(t1(f)))
        g1, g2 = self.generators
        return (g1.multiply(t0(f)), g1.multiply(t1(f)), g2.multiply(t0(f)), g2.multiply(t1(f)))

    def lagrangian_pairs(self) -> Tuple[Tuple[TangentVector, TangentVector], ...]:
        """The two planes of H0(N) on which the symplectic form must vanish."""
        b = self.coordinate_basis()
        return ((b[0], b[1]), (b[2], b[3]))


# ---------------------------------------------------------------------------
# Kernels of the Jacobian pairing
# ---------------------------------------------------------------------------


def twist_matrix(jr: JacobianRestriction, j: int) -> ExactMatrix:
    """
    Matrix of (n_1..n_4) -> sum n_i * q_i from degree j+1 forms to degree j+3 forms.

    Column i*(j+2) + k is the monomial t0^(j+1-k) t1^k in slot i.
    """
    field = jr.field
    width = j + 2
    nrows = j + 4
    if width <= 0:
        return ExactMatrix.zeros(field, max(nrows, 0), 0)
    rows = [[field.zero] * (4 * width) for _ in range(nrows)]
    for i, q in enumerate(jr.quadrics):
        for k in range(width):
            for m, coeff in enumerate(q.coeffs):
                rows[k + m][i * width + k] = coeff
    return ExactMatrix(field, rows, cols=4 * width)


def section_basis(jr: JacobianRestriction, j: int) -> List[TangentVector]:
    """Basis of H0(N(j)) as TangentVectors of degree j+1."""
    if j + 1 < 0:
        return []
    return [TangentVector.from_vector(jr.field, j + 1, v) for v in twist_matrix(jr, j).kernel_basis()]


def section_dimension(jr: JacobianRestriction, j: int) -> int:
    if j + 1 < 0:
        return 0
    matrix = twist_matrix(jr, j)
    return matrix.cols - matrix.rank()


def h0_table(jr: JacobianRestriction, twists=TWIST_RANGE) -> Dict[int, int]:
    return {j: section_dimension(jr, j) for j in twists}


def smooth_restriction(Y: CubicFourfold, line: Line, frame=None) -> JacobianRestriction:
    """
    Jacobian restriction after checking that Y is smooth along the line.

    Raises:
        SingularAlongLineError: If the four quadrics share a zero
    """
    jr = jacobian_on_line(Y, line, frame)
    if not jr.is_smooth():
        raise SingularAlongLineError("cubic is singular along the line")
    return jr


def tangent_space_basis(Y: CubicFourfold, line: Line, frame=None) -> List[TangentVector]:
    """
    Basis of the Zariski tangent space H0(N_{l/Y}) of F(Y) at the line.

    Args:
        Y: The cubic fourfold
        line: A line on Y along which Y is smooth
        frame: Optional complement frame

    Returns:
        Kernel basis of the 8 -> 4 map (n_i linear) -> sum n_i * q_i
    """
    return section_basis(smooth_restriction(Y, line, frame), 0)


def twisted_section_dim(Y: CubicFourfold, line: Line, j: int) -> int:
    """h0(N_{l/Y}(j))."""
    return section_dimension(jacobian_on_line(Y, line), j)


def classify_splitting(jr: JacobianRestriction) -> SplittingKind:
    h = section_dimension(jr, -1)
    if h == 1:
        return SplittingKind.TYPE1
    if h == 2:
        return SplittingKind.TYPE2
    raise SplittingInconsistencyError(f"h0(N(-1)) = {h}, expected 1 or 2")


def splitting_type(Y: CubicFourfold, line: Line, frame=None) -> SplittingKind:
    """Type1 iff h0(N(-1)) = 1, Type2 iff h0(N(-1)) = 2."""
    return classify_splitting(smooth_restriction(Y, line, frame))


def _extend_to_basis(start: List[TangentVector], candidates: List[TangentVector], target: int) -> List[TangentVector]:
    """Greedily add the first candidates that raise the rank of the span."""
    chosen: List[TangentVector] = []
    if not candidates:
        return chosen
    field = candidates[0].field
    rows = [v.coefficient_vector() for v in start]
    rank = ExactMatrix(field, rows, cols=len(candidates[0].coefficient_vector())).rank() if rows else 0
    for v in candidates:
        if rank == target:
            break
        trial = rows + [v.coefficient_vector()]
        trial_rank = ExactMatrix(field, trial).rank()
        if trial_rank > rank:
            rows, rank = trial, trial_rank
            chosen.append(v)
    if rank != target:
        raise InconsistencyError(f"could not extend to a basis of dimension {target}")
    return chosen


def splitting_from_quadrics(jr: JacobianRestriction) -> SplittingData:
    """
    Minimal generators of the graded section module, lowest twist first.

    Args:
        jr: Jacobian restriction of a line along which Y is smooth

    Returns:
        SplittingData with generators, complements and h0 table
    """
    kind = classify_splitting(jr)
    table = h0_table(jr)
    field = jr.field
    generators = tuple(section_basis(jr, -1))
    if kind is SplittingKind.TYPE1:
        g = generators[0]
        start = [g.multiply(t0(field)), g.multiply(t1(field))]
        complements = _extend_to_basis(start, section_basis(jr, 0), 4)
    else:
        quadratic = [BinaryForm.monomial(field, 2, k) for k in range(3)]
        start = [g.multiply(m) for g in generators for m in quadratic]
        complements = _extend_to_basis(start, section_basis(jr, 1), 7)
    return SplittingData(kind, generators, tuple(complements), table)


def splitting_basis(Y: CubicFourfold, line: Line, frame=None) -> SplittingData:
    """Explicit splitting data of N_{l/Y} for a line along which Y is smooth."""
    return splitting_from_quadrics(smooth_restriction(Y, line, frame))


def tangent_coordinates(v: TangentVector, sd: SplittingData) -> Tuple:
    """
    Coordinates (a, b, c, d) of a tangent vector in the splitting basis:

    Type1: v = a*e1 + b*e2 + (c*t0 + d*t1)*g
    Type2: v = (a*t0 + b*t1)*g1 + (c*t0 + d*t1)*g2
    """
    basis = sd.coordinate_basis()
    columns = [b.coefficient_vector() for b in basis]
    matrix = ExactMatrix(v.field, [list(r) for r in zip(*columns)])
    solution = matrix.solve(v.coefficient_vector())
    if solution is None:
        raise InconsistencyError("vector is not in the span of the splitting basis")
    return solution
