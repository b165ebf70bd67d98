"""
Cech Pairing Module
===================
The extension class of the normal bundle sequence twisted by O(-3),

    0 -> N(-3) -> O(-2)^4 --(q_1..q_4)--> O -> 0,

as an explicit two-chart Cech cocycle sigma, and the 2-form on the tangent
space of the Fano scheme

    alpha(v1, v2) = residue(sigma ^ v1 ^ v2).

Conventions: U0 = {t0 != 0} comes first, sigma = s0 - s1 and the residue is
the coefficient of t0^-1 t1^-1. These fix the global sign of alpha.
"""

from __future__ import annotations

import dataclasses
import warnings
from typing import Dict, List, Optional, Sequence, Tuple

from cubic_geometry import CubicFourfold, JacobianRestriction, Line
from exact_algebra import (
    BinaryForm,
    ExactMatrix,
    GradingError,
    InconsistencyError,
    LaurentBivariate,
    NonGenericWarning,
    PositiveCharacteristicWarning,
    SplittingInconsistencyError,
    format_scalar,
    h1_coordinates,
    leibniz_determinant,
    residue,
    unit_combination,
)
from fano_tangent import (
    SplittingData,
    SplittingKind,
    TangentVector,
    section_basis,
    smooth_restriction,
    splitting_from_quadrics,
    tangent_coordinates,
)


def _as_laurent(x) -> LaurentBivariate:
    return x.to_laurent() if isinstance(x, BinaryForm) else x


@dataclasses.dataclass(frozen=True)
class CechCocycle:
    """
    A section of N(-3) over U0 n U1, kept with the two chart lifts of 1.

    ``overlap_section`` is s0 - s1; ``chart_lifts`` is (s0, s1) with s0
    regular on U0, s1 regular on U1 and phi(s0) = phi(s1) = 1.
    """

    overlap_section: Tuple[LaurentBivariate, ...]
    chart_lifts: Tuple[Tuple[LaurentBivariate, ...], Tuple[LaurentBivariate, ...]]

    @property
    def field(self):
        return self.overlap_section[0].field

    def pairing_vanishes(self, jr: JacobianRestriction) -> bool:
        return jr.pairing(self.overlap_section).is_zero()

    def lifts_are_regular(self) -> bool:
        s0, s1 = self.chart_lifts
        return all(x.regular_on_chart(0) for x in s0) and all(x.regular_on_chart(1) for x in s1)

    def scale(self, c) -> "CechCocycle":
        return CechCocycle(
            tuple(x.scale(c) for x in self.overlap_section),
            tuple(tuple(x.scale(c) for x in lift) for lift in self.chart_lifts),
        )

    def to_json(self) -> List[Dict[str, str]]:
        return [
            {f"{i},{j}": format_scalar(c) for (i, j), c in x.terms}
            for x in self.overlap_section
        ]


def _chart_lift(jr: JacobianRestriction, chart: int) -> Tuple[LaurentBivariate, ...]:
    """Solve sum c_i(u) q_i(u) = 1 on one chart and rehomogenize to degree -2."""
    field = jr.field
    cofactors = unit_combination([q.dehomogenize(chart) for q in jr.quadrics], field)
    lift = []
    for c in cofactors:
        if chart == 0:
            terms = {(-2 - m, m): coeff for m, coeff in enumerate(c)}
        else:
            terms = {(m, -2 - m): coeff for m, coeff in enumerate(c)}
        lift.append(LaurentBivariate(field, -2, terms))
    return tuple(lift)


def connecting_sigma_from_quadrics(jr: JacobianRestriction) -> CechCocycle:
    """
    The connecting class sigma = delta(1) for the quadrics of a smooth line.

    Raises:
        NoUnitError: If the quadrics share a zero (Y singular along the line)
    """
    s0 = _chart_lift(jr, 0)
    s1 = _chart_lift(jr, 1)
    return CechCocycle(tuple(a - b for a, b in zip(s0, s1)), (s0, s1))


def connecting_sigma(Y: CubicFourfold, line: Line, frame=None) -> CechCocycle:
    return connecting_sigma_from_quadrics(smooth_restriction(Y, line, frame))


# ---------------------------------------------------------------------------
# Components of sigma in a splitting
# ---------------------------------------------------------------------------


@dataclasses.dataclass(frozen=True)
class SigmaComponents:
    """
    sigma = f1*e1 + f2*e2 + f3*e3 in a splitting, with H^1 coordinates.

    ``raw`` holds the coordinates for the splitting as computed,
    ``adapted`` those after :func:`adapt_splitting`; ``splitting`` is the
    adapted splitting and ``laurent`` its Laurent components.
    """

    kind: SplittingKind
    raw: Tuple[Tuple, Tuple, Tuple]
    adapted: Tuple[Tuple, Tuple, Tuple]
    splitting: SplittingData
    laurent: Tuple[LaurentBivariate, LaurentBivariate, LaurentBivariate]

    @property
    def sigma1(self) -> Tuple:
        return self.adapted[0]

    @property
    def sigma2(self) -> Tuple:
        return self.adapted[1]

    @property
    def sigma3(self) -> Tuple:
        return self.adapted[2]

    def vanishing_components(self) -> Tuple[int, ...]:
        """1-based indices of the adapted components whose class is zero."""
        return tuple(i + 1 for i, coords in enumerate(self.adapted) if all(c == 0 for c in coords))

    def leading_rank(self) -> int:
        """
        Type1: rank of sigma1, sigma2 in H^1(O(-3)); Type2: rank of sigma1
        as a binary quadratic form.
        """
        field = self.laurent[0].field
        if self.kind is SplittingKind.TYPE1:
            return ExactMatrix(field, [list(self.sigma1), list(self.sigma2)]).rank()
        c31, c22, c13 = self.sigma1
        return ExactMatrix(field, [[c31, c22], [c22, c13]]).rank()

    def to_json(self) -> Dict[str, List[List[str]]]:
        return {
            "raw": [[format_scalar(c) for c in coords] for coords in self.raw],
            "adapted": [[format_scalar(c) for c in coords] for coords in self.adapted],
        }


def _solve_components(sigma: CechCocycle, sd: SplittingData, jr: JacobianRestriction) -> Tuple[LaurentBivariate, ...]:
    """Cramer's rule on the three rows other than the first nonzero quadric."""
    k = jr.first_nonzero_index()
    rows = [r for r in range(4) if r != k]
    frame = [tuple(_as_laurent(c) for c in e.components) for e in sd.summands]
    target = tuple(_as_laurent(c) for c in sigma.overlap_section)

    def minor(columns):
        zero_degree = sum(col[rows[0]].total_degree for col in columns)
        return leibniz_determinant([[col[r] for r in rows] for col in columns], LaurentBivariate.zero(sigma.field, zero_degree))

    denominator = minor(frame)
    if denominator.is_zero():
        raise InconsistencyError("splitting frame is singular on the overlap")
    components = []
    for i in range(3):
        columns = list(frame)
        columns[i] = target
        components.append(minor(columns).exact_divide(denominator))

    for r in range(4):
        total = LaurentBivariate.zero(sigma.field, target[r].total_degree)
        for f, col in zip(components, frame):
            total = total + f * col[r]
        if total != target[r]:
            raise InconsistencyError("splitting components do not reproduce sigma")
    return tuple(components)


def _linear(field, a, b) -> BinaryForm:
    return BinaryForm.linear(field, a, b)


def adapt_splitting(sigma: CechCocycle, sd: SplittingData, jr: JacobianRestriction) -> SplittingData:
    """
    Modify the non-canonical complements so sigma has no component on them.

    Type1: e_i -> e_i + lambda_i * g with linear lambda_i, killing [f3].
    Type2: e1 -> e1 + mu1 * g1 + mu2 * g2 with quadratic mu_i, killing
    [f2] and [f3].

    Raises:
        SplittingInconsistencyError: If the leading components vanish but
            the ones to be removed do not
    """
    field = jr.field
    f = _solve_components(sigma, sd, jr)
    if sd.kind is SplittingKind.TYPE1:
        target = residue(f[2])
        if target == 0:
            return sd
        e1, e2 = sd.complements
        g = sd.generators[0]
        # res(t0 * f) and res(t1 * f) for f1, f2
        options = [
            (0, _linear(field, 1, 0), f[0].coefficient(-2, -1)),
            (0, _linear(field, 0, 1), f[0].coefficient(-1, -2)),
            (1, _linear(field, 1, 0), f[1].coefficient(-2, -1)),
            (1, _linear(field, 0, 1), f[1].coefficient(-1, -2)),
        ]
        slot, form, pivot = next(((s, m, p) for s, m, p in options if p != 0), (None, None, None))
        if slot is None:
            raise SplittingInconsistencyError("sigma1 and sigma2 vanish but sigma3 does not")
        shift = g.multiply(form.scale(target / pivot))
        complements = (e1 + shift, e2) if slot == 0 else (e1, e2 + shift)
        return dataclasses.replace(sd, complements=complements)

    c31, c22, c13 = h1_coordinates(f[0])
    monomials = [BinaryForm.monomial(field, 2, k) for k in range(3)]
    choice = next(((m, c) for m, c in zip(monomials, (c31, c22, c13)) if c != 0), None)
    targets = (residue(f[1]), residue(f[2]))
    if all(t == 0 for t in targets):
        return sd
    if choice is None:
        raise SplittingInconsistencyError("sigma1 vanishes but sigma2 or sigma3 does not")
    monomial, pivot = choice
    e1 = sd.complements[0]
    for g, t in zip(sd.generators, targets):
        if t != 0:
            e1 = e1 + g.multiply(monomial.scale(t / pivot))
    return dataclasses.replace(sd, complements=(e1,))


def sigma_splitting_components(
    sigma: CechCocycle, sd: SplittingData, jr: JacobianRestriction
) -> SigmaComponents:
    """
    Solve sigma = sum f_i e_i on the overlap and project each f_i to H^1.

    Args:
        sigma: Connecting cocycle of the line
        sd: Splitting data of the same line
        jr: Jacobian restriction of the same line

    Returns:
        SigmaComponents with raw and adapted H^1 coordinates
    """
    raw = tuple(tuple(h1_coordinates(f)) for f in _solve_components(sigma, sd, jr))
    adapted_sd = adapt_splitting(sigma, sd, jr)
    laurent = _solve_components(sigma, adapted_sd, jr)
    adapted = tuple(tuple(h1_coordinates(f)) for f in laurent)
    return SigmaComponents(sd.kind, raw, adapted, adapted_sd, laurent)


def quadratic_form_discriminant(sigma1: Sequence):
    """
    Discriminant c22^2 - c31*c13 of sigma1 in H^1(O(-4)).

    Pairing with H0(O(2)) makes sigma1 the quadratic form
    (x, y) -> c31*x^2 + 2*c22*x*y + c13*y^2 on H0(O(1)).
    """
    c31, c22, c13 = sigma1
    return c22 * c22 - c31 * c13


# ---------------------------------------------------------------------------
# The 2-form
# ---------------------------------------------------------------------------


def contraction_indices(jr: JacobianRestriction) -> List[int]:
    return [k for k, q in enumerate(jr.quadrics) if not q.is_zero()]


def wedge_contract(a: Sequence, b: TangentVector, c: TangentVector, jr: JacobianRestriction, k: Optional[int] = None) -> LaurentBivariate:
    """
    lambda with a ^ b ^ c ^ w = lambda * phi(w), computed as
    det[a, b, c, e_k] / q_k.

    Raises:
        InconsistencyError: If the determinant is not divisible by q_k
    """
    field = jr.field
    if k is None:
        k = jr.first_nonzero_index()
    columns = [
        tuple(_as_laurent(x) for x in a),
        tuple(x.to_laurent() for x in b.components),
        tuple(x.to_laurent() for x in c.components),
        tuple(LaurentBivariate.monomial(field, 0, 0, 1 if r == k else 0) for r in range(4)),
    ]
    degree = sum(col[0].total_degree for col in columns[:3])
    det = leibniz_determinant(columns, LaurentBivariate.zero(field, degree))
    return det.exact_divide(jr.quadrics[k])


def contraction_is_independent(a: Sequence, b: TangentVector, c: TangentVector, jr: JacobianRestriction) -> bool:
    """True when every admissible contraction index gives the same lambda."""
    values = {wedge_contract(a, b, c, jr, k) for k in contraction_indices(jr)}
    return len(values) == 1


def symplectic_form_from_quadrics(
    jr: JacobianRestriction, v1: TangentVector, v2: TangentVector, sigma: Optional[CechCocycle] = None
):
    if sigma is None:
        sigma = connecting_sigma_from_quadrics(jr)
    try:
        return residue(wedge_contract(sigma.overlap_section, v1, v2, jr))
    except GradingError as e:
        raise GradingError("the 2-form takes two tangent vectors (degree 1 sections)") from e


def symplectic_form(Y: CubicFourfold, line: Line, v1: TangentVector, v2: TangentVector, frame=None):
    """
    alpha(v1, v2) = residue(sigma ^ v1 ^ v2) at a line of Y.

    Args:
        Y: The cubic fourfold
        line: A line along which Y is smooth
        v1: Tangent vector in the frame of the line
        v2: Tangent vector in the frame of the line
        frame: Optional complement frame the vectors are written in

    Returns:
        Scalar in the base field of Y
    """
    jr = smooth_restriction(Y, line, frame)
    return symplectic_form_from_quadrics(jr, v1, v2)


@dataclasses.dataclass(frozen=True)
class GramMatrix:
    basis: Tuple[TangentVector, ...]
    entries: ExactMatrix

    @property
    def rank(self) -> int:
        return self.entries.rank()

    @property
    def non_generic(self) -> bool:
        return len(self.basis) != 4

    def is_antisymmetric(self) -> bool:
        return self.entries.transpose() == self.entries.scale(-1)

    def congruent(self, change: ExactMatrix) -> ExactMatrix:
        """P^T G P for a change of basis P (columns are new vectors in old coordinates)."""
        return change.transpose() @ self.entries @ change

    def to_json(self) -> List[List[str]]:
        return [[format_scalar(x) for x in row] for row in self.entries.entries]


def gram_from_quadrics(jr: JacobianRestriction, basis: Optional[Sequence[TangentVector]] = None) -> GramMatrix:
    """
    Evaluate the 2-form on every ordered pair of a tangent basis.

    Antisymmetry is not imposed; check it with GramMatrix.is_antisymmetric.
    """
    field = jr.field
    if field.characteristic:
        warnings.warn(
            f"2-form evaluated over GF({field.characteristic}); symplecticity is a characteristic-0 statement",
            PositiveCharacteristicWarning,
        )
    if basis is None:
        basis = section_basis(jr, 0)
    basis = tuple(basis)
    if len(basis) != 4:
        warnings.warn(f"tangent space has dimension {len(basis)}; line is a singular point of F(Y)", NonGenericWarning)

    sigma = connecting_sigma_from_quadrics(jr)
    n = len(basis)
    # every ordered pair, diagonal included
    rows = [[symplectic_form_from_quadrics(jr, basis[i], basis[j], sigma) for j in range(n)] for i in range(n)]
    return GramMatrix(basis, ExactMatrix(field, rows, cols=n))


def gram_matrix(Y: CubicFourfold, line: Line, basis: Optional[Sequence[TangentVector]] = None, frame=None) -> GramMatrix:
    """Gram matrix of alpha on a tangent basis (the kernel basis by default)."""
    return gram_from_quadrics(smooth_restriction(Y, line, frame), basis)


def lagrangian_defects(jr: JacobianRestriction, sd: SplittingData, sigma: Optional[CechCocycle] = None) -> Tuple:
    """
    alpha on the two planes the splitting makes Lagrangian.

    Type1: span{e1, e2} and span{t0*g, t1*g}; Type2: span{t0*g1, t1*g1}
    and span{t0*g2, t1*g2}. Both values are zero for a splitting adapted
    to sigma (see :func:`adapt_splitting`).
    """
    if sigma is None:
        sigma = connecting_sigma_from_quadrics(jr)
    return tuple(symplectic_form_from_quadrics(jr, u, v, sigma) for u, v in sd.lagrangian_pairs())


# ---------------------------------------------------------------------------
# Coordinate expression
# ---------------------------------------------------------------------------


def splitting_coordinates(v: TangentVector, sd: SplittingData) -> Tuple:
    """(a, b, c, d) of a tangent vector; see :func:`fano_tangent.tangent_coordinates`."""
    return tangent_coordinates(v, sd)


def coordinate_form(c1: Sequence, c2: Sequence, components: SigmaComponents):
    """
    The 2-form in splitting coordinates, divided by the frame volume.

    With sigma1, sigma2 written against the pairing H^1(O(-3)) x H0(O(1))
    (Type1) or sigma1 against H0(O(2)) (Type2) this is

        Type1: b1*(c2 x1 + d2 y1) - b2*(c1 x1 + d1 y1) - a1*(c2 x2 + d2 y2) + a2*(c1 x2 + d1 y2)
        Type2: c31*(a1 c2 - a2 c1) + c22*(a1 d2 + b1 c2 - b2 c1 - a2 d1) + c13*(b1 d2 - b2 d1)

    For dual (Type1) or isotropic (Type2) coordinates it reduces to
    b1c2 - b2c1 - a1d2 + a2d1 and b1c2 - b2c1 + a1d2 - a2d1.
    """
    a1, b1, cc1, d1 = c1
    a2, b2, cc2, d2 = c2
    if components.kind is SplittingKind.TYPE1:
        x1, y1 = components.sigma1
        x2, y2 = components.sigma2
        return (
            b1 * (cc2 * x1 + d2 * y1)
            - b2 * (cc1 * x1 + d1 * y1)
            - a1 * (cc2 * x2 + d2 * y2)
            + a2 * (cc1 * x2 + d1 * y2)
        )
    c31, c22, c13 = components.sigma1
    return (
        c31 * (a1 * cc2 - a2 * cc1)
        + c22 * (a1 * d2 + b1 * cc2 - b2 * cc1 - a2 * d1)
        + c13 * (b1 * d2 - b2 * d1)
    )


def normalized_coordinate_form(c1: Sequence, c2: Sequence, kind: SplittingKind):
    a1, b1, cc1, d1 = c1
    a2, b2, cc2, d2 = c2
    if kind is SplittingKind.TYPE1:
        return b1 * cc2 - b2 * cc1 - a1 * d2 + a2 * d1
    return b1 * cc2 - b2 * cc1 + a1 * d2 - a2 * d1


def frame_volume(sd: SplittingData, jr: JacobianRestriction):
    """The constant det[e1, e2, e3, e_k] / q_k of a splitting frame."""
    e1, e2, e3 = sd.summands
    volume = wedge_contract(tuple(e1.components), e2, e3, jr)
    if volume.total_degree != 0 or set(volume.as_dict()) - {(0, 0)}:
        raise InconsistencyError("frame volume is not a constant")
    return volume.coefficient(0, 0)


def sigma_components(Y: CubicFourfold, line: Line, frame=None) -> SigmaComponents:
    """Connecting class, splitting and components for one line in a single pass."""
    jr = smooth_restriction(Y, line, frame)
    return sigma_splitting_components(connecting_sigma_from_quadrics(jr), splitting_from_quadrics(jr), jr)
