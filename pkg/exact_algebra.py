"""
Exact Algebra Module
====================
Exact field arithmetic and the polynomial / linear-algebra kernels behind the
line and Pfaffian computations:

- Rationals (``fractions.Fraction``) and odd prime fields F_p
- Binary forms in the homogeneous coordinates t0, t1 of a line
- Laurent bivariate forms (sections over the chart overlap of P^1)
- Sparse multivariate forms in 5 or 6 variables
- Dense matrices with fraction-free (Bareiss) elimination over the rationals
  and ordinary Gauss-Jordan elimination over F_p

No floating point is used anywhere: every vanishing check is exact.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, reduce
from math import lcm
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import sympy

# Rank over QQ is first certified modulo this prime (see ExactMatrix.rank)
MODULAR_RANK_PRIME = 2**31 - 1


# ---------------------------------------------------------------------------
# Errors and warnings
# ---------------------------------------------------------------------------


class GeometryError(ValueError):
    """Base class for mathematical precondition failures."""


class DegenerateLineError(GeometryError):
    """A 2x6 parameterization matrix does not have rank 2."""


class NoUnitError(GeometryError):
    """Polynomials share a root, so no combination of them equals 1."""


class GradingError(GeometryError):
    """An operation received a form of the wrong degree."""


class LineNotOnCubicError(GeometryError):
    """The line is not contained in the cubic."""


class SingularAlongLineError(GeometryError):
    """The cubic is singular at some point of the line."""


class SplittingInconsistencyError(GeometryError):
    """h0(N(-1)) lies outside {1, 2}."""


class DegenerateRepresentationError(GeometryError):
    """The Pfaffian of a skew linear matrix vanishes identically."""


class PointOffThreefoldError(GeometryError):
    """A point does not lie on the Pfaffian cubic threefold."""


class NonLocallyFreePointError(GeometryError):
    """The skew matrix does not have rank 4 at the point."""


class FieldMismatchError(GeometryError):
    """Operands live over different base fields."""


class InconsistencyError(GeometryError):
    """An internal identity failed (exact division, frame solve, ...)."""


class PositiveCharacteristicWarning(UserWarning):
    """Characteristic-zero statements evaluated over a prime field."""


class NonGenericWarning(UserWarning):
    """Tangent space of dimension > 4, i.e. a singular point of F(Y)."""


# ---------------------------------------------------------------------------
# Fields
# ---------------------------------------------------------------------------


class PrimeFieldElement:
    """Element of F_p, stored reduced to [0, p)."""

    __slots__ = ("value", "p")

    def __init__(self, value: int, p: int):
        self.value = value % p
        self.p = p

    def _coerce(self, other):
        if isinstance(other, PrimeFieldElement):
            if other.p != self.p:
                raise FieldMismatchError(f"GF({self.p}) vs GF({other.p})")
            return other.value
        if isinstance(other, int):
            return other % self.p
        if isinstance(other, Fraction):
            if other.denominator % self.p == 0:
                raise ZeroDivisionError(f"{other} has no image in GF({self.p})")
            return other.numerator * pow(other.denominator, -1, self.p) % self.p
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return PrimeFieldElement(self.value + o, self.p)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return PrimeFieldElement(self.value - o, self.p)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return PrimeFieldElement(o - self.value, self.p)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return PrimeFieldElement(self.value * o, self.p)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        if o == 0:
            raise ZeroDivisionError("division by zero in GF(%d)" % self.p)
        return PrimeFieldElement(self.value * pow(o, -1, self.p), self.p)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        if self.value == 0:
            raise ZeroDivisionError("division by zero in GF(%d)" % self.p)
        return PrimeFieldElement(o * pow(self.value, -1, self.p), self.p)

    def __neg__(self):
        return PrimeFieldElement(-self.value, self.p)

    def __pos__(self):
        return self

    def __pow__(self, n: int):
        if n < 0 and self.value == 0:
            raise ZeroDivisionError("division by zero in GF(%d)" % self.p)
        return PrimeFieldElement(pow(self.value, n, self.p), self.p)

    def __eq__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self.value == o

    def __hash__(self):
        return hash((self.value, self.p))

    def __bool__(self):
        return self.value != 0

    def __repr__(self):
        return f"GF({self.p})({self.value})"

    def __str__(self):
        return str(self.value)


class RationalField:
    """The rationals, with values stored as ``Fraction`` in lowest terms."""

    characteristic = 0
    name = "QQ"

    def __init__(self):
        self.zero = Fraction(0)
        self.one = Fraction(1)

    def __call__(self, value) -> Fraction:
        if isinstance(value, PrimeFieldElement):
            raise FieldMismatchError(f"cannot lift {value!r} to QQ")
        if isinstance(value, str):
            return Fraction(value.strip().replace("−", "-"))
        return Fraction(value)

    def format(self, value) -> str:
        return str(self(value))

    def __eq__(self, other):
        return isinstance(other, RationalField)

    def __hash__(self):
        return hash("QQ")

    def __repr__(self):
        return "QQ"


class PrimeField:
    """The prime field F_p for an odd prime p."""

    def __init__(self, p: int):
        p = int(p)
        if p <= 2 or not sympy.isprime(p):
            raise ValueError(f"prime field needs an odd prime, got {p}")
        self.p = p
        self.characteristic = p
        self.name = f"GF({p})"
        self.zero = PrimeFieldElement(0, p)
        self.one = PrimeFieldElement(1, p)

    def __call__(self, value) -> PrimeFieldElement:
        if isinstance(value, PrimeFieldElement):
            if value.p != self.p:
                raise FieldMismatchError(f"GF({value.p}) element given to GF({self.p})")
            return value
        if isinstance(value, str):
            value = QQ(value)
        if isinstance(value, Fraction):
            if value.denominator % self.p == 0:
                raise ZeroDivisionError(f"{value} has no image in GF({self.p})")
            return PrimeFieldElement(value.numerator * pow(value.denominator, -1, self.p), self.p)
        return PrimeFieldElement(int(value), self.p)

    def format(self, value) -> str:
        return str(self(value).value)

    def elements(self) -> List[PrimeFieldElement]:
        return [PrimeFieldElement(v, self.p) for v in range(self.p)]

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("GF", self.p))

    def __repr__(self):
        return self.name


QQ = RationalField()


def make_field(prime: Optional[int] = None):
    """Return QQ, or GF(prime) when a prime is given."""
    return QQ if prime is None else PrimeField(prime)


def format_scalar(value) -> str:
    """Serialize a scalar as a "num/den" string ("-3/7", "5")."""
    if isinstance(value, PrimeFieldElement):
        return str(value.value)
    return str(Fraction(value))


def _check_same_field(a, b):
    if a != b:
        raise FieldMismatchError(f"{a!r} vs {b!r}")


# ---------------------------------------------------------------------------
# Univariate (dehomogenized) polynomials: coefficient lists, low degree first
# ---------------------------------------------------------------------------


def poly_trim(coeffs: Sequence) -> List:
    out = list(coeffs)
    while out and out[-1] == 0:
        out.pop()
    return out


def poly_mul(a: Sequence, b: Sequence, field) -> List:
    if not a or not b:
        return []
    out = [field.zero] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x == 0:
            continue
        for j, y in enumerate(b):
            out[i + j] = out[i + j] + x * y
    return poly_trim(out)


def poly_divmod(a: Sequence, b: Sequence, field) -> Tuple[List, List]:
    a = poly_trim(a)
    b = poly_trim(b)
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    rem = list(a)
    quot = [field.zero] * max(len(a) - len(b) + 1, 0)
    lead = b[-1]
    while len(rem) >= len(b) and rem:
        shift = len(rem) - len(b)
        factor = rem[-1] / lead
        quot[shift] = factor
        for k, y in enumerate(b):
            rem[shift + k] = rem[shift + k] - factor * y
        rem = poly_trim(rem)
    return poly_trim(quot), rem


def poly_gcd(a: Sequence, b: Sequence, field) -> List:
    """Monic gcd; the gcd of two zero polynomials is the zero polynomial."""
    a = poly_trim(a)
    b = poly_trim(b)
    while b:
        _, r = poly_divmod(a, b, field)
        a, b = b, r
    if not a:
        return []
    lead = a[-1]
    return [x / lead for x in a]


def poly_gcd_all(polys: Iterable[Sequence], field) -> List:
    return reduce(lambda g, p: poly_gcd(g, p, field), polys, [])


def unit_combination(q: Sequence[Sequence], field=None) -> List[List]:
    """
    Find polynomial cofactors c with sum(c_i * q_i) == 1.

    The degree bound D of the cofactors starts at 0 and grows until the
    linear system on the coefficients becomes solvable, so the returned
    combination has minimal degree. Free unknowns are set to zero.

    Args:
        q: One-variable polynomials as coefficient lists (constant term first)
        field: Base field (QQ when omitted)

    Returns:
        Trimmed coefficient lists c_i, one per entry of q

    Raises:
        NoUnitError: If the q_i have a common root over the algebraic closure
    """
    field = QQ if field is None else field
    polys = [poly_trim([field(x) for x in p]) for p in q]
    g = poly_gcd_all(polys, field)
    if len(g) != 1:
        raise NoUnitError("polynomials have a common root; no unit combination exists")

    max_deg = max(len(p) - 1 for p in polys if p)
    for bound in itertools.count():
        width = bound + 1
        nrows = bound + max_deg + 1
        rows = [[field.zero] * (len(polys) * width) for _ in range(nrows)]
        for i, p in enumerate(polys):
            for k in range(width):
                for m, coeff in enumerate(p):
                    rows[k + m][i * width + k] = coeff
        rhs = [field.one] + [field.zero] * (nrows - 1)
        solution = ExactMatrix(field, rows, cols=len(polys) * width).solve(rhs)
        if solution is not None:
            return [poly_trim(solution[i * width:(i + 1) * width]) for i in range(len(polys))]
        if bound > max_deg:
            raise InconsistencyError("Bezout bound exceeded without a solution")


# ---------------------------------------------------------------------------
# Binary forms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BinaryForm:
    """
    Homogeneous form in t0, t1.

    ``coeffs[k]`` is the coefficient of t0^(degree-k) * t1^k. The zero form
    keeps its nominal degree.
    """

    field: Any
    degree: int
    coeffs: Tuple

    def __post_init__(self):
        if self.degree < 0:
            raise GradingError(f"binary form degree must be >= 0, got {self.degree}")
        coeffs = tuple(self.field(c) for c in self.coeffs)
        if len(coeffs) != self.degree + 1:
            raise GradingError(f"degree {self.degree} form needs {self.degree + 1} coefficients")
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def zero(cls, field, degree: int) -> "BinaryForm":
        return cls(field, degree, (field.zero,) * (degree + 1))

    @classmethod
    def monomial(cls, field, degree: int, k: int, coeff=1) -> "BinaryForm":
        coeffs = [field.zero] * (degree + 1)
        coeffs[k] = field(coeff)
        return cls(field, degree, tuple(coeffs))

    @classmethod
    def linear(cls, field, a, b) -> "BinaryForm":
        """a*t0 + b*t1."""
        return cls(field, 1, (a, b))

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def _check(self, other: "BinaryForm"):
        _check_same_field(self.field, other.field)
        if other.degree != self.degree:
            raise GradingError(f"degree {self.degree} vs {other.degree}")

    def __add__(self, other: "BinaryForm") -> "BinaryForm":
        self._check(other)
        return BinaryForm(self.field, self.degree, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "BinaryForm") -> "BinaryForm":
        self._check(other)
        return BinaryForm(self.field, self.degree, tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> "BinaryForm":
        return BinaryForm(self.field, self.degree, tuple(-a for a in self.coeffs))

    def scale(self, c) -> "BinaryForm":
        c = self.field(c)
        return BinaryForm(self.field, self.degree, tuple(c * a for a in self.coeffs))

    def __mul__(self, other):
        if isinstance(other, LaurentBivariate):
            return NotImplemented
        if not isinstance(other, BinaryForm):
            return self.scale(other)
        _check_same_field(self.field, other.field)
        out = [self.field.zero] * (self.degree + other.degree + 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] = out[i + j] + a * b
        return BinaryForm(self.field, self.degree + other.degree, tuple(out))

    __rmul__ = scale

    def __pow__(self, n: int) -> "BinaryForm":
        result = BinaryForm.monomial(self.field, 0, 0, 1)
        for _ in range(n):
            result = result * self
        return result

    def evaluate(self, t0, t1):
        d = self.degree
        return sum((c * t0 ** (d - k) * t1**k for k, c in enumerate(self.coeffs)), self.field.zero)

    def dehomogenize(self, chart: int = 0) -> List:
        """
        Coefficient list (constant term first) on a standard chart.

        Chart 0 is U0 = {t0 != 0} with u = t1/t0; chart 1 is U1 with u = t0/t1.
        """
        coeffs = list(self.coeffs) if chart == 0 else list(reversed(self.coeffs))
        return poly_trim(coeffs)

    def compose_linear(self, a: "BinaryForm", b: "BinaryForm") -> "BinaryForm":
        """Substitute t0 -> a, t1 -> b for linear forms a, b."""
        if a.degree != 1 or b.degree != 1:
            raise GradingError("compose_linear needs linear substitutions")
        d = self.degree
        result = BinaryForm.zero(self.field, d)
        for k, c in enumerate(self.coeffs):
            if c == 0:
                continue
            result = result + ((a ** (d - k)) * (b**k)).scale(c)
        return result

    def to_laurent(self) -> "LaurentBivariate":
        d = self.degree
        return LaurentBivariate(self.field, d, {(d - k, k): c for k, c in enumerate(self.coeffs)})


# ---------------------------------------------------------------------------
# Laurent bivariate forms
# ---------------------------------------------------------------------------


def _normalize_terms(field, terms) -> Tuple:
    items = terms.items() if isinstance(terms, dict) else terms
    merged: Dict[Tuple[int, ...], Any] = {}
    for exp, coeff in items:
        exp = tuple(int(e) for e in exp)
        merged[exp] = merged.get(exp, field.zero) + field(coeff)
    return tuple(sorted((e, c) for e, c in merged.items() if c != 0))


@dataclass(frozen=True)
class LaurentBivariate:
    """
    Homogeneous Laurent form sum c_ij * t0^i * t1^j with i + j = total_degree.

    Exponents may be negative. Zero coefficients are never stored.
    """

    field: Any
    total_degree: int
    terms: Tuple = ()

    def __post_init__(self):
        terms = _normalize_terms(self.field, self.terms)
        for (i, j), _ in terms:
            if i + j != self.total_degree:
                raise GradingError(f"t0^{i} t1^{j} is not of degree {self.total_degree}")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def zero(cls, field, total_degree: int) -> "LaurentBivariate":
        return cls(field, total_degree, ())

    @classmethod
    def monomial(cls, field, i: int, j: int, coeff=1) -> "LaurentBivariate":
        return cls(field, i + j, {(i, j): coeff})

    def as_dict(self) -> Dict[Tuple[int, int], Any]:
        return dict(self.terms)

    def coefficient(self, i: int, j: int):
        return self.as_dict().get((i, j), self.field.zero)

    def is_zero(self) -> bool:
        return not self.terms

    def _coerce(self, other) -> "LaurentBivariate":
        if isinstance(other, BinaryForm):
            other = other.to_laurent()
        _check_same_field(self.field, other.field)
        return other

    def __add__(self, other) -> "LaurentBivariate":
        other = self._coerce(other)
        if other.total_degree != self.total_degree:
            raise GradingError(f"degree {self.total_degree} vs {other.total_degree}")
        return LaurentBivariate(self.field, self.total_degree, list(self.terms) + list(other.terms))

    def __sub__(self, other) -> "LaurentBivariate":
        return self + (-self._coerce(other))

    def __neg__(self) -> "LaurentBivariate":
        return LaurentBivariate(self.field, self.total_degree, [(e, -c) for e, c in self.terms])

    def scale(self, c) -> "LaurentBivariate":
        c = self.field(c)
        return LaurentBivariate(self.field, self.total_degree, [(e, c * x) for e, x in self.terms])

    def __mul__(self, other):
        if not isinstance(other, (LaurentBivariate, BinaryForm)):
            return self.scale(other)
        other = self._coerce(other)
        out = []
        for (i, j), a in self.terms:
            for (k, m), b in other.terms:
                out.append(((i + k, j + m), a * b))
        return LaurentBivariate(self.field, self.total_degree + other.total_degree, out)

    __rmul__ = __mul__

    def exact_divide(self, form) -> "LaurentBivariate":
        """
        Divide by a binary form inside the Laurent ring.

        Raises:
            InconsistencyError: If the quotient is not a Laurent form
        """
        if isinstance(form, LaurentBivariate):
            form = _laurent_to_binary(form)
        if form.is_zero():
            raise ZeroDivisionError("division by the zero form")
        result_degree = self.total_degree - form.degree
        if self.is_zero():
            return LaurentBivariate.zero(self.field, result_degree)

        # u = t1/t0: self = t0^n * sum c_j u^j, form = t0^e * u^v * R(u) with R(0) != 0
        by_j = {j: c for (_, j), c in self.terms}
        jmin = min(by_j)
        numerator = [self.field.zero] * (max(by_j) - jmin + 1)
        for j, c in by_j.items():
            numerator[j - jmin] = c
        denominator = list(form.coeffs)
        v = next(k for k, c in enumerate(denominator) if c != 0)
        quot, rem = poly_divmod(numerator, denominator[v:], self.field)
        if rem:
            raise InconsistencyError("Laurent form is not divisible by the binary form")
        out = {}
        for m, c in enumerate(quot):
            j = m + jmin - v
            out[(result_degree - j, j)] = c
        return LaurentBivariate(self.field, result_degree, out)

    def regular_on_chart(self, chart: int) -> bool:
        """True when every term is regular on U0 = {t0 != 0} (chart 0) or U1."""
        if chart == 0:
            return all(j >= 0 for (_, j), _ in self.terms)
        return all(i >= 0 for (i, _), _ in self.terms)

    def cohomology_part(self) -> "LaurentBivariate":
        """Keep only monomials t0^-a t1^-b with a, b >= 1 (the H^1 part)."""
        return LaurentBivariate(
            self.field, self.total_degree, [(e, c) for e, c in self.terms if e[0] < 0 and e[1] < 0]
        )

    def is_coboundary(self) -> bool:
        return self.cohomology_part().is_zero()


def _laurent_to_binary(x: LaurentBivariate) -> BinaryForm:
    if x.total_degree < 0 or any(i < 0 or j < 0 for (i, j), _ in x.terms):
        raise GradingError("Laurent form is not a polynomial")
    coeffs = [x.field.zero] * (x.total_degree + 1)
    for (_, j), c in x.terms:
        coeffs[j] = c
    return BinaryForm(x.field, x.total_degree, tuple(coeffs))


def h1_coordinates(x: LaurentBivariate) -> List:
    """
    Coordinates of the H^1 class of x in the basis t0^-a t1^-b (a, b >= 1),
    ordered by decreasing a. H^1(O(-k)) has dimension k - 1.
    """
    n = x.total_degree
    if n > -2:
        return []
    d = x.as_dict()
    return [d.get((-a, n + a), x.field.zero) for a in range(-n - 1, 0, -1)]


def residue(x: LaurentBivariate):
    """
    Residue pairing H^1(P^1, O(-2)) -> base field.

    Returns the coefficient of t0^-1 t1^-1.

    Raises:
        GradingError: If x is not of total degree -2
    """
    if x.total_degree != -2:
        raise GradingError(f"residue needs total degree -2, got {x.total_degree}")
    return x.coefficient(-1, -1)


# ---------------------------------------------------------------------------
# Sparse multivariate forms
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def monomial_exponents(nvars: int, degree: int) -> Tuple[Tuple[int, ...], ...]:
    """All exponent vectors of the given degree, x0^d first (descending lex)."""
    if degree < 0:
        return ()
    out = []
    for combo in itertools.combinations_with_replacement(range(nvars), degree):
        exp = [0] * nvars
        for v in combo:
            exp[v] += 1
        out.append(tuple(exp))
    return tuple(sorted(out, reverse=True))


@dataclass(frozen=True)
class MultiForm:
    """Homogeneous form in nvars variables, stored sparsely."""

    field: Any
    nvars: int
    degree: int
    terms: Tuple = ()

    def __post_init__(self):
        terms = _normalize_terms(self.field, self.terms)
        for exp, _ in terms:
            if len(exp) != self.nvars or sum(exp) != self.degree or min(exp) < 0:
                raise GradingError(f"exponent {exp} does not fit {self.nvars} vars, degree {self.degree}")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def zero(cls, field, nvars: int, degree: int) -> "MultiForm":
        return cls(field, nvars, degree, ())

    @classmethod
    def constant(cls, field, nvars: int, value) -> "MultiForm":
        return cls(field, nvars, 0, {(0,) * nvars: value})

    @classmethod
    def variable(cls, field, nvars: int, i: int, coeff=1) -> "MultiForm":
        exp = [0] * nvars
        exp[i] = 1
        return cls(field, nvars, 1, {tuple(exp): coeff})

    @classmethod
    def linear(cls, field, coeffs: Sequence) -> "MultiForm":
        n = len(coeffs)
        terms = {}
        for i, c in enumerate(coeffs):
            exp = [0] * n
            exp[i] = 1
            terms[tuple(exp)] = c
        return cls(field, n, 1, terms)

    def as_dict(self) -> Dict[Tuple[int, ...], Any]:
        return dict(self.terms)

    def coefficient(self, exp: Sequence[int]):
        return self.as_dict().get(tuple(exp), self.field.zero)

    def linear_coefficients(self) -> List:
        if self.degree != 1:
            raise GradingError("linear_coefficients needs a linear form")
        d = self.as_dict()
        return [d.get(tuple(int(k == i) for k in range(self.nvars)), self.field.zero) for i in range(self.nvars)]

    def is_zero(self) -> bool:
        return not self.terms

    def _check(self, other: "MultiForm"):
        _check_same_field(self.field, other.field)
        if other.nvars != self.nvars or other.degree != self.degree:
            raise GradingError("forms differ in variables or degree")

    def __add__(self, other: "MultiForm") -> "MultiForm":
        self._check(other)
        return MultiForm(self.field, self.nvars, self.degree, list(self.terms) + list(other.terms))

    def __sub__(self, other: "MultiForm") -> "MultiForm":
        return self + (-other)

    def __neg__(self) -> "MultiForm":
        return MultiForm(self.field, self.nvars, self.degree, [(e, -c) for e, c in self.terms])

    def scale(self, c) -> "MultiForm":
        c = self.field(c)
        return MultiForm(self.field, self.nvars, self.degree, [(e, c * x) for e, x in self.terms])

    def __mul__(self, other):
        if not isinstance(other, MultiForm):
            return self.scale(other)
        _check_same_field(self.field, other.field)
        if other.nvars != self.nvars:
            raise GradingError("forms differ in number of variables")
        out = []
        for e1, a in self.terms:
            for e2, b in other.terms:
                out.append((tuple(x + y for x, y in zip(e1, e2)), a * b))
        return MultiForm(self.field, self.nvars, self.degree + other.degree, out)

    __rmul__ = scale

    def partial_derivative(self, i: int) -> "MultiForm":
        out = []
        for exp, c in self.terms:
            if exp[i] == 0:
                continue
            new = list(exp)
            new[i] -= 1
            out.append((tuple(new), c * exp[i]))
        return MultiForm(self.field, self.nvars, max(self.degree - 1, 0), out)

    def evaluate(self, point: Sequence):
        point = [self.field(x) for x in point]
        total = self.field.zero
        for exp, c in self.terms:
            term = c
            for x, e in zip(point, exp):
                if e:
                    term = term * x**e
            total = total + term
        return total

    def substitute(self, images: Sequence["MultiForm"]) -> "MultiForm":
        """Compose with x_i -> images[i]; all images share nvars and degree."""
        if len(images) != self.nvars:
            raise GradingError("one image per variable is required")
        target_nvars = images[0].nvars
        image_degree = images[0].degree
        one = MultiForm.constant(self.field, target_nvars, 1)
        powers: Dict[Tuple[int, int], MultiForm] = {}

        def power(i: int, e: int) -> MultiForm:
            if e == 0:
                return one
            if (i, e) not in powers:
                powers[(i, e)] = power(i, e - 1) * images[i]
            return powers[(i, e)]

        result = MultiForm.zero(self.field, target_nvars, self.degree * image_degree)
        for exp, c in self.terms:
            term = one
            for i, e in enumerate(exp):
                if e:
                    term = term * power(i, e)
            result = result + term.scale(c)
        return result

    def change_field(self, field) -> "MultiForm":
        """Reduce or coerce all coefficients into another field."""
        return MultiForm(field, self.nvars, self.degree, [(e, field(c)) for e, c in self.terms])


def restrict_to_line(f: MultiForm, A) -> BinaryForm:
    """
    Evaluate f along x = t0*A[0] + t1*A[1].

    Args:
        f: Homogeneous form in 6 variables
        A: 2x6 parameterization (ExactMatrix or nested rows)

    Returns:
        The binary form f(t0*A0 + t1*A1) of degree f.degree (possibly zero)

    Raises:
        DegenerateLineError: If rank(A) < 2
    """
    A = A if isinstance(A, ExactMatrix) else ExactMatrix(f.field, A)
    if A.rows != 2 or A.cols != f.nvars:
        raise DegenerateLineError(f"expected a 2x{f.nvars} parameterization")
    if A.rank() < 2:
        raise DegenerateLineError("parameterization matrix has rank < 2")

    linear = [BinaryForm.linear(f.field, A[0, i], A[1, i]) for i in range(f.nvars)]
    one = BinaryForm.monomial(f.field, 0, 0, 1)
    powers: Dict[Tuple[int, int], BinaryForm] = {}

    def power(i: int, e: int) -> BinaryForm:
        if e == 0:
            return one
        if (i, e) not in powers:
            powers[(i, e)] = power(i, e - 1) * linear[i]
        return powers[(i, e)]

    result = BinaryForm.zero(f.field, f.degree)
    for exp, c in f.terms:
        term = one
        for i, e in enumerate(exp):
            if e:
                term = term * power(i, e)
        result = result + term.scale(c)
    return result


# ---------------------------------------------------------------------------
# Dense exact matrices
# ---------------------------------------------------------------------------


def _bareiss_echelon(rows: List[List[int]], ncols: int) -> Tuple[List[List[int]], List[int], int]:
    """
    Fraction-free row echelon form of an integer matrix.

    Returns the echelon rows, the pivot columns and the sign of the row
    permutation used.
    """
    m = [list(r) for r in rows]
    nrows = len(m)
    pivots: List[int] = []
    prev = 1
    sign = 1
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        piv = next((i for i in range(r, nrows) if m[i][c] != 0), None)
        if piv is None:
            continue
        if piv != r:
            m[r], m[piv] = m[piv], m[r]
            sign = -sign
        pivot = m[r][c]
        for i in range(r + 1, nrows):
            lead = m[i][c]
            row_i = m[i]
            row_r = m[r]
            for j in range(c + 1, ncols):
                row_i[j] = (pivot * row_i[j] - lead * row_r[j]) // prev
            row_i[c] = 0
        prev = pivot
        pivots.append(c)
        r += 1
    return m, pivots, sign


def _gauss_jordan(rows: List[List], ncols: int, field) -> Tuple[List[List], List[int]]:
    m = [list(r) for r in rows]
    nrows = len(m)
    pivots: List[int] = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        piv = next((i for i in range(r, nrows) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = field.one / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(nrows):
            if i != r and m[i][c] != 0:
                factor = m[i][c]
                m[i] = [a - factor * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    return m, pivots


def _modular_rank(rows: List[List[int]], ncols: int, p: int) -> int:
    m = [[x % p for x in r] for r in rows]
    rank = 0
    for c in range(ncols):
        piv = next((i for i in range(rank, len(m)) if m[i][c]), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        inv = pow(m[rank][c], -1, p)
        pivot_row = [x * inv % p for x in m[rank]]
        m[rank] = pivot_row
        for i in range(rank + 1, len(m)):
            if m[i][c]:
                f = m[i][c]
                m[i] = [(a - f * b) % p for a, b in zip(m[i], pivot_row)]
        rank += 1
        if rank == len(m):
            break
    return rank


class ExactMatrix:
    """
    Dense matrix over QQ or F_p.

    Rank and kernels are computed exactly: fraction-free Bareiss elimination
    over the rationals, Gauss-Jordan elimination over prime fields.
    """

    def __init__(self, field, rows: Sequence[Sequence], cols: Optional[int] = None):
        self.field = field
        self.entries = tuple(tuple(field(x) for x in r) for r in rows)
        self.rows = len(self.entries)
        if cols is None:
            cols = len(self.entries[0]) if self.entries else 0
        self.cols = cols
        if any(len(r) != cols for r in self.entries):
            raise ValueError("ragged matrix rows")

    @classmethod
    def zeros(cls, field, rows: int, cols: int) -> "ExactMatrix":
        return cls(field, [[field.zero] * cols for _ in range(rows)], cols=cols)

    @classmethod
    def identity(cls, field, n: int) -> "ExactMatrix":
        return cls(field, [[field.one if i == j else field.zero for j in range(n)] for i in range(n)], cols=n)

    def __getitem__(self, key):
        i, j = key
        return self.entries[i][j]

    def row(self, i: int) -> Tuple:
        return self.entries[i]

    def column(self, j: int) -> Tuple:
        return tuple(r[j] for r in self.entries)

    def tolist(self) -> List[List]:
        return [list(r) for r in self.entries]

    def __eq__(self, other):
        return (
            isinstance(other, ExactMatrix)
            and self.field == other.field
            and (self.rows, self.cols) == (other.rows, other.cols)
            and self.entries == other.entries
        )

    def __hash__(self):
        return hash((self.field, self.rows, self.cols, self.entries))

    def __repr__(self):
        body = "; ".join(" ".join(format_scalar(x) for x in r) for r in self.entries)
        return f"ExactMatrix({self.field!r}, [{body}])"

    def transpose(self) -> "ExactMatrix":
        return ExactMatrix(self.field, [self.column(j) for j in range(self.cols)], cols=self.rows)

    def stack(self, other: "ExactMatrix") -> "ExactMatrix":
        _check_same_field(self.field, other.field)
        if other.cols != self.cols:
            raise ValueError("column counts differ")
        return ExactMatrix(self.field, self.entries + other.entries, cols=self.cols)

    def with_column(self, column: Sequence) -> "ExactMatrix":
        return ExactMatrix(self.field, [list(r) + [column[i]] for i, r in enumerate(self.entries)], cols=self.cols + 1)

    def apply(self, vector: Sequence) -> Tuple:
        vector = [self.field(x) for x in vector]
        return tuple(sum((a * b for a, b in zip(r, vector)), self.field.zero) for r in self.entries)

    def __matmul__(self, other):
        if not isinstance(other, ExactMatrix):
            return self.apply(other)
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        cols = [other.column(j) for j in range(other.cols)]
        return ExactMatrix(
            self.field,
            [[sum((a * b for a, b in zip(r, c)), self.field.zero) for c in cols] for r in self.entries],
            cols=other.cols,
        )

    def scale(self, c) -> "ExactMatrix":
        c = self.field(c)
        return ExactMatrix(self.field, [[c * x for x in r] for r in self.entries], cols=self.cols)

    # -- elimination --------------------------------------------------------

    def _integer_rows(self) -> Tuple[List[List[int]], List[int]]:
        """Rows scaled by the lcm of their denominators, with the scales."""
        int_rows, scales = [], []
        for r in self.entries:
            scale = lcm(*(x.denominator for x in r)) if r else 1
            int_rows.append([int(x * scale) for x in r])
            scales.append(scale)
        return int_rows, scales

    def rref(self) -> Tuple["ExactMatrix", List[int]]:
        """Reduced row echelon form and pivot columns."""
        if self.field.characteristic:
            m, pivots = _gauss_jordan(self.tolist(), self.cols, self.field)
            return ExactMatrix(self.field, m, cols=self.cols), pivots
        int_rows, _ = self._integer_rows()
        echelon, pivots, _ = _bareiss_echelon(int_rows, self.cols)
        m = [[Fraction(x) for x in r] for r in echelon]
        for r in range(len(pivots) - 1, -1, -1):
            c = pivots[r]
            inv = 1 / m[r][c]
            m[r] = [x * inv for x in m[r]]
            for i in range(r):
                if m[i][c] != 0:
                    factor = m[i][c]
                    m[i] = [a - factor * b for a, b in zip(m[i], m[r])]
        for i in range(len(pivots), self.rows):
            m[i] = [Fraction(0)] * self.cols
        return ExactMatrix(self.field, m, cols=self.cols), pivots

    def rank(self) -> int:
        if self.rows == 0 or self.cols == 0:
            return 0
        if self.field.characteristic:
            return len(_gauss_jordan(self.tolist(), self.cols, self.field)[1])
        int_rows, _ = self._integer_rows()
        # a full modular rank certifies the rational rank; otherwise decide exactly
        modular = _modular_rank(int_rows, self.cols, MODULAR_RANK_PRIME)
        if modular == min(self.rows, self.cols):
            return modular
        return len(_bareiss_echelon(int_rows, self.cols)[1])

    def kernel_basis(self) -> List[Tuple]:
        """
        Exact basis of the right kernel, one vector per free column.

        Returns:
            List of tuples v with self @ v == 0; its length is cols - rank
        """
        if self.rows == 0:
            return [tuple(self.field.one if i == j else self.field.zero for i in range(self.cols)) for j in range(self.cols)]
        reduced, pivots = self.rref()
        free = [c for c in range(self.cols) if c not in pivots]
        basis = []
        for f in free:
            v = [self.field.zero] * self.cols
            v[f] = self.field.one
            for r, c in enumerate(pivots):
                v[c] = -reduced[r, f]
            basis.append(tuple(v))
        return basis

    def solve(self, rhs: Sequence) -> Optional[Tuple]:
        """Particular solution of self @ x == rhs (free unknowns zero), or None."""
        augmented = self.with_column([self.field(x) for x in rhs])
        reduced, pivots = augmented.rref()
        if self.cols in pivots:
            return None
        x = [self.field.zero] * self.cols
        for r, c in enumerate(pivots):
            x[c] = reduced[r, self.cols]
        return tuple(x)

    def determinant(self):
        if self.rows != self.cols:
            raise ValueError("determinant of a non-square matrix")
        n = self.rows
        if n == 0:
            return self.field.one
        if self.field.characteristic:
            m = self.tolist()
            det = self.field.one
            for c in range(n):
                piv = next((i for i in range(c, n) if m[i][c] != 0), None)
                if piv is None:
                    return self.field.zero
                if piv != c:
                    m[c], m[piv] = m[piv], m[c]
                    det = -det
                det = det * m[c][c]
                inv = self.field.one / m[c][c]
                for i in range(c + 1, n):
                    if m[i][c] != 0:
                        factor = m[i][c] * inv
                        m[i] = [a - factor * b for a, b in zip(m[i], m[c])]
            return det
        int_rows, scales = self._integer_rows()
        echelon, pivots, sign = _bareiss_echelon(int_rows, n)
        if len(pivots) < n:
            return Fraction(0)
        denominator = reduce(lambda a, b: a * b, scales, 1)
        return Fraction(sign * echelon[n - 1][n - 1], denominator)

    def is_invertible(self) -> bool:
        return self.rows == self.cols and self.rank() == self.rows

    def inverse(self) -> "ExactMatrix":
        if not self.is_invertible():
            raise ZeroDivisionError("matrix is not invertible")
        n = self.rows
        augmented = ExactMatrix(
            self.field,
            [list(r) + [self.field.one if i == j else self.field.zero for j in range(n)] for i, r in enumerate(self.entries)],
            cols=2 * n,
        )
        reduced, _ = augmented.rref()
        return ExactMatrix(self.field, [r[n:] for r in reduced.entries], cols=n)


def permutation_sign(perm: Sequence[int]) -> int:
    inversions = sum(1 for i in range(len(perm)) for j in range(i + 1, len(perm)) if perm[i] > perm[j])
    return -1 if inversions % 2 else 1


def leibniz_determinant(columns: Sequence[Sequence], zero):
    """
    Determinant of a small square matrix over any commutative ring.

    Used for 3x3 and 4x4 matrices of Laurent forms, where Bareiss
    elimination would need division.
    """
    n = len(columns)
    total = zero
    for perm in itertools.permutations(range(n)):
        term = None
        for col, row in enumerate(perm):
            entry = columns[col][row]
            term = entry if term is None else term * entry
        total = total + term if permutation_sign(perm) > 0 else total - term
    return total
