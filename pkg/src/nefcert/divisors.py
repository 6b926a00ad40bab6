"""Weight vectors and divisor classes on moduli of weighted pointed rational
curves, in the tautological basis psi_sigma, psi_tau, delta_s, delta plus
nodal boundary classes.

The weight data is always of the shape "n sections of weight 1/k and m
sections of weight 1". All coefficients are exact rationals; a class is a
plain coefficient record and equality is componentwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping, Sequence

from .errors import (
    AlphaOutOfRange,
    AmbientMismatch,
    InvalidBoundaryKey,
    InvalidWeights,
    RecordFormatError,
    UnequalTauCoefficients,
)
from .rational import exact, format_rational, parse_rational


@dataclass(frozen=True, order=True)
class WeightVector:
    """n sections of weight 1/k plus m sections of weight 1.

    A non-empty moduli problem requires m + n/k > 2 as exact rationals.
    With k = 1 the space is the classical one with n + m points and no
    collisions are admissible.
    """

    n: int
    m: int
    k: int

    def __post_init__(self) -> None:
        for name, value in (("n", self.n), ("m", self.m), ("k", self.k)):
            if not isinstance(value, int) or isinstance(value, bool):
                raise InvalidWeights(f"{name} must be an integer, got {value!r}")
        if self.k < 1 or self.n < 0 or self.m < 0:
            raise InvalidWeights(
                f"need n >= 0, m >= 0, k >= 1, got (n={self.n}, m={self.m}, k={self.k})")
        if self.m + Fraction(self.n, self.k) <= 2:
            raise InvalidWeights(
                f"empty moduli problem: m + n/k = {self.m + Fraction(self.n, self.k)} is not > 2")

    def label(self) -> str:
        return f"{self.n},{self.m},{self.k}"


def make_weights(n: int, m: int, k: int) -> WeightVector:
    """Validated weight-vector constructor."""
    return WeightVector(n, m, k)


@dataclass(frozen=True, order=True)
class BoundaryKey:
    """Nodal boundary divisor label: i light and j heavy sections on one side."""

    i: int
    j: int

    def complement(self, ambient: WeightVector) -> "BoundaryKey":
        return BoundaryKey(ambient.n - self.i, ambient.m - self.j)

    def is_canonical(self, ambient: WeightVector) -> bool:
        return (self.i, self.j) <= (ambient.n - self.i, ambient.m - self.j)

    def is_admissible(self, ambient: WeightVector) -> bool:
        """Both sides of the node must carry total weight > 1."""
        if not (0 <= self.i <= ambient.n and 0 <= self.j <= ambient.m):
            return False
        near = Fraction(self.i, ambient.k) + self.j
        far = Fraction(ambient.n - self.i, ambient.k) + (ambient.m - self.j)
        return near > 1 and far > 1

    def label(self) -> str:
        return f"{self.i},{self.j}"


def canonical_boundary_key(ambient: WeightVector, i: int, j: int) -> BoundaryKey:
    """Admissibility-checked key, normalized so (i, j) <= (n-i, m-j) lexicographically."""
    key = BoundaryKey(i, j)
    if not key.is_admissible(ambient):
        raise InvalidBoundaryKey(
            f"({i},{j}) is not a boundary divisor on ({ambient.label()}): "
            "both sides must carry weight > 1")
    other = key.complement(ambient)
    return key if (key.i, key.j) <= (other.i, other.j) else other


@dataclass(frozen=True)
class DivisorClass:
    """Coefficient record over the tautological plus nodal-boundary basis.

    psi_tau is stored per weight-one section (length m) so that the section
    replacement map, which singles out the last entry, stays expressible.
    Boundary coefficients are keyed by canonical admissible keys; exact
    zeros are dropped so componentwise equality is meaningful.
    """

    ambient: WeightVector
    psi_sigma: Fraction
    psi_tau: tuple[Fraction, ...]
    delta_s: Fraction
    delta: Fraction
    boundary: Mapping[BoundaryKey, Fraction]

    def __post_init__(self) -> None:
        object.__setattr__(self, "psi_sigma", exact(self.psi_sigma))
        object.__setattr__(self, "delta_s", exact(self.delta_s))
        object.__setattr__(self, "delta", exact(self.delta))
        object.__setattr__(self, "psi_tau", tuple(exact(v) for v in self.psi_tau))
        if len(self.psi_tau) != self.ambient.m:
            raise ValueError(
                f"psi_tau needs one entry per weight-one section "
                f"({self.ambient.m}), got {len(self.psi_tau)}")
        cleaned: dict[BoundaryKey, Fraction] = {}
        for key, value in dict(self.boundary or {}).items():
            if not isinstance(key, BoundaryKey):
                key = BoundaryKey(*key)
            value = exact(value)
            if not key.is_admissible(self.ambient):
                raise InvalidBoundaryKey(
                    f"boundary key ({key.label()}) inadmissible on ({self.ambient.label()})")
            if not key.is_canonical(self.ambient):
                raise InvalidBoundaryKey(
                    f"boundary key ({key.label()}) is not canonical on ({self.ambient.label()})")
            if value != 0:
                cleaned[key] = value
        object.__setattr__(self, "boundary", cleaned)

    def tau_coefficient(self) -> Fraction | None:
        """The common psi_tau value, or None when m = 0.

        Raises UnequalTauCoefficients when the entries disagree.
        """
        if not self.psi_tau:
            return None
        first = self.psi_tau[0]
        if any(v != first for v in self.psi_tau):
            raise UnequalTauCoefficients(
                f"psi_tau entries differ: {[str(v) for v in self.psi_tau]}")
        return first

    def is_zero(self) -> bool:
        return (self.psi_sigma == 0 and self.delta_s == 0 and self.delta == 0
                and all(v == 0 for v in self.psi_tau) and not self.boundary)


def zero_class(ambient: WeightVector) -> DivisorClass:
    return DivisorClass(ambient, Fraction(0), (Fraction(0),) * ambient.m,
                        Fraction(0), Fraction(0), {})


def dk_class(ambient: WeightVector, c) -> DivisorClass:
    """The ray c*psi_sigma + (2c-1)*delta_s + psi_tau - delta.

    The collision coefficient is stored for every ambient; at k = 1 the
    collision class itself vanishes on honest families (disjoint sections),
    which is where the usual display c*psi - delta comes from.
    """
    c = exact(c)
    return DivisorClass(ambient, c, (Fraction(1),) * ambient.m,
                        2 * c - 1, Fraction(-1), {})


@dataclass(frozen=True)
class LogCanonicalForm:
    """psi + (alpha - 2) delta on the unweighted space, plus its normalization.

    The normalized form is the 1/(2 - alpha) multiple c*psi - delta, the
    representative with delta-coefficient exactly -1.
    """

    raw: DivisorClass
    c: Fraction
    normalized: DivisorClass


def alpha_to_c(alpha) -> Fraction:
    """c = 1/(2 - alpha). Raises ZeroDivisionError at alpha = 2."""
    return 1 / (2 - exact(alpha))


def c_to_alpha(c) -> Fraction:
    """alpha = 2 - 1/c. Raises ZeroDivisionError at c = 0."""
    return 2 - 1 / exact(c)


def alpha_c_convert(x, direction: str) -> Fraction:
    """Convert between the log-canonical parameter and the ray parameter.

    direction is "to_c" (x is alpha) or "to_alpha" (x is c); the two maps
    are mutually inverse on their domains.
    """
    if direction == "to_c":
        return alpha_to_c(x)
    if direction == "to_alpha":
        return c_to_alpha(x)
    raise ValueError(f"direction must be 'to_c' or 'to_alpha', got {direction!r}")


def log_canonical_class(n: int, alpha) -> LogCanonicalForm:
    """psi + (alpha - 2) delta on the unweighted space with n points, alpha in [0, 1]."""
    alpha = exact(alpha)
    if not 0 <= alpha <= 1:
        raise AlphaOutOfRange(f"alpha must lie in [0, 1], got {alpha}")
    ambient = make_weights(n, 0, 1)
    raw = DivisorClass(ambient, Fraction(1), (), Fraction(0), alpha - 2, {})
    c = alpha_to_c(alpha)
    normalized = DivisorClass(ambient, c, (), Fraction(0), Fraction(-1), {})
    return LogCanonicalForm(raw, c, normalized)


def class_combine(terms: Sequence[tuple[object, DivisorClass]]) -> DivisorClass:
    """Exact linear combination sum(scalar * class) over a shared ambient."""
    if not terms:
        raise ValueError("class_combine needs at least one term")
    ambient = terms[0][1].ambient
    psi_sigma = Fraction(0)
    psi_tau = [Fraction(0)] * ambient.m
    delta_s = Fraction(0)
    delta = Fraction(0)
    boundary: dict[BoundaryKey, Fraction] = {}
    for scalar, cls in terms:
        if cls.ambient != ambient:
            raise AmbientMismatch(
                f"cannot combine classes on ({cls.ambient.label()}) "
                f"and ({ambient.label()})")
        scalar = exact(scalar)
        psi_sigma += scalar * cls.psi_sigma
        delta_s += scalar * cls.delta_s
        delta += scalar * cls.delta
        for idx, value in enumerate(cls.psi_tau):
            psi_tau[idx] += scalar * value
        for key, value in cls.boundary.items():
            boundary[key] = boundary.get(key, Fraction(0)) + scalar * value
    return DivisorClass(ambient, psi_sigma, tuple(psi_tau), delta_s, delta, boundary)


# --- flat key-value record serialization ------------------------------------

def class_to_record(cls: DivisorClass) -> str:
    """Flat key-value text record; rationals as reduced "p/q"."""
    lines = [f"psi_sigma\t{format_rational(cls.psi_sigma)}"]
    for idx, value in enumerate(cls.psi_tau, start=1):
        lines.append(f"psi_tau[{idx}]\t{format_rational(value)}")
    lines.append(f"delta_s\t{format_rational(cls.delta_s)}")
    lines.append(f"delta\t{format_rational(cls.delta)}")
    for key in sorted(cls.boundary):
        lines.append(f"boundary[{key.label()}]\t{format_rational(cls.boundary[key])}")
    return "\n".join(lines) + "\n"


def _record_entries(text: str) -> Iterator[tuple[str, str]]:
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split(None, 1)
        if len(parts) != 2:
            raise RecordFormatError(f"line {lineno}: expected 'key value', got {line!r}")
        yield parts[0], parts[1]


def class_from_record(text: str, ambient: WeightVector) -> DivisorClass:
    """Parse a flat record back into a class on the given ambient space.

    Missing coefficients default to 0; unknown or repeated keys are errors.
    Lines starting with '#' are comments.
    """
    psi_sigma = Fraction(0)
    delta_s = Fraction(0)
    delta = Fraction(0)
    psi_tau = [Fraction(0)] * ambient.m
    boundary: dict[BoundaryKey, Fraction] = {}
    seen: set[str] = set()
    for key, raw_value in _record_entries(text):
        if key in seen:
            raise RecordFormatError(f"repeated key {key!r}")
        seen.add(key)
        try:
            value = parse_rational(raw_value)
        except ValueError as err:
            raise RecordFormatError(f"{key}: {err}") from None
        if key == "psi_sigma":
            psi_sigma = value
        elif key == "delta_s":
            delta_s = value
        elif key == "delta":
            delta = value
        elif key.startswith("psi_tau[") and key.endswith("]"):
            try:
                idx = int(key[len("psi_tau["):-1])
            except ValueError:
                raise RecordFormatError(f"bad psi_tau index in {key!r}") from None
            if not 1 <= idx <= ambient.m:
                raise RecordFormatError(
                    f"psi_tau index {idx} out of range 1..{ambient.m}")
            psi_tau[idx - 1] = value
        elif key.startswith("boundary[") and key.endswith("]"):
            body = key[len("boundary["):-1]
            try:
                i_text, j_text = body.split(",")
                bkey = canonical_boundary_key(ambient, int(i_text), int(j_text))
            except (ValueError, InvalidBoundaryKey) as err:
                raise RecordFormatError(f"bad boundary key {key!r}: {err}") from None
            boundary[bkey] = value
        else:
            raise RecordFormatError(f"unknown key {key!r}")
    try:
        return DivisorClass(ambient, psi_sigma, tuple(psi_tau), delta_s, delta,
                            boundary)
    except ValueError as err:
        raise RecordFormatError(str(err)) from None
