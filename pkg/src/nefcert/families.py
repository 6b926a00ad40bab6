"""One-parameter families of weighted stable curves as blow-down chains.

A family is encoded by the chain of surfaces between the resolved family
(level 0) and a terminal ruled surface (level N): one blow-down per step,
recorded from the family downward, plus the self-intersections of the
section images on the terminal surface. Intersection numbers at any level
follow by pure bookkeeping: contracting a (-1)-curve that meets a set S of
sections lowers every pairwise product and self-intersection within S by 1.

On the terminal ruled surface the difference of two sections is a multiple
of the fiber class, so pairwise products are forced to (e_j + e_l)/2 by the
self-intersections; those must share one parity for the products to be
integers.

Abstract families keep only the per-step section counts (r1, r2), enough
for the telescoped potentials; concrete families carry the index sets and
terminal data and support exact evaluation of divisor classes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .divisors import (
    BoundaryKey,
    DivisorClass,
    WeightVector,
    canonical_boundary_key,
    make_weights,
)
from .errors import (
    AmbientMismatch,
    ConcreteAbstractMismatch,
    ConcreteOnly,
    FamilyFormatError,
    InvalidCoefficients,
    ShapeNotFunctorial,
)
from .rational import exact

CONCRETE = "concrete"
ABSTRACT = "abstract"


@dataclass(frozen=True)
class BlowdownStep:
    """One blow-down: the contracted curve meets r1 light and r2 heavy sections."""

    r1: int
    r2: int
    sigma: frozenset[int] | None = None
    tau: frozenset[int] | None = None

    @classmethod
    def concrete(cls, sigma: Iterable[int], tau: Iterable[int] = ()) -> "BlowdownStep":
        sigma_set = frozenset(int(x) for x in sigma)
        tau_set = frozenset(int(x) for x in tau)
        return cls(len(sigma_set), len(tau_set), sigma_set, tau_set)

    @classmethod
    def abstract(cls, r1: int, r2: int) -> "BlowdownStep":
        return cls(int(r1), int(r2))

    @property
    def is_concrete(self) -> bool:
        return self.sigma is not None and self.tau is not None


@dataclass(frozen=True)
class FamilyModel:
    """Blow-down chain over a terminal ruled surface.

    steps[0] is adjacent to the actual family (level 0); steps[-1] is the
    last contraction onto the terminal surface (level N).
    """

    weights: WeightVector
    mode: str
    steps: tuple[BlowdownStep, ...]
    final_e_sigma: tuple[int, ...] | None = None
    final_e_tau: tuple[int, ...] | None = None

    @classmethod
    def concrete(cls, weights: WeightVector, steps: Sequence[BlowdownStep],
                 final_e_sigma: Sequence[int],
                 final_e_tau: Sequence[int] = ()) -> "FamilyModel":
        return cls(weights, CONCRETE, tuple(steps),
                   tuple(int(e) for e in final_e_sigma),
                   tuple(int(e) for e in final_e_tau))

    @classmethod
    def abstract(cls, weights: WeightVector,
                 counts: Sequence[tuple[int, int]]) -> "FamilyModel":
        return cls(weights, ABSTRACT,
                   tuple(BlowdownStep.abstract(r1, r2) for r1, r2 in counts))

    @property
    def n_steps(self) -> int:
        return len(self.steps)


@dataclass(frozen=True)
class IntersectionReport:
    """Exact pairing data of one concrete family with the tautological basis."""

    psi_sigma_B: Fraction
    psi_tau_B: Fraction
    delta_s_B: Fraction
    delta_B: Fraction
    boundary_counts: Mapping[BoundaryKey, int]


def validate_family(family: FamilyModel) -> list[str]:
    """All invariant violations, each naming the offending step or matrix entry."""
    w = family.weights
    violations: list[str] = []
    if family.mode not in (CONCRETE, ABSTRACT):
        return [f"mode: expected '{CONCRETE}' or '{ABSTRACT}', got {family.mode!r}"]

    for idx, step in enumerate(family.steps):
        path = f"steps[{idx}]"
        if not (0 <= step.r1 <= w.n):
            violations.append(f"{path}.r1: {step.r1} out of range 0..{w.n}")
            continue
        if not (0 <= step.r2 <= w.m):
            violations.append(f"{path}.r2: {step.r2} out of range 0..{w.m}")
            continue
        contracted = Fraction(step.r1, w.k) + step.r2
        if contracted <= 1:
            violations.append(
                f"{path}: contracted component weight r1/k + r2 = {contracted} is not > 1")
        rest = Fraction(w.n - step.r1, w.k) + (w.m - step.r2)
        if rest <= 1:
            violations.append(
                f"{path}: complement weight (n-r1)/k + (m-r2) = {rest} is not > 1")
        if family.mode == CONCRETE:
            if not step.is_concrete:
                violations.append(f"{path}: concrete family needs explicit section sets")
            else:
                if step.sigma and not set(step.sigma) <= set(range(1, w.n + 1)):
                    violations.append(f"{path}.sigma: indices outside 1..{w.n}")
                if step.tau and not set(step.tau) <= set(range(1, w.m + 1)):
                    violations.append(f"{path}.tau: indices outside 1..{w.m}")
        elif step.is_concrete:
            violations.append(f"{path}: abstract family carries section sets")

    if family.mode == ABSTRACT:
        if family.final_e_sigma is not None or family.final_e_tau is not None:
            violations.append("final_e_sigma: terminal data on an abstract family")
        return violations

    if family.final_e_sigma is None or family.final_e_tau is None:
        violations.append("final_e_sigma: concrete family needs terminal self-intersections")
        return violations
    if len(family.final_e_sigma) != w.n:
        violations.append(
            f"final_e_sigma: expected {w.n} entries, got {len(family.final_e_sigma)}")
        return violations
    if len(family.final_e_tau) != w.m:
        violations.append(
            f"final_e_tau: expected {w.m} entries, got {len(family.final_e_tau)}")
        return violations

    all_e = list(family.final_e_sigma) + list(family.final_e_tau)
    if all_e:
        parity = all_e[0] % 2
        for pos, e in enumerate(all_e):
            if e % 2 != parity:
                field = ("final_e_sigma" if pos < w.n else "final_e_tau")
                offset = pos if pos < w.n else pos - w.n
                violations.append(
                    f"{field}[{offset}]: parity differs from the other self-intersections")
        if any(e % 2 != parity for e in all_e):
            return violations

    if violations:
        return violations

    matrix = level_matrix(family, 0)
    n = w.n
    for a in range(n):
        for b in range(a + 1, n):
            if matrix[a][b] < 0:
                violations.append(
                    f"level 0: sigma[{a + 1}].sigma[{b + 1}] = {matrix[a][b]} is negative")
    for t in range(w.m):
        row = n + t
        for other in range(n + w.m):
            if other == row:
                continue
            if matrix[row][other] != 0:
                which = (f"sigma[{other + 1}]" if other < n else f"tau[{other - n + 1}]")
                violations.append(
                    f"level 0: tau[{t + 1}].{which} = {matrix[row][other]}; "
                    "weight-one sections must stay disjoint")
    return violations


def level_matrix(family: FamilyModel, level: int) -> list[list[int]]:
    """Symmetric intersection matrix of the section images on the level surface.

    Combined indexing: sigma sections first (0..n-1), tau sections after
    (n..n+m-1). Entry (x, y) is the pairwise product, diagonal entries the
    self-intersections. Starting from the terminal surface, each step below
    the requested level subtracts 1 from every entry whose two indices both
    meet the contracted curve (diagonal included).
    """
    if family.mode != CONCRETE:
        raise ConcreteOnly("level matrices need terminal-surface data")
    n_steps = family.n_steps
    if not 0 <= level <= n_steps:
        raise ValueError(f"level must lie in 0..{n_steps}, got {level}")
    w = family.weights
    e = list(family.final_e_sigma) + list(family.final_e_tau)
    size = w.n + w.m
    parity = {v % 2 for v in e}
    if len(parity) > 1:
        raise ValueError("terminal self-intersections have mixed parities")
    matrix = [[(e[x] + e[y]) // 2 for y in range(size)] for x in range(size)]
    for x in range(size):
        matrix[x][x] = e[x]
    for step in family.steps[level:]:
        members = sorted({s - 1 for s in step.sigma} | {w.n + t - 1 for t in step.tau})
        for x in members:
            for y in members:
                matrix[x][y] -= 1
    return matrix


def intersection_numbers(family: FamilyModel) -> IntersectionReport:
    """Exact pairings of the family with the tautological and boundary classes."""
    w = family.weights
    matrix = level_matrix(family, 0)
    n = w.n
    psi_sigma = -sum(Fraction(matrix[i][i]) for i in range(n))
    psi_tau = -sum(Fraction(matrix[n + t][n + t]) for t in range(w.m))
    delta_s = sum(Fraction(matrix[a][b]) for a in range(n) for b in range(a + 1, n))
    counts: dict[BoundaryKey, int] = {}
    for step in family.steps:
        key = canonical_boundary_key(w, step.r1, step.r2)
        counts[key] = counts.get(key, 0) + 1
    return IntersectionReport(psi_sigma, psi_tau, Fraction(delta_s),
                              Fraction(family.n_steps), counts)


def _step_drops(w: WeightVector, step: BlowdownStep) -> tuple[Fraction, Fraction, Fraction, Fraction]:
    """(delta, sigma, tau, sigma-tau) potential drops of one step.

    Pair sums with fewer than two members vanish: the sigma drop is 0 when
    n <= 1, the tau drop when m <= 1, the mixed drop when nm = 0.
    """
    n, m = w.n, w.m
    d_delta = Fraction(1)
    d_sigma = Fraction(step.r1 * (n - step.r1), n - 1) if n >= 2 else Fraction(0)
    d_tau = Fraction(step.r2 * (m - step.r2), m - 1) if m >= 2 else Fraction(0)
    if n >= 1 and m >= 1:
        d_mixed = Fraction(step.r1 * (m - step.r2) + step.r2 * (n - step.r1), n * m)
    else:
        d_mixed = Fraction(0)
    return d_delta, d_sigma, d_tau, d_mixed


def f_values(family: FamilyModel, level: int) -> tuple[Fraction, Fraction, Fraction, Fraction]:
    """(F_delta, F_sigma, F_tau, F_sigma_tau) at the given level.

    The values telescope the per-step drops from the terminal surface, where
    all four potentials vanish. On concrete families the same quantities are
    recomputed from the level matrix as weighted sums of squared section
    differences and must agree exactly.
    """
    w = family.weights
    n_steps = family.n_steps
    if not 0 <= level <= n_steps:
        raise ValueError(f"level must lie in 0..{n_steps}, got {level}")
    f_delta = Fraction(n_steps - level)
    f_sigma = Fraction(0)
    f_tau = Fraction(0)
    f_mixed = Fraction(0)
    for step in family.steps[level:]:
        _, d_sigma, d_tau, d_mixed = _step_drops(w, step)
        f_sigma += d_sigma
        f_tau += d_tau
        f_mixed += d_mixed

    if family.mode == CONCRETE:
        matrix = level_matrix(family, level)
        n, m = w.n, w.m

        def square(x: int, y: int) -> int:
            return matrix[x][x] + matrix[y][y] - 2 * matrix[x][y]

        g_sigma = Fraction(0)
        if n >= 2:
            g_sigma = -Fraction(
                sum(square(a, b) for a in range(n) for b in range(a + 1, n)), n - 1)
        g_tau = Fraction(0)
        if m >= 2:
            g_tau = -Fraction(
                sum(square(n + a, n + b) for a in range(m) for b in range(a + 1, m)), m - 1)
        g_mixed = Fraction(0)
        if n >= 1 and m >= 1:
            g_mixed = -Fraction(
                sum(square(a, n + b) for a in range(n) for b in range(m)), n * m)
        if (g_sigma, g_tau, g_mixed) != (f_sigma, f_tau, f_mixed):
            raise ConcreteAbstractMismatch(
                f"level {level}: matrix potentials {(g_sigma, g_tau, g_mixed)} "
                f"differ from telescoped {(f_sigma, f_tau, f_mixed)}")
    return f_delta, f_sigma, f_tau, f_mixed


def evaluate_class(cls: DivisorClass, family: FamilyModel) -> Fraction:
    """Pair a divisor class with a concrete family.

    The psi_tau entries must agree: the family data only tracks the
    aggregate weight-one pairing, never a single section's.
    """
    if cls.ambient != family.weights:
        raise AmbientMismatch(
            f"class on ({cls.ambient.label()}) against family on "
            f"({family.weights.label()})")
    report = intersection_numbers(family)
    value = (cls.psi_sigma * report.psi_sigma_B
             + cls.delta_s * report.delta_s_B
             + cls.delta * report.delta_B)
    tau = cls.tau_coefficient()
    if tau is not None:
        value += tau * report.psi_tau_B
    for key, coefficient in cls.boundary.items():
        value += coefficient * report.boundary_counts.get(key, 0)
    return value


def combination_value(family: FamilyModel, a, b) -> Fraction:
    """a*F_sigma(0) + b*F_sigma_tau(0) + ((m-b)/m)*F_tau(0) - F_delta(0).

    With m = 0 the b-terms have no meaning and b must be 0. On concrete
    families this equals (a + b/n) psi_sigma.B + (2a/(n-1)) delta_s.B
    + psi_tau.B - delta.B.
    """
    a = exact(a)
    b = exact(b)
    m = family.weights.m
    if m == 0 and b != 0:
        raise InvalidCoefficients("b must be 0 when there are no weight-one sections")
    f_delta, f_sigma, f_tau, f_mixed = f_values(family, 0)
    value = a * f_sigma + b * f_mixed - f_delta
    if m >= 1:
        value += (m - b) * f_tau / m
    return value


def stratified_evaluate(cls: DivisorClass,
                        parts: Sequence[tuple[WeightVector, FamilyModel]]) -> Fraction:
    """Evaluate a factor-restricting class on a family with reducible fibers.

    Only the shape a*psi_sigma + b*delta_s + c*(psi_tau - delta) restricts to
    the divisor of the same name on every boundary factor; attaching nodes
    trade a delta contribution on the total family for a psi_tau contribution
    on the factor, which is why the two coefficients must be opposite.
    """
    if cls.boundary:
        raise ShapeNotFunctorial("nodal boundary coefficients do not restrict to factors")
    c_val = -cls.delta
    if any(v != c_val for v in cls.psi_tau):
        raise ShapeNotFunctorial(
            "psi_tau coefficients must all equal the negated delta coefficient")
    total = Fraction(0)
    for weights, family in parts:
        if family.weights != weights:
            raise AmbientMismatch(
                f"part family on ({family.weights.label()}) listed under "
                f"({weights.label()})")
        restricted = DivisorClass(weights, cls.psi_sigma, (c_val,) * weights.m,
                                  cls.delta_s, -c_val, {})
        total += evaluate_class(restricted, family)
    return total


# --- family file format -------------------------------------------------------

def family_to_json(family: FamilyModel) -> str:
    """Serialize to the JSON family file format (bit-exact integers)."""
    steps: list[dict] = []
    for step in family.steps:
        if family.mode == CONCRETE:
            steps.append({"sigma": sorted(step.sigma or ()),
                          "tau": sorted(step.tau or ())})
        else:
            steps.append({"r1": step.r1, "r2": step.r2})
    payload: dict = {
        "n": family.weights.n,
        "m": family.weights.m,
        "k": family.weights.k,
        "mode": family.mode,
        "steps": steps,
    }
    if family.mode == CONCRETE:
        payload["final_e_sigma"] = list(family.final_e_sigma or ())
        payload["final_e_tau"] = list(family.final_e_tau or ())
    return json.dumps(payload, indent=2) + "\n"


def _want_int(value, path: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise FamilyFormatError(f"{path}: expected an integer, got {value!r}")
    return value


def _want_int_list(value, path: str) -> list[int]:
    if not isinstance(value, list):
        raise FamilyFormatError(f"{path}: expected a list of integers")
    return [_want_int(v, f"{path}[{i}]") for i, v in enumerate(value)]


def family_from_json(text: str) -> FamilyModel:
    """Parse the JSON family file format; errors carry field paths."""
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as err:
        raise FamilyFormatError(f"not valid JSON: {err}") from None
    if not isinstance(payload, dict):
        raise FamilyFormatError("top level: expected an object")
    for field in ("n", "m", "k", "mode", "steps"):
        if field not in payload:
            raise FamilyFormatError(f"{field}: missing")
    known = {"n", "m", "k", "mode", "steps", "final_e_sigma", "final_e_tau"}
    for field in payload:
        if field not in known:
            raise FamilyFormatError(f"{field}: unknown field")
    weights = make_weights(_want_int(payload["n"], "n"),
                           _want_int(payload["m"], "m"),
                           _want_int(payload["k"], "k"))
    mode = payload["mode"]
    if mode not in (CONCRETE, ABSTRACT):
        raise FamilyFormatError(
            f"mode: expected '{CONCRETE}' or '{ABSTRACT}', got {mode!r}")
    if not isinstance(payload["steps"], list):
        raise FamilyFormatError("steps: expected a list")
    steps: list[BlowdownStep] = []
    for idx, entry in enumerate(payload["steps"]):
        path = f"steps[{idx}]"
        if not isinstance(entry, dict):
            raise FamilyFormatError(f"{path}: expected an object")
        if mode == CONCRETE:
            if set(entry) != {"sigma", "tau"}:
                raise FamilyFormatError(f"{path}: expected keys sigma, tau")
            steps.append(BlowdownStep.concrete(
                _want_int_list(entry["sigma"], f"{path}.sigma"),
                _want_int_list(entry["tau"], f"{path}.tau")))
        else:
            if set(entry) != {"r1", "r2"}:
                raise FamilyFormatError(f"{path}: expected keys r1, r2")
            steps.append(BlowdownStep.abstract(
                _want_int(entry["r1"], f"{path}.r1"),
                _want_int(entry["r2"], f"{path}.r2")))
    if mode == ABSTRACT:
        if "final_e_sigma" in payload or "final_e_tau" in payload:
            raise FamilyFormatError("final_e_sigma: not allowed on abstract families")
        return FamilyModel(weights, ABSTRACT, tuple(steps))
    for field in ("final_e_sigma", "final_e_tau"):
        if field not in payload:
            raise FamilyFormatError(f"{field}: missing (required for concrete families)")
    return FamilyModel.concrete(weights, steps,
                                _want_int_list(payload["final_e_sigma"], "final_e_sigma"),
                                _want_int_list(payload["final_e_tau"], "final_e_tau"))
