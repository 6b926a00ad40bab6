"""Command-line front end.

Subcommands: `class` (constructors and transport maps for divisor-class
records), `family` (validation and exact evaluation of family files),
`certify` (positivity certificates), `thresholds` (case table per k), and
`fixtures` (recomputed-constant and identity checks).

Exit codes: 0 success, 1 data or validation error, 2 certification or
fixture failure. All rationals read and print as reduced "p/q".
"""

from __future__ import annotations

import json
import sys
from fractions import Fraction

import click

from . import families as fam
from . import morphisms as mor
from . import positivity as pos
from .divisors import (
    class_from_record,
    class_to_record,
    dk_class,
    log_canonical_class,
    make_weights,
)
from .errors import NefcertError
from .rational import format_rational, parse_rational


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


def _rat(text: str, flag: str) -> Fraction:
    try:
        return parse_rational(text)
    except ValueError as err:
        _fail(f"{flag}: {err}")


def _int(text: str, flag: str) -> int:
    try:
        return int(text, 10)
    except ValueError:
        _fail(f"{flag}: expected an integer, got {text!r}")


def _weights(n: str, m: str, k: str):
    try:
        return make_weights(_int(n, "--n"), _int(m, "--m"), _int(k, "--k"))
    except NefcertError as err:
        _fail(str(err))


def _class_json(cls) -> str:
    payload = {
        "n": cls.ambient.n,
        "m": cls.ambient.m,
        "k": cls.ambient.k,
        "psi_sigma": format_rational(cls.psi_sigma),
        "psi_tau": [format_rational(v) for v in cls.psi_tau],
        "delta_s": format_rational(cls.delta_s),
        "delta": format_rational(cls.delta),
        "boundary": {key.label(): format_rational(value)
                     for key, value in sorted(cls.boundary.items())},
    }
    return json.dumps(payload, indent=2) + "\n"


def _emit_class(cls, as_json: bool) -> None:
    if as_json:
        click.echo(_class_json(cls), nl=False)
    else:
        click.echo(f"# ambient n={cls.ambient.n} m={cls.ambient.m} k={cls.ambient.k}")
        click.echo(class_to_record(cls), nl=False)


@click.group()
def main() -> None:
    """Exact divisor-class calculus and positivity certificates."""


# --- class subcommands ---------------------------------------------------------

@main.group("class")
def class_group() -> None:
    """Divisor-class constructors and transport maps."""


_WEIGHT_FLAGS = [
    click.option("--n", "n", required=True, help="count of weight-1/k sections"),
    click.option("--m", "m", required=True, help="count of weight-1 sections"),
    click.option("--k", "k", required=True, help="weight denominator"),
]


def _with_weights(command):
    for flag in reversed(_WEIGHT_FLAGS):
        command = flag(command)
    return command


def _read_input_class(ambient, in_path, use_dk, c_text, flag_ctx):
    if use_dk:
        if c_text is None:
            _fail(f"{flag_ctx}: --dk needs --c")
        return dk_class(ambient, _rat(c_text, "--c"))
    if in_path is not None:
        with open(in_path, "r", encoding="utf-8") as handle:
            text = handle.read()
    else:
        text = sys.stdin.read()
    try:
        return class_from_record(text, ambient)
    except NefcertError as err:
        _fail(str(err))


@class_group.command("dk")
@_with_weights
@click.option("--c", "c_text", required=True, help="ray parameter, p/q")
@click.option("--json", "as_json", is_flag=True)
def class_dk(n, m, k, c_text, as_json) -> None:
    """The ray c*psi_sigma + (2c-1)*delta_s + psi_tau - delta."""
    weights = _weights(n, m, k)
    _emit_class(dk_class(weights, _rat(c_text, "--c")), as_json)


@class_group.command("logcanonical")
@click.option("--n", "n", required=True)
@click.option("--alpha", "alpha_text", required=True, help="parameter in [0,1], p/q")
@click.option("--json", "as_json", is_flag=True)
def class_logcanonical(n, alpha_text, as_json) -> None:
    """psi + (alpha-2)*delta on the unweighted space, with its normalization."""
    alpha = _rat(alpha_text, "--alpha")
    try:
        form = log_canonical_class(_int(n, "--n"), alpha)
    except NefcertError as err:
        _fail(str(err))
    if as_json:
        payload = {
            "raw": json.loads(_class_json(form.raw)),
            "normalized_c": format_rational(form.c),
            "normalized": json.loads(_class_json(form.normalized)),
        }
        click.echo(json.dumps(payload, indent=2))
        return
    click.echo(f"# ambient n={form.raw.ambient.n} m=0 k=1")
    click.echo(f"# normalized_c {format_rational(form.c)}")
    click.echo(class_to_record(form.raw), nl=False)


@class_group.command("push")
@_with_weights
@click.option("--in", "in_path", type=click.Path(exists=True), default=None)
@click.option("--dk", "use_dk", is_flag=True,
              help="use the dk ray on the unweighted source as input")
@click.option("--c", "c_text", default=None)
@click.option("--json", "as_json", is_flag=True)
def class_push(n, m, k, in_path, use_dk, c_text, as_json) -> None:
    """Push a psi/delta class forward from the unweighted space onto (n,m,k)."""
    target = _weights(n, m, k)
    try:
        source = make_weights(target.n + target.m, 0, 1)
        cls = _read_input_class(source, in_path, use_dk, c_text, "push")
        result = mor.pushforward_reduction(cls, target)
    except NefcertError as err:
        _fail(str(err))
    _emit_class(result, as_json)


@class_group.command("pull-reduction")
@_with_weights
@click.option("--in", "in_path", type=click.Path(exists=True), default=None)
@click.option("--dk", "use_dk", is_flag=True)
@click.option("--c", "c_text", default=None)
@click.option("--json", "as_json", is_flag=True)
def class_pull_reduction(n, m, k, in_path, use_dk, c_text, as_json) -> None:
    """Pull a class on (n,m,k) back along the weight reduction from (n,m,k-1)."""
    target = _weights(n, m, k)
    try:
        cls = _read_input_class(target, in_path, use_dk, c_text, "pull-reduction")
        result = mor.pullback_reduction(cls)
    except NefcertError as err:
        _fail(str(err))
    if not as_json and target.k >= 2 and not result.boundary:
        click.echo(f"# exceptional boundary[{target.k},0] 0")
    _emit_class(result, as_json)


@class_group.command("pull-replacement")
@_with_weights
@click.option("--in", "in_path", type=click.Path(exists=True), default=None)
@click.option("--dk", "use_dk", is_flag=True)
@click.option("--c", "c_text", default=None)
@click.option("--json", "as_json", is_flag=True)
def class_pull_replacement(n, m, k, in_path, use_dk, c_text, as_json) -> None:
    """Pull a class on (n,m,k) back along the section replacement."""
    target = _weights(n, m, k)
    try:
        cls = _read_input_class(target, in_path, use_dk, c_text, "pull-replacement")
        result = mor.pullback_replacement(cls)
    except NefcertError as err:
        _fail(str(err))
    _emit_class(result, as_json)


# --- family subcommands ----------------------------------------------------------

def _load_family(path: str) -> fam.FamilyModel:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            family = fam.family_from_json(handle.read())
    except OSError as err:
        _fail(str(err))
    except NefcertError as err:
        _fail(f"{path}: {err}")
    return family


def _require_valid(family: fam.FamilyModel, path: str) -> None:
    violations = fam.validate_family(family)
    if violations:
        for violation in violations:
            click.echo(f"{path}: {violation}", err=True)
        sys.exit(1)


@main.group("family")
def family_group() -> None:
    """Validation and exact evaluation of family files."""


@family_group.command("validate")
@click.argument("path", type=click.Path(exists=True))
def family_validate(path) -> None:
    """Report invariant violations; silent exit 0 when none."""
    family = _load_family(path)
    _require_valid(family, path)
    click.echo("valid")


@family_group.command("eval")
@click.argument("path", type=click.Path(exists=True))
@click.option("--class-file", "class_path", type=click.Path(exists=True), default=None)
@click.option("--dk", "use_dk", is_flag=True)
@click.option("--c", "c_text", default=None)
def family_eval(path, class_path, use_dk, c_text) -> None:
    """Pair a divisor class with the family."""
    family = _load_family(path)
    _require_valid(family, path)
    weights = family.weights
    try:
        if use_dk:
            if c_text is None:
                _fail("eval: --dk needs --c")
            cls = dk_class(weights, _rat(c_text, "--c"))
        elif class_path is not None:
            with open(class_path, "r", encoding="utf-8") as handle:
                cls = class_from_record(handle.read(), weights)
        else:
            _fail("eval: need --dk --c or --class-file")
        value = fam.evaluate_class(cls, family)
    except NefcertError as err:
        _fail(str(err))
    click.echo(format_rational(value))


@family_group.command("numbers")
@click.argument("path", type=click.Path(exists=True))
def family_numbers(path) -> None:
    """Intersection numbers of the family with the basis classes."""
    family = _load_family(path)
    _require_valid(family, path)
    try:
        report = fam.intersection_numbers(family)
    except NefcertError as err:
        _fail(str(err))
    click.echo(f"psi_sigma\t{format_rational(report.psi_sigma_B)}")
    click.echo(f"psi_tau\t{format_rational(report.psi_tau_B)}")
    click.echo(f"delta_s\t{format_rational(report.delta_s_B)}")
    click.echo(f"delta\t{format_rational(report.delta_B)}")
    for key in sorted(report.boundary_counts):
        click.echo(f"boundary[{key.label()}]\t{report.boundary_counts[key]}")


@family_group.command("fvalues")
@click.argument("path", type=click.Path(exists=True))
def family_fvalues(path) -> None:
    """Per-level potentials: i, F_delta, F_sigma, F_tau, F_sigma_tau."""
    family = _load_family(path)
    _require_valid(family, path)
    click.echo("# i\tF_delta\tF_sigma\tF_tau\tF_sigma_tau")
    for level in range(family.n_steps + 1):
        values = fam.f_values(family, level)
        click.echo(str(level) + "\t" + "\t".join(format_rational(v) for v in values))


@family_group.command("gseries")
@click.argument("path", type=click.Path(exists=True))
@click.option("--a", "a_text", required=True)
@click.option("--b", "b_text", required=True)
def family_gseries(path, a_text, b_text) -> None:
    """The combined potential per level for the (a, b) combination."""
    family = _load_family(path)
    _require_valid(family, path)
    a = _rat(a_text, "--a")
    b = _rat(b_text, "--b")
    try:
        coeffs = pos.CoefficientVector.from_ab(family.weights.n, family.weights.m, a, b)
        series = pos.g_series(family, coeffs)
    except NefcertError as err:
        _fail(str(err))
    click.echo("# i\tG")
    for level, value in enumerate(series):
        click.echo(f"{level}\t{format_rational(value)}")


# --- certify ----------------------------------------------------------------------

def _certificate_json(cert: pos.Certificate) -> str:
    payload = {
        "verdict": cert.verdict,
        "n": cert.weights.n,
        "m": cert.weights.m,
        "k": cert.weights.k,
        "c": format_rational(cert.c),
        "a": format_rational(cert.a) if cert.a is not None else None,
        "b": format_rational(cert.b) if cert.b is not None else None,
        "minimizer": [cert.witness.r1, cert.witness.r2] if cert.witness else None,
        "minimizer_value": (format_rational(cert.witness.value)
                            if cert.witness else None),
        "margin": format_rational(cert.margin) if cert.margin is not None else None,
        "strata": [[w.n, w.m, w.k] for w in cert.strata_checked],
        "zero_strata": [[w.n, w.m, w.k] for w in cert.zero_strata],
        "notes": list(cert.notes),
    }
    return json.dumps(payload, indent=2) + "\n"


def _emit_certificate(cert: pos.Certificate, as_json: bool) -> None:
    if as_json:
        click.echo(_certificate_json(cert), nl=False)
        return
    click.echo(f"verdict\t{cert.verdict}")
    click.echo(f"weights\t{cert.weights.label()}")
    click.echo(f"c\t{format_rational(cert.c)}")
    click.echo(f"a\t{format_rational(cert.a) if cert.a is not None else '-'}")
    click.echo(f"b\t{format_rational(cert.b) if cert.b is not None else '-'}")
    if cert.witness is not None:
        click.echo(f"minimizer\t{cert.witness.r1},{cert.witness.r2}"
                   f"\t{format_rational(cert.witness.value)}")
    else:
        click.echo("minimizer\t-")
    click.echo(f"margin\t{format_rational(cert.margin) if cert.margin is not None else '-'}")
    click.echo("strata\t" + " ".join(w.label() for w in cert.strata_checked))
    click.echo("zero_strata\t"
               + (" ".join(w.label() for w in cert.zero_strata) or "-"))
    for note in cert.notes:
        click.echo(f"# {note}")


@main.command("certify")
@_with_weights
@click.option("--c", "c_text", required=True)
@click.option("--eps", "eps_entries", multiple=True,
              help='boundary perturbation "i,j=p/q"; repeatable')
@click.option("--generic-only", is_flag=True,
              help="certify generically smooth families of (n,m,k) only")
@click.option("--json", "as_json", is_flag=True)
@click.pass_context
def certify(ctx, n, m, k, c_text, eps_entries, generic_only, as_json) -> None:
    """Universal positivity certificate for the dk ray at c."""
    weights = _weights(n, m, k)
    c = _rat(c_text, "--c")
    eps = {}
    for entry in eps_entries:
        head, _, tail = entry.partition("=")
        try:
            i_text, j_text = head.split(",")
            key = (int(i_text), int(j_text))
        except ValueError:
            _fail(f'--eps: expected "i,j=p/q", got {entry!r}')
        eps[key] = _rat(tail, "--eps")
    try:
        if generic_only:
            cert = pos.certify_generic(weights.n, weights.m, weights.k, c,
                                       eps={pos.BoundaryKey(*key): value
                                            for key, value in eps.items()})
        elif eps:
            cert = pos.perturbed_certify(weights.n, weights.m, weights.k, c, eps)
        else:
            cert = pos.certify_interval(weights.n, weights.m, weights.k, c)
    except NefcertError as err:
        _fail(str(err))
    _emit_certificate(cert, as_json)
    if cert.verdict != pos.STRICTLY_POSITIVE:
        ctx.exit(2)


# --- thresholds -------------------------------------------------------------------

@main.command("thresholds")
@click.option("--k", "k_text", required=True)
@click.option("--nmax", "nmax_text", default="10")
@click.option("--mmax", "mmax_text", default="3")
def thresholds(k_text, nmax_text, mmax_text) -> None:
    """Case table: n, m, case, c or interval, c0, strict, for valid (n, m)."""
    k = _int(k_text, "--k")
    nmax = _int(nmax_text, "--nmax")
    mmax = _int(mmax_text, "--mmax")
    try:
        lo, hi = pos.ample_interval(k)
    except NefcertError as err:
        _fail(str(err))
    hi_text = format_rational(hi) if hi is not None else "unbounded"
    click.echo(f"# ample_interval\t({format_rational(lo)}, {hi_text}" +
               ("]" if hi is not None else ")"))
    if k < 2:
        return
    click.echo("# n\tm\tcase\tc\tc0\tstrict")
    for n in range(nmax + 1):
        for m in range(mmax + 1):
            try:
                threshold = pos.threshold_c(n, m, k)
            except NefcertError:
                continue
            c0, strict = pos.c0_lower(n, m, k)
            click.echo(f"{n}\t{m}\t{threshold.case}\t{threshold.describe()}"
                       f"\t{format_rational(c0)}\t{'yes' if strict else 'no'}")


# --- fixtures ---------------------------------------------------------------------

@main.command("fixtures")
@click.pass_context
def fixtures(ctx) -> None:
    """Recompute the transport constants and identities from test families."""
    failures = 0

    def check(fixture: str, detail: str, expected, computed) -> None:
        nonlocal failures
        ok = expected == computed
        failures += 0 if ok else 1
        click.echo(f"{'PASS' if ok else 'FAIL'}\t{fixture}\t{detail}"
                   f"\texpected {expected}\tcomputed {computed}")

    for n in range(5, 13):
        weighted, stable = mor.pushforward_test_families(n)
        before = fam.intersection_numbers(weighted)
        after = fam.intersection_numbers(stable)
        click.echo(f"# pushforward-constants n={n}: product surface "
                   f"psi={before.psi_sigma_B} delta_s={before.delta_s_B} "
                   f"delta={before.delta_B}; stable model psi={after.psi_sigma_B} "
                   f"delta_s={after.delta_s_B} delta={after.delta_B} "
                   f"(collisions resolved: {after.delta_B})")
        check("pushforward-constants", f"n={n}", (Fraction(2), Fraction(1)),
              mor.derive_pushforward_constants(n))
        check("pushforward-collisions", f"n={n}", Fraction(n - 1), after.delta_B)

    for k in range(2, 11):
        n = 2 * k + 1
        numbers = mor.pullback_test_numbers(n, 0, k)
        click.echo(f"# pullback-constant k={k}: " + " ".join(
            f"{name}={format_rational(value)}" for name, value in sorted(numbers.items())))
        check("pullback-constant", f"k={k}", Fraction(-k),
              mor.derive_pullback_constant(n, 0, k))
        delta_rule = -numbers["delta"] / numbers["exceptional"]
        check("pullback-delta-rule", f"k={k}", Fraction(-1), delta_rule)

    for k in range(2, 21):
        n = 2 * k + 1
        c = Fraction(k + 1, 2 * k)
        transported = mor.pullback_reduction(dk_class(make_weights(n, 0, k), c))
        check("reduction-functoriality", f"k={k}",
              dk_class(make_weights(n, 0, k - 1), c), transported)

    for k in range(2, 11):
        c0 = Fraction(k + 1, 2 * k)
        for eps in (Fraction(1, 100), Fraction(1, 7)):
            pulled = mor.pullback_replacement(
                dk_class(make_weights(2 * k + 1, 1, k), c0 + eps))
            check("replacement-endpoint", f"k={k} eps={eps}",
                  1 - eps * k * (k - 2), pulled.psi_tau[-1])

    for k in range(2, 11):
        n = 2 * k + 1
        parts = mor.pullback_test_curve(n, 0, k)
        value = fam.stratified_evaluate(
            dk_class(make_weights(n, 0, k - 1), Fraction(k + 1, 2 * k)), parts)
        check("contracted-curve-zero", f"k={k}", Fraction(0), value)

    if failures:
        click.echo(f"{failures} fixture(s) failed", err=True)
        ctx.exit(2)


if __name__ == "__main__":
    main()
