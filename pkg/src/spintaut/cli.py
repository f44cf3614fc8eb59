"""Batch command-line surface for exact spin tautological computations.

Every command validates its request, runs the exact computation, and
emits either a JSON document (``--format json``) or aligned text
(``--format text``).  All rationals are printed exactly; no floating
point appears anywhere.  Exit status is 0 on success, 2 on a validation
error, and 3 when a ``verify`` suite finds a violated identity.
"""

import json
import random
import sys

from fractions import Fraction

import click

from .graphs import GraphError
from .hodge import L_series, lambda_class, mumford_defect
from .integrate import (classes_equal, pairing_signature, psi_integral,
                        set_cache)
from .spin import (PolynomialityError, dr_spin, infer_genus, pixton_spin,
                   r_window_start)
from .strata import (StrataError, d_constant, segre_roundtrip_check,
                     segre_spin, segre_spin_mero, stargraph_spin,
                     strata_class_spin)
from .tautology import ambient_dim

SCHEMA = "spintaut/1"

EXIT_VALIDATION = 2
EXIT_VERIFICATION = 3


def _frac(q):
    """Exact decimal-free rendering: ``num/den``, or ``num`` when the
    denominator is one."""
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return "%d/%d" % (q.numerator, q.denominator)


def _term_doc(key, coeff):
    genera, components, legs, edges, kappa, psi_leg, psi_he = key
    return {
        "genera": list(genera),
        "components": list(components),
        "legs": [list(x) for x in legs],
        "edges": [list(x) for x in edges],
        "kappa": [list(x) for x in kappa],
        "psi_legs": [[l, e] for (l, e) in psi_leg],
        "psi_half_edges": [[list(h), e] for (h, e) in psi_he],
        "coeff": _frac(coeff),
    }


def _class_doc(cls):
    return {
        "ambient": [list(x) for x in cls.ambient],
        "terms": [_term_doc(k, v) for k, v in sorted(cls.terms.items())],
    }


def _series_doc(ser):
    return {
        "ambient": [list(x) for x in ser.ambient],
        "coefficients": {str(d): _class_doc(c)
                         for d, c in sorted(ser.coeffs.items())},
    }


def _emit(ctx, doc):
    doc = {"schema": SCHEMA, **doc}
    if ctx.obj["format"] == "json":
        click.echo(json.dumps(doc, sort_keys=True, separators=(",", ":")))
        return
    _emit_text(doc, indent=0)


def _emit_text(node, indent):
    pad = "  " * indent
    if isinstance(node, dict):
        for k in sorted(node):
            v = node[k]
            if isinstance(v, (dict, list)):
                click.echo("%s%s:" % (pad, k))
                _emit_text(v, indent + 1)
            else:
                click.echo("%s%-10s %s" % (pad, k + ":", v))
    elif isinstance(node, list):
        for v in node:
            if isinstance(v, (dict, list)):
                _emit_text(v, indent)
                click.echo("%s-" % pad)
            else:
                click.echo("%s%s" % (pad, v))
    else:
        click.echo("%s%s" % (pad, node))


def _parse_vector(text):
    try:
        return tuple(int(x) for x in text.replace(" ", "").split(","))
    except ValueError:
        raise click.UsageError("expected a comma-separated integer "
                               "vector, got %r" % text)


def _run(ctx, fn):
    try:
        fn()
    except (StrataError, GraphError, ValueError) as err:
        click.echo("validation error: %s" % err, err=True)
        sys.exit(EXIT_VALIDATION)


@click.group()
@click.option("--format", "fmt", type=click.Choice(["json", "text"]),
              default="text", help="Output document format.")
@click.option("--cache", type=click.Path(), envvar="SPINTAUT_CACHE",
              default=None, help="Path of the persistent integral cache.")
@click.option("--threads", type=int, default=1,
              help="Worker cap (computations are single-process).")
@click.pass_context
def main(ctx, fmt, cache, threads):
    """Exact computations with spin tautological classes."""
    ctx.ensure_object(dict)
    ctx.obj["format"] = fmt
    if cache:
        set_cache(cache)


@main.command()
@click.option("--a", "avec", required=True, help="Signature, e.g. 3,-1.")
@click.option("--k", type=int, default=1, show_default=True)
@click.option("--c", type=int, required=True, help="Degree of the class.")
@click.option("--g", type=int, default=None, help="Genus (inferred when "
              "omitted).")
@click.pass_context
def pixton(ctx, avec, k, c, g):
    """Degree-c spin Pixton class (certified r-constant term)."""
    a = _parse_vector(avec)
    _run(ctx, lambda: _emit(ctx, {
        "command": "pixton", "a": list(a), "k": k, "c": c,
        "class": _class_doc(pixton_spin(a, k, c, g))}))


@main.command()
@click.option("--a", "avec", required=True)
@click.option("--k", type=int, default=1, show_default=True)
@click.option("--g", type=int, default=None)
@click.pass_context
def dr(ctx, avec, k, g):
    """Spin double ramification class (degree g)."""
    a = _parse_vector(avec)
    _run(ctx, lambda: _emit(ctx, {
        "command": "dr", "a": list(a), "k": k,
        "class": _class_doc(dr_spin(a, k, g))}))


@main.command()
@click.option("--a", "avec", required=True)
@click.option("--k", type=int, default=1, show_default=True)
@click.pass_context
def stargraph(ctx, avec, k):
    """Star-graph expression for the spin double ramification class."""
    a = _parse_vector(avec)
    _run(ctx, lambda: _emit(ctx, {
        "command": "stargraph", "a": list(a), "k": k,
        "class": _class_doc(stargraph_spin(a, k))}))


@main.command()
@click.option("--a", "avec", required=True,
              help="Odd positive signature, e.g. 1,1.")
@click.option("--g", type=int, required=True)
@click.pass_context
def strata(ctx, avec, g):
    """Signed stratum class of holomorphic differentials with double
    zeros at the markings."""
    a = _parse_vector(avec)
    _run(ctx, lambda: _emit(ctx, {
        "command": "strata", "a": list(a), "g": g,
        "class": _class_doc(strata_class_spin(a, g))}))


@main.command()
@click.option("--g", type=int, required=True)
@click.option("--n", type=int, required=True)
@click.option("--deg", type=int, default=None,
              help="Truncation degree (ambient dimension when omitted).")
@click.pass_context
def segre(ctx, g, n, deg):
    """Signed Segre series of the cone of squares of spin sections."""
    _run(ctx, lambda: _emit(ctx, {
        "command": "segre", "g": g, "n": n,
        "series": _series_doc(segre_spin(g, n, deg))}))


@main.command("segre-mero")
@click.option("--g", type=int, required=True)
@click.option("--n", type=int, required=True)
@click.option("--deg", type=int, default=None)
@click.pass_context
def segre_mero(ctx, g, n, deg):
    """Signed Segre series of the one-pole cone (double pole at the
    first marking)."""
    _run(ctx, lambda: _emit(ctx, {
        "command": "segre-mero", "g": g, "n": n,
        "series": _series_doc(segre_spin_mero(g, n, deg))}))


@main.command()
@click.option("--g", type=int, required=True)
@click.option("--m", type=int, required=True)
@click.pass_context
def dconst(ctx, g, m):
    """Signed count constant d(g, m) of residueless double poles."""
    if g < 0 or m < 0:
        raise click.UsageError("g and m must be nonnegative")
    _run(ctx, lambda: _emit(ctx, {
        "command": "dconst", "g": g, "m": m,
        "value": _frac(d_constant(g, m))}))


@main.command("lambda")
@click.option("--g", type=int, required=True)
@click.option("--n", type=int, required=True)
@click.option("--j", type=int, required=True, help="Chern degree.")
@click.pass_context
def lambda_cmd(ctx, g, n, j):
    """Hodge class lambda_j on the (g, n) moduli space."""
    _run(ctx, lambda: _emit(ctx, {
        "command": "lambda", "g": g, "n": n, "j": j,
        "class": _class_doc(lambda_class(g, n, j))}))


_PAIR_MAKERS = {
    "dr": lambda a, k, g, n: dr_spin(a, k, g),
    "stargraph": lambda a, k, g, n: stargraph_spin(a, k),
    "strata": lambda a, k, g, n: strata_class_spin(a, g),
    "lambda": lambda a, k, g, n: lambda_class(g, n, k),
}


@main.command()
@click.argument("kind", type=click.Choice(sorted(_PAIR_MAKERS)))
@click.option("--a", "avec", default=None)
@click.option("--k", type=int, default=1, show_default=True)
@click.option("--g", type=int, default=None)
@click.option("--n", type=int, default=None)
@click.pass_context
def pair(ctx, kind, avec, k, g, n):
    """Pairing signature of a named class against all generator
    monomials of complementary degree."""
    a = _parse_vector(avec) if avec else None
    def go():
        cls = _PAIR_MAKERS[kind](a, k, g, n)
        sig = pairing_signature(cls)
        _emit(ctx, {"command": "pair", "kind": kind,
                    "signature": [_frac(x) for x in sig]})
    _run(ctx, go)


# -- verification suites --------------------------------------------------------


def _verify_dvv():
    checks = []
    checks.append(("tau0^3", psi_integral(0, (0, 0, 0)) == 1))
    checks.append(("tau1", psi_integral(1, (1,)) == Fraction(1, 24)))
    rng = random.Random(20260826)
    for trial in range(50):
        g = rng.randrange(0, 5)
        n = rng.randrange(max(1, 3 - 2 * g), 7)
        d = 3 * g - 3 + n
        if d < 0:
            continue
        exps = [0] * n
        for _ in range(d):
            exps[rng.randrange(n)] += 1
        base = psi_integral(g, tuple(exps))
        string = psi_integral(g, tuple(exps) + (0,))
        expect = sum(psi_integral(g, tuple(exps[:i] + [exps[i] - 1]
                                           + exps[i + 1:]))
                     for i in range(n) if exps[i] > 0)
        checks.append(("string g=%d %r" % (g, exps), string == expect))
        dilaton = psi_integral(g, tuple(exps) + (1,))
        checks.append(("dilaton g=%d %r" % (g, exps),
                       dilaton == (2 * g - 2 + n) * base))
    return checks


def _verify_dconst():
    checks = [("d(0,3)", d_constant(0, 3) == 1),
              ("d(0,1)", d_constant(0, 1) == 1)]
    for g in range(9):
        for m in range(9):
            checks.append(("period g=%d m=%d" % (g, m),
                           d_constant(g, m + 2) == d_constant(g, m)))
    for g in range(7):
        for m in range(7):
            checks.append(("difference g=%d m=%d" % (g, m),
                           d_constant(g, m + 1) - d_constant(g, m)
                           == (-1) ** m * 2 ** (2 * g)))
    for g in range(7):
        checks.append(("d(g,0) g=%d" % g,
                       d_constant(g, 0) == (Fraction(2) ** (g - 1)
                                            - Fraction(2) ** (2 * g - 1))))
        n0 = 3 if g == 0 else (1 if g == 1 else 0)
        const = L_series(g, n0, 0).coefficient(0)
        want = const.fundamental(((g, n0),)).scale(d_constant(g, 0))
        checks.append(("L_%d(0)" % g, const == want))
    return checks


def _verify_mumford(pairs):
    checks = []
    for (g, n) in pairs:
        dim = ambient_dim(((g, n),))
        for d in range(dim + 1):
            cls = mumford_defect(g, n, d)
            sig = pairing_signature(cls)
            checks.append(("mumford (%d,%d) deg %d" % (g, n, d),
                           all(x == 0 for x in sig)))
    return checks


def _verify_roundtrip(pairs):
    return [("roundtrip (%d,%d)" % (g, n), segre_roundtrip_check(g, n))
            for (g, n) in pairs]


def _verify_polynomiality(cases):
    checks = []
    for (g, a, k) in cases:
        for c in range(g + 1):
            # the fit itself certifies zero residual on surplus points
            first = pixton_spin(a, k, c, g)
            shifted = pixton_spin(a, k, c, g,
                                  r_start=r_window_start(a, k, c, g)
                                  + 2 * c + 6)
            checks.append(("window independence %r k=%d c=%d" % (a, k, c),
                           first == shifted))
    return checks


def _verify_thm12(cases):
    return [("thm12 a=%r g=%d" % (a, g),
             classes_equal(dr_spin(a, 1, g), stargraph_spin(a, 1)))
            for (a, g) in cases]


@main.command()
@click.argument("suite", type=click.Choice(
    ["roundtrip", "mumford", "polynomiality", "thm12", "dvv", "dconst"]))
@click.option("--g", type=int, default=None)
@click.option("--n", type=int, default=None)
@click.option("--a", "avec", default=None)
@click.option("--k", type=int, default=1, show_default=True)
@click.pass_context
def verify(ctx, suite, g, n, avec, k):
    """Run an identity suite; exit 3 when any check fails."""
    a = _parse_vector(avec) if avec else None
    def go():
        if suite == "dvv":
            checks = _verify_dvv()
        elif suite == "dconst":
            checks = _verify_dconst()
        elif suite == "mumford":
            pairs = [(g, n)] if g is not None and n is not None \
                else [(1, 1), (1, 2), (2, 0)]
            checks = _verify_mumford(pairs)
        elif suite == "roundtrip":
            pairs = [(g, n)] if g is not None and n is not None \
                else [(1, 1), (1, 2)]
            checks = _verify_roundtrip(pairs)
        elif suite == "polynomiality":
            cases = [(g, a, k)] if a and g is not None \
                else [(1, (3, -1), 1)]
            checks = _verify_polynomiality(cases)
        else:
            cases = [(a, g)] if a and g is not None \
                else [((3, -1), 1)]
            checks = _verify_thm12(cases)
        failed = [name for name, ok in checks if not ok]
        _emit(ctx, {"command": "verify", "suite": suite,
                    "checks": len(checks), "failed": failed})
        if failed:
            sys.exit(EXIT_VERIFICATION)
    try:
        go()
    except PolynomialityError as err:
        click.echo("verification failure: %s" % err, err=True)
        sys.exit(EXIT_VERIFICATION)
    except (StrataError, GraphError, ValueError) as err:
        click.echo("validation error: %s" % err, err=True)
        sys.exit(EXIT_VALIDATION)


if __name__ == "__main__":
    main()
