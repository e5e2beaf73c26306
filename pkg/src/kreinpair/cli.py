"""Command-line interface: ``kreinpair <command> SPEC.json [options]``.

Exit codes: 0 when every checked property held, 2 when the report lists
violations, 1 on bad input or usage.  Errors go to stderr as a JSON object.
The default seed comes from the ``KREINPAIR_SEED`` environment variable.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from io import StringIO

import numpy as np

from . import family as fam
from . import products as prod
from . import signtype as st
from .errors import DegenerateForm, InputError, KreinError, SelfadjointnessViolation, TransportFailure
from .io import OperatorSpec, error_object, load_spec, render_json, write_atomic
from .krein import is_j_selfadjoint, krein_adjoint, product_pair, selfadjoint_residual
from .numerics import (
    CLUSTER_TOL,
    RANK_TOL,
    REGION_GUARD,
    RESOLVENT_GUARD,
    Rectangle,
    eigenstructure,
    norm2,
    pseudospectrum_grid,
    resolvent_norm,
)

SEED_ENV = "KREINPAIR_SEED"
ORACLE_TOL = 1e-9
COMMANDS = (
    "adjoint", "products", "compare-spectra", "transport", "resolvent-identities",
    "resolvent-bound", "pole-order", "classify", "critical", "projection",
    "definitize", "family-analyze", "growth-fit", "pseudospectrum",
)


class UsageError(InputError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


class Context:
    def __init__(self, spec: OperatorSpec, args):
        self.spec = spec
        self.args = args
        self.violations: list[str] = []
        self.warnings: list[str] = []
        self.tolerances = {
            "cluster": args.tol_cluster,
            "rank": args.tol_rank,
            "resolvent_guard": args.tol_guard,
            "region_guard": args.tol_region,
        }

    def violate(self, message: str) -> None:
        self.violations.append(message)

    def target(self, default_products: bool = False) -> str:
        t = self.args.target
        if t:
            return t
        if default_products:
            return "products"
        if self.spec.payload == "family":
            return self.spec.family.default_target
        op = self.spec.operator()
        return "T" if is_j_selfadjoint(op.T, op.J) else "product1"

    def matrix(self, target: str):
        op = self.spec.operator()
        return fam.block_operator(op.T, op.J, target), op.J

    def region_guard(self, A) -> float:
        rho = float(np.max(np.abs(np.linalg.eigvals(A))))
        return self.args.tol_region * (1.0 + rho)


def _cluster(c) -> dict:
    return {"value": c.value, "algebraic_mult": c.algebraic_mult, "weyr": list(c.weyr)}


def _classification(c: st.SignClassification) -> dict:
    return {
        "eigenvalue": c.eigenvalue,
        "sign_type": c.sign_type.value,
        "inertia": list(c.eigenspace_inertia.as_tuple()),
        "semisimple": c.semisimple,
        "weyr": list(c.weyr),
        "sign_characteristic": None if c.sign_characteristic is None else [list(p) for p in c.sign_characteristic],
    }


def _points(ctx: Context, P: prod.FactorPair):
    a = ctx.args
    if (a.lam is None) != (a.mu is None):
        raise UsageError("--lambda and --mu must be given together")
    if a.lam is not None:
        return [(a.lam, a.mu)]
    rng = np.random.default_rng(a.seed)
    return prod.sample_resolvent_points(P, rng, a.samples, level=a.level)


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


def cmd_adjoint(ctx: Context) -> dict:
    op = ctx.spec.operator()
    adj = op.adjoint
    back = krein_adjoint(adj, op.J)
    involution = norm2(back - op.T)
    if involution > 1e-12 * (1.0 + norm2(op.T)):
        ctx.violate(f"(T^[*])^[*] differs from T by {involution:.3g}")
    return {
        "adjoint": adj,
        "involution_residual": involution,
        "is_j_selfadjoint": is_j_selfadjoint(op.T, op.J),
        "selfadjoint_residual": selfadjoint_residual(op.T, op.J),
    }


def cmd_products(ctx: Context) -> dict:
    op = ctx.spec.operator()
    try:
        first, second = product_pair(op)
    except SelfadjointnessViolation as exc:
        ctx.violate(str(exc))
        Ts = op.adjoint
        first, second = Ts @ op.T, op.T @ Ts
    return {
        "product1": first,
        "product2": second,
        "selfadjoint_residual_product1": selfadjoint_residual(first, op.J),
        "selfadjoint_residual_product2": selfadjoint_residual(second, op.J),
    }


def cmd_compare_spectra(ctx: Context) -> dict:
    P = ctx.spec.factor_pair()
    r = prod.compare_nonzero_spectra(P, ctx.args.tol_cluster, ctx.args.tol_rank)
    if not r.matched:
        ctx.violate("nonzero spectra of AB and BA do not match")
    ctx.tolerances["nonzero_threshold"] = r.tolerance
    return {
        "matched": r.matched,
        "weyr_match": r.weyr_match,
        "max_value_discrepancy": r.max_value_discrepancy,
        "nonzero_clusters_AB": [_cluster(c) for c in r.nonzero_clusters_AB],
        "nonzero_clusters_BA": [_cluster(c) for c in r.nonzero_clusters_BA],
        "pairs": [list(p) for p in r.pairs],
    }


def cmd_transport(ctx: Context) -> dict:
    P = ctx.spec.factor_pair()
    a = ctx.args
    ctx.tolerances.update(span_angle=prod.SPAN_ANGLE_TOL, roundtrip=prod.ROUNDTRIP_TOL)
    if a.lam is not None:
        jobs = [(a.lam, a.power)]
    else:
        thr = P.nonzero_threshold(a.tol_cluster)
        s = eigenstructure(P.BA, a.tol_cluster, a.tol_rank)
        jobs = [(c.value, n) for c in s.clusters if abs(c.value) > thr for n in range(1, c.index + 1)]
    out = []
    for lam, n in jobs:
        entry = {"lambda": lam, "power": n}
        try:
            t = prod.eigenspace_transport(P, lam, n, a.tol_cluster, a.tol_rank)
        except TransportFailure as exc:
            ctx.violate(str(exc))
            entry["failure"] = str(exc)
            out.append(entry)
            continue
        entry.update(value=t.value, dim=t.dim, residuals=t.residuals)
        if a.lam is not None:
            entry.update(forward=t.forward, inverse=t.inverse)
        worst = max(t.residuals["roundtrip"], t.residuals.get("scaled_inverse", 0.0))
        if worst > prod.ROUNDTRIP_TOL:
            ctx.violate(f"transport round trip at {t.value} (n={n}) has residual {worst:.3g}")
        out.append(entry)
    return {"transports": out}


def cmd_resolvent_identities(ctx: Context) -> dict:
    P = ctx.spec.factor_pair()
    ctx.tolerances.update(identity_relative=1e-9, sample_level=ctx.args.level)
    out = []
    for lam, mu in _points(ctx, P):
        r = prod.resolvent_identity_residuals(P, lam, mu, ctx.args.tol_guard)
        scale = resolvent_norm(P.BA, lam, ctx.args.tol_guard)
        ok = max(r) <= 1e-9 * scale
        if not ok:
            ctx.violate(f"resolvent identity residual {max(r):.3g} at lambda={lam}, mu={mu}")
        out.append({"lambda": lam, "mu": mu, "residual_ppp": r.residual_ppp,
                    "residual_two_param": r.residual_two_param, "resolvent_norm_BA": scale, "ok": ok})
    return {"samples": out}


def cmd_resolvent_bound(ctx: Context) -> dict:
    P = ctx.spec.factor_pair()
    ctx.tolerances["sample_level"] = ctx.args.level
    d = prod.domination_constants(P, seed=ctx.args.seed)
    out = []
    for lam, mu in _points(ctx, P):
        b = prod.resolvent_bound_check(P, lam, mu, d, ctx.args.tol_guard)
        if not b.holds:
            ctx.violate(f"resolvent bound fails at lambda={lam}, mu={mu}: {b.lhs:.6g} > {b.rhs:.6g}")
        out.append({"lambda": lam, "mu": mu, "lhs": b.lhs, "rhs": b.rhs, "holds": b.holds, "M1": b.M1, "M2": b.M2})
    return {
        "c1": d.c1, "c2": d.c2, "C": d.C, "c1_upper": d.c1_upper, "c2_upper": d.c2_upper,
        "witness1": d.witness1, "witness2": d.witness2, "samples": out,
    }


def cmd_pole_order(ctx: Context) -> dict:
    P = ctx.spec.factor_pair()
    r = prod.zero_pole_order(P, ctx.args.tol_cluster, ctx.args.tol_rank)
    if not r.consistent:
        ctx.violate(f"zero is a pole of order {r.order_BA} although 0 lies in the resolvent set of AB")
    return {
        "order_BA": r.order_BA, "corollary_applies": r.corollary_applies,
        "zero_in_rho_AB": r.zero_in_rho_AB, "zero_in_sigma_BA": r.zero_in_sigma_BA,
    }


def _compare_products(ctx: Context) -> st.ProductSignReport:
    r = st.product_signtype_compare(ctx.spec.operator(), ctx.args.tol_cluster, ctx.args.tol_rank)
    ctx.tolerances["identity_relative"] = st.IDENTITY_TOL
    for v in r.violations:
        ctx.violate(v)
    if not r.critical_equal:
        ctx.violate("critical sets of the two products differ")
    return r


def cmd_classify(ctx: Context) -> dict:
    target = ctx.target(default_products=True)
    a = ctx.args
    if target == "products":
        r = _compare_products(ctx)
        return {
            "target": target,
            "product1": [_classification(c) for _, c in sorted(r.first.items())],
            "product2": [_classification(c) for _, c in sorted(r.second.items())],
            "positive_match": r.positive_match,
            "negative_swap": r.negative_swap,
            "critical_equal": r.critical_equal,
            "identity_max_residual": r.identity_max_residual,
        }
    A, J = ctx.matrix(target)
    s = eigenstructure(A, a.tol_cluster, a.tol_rank)
    values = [a.lam.real] if a.lam is not None else [c.value.real for c in s.real_clusters()]
    out = []
    for lam in values:
        try:
            c = st.classify_real_eigenvalue(A, J, lam, a.tol_cluster, a.tol_rank, s, with_characteristic=True)
        except DegenerateForm as exc:
            ctx.warnings.append(f"sign characteristic at {lam:.6g}: {exc}")
            c = st.classify_real_eigenvalue(A, J, lam, a.tol_cluster, a.tol_rank, s)
        out.append(_classification(c))
    return {"target": target, "classifications": out}


def cmd_critical(ctx: Context) -> dict:
    target = ctx.target(default_products=True)
    if target == "products":
        r = _compare_products(ctx)
        return {"target": target, "critical_product1": r.critical_first,
                "critical_product2": r.critical_second, "critical_equal": r.critical_equal}
    A, J = ctx.matrix(target)
    pts = st.critical_points(A, J, ctx.args.tol_cluster, ctx.args.tol_rank, ctx.args.workers)
    return {"target": target, "critical_points": pts}


def cmd_projection(ctx: Context) -> dict:
    if ctx.args.interval is None:
        raise UsageError("projection needs --interval LO HI")
    target = ctx.target()
    A, J = ctx.matrix(target)
    guard = ctx.region_guard(A)
    ctx.tolerances["region_guard_absolute"] = guard
    p = st.interval_spectral_projection(A, J, tuple(ctx.args.interval), guard, ctx.args.tol_cluster)
    return {"target": target, "E": p.E, "inertia_on_range": list(p.inertia_on_range.as_tuple()),
            "norm": p.norm, "selfadjoint_residual": p.selfadjoint_residual, "rank": p.rank}


def cmd_definitize(ctx: Context) -> dict:
    target = ctx.target()
    A, J = ctx.matrix(target)
    p = st.definitize(A, J, ctx.args.max_degree, ctx.args.seed, ctx.args.tol_cluster, ctx.args.tol_rank)
    ok = st.is_definitizing(p, A, J)
    if not ok:
        ctx.violate("returned polynomial fails the definitizing check")
    return {"target": target, "coefficients": list(p.coefficients), "degree": p.degree,
            "certified_min_eig": p.certified_min_eig, "route": p.route, "is_definitizing": ok}


def _trend(t: fam.TruncationTrend) -> dict:
    return {"N_values": list(t.N_values), "metric": t.metric, "values": list(t.values),
            "verdict": t.verdict, "intervals": [list(i) for i in t.intervals],
            "inertias": [list(i.as_tuple()) for i in t.inertias]}


def cmd_family_analyze(ctx: Context) -> dict:
    spec, a = ctx.spec, ctx.args
    if spec.payload != "family":
        raise UsageError("family-analyze needs a 'family' payload")
    F = spec.family
    Ns = a.N_values or sorted({max(1, spec.N >> k) for k in range(4)})
    target = a.target or F.default_target
    if target == "products":
        raise UsageError("family-analyze needs a single target")
    if a.interval is not None:
        intervals = tuple(a.interval)
    else:
        intervals = fam.shrinking_intervals(F, [max(1, N // 2) for N in Ns], target)
    ctx.tolerances.update(bounded_ratio=fam.BOUNDED_RATIO, growing_ratio=fam.GROWING_RATIO)
    pt = fam.projection_trend(F, intervals, Ns, target, workers=a.workers)
    nt = fam.negative_rank_trend(F, intervals, Ns, target, workers=a.workers)
    op = fam.truncate(F, max(Ns))
    r = st.product_signtype_compare(op, a.tol_cluster, a.tol_rank)
    if not r.critical_equal:
        ctx.violate("critical sets of the two product truncations differ")
    return {
        "family": F.describe(), "target": target,
        "projection_trend": _trend(pt), "negative_rank_trend": _trend(nt),
        "critical_product1": r.critical_first, "critical_product2": r.critical_second,
        "critical_equal": r.critical_equal,
        "verdicts_are_surrogates": True,
    }


def cmd_growth_fit(ctx: Context) -> dict:
    a = ctx.args
    if a.x0 is None:
        raise UsageError("growth-fit needs --x0")
    ys = np.geomspace(a.y_max, a.y_min, a.y_count)
    target = ctx.target()
    A, J = ctx.matrix(target)
    g = fam.growth_order_fit(A, J, a.x0, ys, workers=a.workers)
    ctx.tolerances["growth_guard"] = fam.GROWTH_GUARD
    rows = [(z.imag, r) for z, r in g.sample_points]
    ctx.grid = ("y,resolvent_norm", rows)
    out = {"target": target, "x0": a.x0, "m_hat": g.m_hat, "m": g.m, "M_hat": g.M_hat, "slope": g.slope,
           "fit_residual": g.fit_residual, "window": list(g.window), "window_stable": g.window_stable,
           "samples": [list(r) for r in rows]}
    if not g.window_stable:
        ctx.warnings.append("no decade with stable slope; fitted the smallest-y decade")
    if a.partner:
        r = fam.partner_growth_check(ctx.spec.operator(), a.x0, ys=ys)
        if not r.bound_holds:
            ctx.violate(f"order {r.bound_order} partner bound fails (ratio {r.max_ratio:.6g})")
        out["partner"] = {"m_hat_product1": r.m_hat_product1, "m_hat_product2": r.m_hat_product2,
                          "bound_order": r.bound_order, "bound_constant": r.bound_constant,
                          "max_ratio": r.max_ratio, "bound_holds": r.bound_holds}
    return out


def cmd_pseudospectrum(ctx: Context) -> dict:
    a = ctx.args
    if a.rect is None:
        raise UsageError("pseudospectrum needs --rect RE_MIN RE_MAX IM_MIN IM_MAX")
    target = a.target or ("T" if ctx.spec.payload == "T" else ctx.target())
    A, _ = ctx.matrix(target)
    g = pseudospectrum_grid(A, Rectangle(*a.rect), tuple(a.resolution), a.workers)
    rows = list(g.rows())
    ctx.grid = ("re,im,sigma_min", rows)
    out = {"target": target, "resolution": list(a.resolution), "rect": list(a.rect),
           "min_sigma": float(g.sigma_min.min()), "max_sigma": float(g.sigma_min.max())}
    if a.grid_out is None:
        out["grid"] = [list(r) for r in rows]
    return out


HANDLERS = {
    "adjoint": cmd_adjoint,
    "products": cmd_products,
    "compare-spectra": cmd_compare_spectra,
    "transport": cmd_transport,
    "resolvent-identities": cmd_resolvent_identities,
    "resolvent-bound": cmd_resolvent_bound,
    "pole-order": cmd_pole_order,
    "classify": cmd_classify,
    "critical": cmd_critical,
    "projection": cmd_projection,
    "definitize": cmd_definitize,
    "family-analyze": cmd_family_analyze,
    "growth-fit": cmd_growth_fit,
    "pseudospectrum": cmd_pseudospectrum,
}


# --------------------------------------------------------------------------
# oracle comparison
# --------------------------------------------------------------------------


def _check_expectations(ctx: Context, results: dict) -> None:
    for key, want in sorted(ctx.spec.expect.items()):
        if key not in results:
            ctx.warnings.append(f"expect.{key} has no matching result")
            continue
        got = results[key]
        if isinstance(want, np.ndarray):
            got = np.asarray(got, dtype=complex)
            if got.shape != want.shape:
                ctx.violate(f"expect.{key}: shape {got.shape} differs from oracle {want.shape}")
            elif norm2(got - want) > ORACLE_TOL * max(1.0, norm2(want)):
                ctx.violate(f"expect.{key}: differs from oracle by {norm2(got - want):.3g}")
        elif isinstance(want, bool) or isinstance(want, str):
            if got != want:
                ctx.violate(f"expect.{key}: got {got!r}, oracle {want!r}")
        else:
            if abs(float(got) - float(want)) > ORACLE_TOL * max(1.0, abs(float(want))):
                ctx.violate(f"expect.{key}: got {got!r}, oracle {want!r}")
    if ctx.spec.expect:
        ctx.tolerances["oracle_relative"] = ORACLE_TOL


# --------------------------------------------------------------------------
# parser and entry point
# --------------------------------------------------------------------------


def _complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from exc


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV, "0")
    try:
        return int(raw)
    except ValueError as exc:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("spec", help="operator-spec JSON file")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--grid-out", help="CSV file for grid/sample output")
    common.add_argument("--tol-cluster", type=float, default=CLUSTER_TOL)
    common.add_argument("--tol-rank", type=float, default=RANK_TOL)
    common.add_argument("--tol-guard", type=float, default=RESOLVENT_GUARD, help="resolvent guard")
    common.add_argument("--tol-region", type=float, default=REGION_GUARD, help="relative region-boundary guard")
    common.add_argument("--seed", type=int, default=None, help=f"default from ${SEED_ENV}, else 0")
    common.add_argument("--target", choices=("T", "product1", "product2", "products"),
                        help="operator to analyse (product1 = T^[*]T, product2 = TT^[*])")
    common.add_argument("--workers", type=int, default=None)

    parser = _Parser(prog="kreinpair", description="Krein-space products T^[*]T and TT^[*] at desk scale.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = {name: sub.add_parser(name, parents=[common]) for name in COMMANDS}

    for name in ("transport", "resolvent-identities", "resolvent-bound", "classify"):
        p[name].add_argument("--lambda", dest="lam", type=_complex)
    p["transport"].add_argument("--power", type=int, default=1)
    for name in ("resolvent-identities", "resolvent-bound"):
        p[name].add_argument("--mu", type=_complex)
        p[name].add_argument("--samples", type=int, default=5)
        p[name].add_argument("--level", type=float, default=1e-2)
    for name in ("projection", "family-analyze"):
        p[name].add_argument("--interval", type=float, nargs=2, metavar=("LO", "HI"))
    p["definitize"].add_argument("--max-degree", type=int)
    p["family-analyze"].add_argument("--N-values", dest="N_values", type=int, nargs="+")
    g = p["growth-fit"]
    g.add_argument("--x0", type=float)
    g.add_argument("--y-min", type=float, default=1e-6)
    g.add_argument("--y-max", type=float, default=1e-1)
    g.add_argument("--y-count", type=int, default=24)
    g.add_argument("--partner", action="store_true", help="also check the order m+1 bound for T^[*]T")
    ps = p["pseudospectrum"]
    ps.add_argument("--rect", type=float, nargs=4, metavar=("RE_MIN", "RE_MAX", "IM_MIN", "IM_MAX"))
    ps.add_argument("--resolution", type=int, nargs=2, default=(40, 40), metavar=("NX", "NY"))
    return parser


def _csv(header: str, rows) -> str:
    buf = StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header.split(","))
    for r in rows:
        w.writerow([repr(float(x)) for x in r])
    return buf.getvalue()


def run(argv=None) -> tuple[int, str, str | None]:
    """Run one command; returns (exit code, report text, --out path)."""
    args = build_parser().parse_args(argv)
    if args.seed is None:
        args.seed = _default_seed()
    spec = load_spec(args.spec)
    ctx = Context(spec, args)
    ctx.grid = None
    results = HANDLERS[args.command](ctx)
    _check_expectations(ctx, results)
    if args.grid_out:
        if ctx.grid is None:
            ctx.warnings.append("--grid-out ignored: this command produces no grid")
        else:
            write_atomic(args.grid_out, _csv(*ctx.grid))
    report = {
        "command": args.command,
        "input_digest": spec.digest,
        "seed": args.seed,
        "tolerances": ctx.tolerances,
        "results": results,
        "violations": ctx.violations,
        "warnings": ctx.warnings,
        "status": "violations" if ctx.violations else "clean",
    }
    return (2 if ctx.violations else 0), render_json(report), args.out


def main(argv=None) -> int:
    try:
        code, text, out = run(argv)
        if out:
            write_atomic(out, text)
        else:
            sys.stdout.write(text)
    except (KreinError, ValueError, OSError) as exc:
        sys.stderr.write(render_json(error_object(exc)))
        return 1
    return code


if __name__ == "__main__":
    sys.exit(main())
