"""Command-line interface: ``modphi <subcommand> ...``.

Every subcommand writes one report (JSON by default, CSV with
``--format csv``) to ``--out`` or standard output. Exit status is 0 on
success, 2 on invalid input and 3 when a numerical budget (quadrature
subdivisions, sieve or enumeration size, sampler diagnostics) is exhausted.

Report layout::

    {task, params, seed, grid, values: [{u, re, im, se?}],
     reference?: [{u, re, im}], sup_error?, verdict?, runtime_ms?}

``runtime_ms`` is only written with ``--timing`` so that default reports
are byte-identical across runs.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time

import numpy as np

from . import arith, arrays, fields, infdiv, limits, modconv, rmt
from .special import IntegrationError

DEFAULT_SEED = 20240607
EXIT_OK, EXIT_INVALID, EXIT_BUDGET = 0, 2, 3

BUDGET_ERRORS = (
    IntegrationError,
    fields.BudgetError,
    arith.SieveBudgetError,
    rmt.SamplerDiagnosticError,
    infdiv.IntegrabilityError,
)


class ValidationError(ValueError):
    """A flag value violates the precondition of the requested operation."""


# ---------------------------------------------------------------- helpers

def _num(x):
    x = float(x)
    return x if math.isfinite(x) else None


def _values(u, vals, se=None, key="u"):
    out = []
    for i, (uu, v) in enumerate(zip(u, vals)):
        v = complex(v)
        item = {key: float(uu), "re": _num(v.real), "im": _num(v.imag)}
        if se is not None:
            item["se"] = _num(se[i])
        out.append(item)
    return out


def _sup(vals, ref):
    return _num(np.max(np.abs(np.asarray(vals) - np.asarray(ref))))


def _grid(text):
    try:
        return modconv.EvaluationGrid.parse(text)
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc


def _int_list(text):
    try:
        vals = [int(float(x)) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ValidationError(f"expected comma-separated integers, got {text!r}") from exc
    if not vals:
        raise ValidationError("empty list")
    return vals


def _require(cond, msg):
    if not cond:
        raise ValidationError(msg)


def _threads(args):
    if getattr(args, "threads", None):
        return int(args.threads)
    env = os.environ.get("MODPHI_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ValidationError("MODPHI_THREADS must be an integer") from exc
    return None


def _report(task, params, seed=None, grid=None, values=None, **extra):
    rep = {"task": task, "params": params, "seed": seed,
           "grid": [] if grid is None else [float(x) for x in grid],
           "values": values or []}
    rep.update({k: v for k, v in extra.items() if v is not None})
    return rep


# ---------------------------------------------------------------- subcommands

def cmd_limits(args):
    name = args.name
    lid = limits.LimitId(name)
    params = {"name": name}
    if args.cutoff is not None:
        _require(args.cutoff >= 2, "--cutoff must be >= 2")
        params["prime_cutoff"] = args.cutoff
    if args.lam is not None:
        _require(lid in (limits.LimitId.RMT_M, limits.LimitId.ARITH_A, limits.LimitId.SP_MSP),
                 "--lambda applies to M, A and MSp")
        lam = complex(args.lam)
        fn = {limits.LimitId.RMT_M: limits.rmt_factor_M,
              limits.LimitId.SP_MSP: limits.sp_factor_MSp}.get(lid)
        if lid is limits.LimitId.ARITH_A:
            val = limits.arithmetic_factor_A(lam, params.get("prime_cutoff", limits.DEFAULT_PRIME_CUTOFF))
        else:
            val = fn(lam)
        params["lambda"] = args.lam
        return _report("limits", params, values=_values([args.lam], [val], key="lambda"))
    grid = _grid(args.grid)
    if lid is limits.LimitId.GAMMA_EXAMPLE:
        params["normalization"] = args.normalization
        params["method"] = args.method
    fparams = {k: v for k, v in params.items() if k != "name"}
    if "method" in fparams:
        fparams["method"] = limits.GammaMethod(fparams["method"])
    vals = limits.LimitingFunction(lid, fparams)(grid.array)
    return _report("limits", params, grid=grid.u, values=_values(grid.u, np.atleast_1d(vals)))


def _id_triplet(args):
    h = infdiv.Truncation(args.truncation)
    if args.family == "gaussian":
        _require(args.sigma >= 0, "--sigma must be >= 0")
        t = infdiv.GeneratingTriplet(args.sigma, args.beta, infdiv.LevyMeasure(), h)
        closed = lambda u: -0.5 * args.sigma * u * u + 1j * args.beta * u  # noqa: E731
    elif args.family == "poisson":
        _require(args.rate > 0, "--rate must be > 0")
        _require(args.jump != 0, "--jump must be nonzero")
        nu = infdiv.LevyMeasure(atoms=((args.jump, args.rate),))
        beta = args.rate * float(h(np.array(args.jump)))
        t = infdiv.GeneratingTriplet(0.0, beta, nu, h)
        closed = lambda u: args.rate * (np.exp(1j * u * args.jump) - 1.0)  # noqa: E731
    else:
        t = infdiv.gamma_triplet(h)
        closed = lambda u: -np.log(1.0 - 1j * u)  # noqa: E731
    return t, closed


def cmd_id(args):
    t, closed = _id_triplet(args)
    params = {"family": args.family, "action": args.action, "truncation": args.truncation}
    if args.action == "cumulants":
        _require(1 <= args.n <= 12, "--n must be in [1, 12]")
        c = infdiv.cumulants_from_triplet(t, args.n)
        params["n"] = args.n
        vals = [{"k": k + 1, "value": _num(v)} for k, v in enumerate(c)]
        return _report("id", params, values=vals)
    if args.action == "convert":
        new = infdiv.convert_truncation(t, infdiv.Truncation(args.to))
        params["to"] = args.to
        return _report("id", params, values=[{"sigma": t.sigma, "beta_from": _num(t.beta),
                                              "beta_to": _num(new.beta)}])
    grid = _grid(args.grid)
    vals = np.array([infdiv.levy_exponent(t, u) for u in grid.u])
    ref = closed(grid.array)
    return _report("id", params, grid=grid.u, values=_values(grid.u, vals),
                   reference=_values(grid.u, ref), sup_error=_sup(vals, ref))


def cmd_arrays(args):
    _require(args.rows in arrays.ROW_FAMILIES, f"--rows must be one of {sorted(arrays.ROW_FAMILIES)}")
    ladder = _int_list(args.ladder)
    _require(all(n >= 1 for n in ladder), "ladder entries must be >= 1")
    _require(all(b > a for a, b in zip(ladder[:-1], ladder[1:])), "ladder must be strictly increasing")
    grid = _grid(args.grid)
    row = arrays.ROW_FAMILIES[args.rows]()
    seed = args.seed
    if args.samples:
        _require(args.samples >= 100, "--samples must be >= 100")

        def provider(N, u):
            rng = np.random.default_rng(np.random.SeedSequence([seed, N]))
            e = modconv.empirical_cf(arrays.sample_log_mean(row, N, rng, args.samples), u)
            return e.value, e.se
        seq = modconv.CharFnSequence(provider, "empirical", args.samples, seed)
    elif args.rows == "gamma":
        seq = modconv.CharFnSequence(lambda N, u: arrays.gamma_example_cf(N, u))
    else:
        seq = modconv.CharFnSequence(lambda N, u: arrays.log_mean_cf_exact(row, N, u))
    params_fn = lambda N: modconv.ModParameters.gaussian(0.0, arrays.harmonic_number(N))  # noqa: E731
    reference, ref_name = None, None
    if args.rows == "gamma":
        reference, ref_name = limits.phi_gamma_example, "phi_gamma_example"
    elif args.rows == "normal":
        reference, ref_name = (lambda u: np.ones_like(u, dtype=complex)), "one"
    rep = modconv.convergence_report(seq, params_fn, grid, ladder, reference, ref_name,
                                     threshold=args.threshold, threads=_threads(args))
    last = rep.per_N[-1]
    params = {"rows": args.rows, "ladder": ladder, "samples": args.samples}
    ref_vals = None if reference is None else _values(grid.u, reference(grid.array))
    return _report("arrays", params, seed=seed if args.samples else None, grid=grid.u,
                   values=_values(grid.u, last.values, last.se), reference=ref_vals,
                   sup_error=_num(last.sup_err), verdict=rep.verdict.value,
                   per_N=[{"N": e.N, "sup_err": _num(e.sup_err)} for e in rep.per_N])


def cmd_rmt(args):
    _require(args.samples >= 1000, "--samples must be >= 1000")
    threads = _threads(args)
    if args.group == "U":
        _require(args.N is not None and args.N >= 1, "--N must be >= 1 for group U")
        us = [float(x) for x in args.u.split(",")]
        est = rmt.unitary_moment_mc(args.N, us, args.samples, args.seed, threads, args.method)
        ref = limits.rmt_factor_M(1j * np.array(us))
        vals = [e.value for e in est]
        params = {"group": "U", "N": args.N, "samples": args.samples, "method": args.method}
        return _report("rmt", params, seed=args.seed, grid=us,
                       values=_values(us, vals, [e.se for e in est]),
                       reference=_values(us, np.atleast_1d(ref)), sup_error=_sup(vals, np.atleast_1d(ref)))
    _require(args.g is not None and args.g >= 1, "--g must be >= 1 for group USp")
    _require(args.lam is not None and args.lam > 0, "--lambda must be > 0 for group USp")
    est = rmt.symplectic_moment_mc(args.g, args.lam, args.samples, args.seed, threads=threads)
    ref = limits.sp_factor_MSp(args.lam)
    params = {"group": "USp", "g": args.g, "samples": args.samples, "acceptance": _num(est.acceptance)}
    return _report("rmt", params, seed=args.seed, grid=None,
                   values=_values([args.lam], [est.value], [est.se], key="lambda"),
                   reference=_values([args.lam], [ref], key="lambda"),
                   sup_error=_num(abs(est.value - ref)))


def _omega_table(args):
    if args.cache and os.path.exists(args.cache):
        table = arith.SieveTable.load(args.cache)
        _require(table.N == args.N, f"cache holds N = {table.N}, not {args.N}")
        return table
    table = arith.omega_sieve(args.N)
    if args.cache:
        table.save(args.cache)
    return table


def cmd_omega(args):
    _require(args.N >= 100, "--N must be >= 100")
    grid = _grid(args.grid)
    _require(args.cutoff >= 2, "--cutoff must be >= 2")
    table = _omega_table(args)
    vals = arith.omega_renormalized_cf(table, grid.array)
    ref = limits.phi_omega(grid.array, args.cutoff)
    params = {"N": args.N, "prime_cutoff": args.cutoff}
    extra = {}
    if args.sathe is not None:
        counts, ratios = arith.sathe_selberg_histogram(table, args.sathe)
        extra["sathe_selberg"] = [{"k": k, "count": int(c), "ratio": _num(r)}
                                  for k, (c, r) in enumerate(zip(counts, ratios))]
    if args.erdos_kac:
        ek = arith.erdos_kac_cf(table, grid.array)
        extra["erdos_kac_sup_error"] = _sup(ek, np.exp(-0.5 * grid.array ** 2))
    return _report("omega", params, grid=grid.u, values=_values(grid.u, vals),
                   reference=_values(grid.u, ref), sup_error=_sup(vals, ref), **extra)


def cmd_models(args):
    grid = _grid(args.grid)
    u = grid.array
    if args.model == "prime":
        _require(args.N >= 2, "--N must be >= 2")
        vals = arith.bernoulli_prime_model_cf(args.N, u, renormalized=True)
        ref = limits.phi2(u, args.N)
    elif args.model == "permutation":
        _require(args.N >= 1, "--N must be >= 1")
        vals = arith.permutation_cycle_model_cf(args.N, u, renormalized=True)
        ref = limits.phi1(u)
    else:
        _require(args.N >= 3, "--N must be >= 3")
        vals = arith.circle_model_cf(args.N, u, renormalized=True)
        ref = limits.arithmetic_factor_A(1j * u, args.N)
    return _report("models", {"model": args.model, "N": args.N}, grid=grid.u,
                   values=_values(grid.u, np.atleast_1d(vals)),
                   reference=_values(grid.u, np.atleast_1d(ref)), sup_error=_sup(vals, ref))


def _field(args):
    try:
        return fields.FiniteFieldSpec(args.p, args.k)
    except fields.BudgetError:
        raise
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc


def _curve(args, ff):
    coeffs = _int_list(args.f)
    _require(len(coeffs) >= 4 and len(coeffs) % 2 == 0, "--f needs a_0..a_{2g+1} with g >= 1")
    _require(coeffs[-1] == 1, "leading coefficient must be 1 (monic)")
    field = ff.field
    # signed integers map into the prime subfield; codes >= p are extension elements
    codes = []
    for c in coeffs:
        if 0 <= c < ff.q:
            codes.append(c)
        else:
            codes.append(field.from_int(c))
    try:
        return fields.CurvePoly(tuple(codes), ff)
    except fields.NotSquarefreeError as exc:
        raise ValidationError(str(exc)) from exc


def cmd_ff(args):
    ff = _field(args)
    base = {"p": args.p, "k": args.k, "q": ff.q}
    if args.ff_cmd == "lpoly":
        f = _curve(args, ff)
        L = fields.l_polynomial(f, ff)
        rep = fields.verify_weil(L)
        return _report("ff.lpoly", {**base, "f": list(f.coeffs)},
                       values=[{"i": i, "a": a} for i, a in enumerate(L.coeffs)],
                       l_coefficients=list(L.coeffs), weil_residual=_num(rep.max_residual),
                       functional_equation=rep.functional_equation)
    if args.ff_cmd == "angles":
        f = _curve(args, ff)
        L = fields.l_polynomial(f, ff)
        ang = fields.frobenius_angles(L)
        return _report("ff.angles", {**base, "f": list(f.coeffs)},
                       values=[{"j": j + 1, "theta": _num(t)} for j, t in enumerate(ang)],
                       l_coefficients=list(L.coeffs))
    if args.ff_cmd == "ah":
        _require(args.lam > 0, "--lambda must be > 0")
        _require(1 <= args.D <= 30, "--D must be in [1, 30]")
        val = fields.arithmetic_factor_Ah(args.lam, ff.q, args.D)
        return _report("ff.ah", {**base, "lambda": args.lam, "D": args.D},
                       values=[{"lambda": args.lam, "re": _num(val), "im": 0.0}])
    _require(args.g >= 1, "--g must be >= 1")
    scan = fields.scan_ensemble(ff, args.g)
    if args.ff_cmd == "scan":
        if args.csv:
            fields.write_records_csv(scan, args.csv)
        return _report("ff.scan", {**base, "g": args.g},
                       values=[{"size": scan.size, "vanishing": int(scan.vanishing.sum()),
                                "max_weil_residual": _num(scan.max_weil_residual),
                                "angle_ks": _num(fields.angle_ks_distance(scan.angles))
                                if args.g == 1 else None}])
    # moments
    _require((args.lam is None) != (args.u is None), "give exactly one of --lambda and --u")
    m = fields.ensemble_moment(ff, args.g, lam=args.lam, u=args.u,
                               restrict_nonvanishing=args.restrict, scan=scan)
    key, val = ("lambda", args.lam) if args.lam is not None else ("u", args.u)
    return _report("ff.moments", {**base, "g": args.g, "restrict_nonvanishing": args.restrict},
                   values=_values([val], [m.value], key=key), size=m.size, excluded=m.excluded)


# ---------------------------------------------------------------- parser

def build_parser():
    parser = argparse.ArgumentParser(
        prog="modphi",
        description="Mod-Gaussian / mod-Poisson numerical laboratory.",
        epilog=f"Default seed: {DEFAULT_SEED}. Exit codes: 0 ok, 2 invalid input, 3 numerical budget.")
    parser.add_argument("--out", help="output file (default: standard output)")
    parser.add_argument("--format", choices=("json", "csv"), default="json")
    parser.add_argument("--threads", type=int, help="worker cap (fallback: MODPHI_THREADS)")
    parser.add_argument("--timing", action="store_true", help="add runtime_ms to the report")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("limits", help="evaluate a limiting function")
    p.add_argument("name", choices=[x.value for x in limits.LimitId])
    p.add_argument("--lambda", dest="lam", type=float, help="evaluate M, A or MSp at a real lambda")
    p.add_argument("--grid", default="-3:3:61", help="u grid a:b:count")
    p.add_argument("--cutoff", type=int, help="prime cutoff for A and the omega products")
    p.add_argument("--normalization", choices=("harmonic", "log"), default="harmonic")
    p.add_argument("--method", choices=("lk", "barnes"), default="lk")
    p.set_defaults(func=cmd_limits)

    p = sub.add_parser("id", help="infinitely divisible laws")
    p.add_argument("family", choices=("gaussian", "poisson", "gamma"))
    p.add_argument("--action", choices=("exponent", "cumulants", "convert"), default="exponent")
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--rate", type=float, default=1.0)
    p.add_argument("--jump", type=float, default=1.0)
    p.add_argument("--truncation", choices=("trapezoid", "indicator"), default="trapezoid")
    p.add_argument("--to", choices=("trapezoid", "indicator"), default="indicator")
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--grid", default="-3:3:61")
    p.set_defaults(func=cmd_id)

    p = sub.add_parser("arrays", help="logarithmic means of triangular arrays")
    p.add_argument("--rows", default="gamma", help="normal | gamma | poisson | two_point")
    p.add_argument("--ladder", default="100,1000,10000")
    p.add_argument("--grid", default="-3:3:61")
    p.add_argument("--samples", type=int, default=0, help="Monte Carlo draws per N (0: exact)")
    p.add_argument("--threshold", type=float, default=float("inf"))
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.set_defaults(func=cmd_arrays)

    p = sub.add_parser("rmt", help="Keating-Snaith moments by Monte Carlo")
    p.add_argument("--group", choices=("U", "USp"), default="U")
    p.add_argument("--N", type=int)
    p.add_argument("--g", type=int)
    p.add_argument("--u", default="0.5", help="comma-separated u values (group U)")
    p.add_argument("--lambda", dest="lam", type=float, help="moment order (group USp)")
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--method", choices=("haar", "product"), default="haar")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.set_defaults(func=cmd_rmt)

    p = sub.add_parser("omega", help="sieve omega(n) and report its mod-Poisson statistics")
    p.add_argument("--N", type=int, default=10 ** 6)
    p.add_argument("--grid", default="-3:3:61")
    p.add_argument("--cutoff", type=int, default=limits.DEFAULT_PRIME_CUTOFF)
    p.add_argument("--cache", help="MPHI sieve cache file (read if present, else written)")
    p.add_argument("--sathe", type=int, help="add Sathe-Selberg counts up to this k")
    p.add_argument("--erdos-kac", action="store_true", help="add the Erdos-Kac rescaling distance")
    p.set_defaults(func=cmd_omega)

    p = sub.add_parser("models", help="prime, permutation and circle model products")
    p.add_argument("model", choices=("prime", "permutation", "circle"))
    p.add_argument("--N", type=int, default=10 ** 5, help="prime cutoff y or permutation size")
    p.add_argument("--grid", default="-3:3:61")
    p.set_defaults(func=cmd_models)

    p = sub.add_parser("ff", help="hyperelliptic curves over finite fields")
    ffsub = p.add_subparsers(dest="ff_cmd", required=True)
    coeff_help = "coefficients a_0,...,a_{2g+1} of f, a_0 first; must be monic"
    for name in ("scan", "lpoly", "angles", "moments", "ah"):
        q = ffsub.add_parser(name)
        q.add_argument("--p", type=int, default=3)
        q.add_argument("--k", type=int, default=1)
        if name in ("lpoly", "angles"):
            q.add_argument("--f", required=True, help=coeff_help)
        if name in ("scan", "moments"):
            q.add_argument("--g", type=int, default=1)
        if name == "scan":
            q.add_argument("--csv", help="write per-curve records here")
        if name == "moments":
            q.add_argument("--lambda", dest="lam", type=float)
            q.add_argument("--u", type=float)
            q.add_argument("--restrict", action="store_true", help="exclude curves with L(f,1/2)=0")
        if name == "ah":
            q.add_argument("--lambda", dest="lam", type=float, default=1.0)
            q.add_argument("--D", type=int, default=20)
        q.set_defaults(func=cmd_ff)
    return parser


def _to_csv(report):
    buf = io.StringIO()
    rows = report.get("values") or []
    if rows:
        cols = list(rows[0].keys())
        ref = {r["u"]: r for r in report.get("reference") or [] if "u" in r}
        if ref:
            cols += ["ref_re", "ref_im"]
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            line = [r.get(c) for c in cols[:len(rows[0])]]
            if ref:
                rr = ref.get(r.get("u"), {})
                line += [rr.get("re"), rr.get("im")]
            w.writerow(["" if v is None else repr(v) if isinstance(v, float) else v for v in line])
    return buf.getvalue()


def run(argv=None):
    """Parse ``argv``, run the subcommand and return the exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    start = time.perf_counter()
    try:
        report = args.func(args)
    except BUDGET_ERRORS as exc:
        print(f"modphi: numerical budget exhausted: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ValidationError, ValueError) as exc:
        print(f"modphi: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if args.timing:
        report["runtime_ms"] = round(1000.0 * (time.perf_counter() - start), 3)
    text = _to_csv(report) if args.format == "csv" else json.dumps(report, indent=2) + "\n"
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
