"""``maxbell`` command line.

Exit status: 0 on success, 1 when an invariant or inequality is violated,
2 on invalid configuration. Output is deterministic for a fixed seed.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import extremal, hardy, suites
from .bellman import Params, bellman_value, omega_p, solve_beta
from .maximal import linearize, lp_bound_gap, weak_type_gap
from .tree import StepFunction, max_leaves
from .verify import ineq_18_report, ineq_41_report, theorem_a_report


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------- output


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


def _table_csv(rows: list[dict], columns) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for r in rows:
        w.writerow({k: (repr(float(v)) if isinstance(v, (float, np.floating)) else v) for k, v in r.items()})
    return buf.getvalue()


# ------------------------------------------------------------ subcommands


def cmd_bellman(a) -> int:
    Params(p=a.p_pos, f=a.f_pos, F=a.F_pos)
    z = min(1.0, a.f_pos**a.p_pos / a.F_pos)
    res = {
        "f": a.f_pos,
        "F": a.F_pos,
        "p": a.p_pos,
        "beta": solve_beta(a.f_pos, a.F_pos, a.p_pos),
        "omega_p": omega_p(z, a.p_pos),
        "B": bellman_value(a.f_pos, a.F_pos, a.p_pos),
    }
    if a.format == "csv":
        _emit(_table_csv([res], res.keys()), a.out)
    else:
        _emit(_dump_json(res), a.out)
    return 0


def _phi_reports(phi: StepFunction, p: float, q: float, beta: float) -> dict:
    reps = {"ineq18": ineq_18_report(phi, p, q, beta), "theorem_a": theorem_a_report(phi, p),
            "lp_bound": lp_bound_gap(phi, p)}
    if 1 < q < p:
        reps["ineq41"] = ineq_41_report(phi, p, q, beta)
    f = reps["ineq18"].components["f"]
    if f > 0:
        reps["weak_type"] = weak_type_gap(phi, f)
    return reps


def _report_ok(name, rep) -> bool:
    tol = 1e-11 * max(1.0, abs(rep.rhs)) if name in ("ineq18", "theorem_a") else 1e-12 * max(1.0, abs(rep.rhs))
    return rep.gap >= -tol


def cmd_verify(a) -> int:
    p = a.p if a.p is not None else 2.0
    q = a.q if a.q is not None else 1.5 if p > 1.5 else 1.0
    beta = a.beta if a.beta is not None else 1.0 / (p - 1)
    Params(p=p, q=q, beta=beta)
    if a.input:
        with open(a.input, encoding="utf-8") as fh:
            phi = StepFunction.from_json(fh.read())
        reps = _phi_reports(phi, p, q, beta)
        ok = all(_report_ok(k, r) for k, r in reps.items())
        out = {"ok": ok, "reports": {k: r.to_dict() for k, r in reps.items()}}
    else:
        rng = np.random.default_rng(a.seed)
        worst, count = {}, 0
        ok = True
        for _ in range(a.samples):
            if a.arity is not None or a.depth is not None:
                m = a.arity if a.arity is not None else 2
                d = a.depth if a.depth is not None else 4
                n = m**d
                if n > max_leaves():
                    raise ConfigError(f"arity^depth = {n} exceeds the leaf budget {max_leaves()}")
                from .tree import TreeConfig

                phi = StepFunction(TreeConfig(m, d), rng.exponential(1.0, n))
            else:
                phi = suites.random_step_function(rng, max_depth=5)
            for k, r in _phi_reports(phi, p, q, beta).items():
                rel = r.gap / max(1.0, abs(r.rhs))
                worst[k] = min(worst.get(k, np.inf), rel)
                ok &= _report_ok(k, r)
            count += 1
        out = {"ok": ok, "samples": count, "seed": a.seed, "params": {"p": p, "q": q, "beta": beta},
               "worst_relative_gap": {k: float(worst[k]) for k in sorted(worst)}}
    _emit(_dump_json(out), a.out)
    return 0 if out["ok"] else 1


def cmd_sweep(a) -> int:
    p = a.p if a.p is not None else 2.0
    q = a.q if a.q is not None else p
    Params(p=p, q=q)
    if a.kind == "alpha":
        rows = hardy.sharpness_sweep(p, q, hardy.geometric_alpha_grid(p, a.points, 1e-6))
        text = hardy.sweep_csv(rows, "alpha", q / (p - 1))
        errs = [abs(G - q / (p - 1)) for _, G in rows]
        ok = all(y < x for x, y in zip(errs, errs[1:]))
    else:
        betas = np.linspace(0.0, 1.0 / (p - 1), a.points + 2)[1:-1]
        rows = hardy.beta_sweep(p, q, betas)
        text = hardy.sweep_csv([(b, r, j) for b, r, j in rows], "beta")
        ok = all(abs(r - j) <= 1e-9 for _, r, j in rows)
    if a.format == "json":
        reader = csv.DictReader(io.StringIO(text))
        text = _dump_json([{k: float(v) for k, v in row.items()} for row in reader])
    _emit(text, a.out)
    return 0 if ok else 1


def _ladder(a) -> tuple:
    m = a.arity if a.arity is not None else 2
    top = a.depth if a.depth is not None else 10
    if a.depths:
        depths = [int(x) for x in a.depths.split(",")]
    else:
        depths = [d for d in (top - 6, top - 4, top - 2, top) if d >= 1]
    for d in depths:
        if d < 1:
            raise ConfigError(f"refinement depth must be at least 1, got {d}")
        if m**d > max_leaves():
            raise ConfigError(f"arity^depth = {m ** d} exceeds the leaf budget {max_leaves()}")
    return tuple((m, d) for d in depths)


def _pair(a):
    p = a.p if a.p is not None else 2.0
    f = a.f if a.f is not None else 1.0
    F = a.F if a.F is not None else 4.0 / 3.0
    q = a.q if a.q is not None else 0.5 * (1.0 + p)
    Params(p=p, q=q, f=f, F=F)
    if not 1 < q < p:
        raise ConfigError(f"q must lie in (1,p) for the extremal experiment, got q={q}, p={p}")
    return p, q, f, F


def cmd_extremal(a) -> int:
    p, q, f, F = _pair(a)
    rows = extremal.extremal_experiment(f, F, p, q, _ladder(a), a.band)
    if a.format == "json":
        _emit(_dump_json(rows), a.out)
    else:
        _emit(_table_csv(rows, extremal.EXPERIMENT_COLUMNS), a.out)
    ok = all(r["gap18"] >= -1e-11 * max(1.0, r["bellman_target"]) for r in rows)
    return 0 if ok else 1


STABILITY_COLUMNS = ("step", "arity", "depth", "beta", "gap41", "stability", "A_q", "q_measured",
                     "q_predicted", "omega_drift")


def cmd_stability(a) -> int:
    if a.input:
        p = a.p if a.p is not None else 2.0
        q = a.q if a.q is not None else 0.5 * (1.0 + p)
        beta = a.beta if a.beta is not None else 0.5
        Params(p=p, q=q, beta=beta)
        with open(a.input, encoding="utf-8") as fh:
            phi = StepFunction.from_json(fh.read())
        out = {
            "stability": extremal.stability_metric(phi, beta, p),
            "linearization": linearize(phi).to_dict(),
            "params": {"p": p, "q": q, "beta": beta},
        }
        if 1 < q < p:
            out["gap41"] = ineq_41_report(phi, p, q, beta).gap
        _emit(_dump_json(out), a.out)
        return 0
    p, q, f, F = _pair(a)
    beta = a.beta if a.beta is not None else solve_beta(f, F, p)
    ladder = _ladder(a)
    phis = extremal.extremal_sequence(f, F, p, ladder, a.band)
    tracks = extremal.q_integral_track(phis, q, beta)
    rows = []
    for step, ((m, d), phi, tr) in enumerate(zip(ladder, phis, tracks)):
        rows.append({
            "step": step, "arity": m, "depth": d, "beta": beta,
            "gap41": ineq_41_report(phi, p, q, beta).gap,
            "stability": extremal.stability_metric(phi, beta, p),
            "A_q": tr.A, "q_measured": tr.measured, "q_predicted": tr.predicted,
            "omega_drift": tr.omega_drift,
        })
    if a.format == "json":
        _emit(_dump_json(rows), a.out)
    else:
        _emit(_table_csv(rows, STABILITY_COLUMNS), a.out)
    ok = all(r["gap41"] >= -1e-10 and r["stability"] >= 0 for r in rows)
    return 0 if ok else 1


def cmd_selftest(a) -> int:
    results = suites.run_all(a.seed, a.samples)
    ok = all(r.ok for r in results)
    out = {"ok": ok, "seed": a.seed, "samples": a.samples, "suites": [r.to_dict() for r in results]}
    _emit(_dump_json(out), a.out)
    return 0 if ok else 1


# ------------------------------------------------------------------ parser


def _nonneg_int(s):
    v = int(s)
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be a nonnegative integer, got {s}")
    return v


def _pos_int(s):
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {s}")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=float)
    common.add_argument("--q", type=float)
    common.add_argument("--beta", type=float)
    common.add_argument("--f", type=float)
    common.add_argument("--F", type=float)
    common.add_argument("--arity", type=int)
    common.add_argument("--depth", type=int)
    common.add_argument("--seed", type=_nonneg_int, default=0)
    common.add_argument("--samples", type=_pos_int, default=1000)
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--format", choices=("json", "csv"))

    ap = argparse.ArgumentParser(prog="maxbell", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bellman", parents=[common], help="beta, omega_p and B(f,F) for a pair")
    b.add_argument("f_pos", metavar="f", type=float)
    b.add_argument("F_pos", metavar="F", type=float)
    b.add_argument("p_pos", metavar="p", type=float)
    b.set_defaults(run=cmd_bellman)

    v = sub.add_parser("verify", parents=[common], help="inequality reports on a given or random functions")
    v.add_argument("--input", help="StepFunction JSON file")
    v.set_defaults(run=cmd_verify)

    s = sub.add_parser("sweep", parents=[common], help="sharpness sweeps as CSV")
    s.add_argument("--kind", choices=("alpha", "beta"), default="alpha")
    s.add_argument("--points", type=_pos_int, default=12)
    s.set_defaults(run=cmd_sweep)

    for name, fn, hlp in (("extremal", cmd_extremal, "refinement ladder of spine functions"),
                          ("stability", cmd_stability, "stability trajectory along a ladder")):
        e = sub.add_parser(name, parents=[common], help=hlp)
        e.add_argument("--depths", help="comma-separated ladder depths (overrides --depth)")
        e.add_argument("--band", type=float, default=extremal.DEFAULT_BAND)
        if name == "stability":
            e.add_argument("--input", help="StepFunction JSON file: report one function")
        e.set_defaults(run=fn)

    t = sub.add_parser("selftest", parents=[common], help="run every invariant suite")
    t.set_defaults(run=cmd_selftest)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    a = ap.parse_args(argv)
    if a.format is None:
        a.format = "csv" if a.command in ("sweep", "extremal", "stability") and not getattr(a, "input", None) else "json"
    try:
        return a.run(a)
    except (ConfigError, ValueError, TypeError, OSError) as exc:
        print(f"maxbell: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
