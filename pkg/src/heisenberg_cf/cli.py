"""Command-line front end.

Exit codes: 0 ok, 2 config, 3 GENERATION_FAILED, 4 BUDGET_EXCEEDED,
5 REPORT_FAIL, 6 OVERFLOW, 7 SHEAR_MISMATCH, 8 LEVEL_OUT_OF_RANGE,
9 GAMMA_ZERO, 10 SCHEDULE_MISMATCH.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import config as config_mod
from . import diagnostics as diag
from . import io as cio
from . import spectral as spec
from .engine import validate
from .errors import CFError, ConfigError, ReportFail
from .folner import BoxParams, folner_ratio, inverse_symmetry_ratio, tiling_check
from .group import GroupElement, a, as_fraction, b, c
from .schedules import build as build_schedule
from .schedules import check_thm51


def _rationals(text: str) -> list[Fraction]:
    try:
        return [as_fraction(t) for t in text.split(",") if t.strip()]
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"bad rational list {text!r}") from exc


def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad integer list {text!r}") from exc


def _emit(args, name: str, rows: list[dict], summary: dict, columns=None) -> None:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.format == "json":
        cio.write_json(out / f"{name}.json", {"rows": rows, "summary": summary})
    else:
        cio.write_csv(out / f"{name}.csv", rows, columns)
        cio.write_json(out / f"{name}_summary.json", summary)


def _config(args) -> dict:
    cfg = config_mod.load(args.config) if args.config else config_mod.resolve({})
    if args.seed is not None:
        cfg["build"]["seed"] = args.seed
    return cfg


# ---------------------------------------------------------------------------
# commands


def cmd_build(args) -> int:
    cfg = _config(args)["build"]
    if args.kind:
        cfg["kind"] = args.kind
    if args.levels is not None:
        cfg["levels"] = args.levels
    if args.gamma_integer is not None:
        cfg["gamma_integer"] = args.gamma_integer
    config_mod.resolve(cfg, "build")
    s = build_schedule(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cio.save_schedule(out / "schedule.json", s)
    report = validate(s)
    summary = {"schedule_hash": s.content_hash, "kind": cfg["kind"], "levels": s.N,
               "validate": report, "steps": [_step_summary(n) for n in s.annotations]}
    if cfg["kind"] == "infinite":
        summary["infinite_conditions"] = check_thm51(s)
    rows = []
    for n, p in enumerate(s.f_params):
        rows.append({"level": n, "alpha": p.alpha, "beta": p.beta, "gamma": p.gamma,
                     "count": len(s.C(n)) if n else None,
                     "step_type": s.annotations[n - 1]["type"] if n else None,
                     "mu_X": s.mu_X(n)})
    _emit(args, "build_report", rows, summary)
    passed = report["passed"] and summary.get("infinite_conditions", {"passed": True})["passed"]
    return 0 if passed else ReportFail.exit_code


def _step_summary(note: dict) -> dict:
    keep = ("step", "type", "phi", "S", "F_tilde", "H_dims", "D_grid", "radius", "l", "separation")
    out = {k: note[k] for k in keep if k in note}
    if "spacer_report" in note:
        out["spacer_report"] = note["spacer_report"]
    if "quadrature" in note:
        out["quadrature_max_discrepancy"] = note["quadrature"]["max_discrepancy"]
        out["quadrature_max_discrepancy_se"] = note["quadrature"]["max_discrepancy_se"]
    return out


def cmd_validate(args) -> int:
    s = cio.load_schedule(args.schedule, verify_hash=False)
    stored = json.loads(Path(args.schedule).read_text()).get("content_hash")
    report = validate(s)
    summary = {"hash_ok": stored == s.content_hash, **report}
    if s.kind == "infinite":
        summary["infinite_conditions"] = check_thm51(s)
    rows = report["levels"]
    _emit(args, "validate", rows, summary)
    ok = report["passed"] and summary.get("infinite_conditions", {"passed": True})["passed"]
    if not ok:
        for f in report["failures"][:5]:
            print(json.dumps(cio.jsonable(f), sort_keys=True), file=sys.stderr)
    return 0 if ok else ReportFail.exit_code


def cmd_correlate(args) -> int:
    dcfg = _config(args)["diagnostics"]
    s = cio.load_schedule(args.schedule)
    level = args.level if args.level is not None else max(s.N - 2, 0)
    fam = diag.fat_family(s, level)
    A, B = fam[args.set_a], fam[args.set_b]
    grid = _rationals(args.t_grid) if args.t_grid else [as_fraction(t) for t in dcfg["t_grid"]]
    rep = diag.correlation_decay(s, args.direction or dcfg["direction"], grid, A, B,
                                 budget=dcfg["budget"])
    gaps = [Fraction(r["gap"]) for r in rep["rows"] if "gap" in r]
    summary = {"schedule_hash": s.content_hash, "direction": rep["direction"], "set_level": level,
               "sets": [args.set_a, args.set_b], "max_gap": max(gaps) if gaps else None,
               "overflow_rows": sum(1 for r in rep["rows"] if not r.get("exact", False)),
               "spacer_tail": rep["spacer_tail"]}
    _emit(args, "correlate", rep["rows"], summary)
    return 0


def _asym_job(payload):
    s, n, qname = payload
    quad = diag.standard_quadruples(diag.fat_family(s, n))[qname]
    return diag.asymmetry_report(s, n, *quad)


def cmd_asymmetry(args) -> int:
    dcfg = _config(args)["diagnostics"]
    s = cio.load_schedule(args.schedule)
    levels = _ints(args.levels) if args.levels else dcfg["levels"]
    jobs = [(s, n, q) for n in levels for q in ("HHHH", "HHXH", "HXHH", "LUKU")]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            reports = list(pool.map(_asym_job, jobs))
    else:
        reports = [_asym_job(j) for j in jobs]
    rows, per_level = [], {}
    for (_, n, q), rep in zip(jobs, reports):
        for r in rep["classes"]:
            rows.append({"n": n, "sets": q, **r})
        rows.append({"n": n, "sets": q, "class": "total", "value": rep["total"],
                     "unresolved": rep["total_unresolved"], "level": rep["level"]})
        lv = per_level.setdefault(n, {"additive": True, "max_relative_gap": Fraction(0)})
        lv["additive"] = lv["additive"] and rep["additive"]
        lv["max_relative_gap"] = max(lv["max_relative_gap"], rep["max_relative_gap"])
        lv["targets_agree"] = lv.get("targets_agree", True) and all(
            r["targets_agree"] is not False for r in rep["classes"])
    for n in levels:
        per_level[n]["thin"] = diag.forward_backward(s, n, diag.thin_cylinder(s, n))
    gaps = [per_level[n]["max_relative_gap"] for n in levels]
    last = per_level[levels[-1]]["thin"]
    summary = {
        "schedule_hash": s.content_hash,
        "levels": {str(n): per_level[n] for n in levels},
        "gap_strictly_decreasing": all(x > y for x, y in zip(gaps, gaps[1:])),
        "forward_exceeds_backward_at_last": Fraction(last["forward"]) > Fraction(last["backward"]),
    }
    _emit(args, "asymmetry", rows, summary)
    return 0


def cmd_rigidity(args) -> int:
    dcfg = _config(args)["diagnostics"]
    s = cio.load_schedule(args.schedule)
    levels = _ints(args.levels) if args.levels else dcfg["rigidity_levels"]
    rep = diag.rigidity_test(s, levels, budget=dcfg["budget"])
    summary = {k: v for k, v in rep.items() if k != "rows"}
    _emit(args, "rigidity", rep["rows"], summary)
    return 0


def cmd_tiling(args) -> int:
    dcfg = _config(args)["diagnostics"]
    params = BoxParams.of(*(_rationals(args.params) if args.params else dcfg["tiling_params"]))
    radius = args.radius if args.radius is not None else dcfg["tiling_radius"]
    rep = tiling_check(params, radius, as_fraction(args.step_factor))
    rows = rep["offending_pairs"]
    summary = {k: v for k, v in rep.items() if k != "offending_pairs"}
    _emit(args, "tiling", rows, summary, columns=["z", "z_prime", "overlap_volume"])
    return 0 if rep["passed"] else ReportFail.exit_code


def cmd_folner(args) -> int:
    dcfg = _config(args)["diagnostics"]
    gammas = _rationals(args.gammas) if args.gammas else [as_fraction(g) for g in dcfg["folner_gammas"]]
    seed = args.seed if args.seed is not None else 0
    K = {"a(1)": a(1), "b(1)": b(1), "c(1)": c(1)}
    rows = []
    for gam in gammas:
        p = BoxParams.of(1, 1, gam)
        row = {"gamma": gam}
        for name, g in K.items():
            row[f"ratio_{name}"] = folner_ratio(g, p)
        row["max_ratio"] = max(row[f"ratio_{n}"] for n in K)
        est = inverse_symmetry_ratio(p, dcfg["samples"], seed)
        row["inverse_symmetry"] = est.estimate
        row["inverse_symmetry_se"] = est.std_error
        rows.append(row)
    maxima = [r["max_ratio"] for r in rows]
    summary = {"elements": list(K), "strictly_decreasing": all(x > y for x, y in zip(maxima, maxima[1:])),
               "seed": seed}
    _emit(args, "folner", rows, summary)
    return 0


def cmd_spectral(args) -> int:
    dcfg = _config(args)["diagnostics"]
    gamma = float(as_fraction(args.gamma)) if args.gamma else float(as_fraction(dcfg["spectral_gamma"]))
    L, step = dcfg["spectral_half_width"], dcfg["spectral_step"]
    f = spec.GridVector.from_function(lambda x: np.exp(-x ** 2 / 2) * (1 + 0.5j * x), L, step)
    tests = [GroupElement.of(0, 0, 3), GroupElement.of("1/2", 2, -1), GroupElement.of(3, "-1/4", 5),
             GroupElement.of(12, 0, 0)]
    rows = []
    for g in tests:
        res = spec.eval_pi_gamma(gamma, g, f)
        defect = f.norm2() - res.vector.norm2()
        rows.append({"g": g.to_json(), "pi_ab_modulus": abs(spec.eval_pi_ab(0.7, -1.3, g)),
                     "norm_defect": defect, "boundary_mass": res.boundary_mass,
                     "defect_minus_boundary": defect - res.boundary_mass,
                     "shift_cells": res.shift_cells, "rounding": res.rounding})
    tensor = {f"{g},{h}": spec.tensor_rule(g, h).to_json() for g, h in ((1, 2), (2, 1), (1, -1), (3, -2))}
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    spec.write_grid(out / "spectral_grid.bin", spec.eval_pi_gamma(gamma, tests[1], f).vector)
    summary = {"gamma": gamma, "half_width": L, "step": step, "tensor_rule": tensor,
               "restrict_center_of_planar": spec.restrict_type(
                   spec.SpectralTypeDescriptor.of(planar_atoms=[(1, (0, 0), 1)]), "center").to_json()}
    _emit(args, "spectral", rows, summary)
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file (sections 'build', 'diagnostics')")
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--seed", type=int, default=None, help="root seed (unsigned 64-bit)")
    common.add_argument("--jobs", type=int, default=1, help="worker processes where supported")
    common.add_argument("--format", choices=("csv", "json"), default="csv")

    p = argparse.ArgumentParser(prog="heisenberg-cf", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("build", parents=[common], help="build a schedule")
    q.add_argument("--kind", choices=("asymmetric", "mixing", "infinite"))
    q.add_argument("--levels", type=int)
    q.add_argument("--gamma-integer", action=argparse.BooleanOptionalAction, default=None)
    q.set_defaults(fn=cmd_build)

    q = sub.add_parser("validate", parents=[common], help="check the nesting, containment and disjointness conditions")
    q.add_argument("schedule")
    q.set_defaults(fn=cmd_validate)

    q = sub.add_parser("correlate", parents=[common], help="correlation decay along a direction")
    q.add_argument("schedule")
    q.add_argument("--direction", choices=("a", "b", "c"))
    q.add_argument("--t-grid", help="comma-separated rationals")
    q.add_argument("--level", type=int, help="level of the test sets")
    q.add_argument("--set-a", default="half", choices=("half", "lower", "upper", "skew"))
    q.add_argument("--set-b", default="half", choices=("half", "lower", "upper", "skew"))
    q.set_defaults(fn=cmd_correlate)

    q = sub.add_parser("asymmetry", parents=[common], help="mod-5 asymmetry statistics")
    q.add_argument("schedule")
    q.add_argument("--levels", help="comma-separated steps divisible by 3")
    q.set_defaults(fn=cmd_asymmetry)

    q = sub.add_parser("rigidity", parents=[common], help="rigidity along phi_n(0,0,5)")
    q.add_argument("schedule")
    q.add_argument("--levels", help="comma-separated steps divisible by 3")
    q.set_defaults(fn=cmd_rigidity)

    q = sub.add_parser("tiling", parents=[common], help="tiling check of I(alpha,beta,gamma)")
    q.add_argument("--params", help="alpha,beta,gamma")
    q.add_argument("--radius", type=int)
    q.add_argument("--step-factor", default="2", help="t3 lattice step in units of gamma")
    q.set_defaults(fn=cmd_tiling)

    q = sub.add_parser("folner", parents=[common], help="Følner ratios for boxes (1,1,gamma)")
    q.add_argument("--gammas", help="comma-separated rationals")
    q.set_defaults(fn=cmd_folner)

    q = sub.add_parser("spectral", parents=[common], help="representation and spectral-type battery")
    q.add_argument("--gamma")
    q.set_defaults(fn=cmd_spectral)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except CFError as exc:
        print(json.dumps(cio.jsonable(exc.to_dict()), sort_keys=True), file=sys.stderr)
        return exc.exit_code
    except (ValueError, KeyError) as exc:
        print(json.dumps({"code": ConfigError.code, "message": str(exc)}), file=sys.stderr)
        return ConfigError.exit_code


if __name__ == "__main__":
    sys.exit(main())
