"""Batch front-end: run scenarios, compare controllers, robustness sweeps.

    enspace run <config.ini> [--set section.key=value]... [--out DIR]
    enspace compare <config.ini> <config.ini>... [--out DIR]
    enspace robustness <config.ini> --param R --error 0.10 [--out DIR]
    enspace preset <name> [--out DIR]

ENSPACE_OUT overrides the default output directory (./enspace-out).
Exit codes: 0 success (audit FAILs are reported, not enforced), 1 config
error, 2 simulation guard failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

import numpy as np

from .errors import ConfigError
from .config import parse_config, apply_overrides, emit_config, ScenarioConfig
from .presets import build_preset, PRESETS, ROBUST_CONTROLLERS, preset_variant
from .feasibility import tau_prime, schedule_from_profile
from .simulator import run, Scenario
from .verification import run_audits, metrics
from . import svgplot

EXIT_OK, EXIT_CONFIG, EXIT_GUARD = 0, 1, 2


def _out_dir(args, *sub):
    base = args.out or os.environ.get("ENSPACE_OUT") or "enspace-out"
    path = os.path.join(base, *sub)
    os.makedirs(path, exist_ok=True)
    return path


def _controller_gain(scenario: Scenario) -> float:
    if scenario.controller == "constant_gain":
        return scenario.constant_gain.K2
    if scenario.controller == "brayton_moser":
        return scenario.brayton_moser.K1
    return scenario.fblc.K if scenario.controller == "fblc" else scenario.smc.K


def _schedule(cfg: ScenarioConfig, scenario: Scenario):
    if not cfg.feasibility_check:
        return None
    tp = tau_prime(scenario.params, _controller_gain(scenario))
    horizon = min(scenario.t_end, scenario.load.horizon)
    if horizon < scenario.window_s:
        return None
    return schedule_from_profile(scenario.load, scenario.window_s, horizon,
                                 tp, symmetric=cfg.symmetric_qrange)


def _write_plots(outdir, traj, schedule):
    t = traj.t
    svgplot.plot_lines(os.path.join(outdir, "current.svg"), t,
                       [("i", traj.i)], title="Inductor current", ylabel="A")
    svgplot.plot_lines(os.path.join(outdir, "voltage.svg"), t,
                       [("v", traj.v)], title="Terminal voltage", ylabel="V")
    svgplot.plot_lines(os.path.join(outdir, "control.svg"), t,
                       [("u", traj.u)], title="Source voltage", ylabel="V")
    svgplot.plot_lines(os.path.join(outdir, "control_rate.svg"), t,
                       [("du/dt", traj.du_dt)],
                       title="Source voltage rate", ylabel="V/s")
    svgplot.plot_lines(os.path.join(outdir, "tracking.svg"), t,
                       [("y_z", traj.y_z), ("y_ref", traj.y_ref)],
                       title="Energy output vs reference", ylabel="W")
    p_bands = q_bands = None
    if schedule is not None:
        p_bands = [(k * schedule.window_s, (k + 1) * schedule.window_s,
                    b.P_lo, b.P_hi) for k, b in enumerate(schedule.boxes)]
        q_bands = [(k * schedule.window_s, (k + 1) * schedule.window_s,
                    b.Qd_lo, b.Qd_hi) for k, b in enumerate(schedule.boxes)]
    svgplot.plot_lines(os.path.join(outdir, "power_rate.svg"), t,
                       [("P_out source", traj.P_out_src)], bands=p_bands,
                       title="Outgoing power vs admissible range", ylabel="W")
    svgplot.plot_lines(os.path.join(outdir, "reactive_rate.svg"), t,
                       [("Qd_out source", traj.Qd_out_src)], bands=q_bands,
                       title="Outgoing reactive rate vs admissible range",
                       ylabel="W/s")


def _report_lines(scenario, result, mets, audits, violation_line=None):
    yield f"scenario={scenario.name}"
    yield f"controller={scenario.controller}"
    yield f"objective={scenario.objective}"
    yield f"completed={result.completed}"
    if not result.completed:
        yield f"abort_time={result.abort_time}"
        yield f"abort_reason={result.abort_reason}"
    if mets is not None:
        yield f"settling_time_s={mets.settling_time:.6g}"
        yield f"settled={mets.settled}"
        yield f"overshoot_frac={mets.overshoot:.6g}"
        yield f"rms_tracking_error_w={mets.rms_tracking_error:.6g}"
        yield f"max_du_dt_v_per_s={mets.max_du_dt:.6g}"
    if violation_line:
        yield violation_line
    for line in audits.lines():
        yield f"audit: {line}"


def _run_one(cfg: ScenarioConfig, outdir: str):
    scenario = cfg.to_scenario()
    result = run(scenario)
    schedule = _schedule(cfg, scenario)
    audits = run_audits(result, scenario, schedule)
    mets = metrics(result.trajectory) if len(result.trajectory) else None
    from .feasibility import detect_violation
    vio = detect_violation(result.trajectory, schedule) if schedule else None
    vline = None
    if schedule is not None:
        vline = ("feasibility_violation=none" if vio is None else
                 f"feasibility_violation=t:{vio.time:.6g},axis:{vio.axis},"
                 f"window:{vio.window},value:{vio.value:.6g}")
    lines = list(_report_lines(scenario, result, mets, audits, vline))
    if cfg.output_csv:
        result.trajectory.to_csv(os.path.join(outdir, "trajectory.csv"), lines)
        audits.to_csv(os.path.join(outdir, "audits.csv"))
        if schedule is not None:
            schedule.to_csv(os.path.join(outdir, "ranges.csv"))
    with open(os.path.join(outdir, "report.txt"), "w") as fh:
        fh.write("\n".join(lines) + "\n")
    with open(os.path.join(outdir, "scenario.ini"), "w") as fh:
        fh.write(emit_config(cfg))
    if cfg.output_plots and len(result.trajectory):
        _write_plots(outdir, result.trajectory, schedule)
    return scenario, result, mets, audits, vio, lines


def cmd_run(args) -> int:
    try:
        cfg = parse_config(args.config)
        cfg = apply_overrides(cfg, args.set or [])
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    outdir = _out_dir(args, cfg.name)
    scenario, result, mets, audits, vio, lines = _run_one(cfg, outdir)
    print("\n".join(lines))
    print(f"artifacts in {outdir}")
    return EXIT_OK if result.completed else EXIT_GUARD


def _compare_table(rows):
    header = ("controller", "settling_s", "overshoot", "rms_err_w",
              "max_du_dt", "feasible")
    widths = [max(len(h), 14) for h in header]
    out = ["  ".join(h.ljust(w) for h, w in zip(header, widths))]
    for r in rows:
        out.append("  ".join(str(c).ljust(w) for c, w in zip(r, widths)))
    return "\n".join(out)


def cmd_compare(args) -> int:
    if len(args.configs) < 2:
        print("compare needs at least two configs", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfgs = [parse_config(p) for p in args.configs]
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    base = {k: v for k, v in cfgs[0].values.items() if k[0] != "controller"}
    for cfg in cfgs[1:]:
        other = {k: v for k, v in cfg.values.items() if k[0] != "controller"}
        if other != base:
            print("compare configs must differ only in [controller]",
                  file=sys.stderr)
            return EXIT_CONFIG
    rows = []
    guard_failed = False
    for cfg in cfgs:
        outdir = _out_dir(args, "compare", cfg.name)
        scenario, result, mets, audits, vio, _ = _run_one(cfg, outdir)
        guard_failed |= not result.completed
        rows.append((scenario.controller,
                     f"{mets.settling_time:.4g}" if mets else "-",
                     f"{mets.overshoot:.4g}" if mets else "-",
                     f"{mets.rms_tracking_error:.4g}" if mets else "-",
                     f"{mets.max_du_dt:.4g}" if mets else "-",
                     "no" if vio else "yes"))
    table = _compare_table(rows)
    print(table)
    with open(os.path.join(_out_dir(args, "compare"), "table.txt"), "w") as fh:
        fh.write(table + "\n")
    return EXIT_GUARD if guard_failed else EXIT_OK


def _perturbed_scenario(scenario: Scenario, param: str, error: float) -> Scenario:
    nominal = {"R": scenario.params.R, "L": scenario.params.L,
               "C": scenario.params.C}[param]
    value = nominal * (1.0 + error)
    key = {"R": "controller_R", "L": "controller_L", "C": "controller_C"}[param]
    return replace(scenario, **{key: value},
                   name=f"{scenario.name}-{param}err{error:+.2f}")


def run_robustness(scenario: Scenario, param: str, error: float):
    """Nominal vs controller-perturbed run for one controller.

    Returns dict with steady-state voltage offsets (mean of the last 5% of
    the horizon minus v_ref) and the chattering indicator (ratio of peak
    |du/dt|, perturbed over nominal).
    """
    if param not in ("R", "L", "C"):
        raise ConfigError("param must be one of R, L, C")
    res_nom = run(scenario)
    res_pert = run(_perturbed_scenario(scenario, param, error))

    def ss_offset(result):
        traj = result.trajectory
        if len(traj) == 0 or not result.completed:
            return float("nan")
        t = traj.t
        tail = t >= t[-1] - 0.05 * (t[-1] - t[0] if t[-1] > t[0] else 1.0)
        return float(np.mean(traj.v[tail])) - scenario.v_ref

    m_nom = metrics(res_nom.trajectory) if len(res_nom.trajectory) else None
    m_pert = metrics(res_pert.trajectory) if len(res_pert.trajectory) else None
    ratio = (m_pert.max_du_dt / m_nom.max_du_dt
             if m_nom and m_pert and m_nom.max_du_dt > 0 else float("nan"))
    return {
        "controller": scenario.controller,
        "offset_nominal_v": ss_offset(res_nom),
        "offset_perturbed_v": ss_offset(res_pert),
        "du_dt_nominal": m_nom.max_du_dt if m_nom else float("nan"),
        "du_dt_perturbed": m_pert.max_du_dt if m_pert else float("nan"),
        "chatter_ratio": ratio,
        "completed": res_nom.completed and res_pert.completed,
        "results": (res_nom, res_pert),
    }


def _print_robustness(rep):
    print(f"controller={rep['controller']}: "
          f"ss offset nominal {rep['offset_nominal_v']:+.4f} V, "
          f"perturbed {rep['offset_perturbed_v']:+.4f} V; "
          f"max|du/dt| {rep['du_dt_nominal']:.4g} -> {rep['du_dt_perturbed']:.4g} "
          f"(ratio {rep['chatter_ratio']:.3g})")


def cmd_robustness(args) -> int:
    try:
        cfg = parse_config(args.config)
        scenario = cfg.to_scenario()
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        rep = run_robustness(scenario, args.param, args.error)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    _print_robustness(rep)
    outdir = _out_dir(args, f"robustness-{cfg.name}")
    with open(os.path.join(outdir, "robustness.txt"), "w") as fh:
        for key, val in rep.items():
            if key != "results":
                fh.write(f"{key}={val}\n")
    return EXIT_OK if rep["completed"] else EXIT_GUARD


def cmd_preset(args) -> int:
    try:
        if args.name == "robust-r10":
            reports = []
            ok = True
            outdir = _out_dir(args, "robust-r10")
            for ctrl in ROBUST_CONTROLLERS:
                cfg = preset_variant("robust-r10", ctrl)
                rep = run_robustness(cfg.to_scenario(), "R", 0.10)
                _print_robustness(rep)
                reports.append(rep)
                ok &= rep["completed"]
            with open(os.path.join(outdir, "robustness.txt"), "w") as fh:
                for rep in reports:
                    fh.write(" ".join(f"{k}={v}" for k, v in rep.items()
                                      if k != "results") + "\n")
            return EXIT_OK if ok else EXIT_GUARD
        cfg = build_preset(args.name)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    outdir = _out_dir(args, cfg.name)
    scenario, result, mets, audits, vio, lines = _run_one(cfg, outdir)
    print("\n".join(lines))
    print(f"artifacts in {outdir}")
    return EXIT_OK if result.completed else EXIT_GUARD


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="enspace",
        description="Energy-space control simulation and verification")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario config")
    p_run.add_argument("config")
    p_run.add_argument("--set", action="append", metavar="section.key=value")
    p_run.add_argument("--out", default=None)
    p_run.set_defaults(func=cmd_run)

    p_cmp = sub.add_parser("compare", help="side-by-side controller table")
    p_cmp.add_argument("configs", nargs="+")
    p_cmp.add_argument("--out", default=None)
    p_cmp.set_defaults(func=cmd_compare)

    p_rob = sub.add_parser("robustness", help="controller-side parameter error")
    p_rob.add_argument("config")
    p_rob.add_argument("--param", required=True, choices=("R", "L", "C"))
    p_rob.add_argument("--error", required=True, type=float)
    p_rob.add_argument("--out", default=None)
    p_rob.set_defaults(func=cmd_robustness)

    p_pre = sub.add_parser("preset", help=f"run a named preset: {', '.join(PRESETS)}")
    p_pre.add_argument("name")
    p_pre.add_argument("--out", default=None)
    p_pre.set_defaults(func=cmd_preset)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
