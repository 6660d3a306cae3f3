"""Command line entry point: ``nutaxis simulate|sweep|verify|gn-test``.

Exit status is 0 when every requested check passes, 1 when a check fails
or the computation breaks down (reports are still written), and 2 for an
invalid configuration.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .functionals import NonFiniteFunctional
from .grid import make_grid
from .harness import (
    InequalityReport,
    check_balance_laws,
    check_dissipation_bounds,
    check_gronwall,
    dual_pairing_monitor,
)
from .initial_data import TAIL_TOLERANCE, build_initial, validate_hypotheses
from .io import (
    ConfigError,
    RunConfig,
    SUBCOMMANDS,
    fmt,
    load_config,
    read_trajectory,
    write_reports,
    write_sweep_csv,
    write_trajectory,
)
from .limit import SweepError, consecutive, default_bank, pairwise_distances, run_sweep, weak_residual
from .solver import PositivityViolation, SolveFailure, simulate

log = logging.getLogger("nutaxis")

RUNTIME_ERRORS = (PositivityViolation, SolveFailure, NonFiniteFunctional, SweepError, FloatingPointError)


def _single(name, margin, tol, **kw) -> InequalityReport:
    return InequalityReport(name, np.array([0.0]), np.array([float(margin)]), tol, **kw)


def hypotheses_report(cfg: RunConfig) -> InequalityReport:
    if cfg.spec.hypothesis_exempt:
        return _single("hypotheses", 0.0, 0.0, notes=["initial data are hypothesis-exempt; not validated"])
    rep = validate_hypotheses(cfg.spec, cfg.monitors.p_list)
    keys = sorted(rep.tails)
    margins = np.array(
        [(TAIL_TOLERANCE - rep.tails[k]) / TAIL_TOLERANCE if np.isfinite(rep.tails[k]) else -np.inf for k in keys]
    )
    if not rep.passed:
        margins = np.minimum(margins, -1.0)
    return InequalityReport(
        "hypotheses",
        np.arange(len(keys), dtype=float),
        margins,
        0.0,
        fitted={"K": rep.K},
        notes=rep.notes + [f"failed: {', '.join(rep.failed_checks())}"] * (not rep.passed),
    )


def weak_report(traj, cfg: RunConfig) -> InequalityReport:
    bank = default_bank(cfg.window, 0.8 * cfg.T)
    wr = weak_residual(traj, bank, cfg.variant)
    res = np.concatenate([wr.u, wr.v])
    return InequalityReport(
        f"weak_residual[{cfg.variant},eps={traj.epsilon:g}]",
        np.arange(res.size, dtype=float),
        cfg.weak_tol - res,
        0.0,
        fitted={"max_u": float(wr.u.max()), "max_v": float(wr.v.max())},
        notes=[f"{len(bank)} test functions; margin = weak_tol - residual"],
        horizon=cfg.T,
    )


def dual_report(traj, cfg: RunConfig) -> list:
    out = []
    for p in cfg.monitors.p_list:
        d = dual_pairing_monitor(traj, p, cfg.monitors.cutoff, cfg.monitors.psi_dictionary_size)
        out.append(
            _single(
                f"dual_pairing[p={p:g},eps={traj.epsilon:g}]",
                0.0 if np.isfinite(d.time_integral) else -np.inf,
                0.0,
                fitted={"time_integral": d.time_integral, "dict_size": d.dict_size},
                notes=["dictionary lower bound of the dual norm; recorded, finite required"],
                horizon=cfg.T,
            )
        )
    return out


def _simulate_one(cfg: RunConfig, epsilon: float):
    grid = make_grid(epsilon, cfg.cells(epsilon))
    init = build_initial(cfg.spec, grid)
    return simulate(init, cfg.params, cfg.T, monitors=cfg.monitors, metadata={"seed": cfg.seed})


def _per_trajectory_checks(traj, cfg: RunConfig) -> list:
    reps = []
    if "balance" in cfg.checks:
        r = check_balance_laws(traj, cfg.tol_rel)
        r.check_name = f"balance_laws[eps={traj.epsilon:g}]"
        reps.append(r)
    if "weak" in cfg.checks:
        reps.append(weak_report(traj, cfg))
    if "dual" in cfg.checks:
        reps.extend(dual_report(traj, cfg))
    return reps


def run_simulate(cfg: RunConfig, out: Path) -> list:
    reports = [hypotheses_report(cfg)] if "hypotheses" in cfg.checks else []
    traj = _simulate_one(cfg, cfg.epsilons[0])
    write_trajectory(out, traj)
    return reports + _per_trajectory_checks(traj, cfg)


def run_sweep_command(cfg: RunConfig, out: Path) -> list:
    reports = [hypotheses_report(cfg)] if "hypotheses" in cfg.checks else []
    sw = run_sweep(
        cfg.spec,
        cfg.params,
        cfg.epsilons,
        cfg.T,
        cfg.dx,
        cfg.window,
        cfg.monitors.sample_interval,
        cfg.monitors,
        cfg.workers,
    )
    for k, traj in enumerate(sw.trajectories):
        write_trajectory(out / f"eps_{k:02d}", traj)
        reports += _per_trajectory_checks(traj, cfg)

    if "gronwall" in cfg.checks:
        cal = sw.trajectories[sw.epsilons.index(cfg.calibration_epsilon)]
        for traj in sw.trajectories:
            if traj.epsilon >= cal.epsilon:
                continue
            for p in cfg.monitors.p_list:
                reports.append(check_gronwall(traj, p, cfg.monitors.q_for(p), cal, cfg.gronwall_tol))
    if "dissipation" in cfg.checks:
        for p in cfg.monitors.p_list:
            reports.append(check_dissipation_bounds(sw.trajectories, p, cfg.dissipation_slack))

    for q in cfg.distance_q:
        pairwise_distances(sw, q)
    write_sweep_csv(out / "sweep.csv", sw.epsilons, sw.distances)
    if "cauchy" in cfg.checks:
        for q, (Du, Dv) in sw.distances.items():
            comps = {}
            for name, D in (("u", Du), ("v", Dv)):
                d = consecutive(D)
                comps[name] = (d[:-1] - d[1:]) / d[:-1]
            reports.append(
                InequalityReport(
                    f"cauchy[q={q:g}]",
                    np.array(sw.epsilons[1:-1]),
                    np.minimum(comps["u"], comps["v"]),
                    0.0,
                    components=comps,
                    fitted={f"d_u[{j}]": v for j, v in enumerate(consecutive(Du))}
                    | {f"d_v[{j}]": v for j, v in enumerate(consecutive(Dv))},
                    notes=[f"window [-{cfg.window:g}, {cfg.window:g}]"],
                    horizon=cfg.T,
                )
            )
    return reports


def run_verify(cfg: RunConfig, out: Path) -> list:
    """Reload snapshots under ``out`` (or its ``eps_*`` members) and recheck balance laws."""
    dirs = sorted(p for p in out.glob("eps_*") if p.is_dir()) or [out]
    reports = []
    for d in dirs:
        traj = read_trajectory(d, cfg.params)
        r = check_balance_laws(traj, cfg.tol_rel)
        r.check_name = f"balance_laws[{d.name}]"
        reports.append(r)
    return reports


def run_gn(cfg: RunConfig, out: Path) -> list:
    from .gn import estimate_gn_ratio

    out.mkdir(parents=True, exist_ok=True)
    reports = []
    for k, case in enumerate(cfg.gn_cases):
        res = estimate_gn_ratio(case, cfg.gn_samples)
        (out / f"gn_ratio_{k:02d}.csv").write_text(res.to_csv())
        reports.append(
            InequalityReport(
                f"gn_ratio[{case.label}]",
                np.array(case.epsilons),
                np.full(len(case.epsilons), (2.0 - res.variation) / 2.0),
                0.0,
                components={"variation": np.array([(2.0 - res.variation) / 2.0])},
                fitted={f"max_ratio[eps={e:g}]": m for e, m in zip(case.epsilons, res.max_ratio)}
                | {"theta": case.theta},
                notes=[f"sampler {case.sampler.name} seed {case.sampler.seed}, {cfg.gn_samples} samples"],
            )
        )
        err = float(res.scaling_errors.max())
        reports.append(_single(f"gn_scaling[{case.label}]", 1e-10 - err, 0.0, fitted={"max_rel_error": err}))
    return reports


RUNNERS = {"simulate": run_simulate, "sweep": run_sweep_command, "verify": run_verify, "gn-test": run_gn}


def execute(cfg: RunConfig) -> int:
    """Run one subcommand; returns the process exit status."""
    out = cfg.out or Path("nutaxis_out")
    out.mkdir(parents=True, exist_ok=True)
    try:
        reports = RUNNERS[cfg.subcommand](cfg, out)
    except RUNTIME_ERRORS as exc:
        log.error("run failed: %s", exc)
        reports = [_single("runtime", -np.inf, 0.0, notes=[f"{type(exc).__name__}: {exc}"])]
    except (FileNotFoundError, ValueError) as exc:
        if cfg.subcommand != "verify":
            raise
        reports = [_single("verify_input", -np.inf, 0.0, notes=[str(exc)])]
    # verify must not overwrite the reports of the run it inspects
    write_reports(out / "verify" if cfg.subcommand == "verify" else out, reports)
    for r in reports:
        log.info("%s", r.summary())
    return 0 if all(r.passed for r in reports) else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nutaxis", description=__doc__.splitlines()[0])
    ap.add_argument("subcommand", choices=SUBCOMMANDS)
    ap.add_argument("--config", required=True, type=Path, help="key = value config file")
    ap.add_argument("--out", type=Path, default=None, help="output directory (default: config 'out' or ./nutaxis_out)")
    ap.add_argument("--variant", choices=("derived", "printed"), default="derived",
                    help="second diffusion term of the u weak identity")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config, args.subcommand, args.out, args.variant)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    status = execute(cfg)
    out = Path(cfg.out or "nutaxis_out")
    print(out / "verify" / "report.txt" if cfg.subcommand == "verify" else out / "report.txt")
    return status


if __name__ == "__main__":
    sys.exit(main())
