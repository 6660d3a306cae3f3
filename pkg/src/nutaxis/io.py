"""Run configuration and on-disk artifacts.

Configs are flat ``key = value`` lines; ``#`` starts a comment. Every value
is validated into a :class:`RunConfig` before any computation starts.
Numbers are written with 17 significant digits so that files round-trip
doubles exactly and repeated runs are byte-identical.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .cutoff import make_cutoff
from .fixtures import FIXTURES
from .functionals import MonitorConfig
from .grid import make_grid
from .initial_data import (
    U0_FAMILIES,
    V0_FAMILIES,
    ZETA_FAMILIES,
    DEFAULT_ZETA,
    InitialDataSpec,
    parse_profile,
)
from .solver import SolverParams, State, Trajectory

SUBCOMMANDS = ("simulate", "sweep", "verify", "gn-test")
DEFAULT_CHECKS = {
    "simulate": ("balance", "hypotheses"),
    "sweep": ("balance", "gronwall", "dissipation", "cauchy"),
    "verify": ("balance",),
    "gn-test": ("gn",),
}
KNOWN_CHECKS = {"balance", "hypotheses", "gronwall", "dissipation", "cauchy", "weak", "dual", "gn"}

KNOWN_KEYS = {
    "fixture", "u0", "v0", "zeta", "hypothesis_exempt",
    "epsilon", "epsilons", "dx", "n_cells", "T",
    "chi", "cfl_safety", "dt_max", "positivity_floor",
    "p_list", "q", "cutoff_R", "cutoff_S", "sample_interval", "psi_dictionary_size", "q_tilde",
    "checks", "tol_rel", "gronwall_tol", "dissipation_slack", "weak_tol",
    "calibration_epsilon", "window", "distance_q", "workers",
    "gn_cases", "gn_sampler", "gn_samples", "seed", "out",
}


class ConfigError(ValueError):
    """Invalid configuration; reported with exit status 2."""


def fmt(x: float) -> str:
    return format(float(x), ".17g")


# config -----------------------------------------------------------------------


def parse_config_text(text: str) -> dict:
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value
    return raw


def _number(key, text) -> float:
    try:
        return float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"{key}: not a number: {text!r}") from None


def _numbers(key, text) -> tuple:
    return tuple(_number(key, t) for t in text.split(",") if t.strip())


def _bool(key, text) -> bool:
    t = text.strip().lower()
    if t in ("true", "yes", "1"):
        return True
    if t in ("false", "no", "0"):
        return False
    raise ConfigError(f"{key}: not a boolean: {text!r}")


_GN_CASE = re.compile(r"^(gn1|gn2)\(([^)]*)\)$")


@dataclass
class RunConfig:
    subcommand: str
    spec: InitialDataSpec | None
    params: SolverParams
    monitors: MonitorConfig
    epsilons: tuple
    T: float
    dx: float | None
    n_cells: int | None
    out: Path | None
    seed: int = 42
    checks: tuple = ()
    tol_rel: float = 1e-10
    gronwall_tol: float = 0.1
    dissipation_slack: float = 0.2
    weak_tol: float = 1e-2
    calibration_epsilon: float | None = None
    window: float = 1.0
    distance_q: tuple = (1.0,)
    workers: int = 1
    gn_cases: tuple = ()
    gn_sampler: str = "bumps"
    gn_samples: int = 400
    variant: str = "derived"
    raw: dict = field(default_factory=dict)

    def cells(self, epsilon: float) -> int:
        if self.n_cells is not None:
            return self.n_cells
        from .limit import cells_for

        return cells_for(epsilon, self.dx)


def _spec(raw) -> InitialDataSpec:
    if "fixture" in raw:
        if any(k in raw for k in ("u0", "v0", "zeta", "hypothesis_exempt")):
            raise ConfigError("give either fixture or u0/v0/zeta, not both")
        name = raw["fixture"]
        if name not in FIXTURES:
            raise ConfigError(f"unknown fixture {name!r}; expected one of {sorted(FIXTURES)}")
        return FIXTURES[name]
    if "u0" not in raw or "v0" not in raw:
        raise ConfigError("initial data need fixture or both u0 and v0")
    try:
        return InitialDataSpec(
            parse_profile(raw["u0"], U0_FAMILIES),
            parse_profile(raw["v0"], V0_FAMILIES),
            parse_profile(raw["zeta"], ZETA_FAMILIES) if "zeta" in raw else DEFAULT_ZETA,
            _bool("hypothesis_exempt", raw.get("hypothesis_exempt", "false")),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"initial data: {exc}") from None


def _gn_cases(text, sampler_name, seed):
    from .gn import BumpSumSampler, TrigSampler, gn1_case, gn2_case

    sampler = {"bumps": BumpSumSampler(seed=seed), "trig": TrigSampler(seed=seed)}.get(sampler_name)
    if sampler is None:
        raise ConfigError(f"gn_sampler must be bumps or trig, got {sampler_name!r}")
    cases = []
    for item in text.split(";"):
        item = item.strip().replace(" ", "")
        if not item:
            continue
        m = _GN_CASE.match(item)
        if not m:
            raise ConfigError(f"gn_cases: cannot parse {item!r}")
        args = _numbers("gn_cases", m.group(2))
        try:
            if m.group(1) == "gn1":
                if len(args) != 4:
                    raise ConfigError("gn1 takes (p, q, r, sigma)")
                cases.append(gn1_case(*args, sampler=sampler))
            else:
                if len(args) != 2:
                    raise ConfigError("gn2 takes (q, r)")
                cases.append(gn2_case(*args, sampler=sampler))
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"gn_cases: {item}: {exc}") from None
    return tuple(cases)


def build_run_config(raw: dict, subcommand: str, out=None, variant: str = "derived") -> RunConfig:
    """Validate a parsed config for one subcommand."""
    if subcommand not in SUBCOMMANDS:
        raise ConfigError(f"unknown subcommand {subcommand!r}")
    if variant not in ("derived", "printed"):
        raise ConfigError(f"variant must be derived or printed, got {variant!r}")
    get = raw.get
    seed = int(_number("seed", get("seed", "42")))
    out = Path(out) if out is not None else (Path(raw["out"]) if "out" in raw else None)

    checks = tuple(c.strip() for c in get("checks", "").split(",") if c.strip()) or DEFAULT_CHECKS[subcommand]
    unknown = set(checks) - KNOWN_CHECKS
    if unknown:
        raise ConfigError(f"unknown checks {sorted(unknown)}")

    try:
        params = SolverParams(
            chi=_number("chi", get("chi", "1")),
            cfl_safety=_number("cfl_safety", get("cfl_safety", "0.4")),
            dt_max=_number("dt_max", get("dt_max", "1e-2")),
            positivity_floor=_number("positivity_floor", get("positivity_floor", "1e-14")),
        )
        p_list = _numbers("p_list", get("p_list", "2"))
        q_text = get("q", "window_min").strip()
        if q_text == "window_min":
            q_rule = "window_min"
        else:
            qs = _numbers("q", q_text)
            if len(qs) != len(p_list):
                raise ConfigError("q needs one value per entry of p_list")
            q_rule = dict(zip(p_list, qs))
        monitors = MonitorConfig(
            p_list=p_list,
            q_rule=q_rule,
            cutoff=make_cutoff(_number("cutoff_R", get("cutoff_R", "0.5")), _number("cutoff_S", get("cutoff_S", "0.9"))),
            sample_interval=_number("sample_interval", get("sample_interval", "0.05")),
            psi_dictionary_size=int(_number("psi_dictionary_size", get("psi_dictionary_size", "8"))),
            q_tilde=_number("q_tilde", get("q_tilde", "0.5")),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    if subcommand in ("verify", "gn-test"):
        spec, epsilons, T = None, (), 0.0
    else:
        spec = _spec(raw)
        if "epsilons" in raw:
            epsilons = _numbers("epsilons", raw["epsilons"])
        elif "epsilon" in raw:
            epsilons = (_number("epsilon", raw["epsilon"]),)
        else:
            raise ConfigError("missing epsilon (simulate) or epsilons (sweep)")
        if any(not 0.0 < e <= 1.0 for e in epsilons):
            raise ConfigError(f"epsilon values must lie in (0, 1], got {epsilons}")
        if subcommand == "simulate" and len(epsilons) != 1:
            raise ConfigError("simulate takes a single epsilon")
        if subcommand == "sweep":
            if len(epsilons) < 3 or any(b >= a for a, b in zip(epsilons, epsilons[1:])):
                raise ConfigError("sweep needs at least 3 strictly decreasing epsilons")
            if spec.hypothesis_exempt:
                raise ConfigError("sweep needs hypothesis-satisfying initial data")
        T = _number("T", get("T", "1"))
        if not T > 0:
            raise ConfigError("T must be positive")

    dx = n_cells = None
    if "n_cells" in raw:
        if subcommand == "sweep":
            raise ConfigError("sweep uses dx, not n_cells (grids must nest)")
        n_cells = int(_number("n_cells", raw["n_cells"]))
    else:
        dx = _number("dx", get("dx", "1/64"))
        if not dx > 0:
            raise ConfigError("dx must be positive")

    eps_max = max(epsilons) if epsilons else 1.0
    window = _number("window", get("window", fmt(min(1.0, 0.5 / eps_max))))
    cfg = RunConfig(
        subcommand=subcommand,
        spec=spec,
        params=params,
        monitors=monitors,
        epsilons=tuple(epsilons),
        T=T,
        dx=dx,
        n_cells=n_cells,
        out=out,
        seed=seed,
        checks=checks,
        tol_rel=_number("tol_rel", get("tol_rel", "1e-10")),
        gronwall_tol=_number("gronwall_tol", get("gronwall_tol", "0.1")),
        dissipation_slack=_number("dissipation_slack", get("dissipation_slack", "0.2")),
        weak_tol=_number("weak_tol", get("weak_tol", "1e-2")),
        calibration_epsilon=_number("calibration_epsilon", raw["calibration_epsilon"]) if "calibration_epsilon" in raw else None,
        window=window,
        distance_q=_numbers("distance_q", get("distance_q", "1")),
        workers=int(_number("workers", get("workers", "1"))),
        gn_samples=int(_number("gn_samples", get("gn_samples", "400"))),
        gn_sampler=get("gn_sampler", "bumps").strip(),
        variant=variant,
        raw=dict(raw),
    )

    # grid and window preconditions
    try:
        for e in cfg.epsilons:
            make_grid(e, cfg.cells(e))
            if subcommand == "sweep" or "weak" in checks or "cauchy" in checks:
                from .limit import window_slice

                window_slice(make_grid(e, cfg.cells(e)), window)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if cfg.epsilons and not 0.0 < window < 1.0 / eps_max:
        raise ConfigError(f"window {window} must lie inside B_(1/{eps_max:g})")
    if any(q < 1.0 for q in cfg.distance_q):
        raise ConfigError("distance_q values must be >= 1")
    if "gronwall" in checks and subcommand == "sweep":
        cal = cfg.calibration_epsilon if cfg.calibration_epsilon is not None else cfg.epsilons[0]
        if cal not in cfg.epsilons or cal == cfg.epsilons[-1]:
            raise ConfigError("calibration_epsilon must be a sweep member other than the smallest")
        cfg.calibration_epsilon = cal
    if not cfg.monitors.cutoff.fits(1.0 / eps_max) and cfg.epsilons:
        raise ConfigError("cutoff support must lie inside the largest-eps domain")
    if subcommand == "gn-test":
        if cfg.gn_samples < 100:
            raise ConfigError("gn_samples must be >= 100")
        cfg.gn_cases = _gn_cases(get("gn_cases", "gn1(4,2,2,2); gn1(3,1,1,1); gn2(2,2)"), cfg.gn_sampler, seed)
    if any(c in checks for c in ("gronwall", "dissipation", "cauchy")) and subcommand == "simulate":
        raise ConfigError("gronwall, dissipation and cauchy checks need the sweep subcommand")
    return cfg


def load_config(path, subcommand: str, out=None, variant: str = "derived") -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    return build_run_config(parse_config_text(text), subcommand, out, variant)


# snapshots --------------------------------------------------------------------


def write_snapshot(path: Path, s: State, consumed: float, clamp: float) -> None:
    g = s.grid
    lines = [
        f"# t={fmt(s.t)} epsilon={fmt(g.epsilon)} n={g.n_cells} dx={fmt(g.dx)}",
        f"# consumed={fmt(consumed)} clamp={fmt(clamp)}",
        "x,u,v",
    ]
    lines += [f"{fmt(x)},{fmt(u)},{fmt(v)}" for x, u, v in zip(g.centers, s.u, s.v)]
    path.write_text("\n".join(lines) + "\n")


_HEADER = re.compile(r"(\w+)=(\S+)")


def read_snapshot(path: Path):
    """Return ``(State, consumed, clamp)`` from a snapshot file."""
    with open(path) as fh:
        head1, head2, cols = fh.readline(), fh.readline(), fh.readline().strip()
        body = np.loadtxt(fh, delimiter=",", ndmin=2)
    meta = dict(_HEADER.findall(head1))
    extra = dict(_HEADER.findall(head2))
    if cols != "x,u,v" or not {"t", "epsilon", "n"} <= meta.keys():
        raise ValueError(f"{path}: not a snapshot file")
    grid = make_grid(float(meta["epsilon"]), int(meta["n"]))
    if body.shape != (grid.n_cells, 3):
        raise ValueError(f"{path}: expected {grid.n_cells} rows of x,u,v")
    state = State(float(meta["t"]), body[:, 1].copy(), body[:, 2].copy(), grid)
    return state, float(extra.get("consumed", "nan")), float(extra.get("clamp", "0"))


def write_trajectory(directory: Path, traj: Trajectory) -> None:
    snap_dir = directory / "snapshots"
    snap_dir.mkdir(parents=True, exist_ok=True)
    for k, s in enumerate(traj.snapshots):
        write_snapshot(snap_dir / f"snapshot_{k:05d}.csv", s, traj.consumed[k], traj.clamp_mass[k])
    if traj.samples:
        write_functionals(directory / "functionals.csv", traj.samples)


def read_trajectory(directory: Path, params: SolverParams | None = None) -> Trajectory:
    files = sorted((Path(directory) / "snapshots").glob("snapshot_*.csv"))
    if not files:
        raise FileNotFoundError(f"no snapshots under {directory}")
    loaded = [read_snapshot(f) for f in files]
    return Trajectory(
        snapshots=[s for s, _, _ in loaded],
        samples=[],
        consumed=np.array([c for _, c, _ in loaded]),
        clamp_mass=np.array([c for _, _, c in loaded]),
        params=params or SolverParams(),
    )


def write_functionals(path: Path, samples) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(samples[0].columns())
        for s in samples:
            w.writerow([fmt(v) for v in s.row()])


def read_functionals(path: Path) -> dict:
    with open(path) as fh:
        rows = list(csv.reader(fh))
    header, data = rows[0], np.array(rows[1:], dtype=float)
    return {name: data[:, i] for i, name in enumerate(header)}


# reports ----------------------------------------------------------------------

REPORT_COLUMNS = ("check", "passed", "min_margin", "tolerance", "worst_time", "horizon", "fitted", "notes")


def write_reports(directory: Path, reports) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    with open(directory / "report.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for r in reports:
            w.writerow(
                [
                    r.check_name,
                    int(r.passed),
                    fmt(r.min_margin),
                    fmt(r.tolerance),
                    "" if r.worst_time is None else fmt(r.worst_time),
                    "" if r.horizon is None else fmt(r.horizon),
                    ";".join(f"{k}={fmt(v)}" for k, v in r.fitted.items()),
                    " | ".join(r.notes),
                ]
            )
    n_fail = sum(not r.passed for r in reports)
    lines = [r.summary() for r in reports]
    lines.append(f"{len(reports) - n_fail}/{len(reports)} checks passed")
    (directory / "report.txt").write_text("\n".join(lines) + "\n")


def write_sweep_csv(path: Path, epsilons, distances: dict) -> None:
    """Distance matrices, one block of rows per (q, field)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["q", "field", "epsilon"] + [fmt(e) for e in epsilons])
        for q, (Du, Dv) in distances.items():
            for name, D in (("u", Du), ("v", Dv)):
                for e, row in zip(epsilons, D):
                    w.writerow([fmt(q), name, fmt(e)] + [fmt(d) for d in row])
