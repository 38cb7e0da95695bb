"""Command line for kernel verification, single solves, lifespan sweeps and fits.

The global-check command runs the sign and envelope test for non-positive data.

Output goes to ``--out``, else ``$DAMPWAVE_OUTPUT_DIR``, else ./dampwave_results.
Each run writes a ``meta.json`` with the resolved configuration next to its
tables. Tables are comma separated with a header row and 17 significant
digits.

Exit codes: 0 success, 1 invalid configuration or data, 2 a numerical check failed.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
import tempfile
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .lifespan import (
    CLASS_TAGS,
    DataClass,
    LifespanRecord,
    SweepConfig,
    extension_exponent,
    fit_power_law,
    lifespan_model,
    sweep,
)
from .numerics import bump, domain_half_width, grid_with_spacing, make_grid
from .solvers import (
    SOLVERS,
    ProblemSpec,
    check_hypotheses,
    detect_blowup,
    sign_and_apriori_check,
    solve_dalembert,
    solve_fdtd,
)
from .verify import verify_suite

ENV_OUTPUT = "DAMPWAVE_OUTPUT_DIR"
COMMANDS = ("verify", "solve", "sweep", "fit", "global-check")
PLOT_KINDS = ("loglog-lifespan", "error-curve", "snapshot")
GLOBAL_DATA = ("neg-u0", "neg-u1", "pos-u0")
NUM = "%.17g"

EXIT_OK, EXIT_INVALID, EXIT_CHECK = 0, 1, 2


class ConfigError(ValueError):
    def __init__(self, key: str, constraint: str):
        super().__init__(f"{key}: {constraint}")
        self.key = key


@dataclass
class RunConfig:
    command: str
    p: float | None = None
    eps: list = field(default_factory=list)
    data_class: str = "B"
    L: float | None = None
    n_points: int | None = None
    dx: float = 0.01
    dt: float | None = None
    t_end: float | None = None
    M: float = 1e6
    solver: str = "fdtd"
    adaptive: bool = False
    workers: int = 1
    data: str = "neg-u0"
    input: str | None = None
    out: str | None = None
    seed: int = 0

    def to_json(self) -> dict:
        return asdict(self)


# key -> converter, shared by the flag parser and the config file reader
def _float_list(text):
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    return [float(v) for v in str(text).split(",") if v.strip()]


def _bool(text):
    if isinstance(text, bool):
        return text
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


CONVERTERS = {
    "p": float,
    "eps": _float_list,
    "data_class": str,
    "L": float,
    "n_points": int,
    "dx": float,
    "dt": float,
    "t_end": float,
    "M": float,
    "solver": str,
    "adaptive": _bool,
    "workers": int,
    "data": str,
    "input": str,
    "out": str,
    "seed": int,
}
ALIASES = {"class": "data_class", "eps_list": "eps", "threshold": "M"}


def read_config_file(path) -> dict:
    """Plain ``key = value`` lines; '#' starts a comment."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", "expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = ALIASES.get(key.replace("-", "_"), key.replace("-", "_"))
        if key not in CONVERTERS:
            raise ConfigError(key, "unknown key")
        values[key] = value
    return values


class _Parser(argparse.ArgumentParser):
    """Reports bad flags as configuration errors (exit 1) instead of exit 2."""

    def error(self, message):
        raise ConfigError("arguments", message)


def _parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dampwave", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="key = value file; flags override it")
        sp.add_argument("--p", type=str)
        sp.add_argument("--eps", type=str, help="one value or a comma separated list")
        sp.add_argument("--class", dest="data_class", type=str)
        sp.add_argument("--L", type=str)
        sp.add_argument("--n-points", dest="n_points", type=str)
        sp.add_argument("--dx", type=str)
        sp.add_argument("--dt", type=str)
        sp.add_argument("--t-end", dest="t_end", type=str)
        sp.add_argument("--M", type=str, help="blowup threshold")
        sp.add_argument("--solver", type=str)
        sp.add_argument("--adaptive", type=str, help="adaptive finite differences (true/false)")
        sp.add_argument("--workers", type=str)
        sp.add_argument("--data", type=str, help=f"global-check data, one of {GLOBAL_DATA}")
        sp.add_argument("--input", type=str, help="record table or directory for fit")
        sp.add_argument("--out", type=str)
        sp.add_argument("--seed", type=str)
    return parser


def parse_config(argv=None) -> RunConfig:
    args = _parser().parse_args(argv)
    raw = read_config_file(args.config) if args.config else {}
    for key in CONVERTERS:
        value = getattr(args, key, None)
        if value is not None:
            raw[key] = value
    values = {}
    for key, value in raw.items():
        try:
            values[key] = CONVERTERS[key](value)
        except (TypeError, ValueError):
            raise ConfigError(key, f"cannot convert {value!r}") from None
    cfg = RunConfig(command=args.command, **values)
    return validate(cfg)


def validate(cfg: RunConfig) -> RunConfig:
    if cfg.command in ("solve", "sweep") and cfg.p is None:
        raise ConfigError("p", f"required for {cfg.command}")
    if cfg.p is None:
        cfg.p = 2.0
    if not 1 < cfg.p <= 3:
        raise ConfigError("p", "must lie in (1, 3]")
    if cfg.data_class not in CLASS_TAGS:
        raise ConfigError("data_class", f"must be one of {CLASS_TAGS}")
    if cfg.solver not in SOLVERS:
        raise ConfigError("solver", f"must be one of {tuple(SOLVERS)}")
    if cfg.data not in GLOBAL_DATA:
        raise ConfigError("data", f"must be one of {GLOBAL_DATA}")
    if any(not e > 0 for e in cfg.eps):
        raise ConfigError("eps", "values must be positive")
    if cfg.command == "sweep" and not cfg.eps:
        raise ConfigError("eps", "required for sweep")
    if cfg.command == "solve" and len(cfg.eps) != 1:
        raise ConfigError("eps", "solve takes exactly one value")
    if cfg.command == "fit" and cfg.input is None:
        raise ConfigError("input", "fit needs a record table or directory")
    for key in ("L", "dx", "dt", "t_end", "M"):
        v = getattr(cfg, key)
        if v is not None and not (v > 0 and math.isfinite(v)):
            raise ConfigError(key, "must be positive and finite")
    if cfg.n_points is not None and cfg.n_points < 3:
        raise ConfigError("n_points", "must be at least 3")
    if cfg.workers < 1:
        raise ConfigError("workers", "must be at least 1")
    if cfg.adaptive and cfg.solver != "fdtd":
        raise ConfigError("adaptive", "only the fdtd solver is adaptive")
    if cfg.out is None:
        cfg.out = os.environ.get(ENV_OUTPUT, "dampwave_results")
    return cfg


class ResultStore:
    """One directory per run, named by command and a hash of the configuration."""

    def __init__(self, root, cfg: RunConfig):
        self.cfg = cfg
        key = json.dumps(cfg.to_json(), sort_keys=True)
        digest = hashlib.sha256(key.encode()).hexdigest()[:12]
        self.path = Path(root) / f"{cfg.command}-{digest}"
        self.path.mkdir(parents=True, exist_ok=True)

    def write_text(self, name: str, text: str) -> Path:
        target = self.path / name
        fd, tmp = tempfile.mkstemp(dir=self.path, prefix=".tmp-")
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
        return target

    def write_meta(self, extra: dict | None = None) -> Path:
        doc = {"config": self.cfg.to_json(), "version": __version__}
        if extra:
            doc["results"] = extra
        return self.write_text("meta.json", json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return NUM % v
    return str(v)


def table_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _write(directory, name, text) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    with os.fdopen(fd, "w", newline="") as fh:
        fh.write(text)
    target = directory / name
    os.replace(tmp, target)
    return target


def emit_plot_data(items, kind: str, directory, label: str = "") -> list:
    """Write plot tables; returns the written paths.

    loglog-lifespan takes LifespanRecords (one file per class and p),
    error-curve takes (t, error) pairs, snapshot takes solver states.
    """
    if kind not in PLOT_KINDS:
        raise ValueError(f"kind must be one of {PLOT_KINDS}")
    items = list(items)
    if not items:
        raise ValueError("nothing to emit")
    paths = []
    if kind == "loglog-lifespan":
        groups = {}
        for r in items:
            groups.setdefault((r.data_class, r.p), []).append(r)
        for (tag, p), recs in sorted(groups.items()):
            rows = [(r.eps, r.t0, r.censored, r.data_class, r.p) for r in recs]
            text = table_text(("eps", "t0", "censored", "class", "p"), rows)
            paths.append(_write(directory, f"lifespan_{tag}_p{_fmt(float(p))}.csv", text))
    elif kind == "error-curve":
        text = table_text(("t", "error"), [(float(t), float(e)) for t, e in items])
        paths.append(_write(directory, f"error_curve{label}.csv", text))
    else:
        for st in items:
            rows = zip(st.u.x, st.u.values, st.ut.values)
            text = table_text(("x", "u", "ut"), [tuple(map(float, r)) for r in rows])
            paths.append(_write(directory, f"snapshot{label}_t{_fmt(float(st.time))}.csv", text))
    return paths


def read_lifespan_table(path) -> list:
    """Inverse of the loglog-lifespan emitter."""
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(
                LifespanRecord(
                    eps=float(row["eps"]),
                    p=float(row["p"]),
                    data_class=row["class"],
                    t0=float(row["t0"]),
                    censored=_bool(row["censored"]),
                )
            )
    return out


def _profile_grid(cfg: RunConfig, t_end: float, support: float = 1.0):
    L = cfg.L if cfg.L is not None else domain_half_width(t_end, support)
    if cfg.n_points is not None:
        return make_grid(L, cfg.n_points)
    return grid_with_spacing(L, cfg.dx)


def _run_verify(cfg, store):
    residuals = verify_suite(h_identity=cfg.dx, seed=cfg.seed)
    rows = [(r.check, r.parameter, r.value, r.tolerance, r.ok) for r in residuals]
    store.write_text("residuals.csv", table_text(("check", "parameter", "value", "tolerance", "ok"), rows))
    print(f"{'check':<24}{'param':>8}{'residual':>14}{'tol':>10}  ok")
    for r in residuals:
        print(f"{r.check:<24}{r.parameter:>8g}{r.value:>14.3e}{r.tolerance:>10.1e}  {'yes' if r.ok else 'NO'}")
    failed = sum(not r.ok for r in residuals)
    store.write_meta({"failed": failed})
    return EXIT_CHECK if failed else EXIT_OK


def _run_solve(cfg, store):
    eps = cfg.eps[0]
    p = cfg.p
    if cfg.t_end is None:
        eff = eps if cfg.data_class == "A" else eps**p
        model = lifespan_model(p, min(eff, 1.0))
        t_end = 3.0 * (model.value if p == 3 else model)
    else:
        t_end = cfg.t_end
    grid = _profile_grid(cfg, 0.0 if cfg.adaptive else t_end)
    data = DataClass.build(cfg.data_class, eps, grid.sample(bump))
    dt = cfg.dt if cfg.dt is not None else grid.h
    spec = ProblemSpec(p, data.f0, data.f1, t_end, dt, M=cfg.M, store_dt=t_end / 10.0)
    if cfg.solver == "fdtd":
        traj = solve_fdtd(spec, adaptive=cfg.adaptive)
    else:
        traj = SOLVERS[cfg.solver](spec)
    est = detect_blowup(traj, cfg.M)
    emit_plot_data(traj.states, "snapshot", store.path)
    summary = {
        "status": traj.status.value,
        "t0": est.t0,
        "censored": est.censored,
        "refined": est.refined,
        "t_end": t_end,
    }
    store.write_meta(summary)
    print(f"{cfg.solver}: status {traj.status.value}, t0 = {est.t0:.6g}"
          f"{' (censored)' if est.censored else ''}")
    return EXIT_OK


def _run_sweep(cfg, store):
    grid = grid_with_spacing(3.0, cfg.dx)
    profile = grid.sample(bump)
    sc = SweepConfig(
        solver=cfg.solver,
        adaptive=cfg.solver == "fdtd",
        dx=cfg.dx,
        dt=cfg.dt,
        M=cfg.M,
        t_end=cfg.t_end,
        workers=cfg.workers,
    )
    records = sweep(cfg.p, cfg.data_class, cfg.eps, profile, sc)
    emit_plot_data(records, "loglog-lifespan", store.path)
    store.write_meta({"records": len(records), "censored": sum(r.censored for r in records)})
    for r in records:
        print(f"eps = {r.eps:<10g} t0 = {r.t0:<14.6g}{' censored' if r.censored else ''}")
    return EXIT_OK


def _load_records(path):
    path = Path(path)
    files = sorted(path.glob("**/lifespan_*.csv")) if path.is_dir() else [path]
    if not files:
        raise ConfigError("input", f"no lifespan tables under {path}")
    records = []
    for f in files:
        records.extend(read_lifespan_table(f))
    return records


def _run_fit(cfg, store):
    records = _load_records(cfg.input)
    fits = {}
    lines = []
    for tag in CLASS_TAGS:
        recs = [r for r in records if r.data_class == tag]
        if not recs:
            continue
        fit = fit_power_law(recs)
        fits[tag] = fit
        lines.append(f"class {tag}: slope {fit.slope:.6g}, r^2 {fit.r_squared:.6f}, "
                     f"window [{fit.window[0]:g}, {fit.window[1]:g}], {fit.n_censored} censored")
    results = {tag: asdict(f) for tag, f in fits.items()}
    if "A" in fits and "B" in fits:
        results["R"] = extension_exponent(fits["A"], fits["B"])
        lines.append(f"R = {results['R']:.6g}")
    store.write_text("fit.json", json.dumps(results, indent=2, sort_keys=True) + "\n")
    store.write_meta()
    print("\n".join(lines))
    return EXIT_OK


def _run_global_check(cfg, store):
    eps = cfg.eps[0] if cfg.eps else 0.1
    t_end = cfg.t_end if cfg.t_end is not None else 200.0
    grid = grid_with_spacing(cfg.L or domain_half_width(t_end, 1.0), cfg.dx)
    g = grid.sample(bump)
    zero = grid.zeros()
    u0, u1 = {"neg-u0": (-eps * g, zero), "neg-u1": (zero, -eps * g), "pos-u0": (eps * g, zero)}[cfg.data]
    spec = ProblemSpec(cfg.p, u0, u1, t_end, grid.h, M=cfg.M, store_dt=max(grid.h, t_end / 100.0))
    ok, message = check_hypotheses(u0, u1)
    if not ok:
        print(message)
        store.write_meta({"hypotheses_ok": False, "message": message})
        return EXIT_INVALID
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        traj = solve_dalembert(spec)
    report = sign_and_apriori_check(traj)
    rows = list(zip(report.times, report.y_values))
    store.write_text("y_norm.csv", table_text(("t", "y_norm"), rows))
    summary = {
        "passed": report.passed,
        "max_value": report.max_value,
        "max_lower_gap": report.max_lower_gap,
        "max_upper_gap": report.max_upper_gap,
        "fitted_A": report.fitted_A,
        "violations": len(report.violations),
    }
    store.write_meta(summary)
    print(f"max u = {report.max_value:.3e}, envelope gaps {report.max_lower_gap:.3e} / "
          f"{report.max_upper_gap:.3e}, A = {report.fitted_A:.4g}")
    for v in report.violations[:10]:
        print(f"violation {v.kind} at t = {v.time:g}, x = {v.x:g}: {v.amount:.3e}")
    return EXIT_OK if report.passed else EXIT_CHECK


HANDLERS = {
    "verify": _run_verify,
    "solve": _run_solve,
    "sweep": _run_sweep,
    "fit": _run_fit,
    "global-check": _run_global_check,
}


def run(cfg: RunConfig) -> int:
    store = ResultStore(cfg.out, cfg)
    try:
        return HANDLERS[cfg.command](cfg, store)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
