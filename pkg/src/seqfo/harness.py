"""Experiment runners behind the command-line interface.

Every runner takes an :class:`ExperimentConfig`, writes into ``cfg.out`` and
returns an exit status: 0 success, 1 runtime or assumption failure, 2 ran but
uncertified.
"""

import csv
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields, replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .algorithms import ALGORITHMS, RunConfig
from .bench import aligned_layout, farm_benchmark, greedy_baseline, load_layout
from .bench.farm import steady_cost
from .bench.simple import lti_benchmark, scalar_benchmark
from .certificates import build_certificate, design_stepsize, estimate_constants
from .errors import SeqFOError
from .report import steady_value, tail_error, write_power_svg, write_trajectory_csv

log = logging.getLogger(__name__)

EXIT_OK, EXIT_FAILURE, EXIT_UNCERTIFIED = 0, 1, 2
SWEEP_PARAMS = ("T", "mu_gamma", "alpha")


@dataclass
class ExperimentConfig:
    plant: str = "scalar"            # lti | scalar | farm:N=<n> | farm:<layout.json>
    algorithm: str = "sfo"           # ideal | sfo | smtfo
    max_outer: int = 2000
    inner_T: int = 1
    stop_tol: float = 0.0
    seed: int = 0
    alpha: float | str | None = None  # None: benchmark default; "auto": designed step
    alpha_yaw: float | None = None
    target: float = 0.99
    mu: float | None = None
    mu_gamma: float | None = None
    p_ref: float | None = None
    initial_input: list | None = None
    initial_state: list | None = None
    initial_yaw: float = 1.0
    samples: int = 64
    out: str = "runs/out"
    emit_plot: bool = False
    record_time: bool = False

    @classmethod
    def from_file(cls, path, **overrides):
        data = json.loads(Path(path).read_text()) if path else {}
        return cls.from_dict({**data, **{k: v for k, v in overrides.items() if v is not None}})

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**data)
        cfg.validate()
        return cfg

    def validate(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {sorted(ALGORITHMS)}")
        if self.max_outer < 1 or self.inner_T < 1:
            raise ValueError("max_outer and inner_T must be at least 1")
        if self.algorithm == "sfo" and self.inner_T != 1:
            raise ValueError("sfo runs with inner_T = 1; use smtfo for longer inner loops")
        if not (self.plant in ("lti", "scalar") or self.plant.startswith("farm:")):
            raise ValueError(f"unknown plant selector {self.plant!r}")
        if isinstance(self.alpha, str) and self.alpha != "auto":
            self.alpha = float(self.alpha)
        if self.alpha is not None and self.alpha != "auto" and not float(self.alpha) > 0:
            raise ValueError("alpha must be positive")
        if not 0 < self.target < 1:
            raise ValueError("target must lie in (0, 1)")

    def to_dict(self):
        return asdict(self)


def resolve_layout(selector, cfg=None):
    spec = selector.split(":", 1)[1]
    if spec.startswith("N="):
        layout = aligned_layout(int(spec[2:]))
    else:
        layout = load_layout(spec)
    if cfg is not None:
        changes = {k: getattr(cfg, k) for k in ("mu", "mu_gamma", "p_ref") if getattr(cfg, k) is not None}
        if cfg.alpha is not None and cfg.alpha != "auto":
            changes["alpha_thrust"] = float(cfg.alpha)
        if cfg.alpha_yaw is not None:
            changes["alpha_yaw"] = float(cfg.alpha_yaw)
        if changes:
            layout = layout.replace(**changes)
    return layout


def resolve_benchmark(cfg):
    """Plant, problem, start point and (when known) constants and optimum."""
    if cfg.plant.startswith("farm:"):
        bench = farm_benchmark(resolve_layout(cfg.plant, cfg), initial_yaw=cfg.initial_yaw)
        if cfg.alpha == "auto":
            raise ValueError("alpha=auto needs hand-derived constants; the farm has none")
    else:
        factory = lti_benchmark if cfg.plant == "lti" else scalar_benchmark
        bench = factory()
        if cfg.alpha == "auto":
            alpha = design_stepsize(bench.constants, cfg.target)
            if alpha is None:
                raise SeqFOError(f"no step size reaches rho(M) <= {cfg.target}")
            bench = replace(bench, problem=bench.problem.with_step_sizes(alpha))
        elif cfg.alpha is not None:
            bench = replace(bench, problem=bench.problem.with_step_sizes(float(cfg.alpha)))
    if cfg.initial_input is not None:
        bench = replace(bench, initial_input=np.asarray(cfg.initial_input, dtype=float))
    if cfg.initial_state is not None:
        bench = replace(bench, initial_state=np.asarray(cfg.initial_state, dtype=float))
    return bench


def run_config(cfg, bench):
    return RunConfig(max_outer=cfg.max_outer, initial_state=bench.initial_state,
                     initial_input=bench.initial_input,
                     inner_T=cfg.inner_T if cfg.algorithm == "smtfo" else 1,
                     stop_tol=cfg.stop_tol, seed=cfg.seed, record_time=cfg.record_time)


@dataclass
class RunResult:
    cfg: ExperimentConfig
    log: object
    certificate: object
    steady_power: float
    asymptotic_error: float | None
    wall_s: float


def execute(cfg):
    """Run one experiment in memory; nothing is written."""
    bench = resolve_benchmark(cfg)
    rc = run_config(cfg, bench)
    start = time.perf_counter()
    trajectory = ALGORITHMS[cfg.algorithm](bench.plant, bench.problem, rc)
    wall = time.perf_counter() - start
    cert = None
    if bench.constants is not None:
        cert = build_certificate(bench.constants, bench.problem.alpha, rc.inner_T)
    err = None if bench.optimum is None else tail_error(trajectory.inputs, bench.optimum)
    return RunResult(cfg, trajectory, cert, steady_value(trajectory.total_power), err, wall)


def _summary_text(result, extra=()):
    t = result.log
    lines = [
        f"generated = {datetime.now(timezone.utc).isoformat()}",
        f"plant = {result.cfg.plant}",
        f"algorithm = {t.algorithm}",
        f"inner_T = {t.config.get('inner_T')}",
        f"final_input = {' '.join(repr(float(v)) for v in t.final_input)}",
        f"final_output = {' '.join(repr(float(v)) for v in t.final_output)}",
        f"final_cost = {float(t.cost[-1])!r}",
        f"final_total_power = {float(t.total_power[-1])!r}",
        f"steady_total_power = {result.steady_power!r}",
        f"n_lin = {t.n_linearizations}",
        f"n_fwd = {t.n_forward_steps}",
        f"n_grad = {t.n_gradient_steps}",
        f"n_steady_solves = {t.n_steady_solves}",
        f"wall_s = {result.wall_s:.6f}",
    ]
    if result.asymptotic_error is not None:
        lines.append(f"asymptotic_error = {result.asymptotic_error!r}")
    lines.extend(extra)
    text = "\n".join(lines) + "\n"
    if result.certificate is not None:
        text += "\n[certificate]\n" + result.certificate.to_text()
    return text


def _write_failure(out, exc):
    partial = getattr(exc, "partial_log", None)
    if partial is not None and len(partial):
        write_trajectory_csv(partial, out / "trajectory.csv")
    (out / "summary.txt").write_text(f"status = failed\nerror = {type(exc).__name__}: {exc}\n")


def cmd_run(cfg):
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        result = execute(cfg)
    except (SeqFOError, ValueError) as exc:
        _write_failure(out, exc)
        print(f"error: {exc}")
        return EXIT_FAILURE
    write_trajectory_csv(result.log, out / "trajectory.csv", record_time=cfg.record_time)
    (out / "summary.txt").write_text(_summary_text(result))
    if cfg.emit_plot:
        write_power_svg(out / "power.svg", {cfg.algorithm: result.log.total_power})
    t = result.log
    print(f"{cfg.algorithm} on {cfg.plant}: {len(t)} steps, final cost {t.cost[-1]:.6g}, "
          f"n_lin={t.n_linearizations} n_fwd={t.n_forward_steps}")
    if result.certificate is not None and not result.certificate.certified:
        return EXIT_UNCERTIFIED
    return EXIT_OK


def certify(cfg, T=1, estimate=False):
    """Certificate for the configured plant/problem; constants estimated when needed."""
    bench = resolve_benchmark(cfg)
    constants = bench.constants
    if constants is None or estimate:
        constants = estimate_constants(bench.plant, bench.problem, samples=cfg.samples, seed=cfg.seed)
    return build_certificate(constants, bench.problem.alpha, T)


def cmd_certify(cfg, T=1, estimate=False):
    try:
        cert = certify(cfg, T=T, estimate=estimate)
    except (SeqFOError, ValueError) as exc:
        print(f"error: {exc}")
        return EXIT_FAILURE
    text = cert.to_text()
    print(text, end="")
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "certificate.txt").write_text(text)
    return EXIT_OK if cert.certified else EXIT_UNCERTIFIED


SWEEP_HEADER = ["value", "status", "final_cost", "final_power", "steady_power",
                "asymptotic_error", "thm1_bound", "thm2_bound", "upstream_yaw",
                "n_lin", "n_fwd", "wall_s", "message"]


def _sweep_config(cfg, param, value):
    sub = Path(cfg.out) / f"{param}_{value}"
    if param == "T":
        return replace(cfg, inner_T=int(value), out=str(sub),
                       algorithm="smtfo" if cfg.algorithm == "sfo" else cfg.algorithm)
    if param == "mu_gamma":
        return replace(cfg, mu_gamma=float(value), out=str(sub))
    return replace(cfg, alpha=float(value), out=str(sub))


def _sweep_one(args):
    cfg, param, value = args
    row = dict.fromkeys(SWEEP_HEADER, "")
    row["value"] = value
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        res = execute(cfg)
    except (SeqFOError, ValueError) as exc:
        _write_failure(out, exc)
        row.update(status="failed", message=f"{type(exc).__name__}: {exc}")
        return row
    write_trajectory_csv(res.log, out / "trajectory.csv", record_time=cfg.record_time)
    (out / "summary.txt").write_text(_summary_text(res))
    t = res.log
    row.update(status="ok", final_cost=repr(float(t.cost[-1])),
               final_power=repr(float(t.total_power[-1])), steady_power=repr(res.steady_power),
               n_lin=t.n_linearizations, n_fwd=t.n_forward_steps, wall_s=f"{res.wall_s:.6f}")
    if res.asymptotic_error is not None:
        row["asymptotic_error"] = repr(res.asymptotic_error)
    if res.certificate is not None:
        if res.certificate.certified:
            row["thm1_bound"] = repr(res.certificate.thm1_bound)
            row["thm2_bound"] = repr(res.certificate.thm2_bound)
        else:
            row["thm1_bound"] = row["thm2_bound"] = "uncertified"
    if cfg.plant.startswith("farm:"):
        n = t.inputs.shape[1] // 2
        row["upstream_yaw"] = repr(steady_value(np.abs(t.inputs[:, n])))
    return row


def run_sweep(cfg, param, values, jobs=1):
    """One experiment per value; returns the rows written to ``sweep.csv``."""
    if param not in SWEEP_PARAMS:
        raise ValueError(f"sweep parameter must be one of {SWEEP_PARAMS}")
    if not values:
        raise ValueError("sweep needs at least one value")
    tasks = [(_sweep_config(cfg, param, v), param, v) for v in values]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_one, tasks))
    else:
        rows = [_sweep_one(t) for t in tasks]
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    with (out / "sweep.csv").open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=SWEEP_HEADER, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    if cfg.emit_plot:
        series = {}
        for (sub_cfg, _, v), row in zip(tasks, rows):
            path = Path(sub_cfg.out) / "trajectory.csv"
            if row["status"] == "ok":
                series[f"{param}={v}"] = np.loadtxt(path, delimiter=",", skiprows=1,
                                                    usecols=_power_column(path))
        if series:
            write_power_svg(out / "sweep_power.svg", series, title=f"sweep over {param}")
    return rows


def _power_column(path):
    with open(path) as fh:
        return fh.readline().strip().split(",").index("total_power")


def cmd_sweep(cfg, param, values, jobs=1):
    try:
        rows = run_sweep(cfg, param, values, jobs=jobs)
    except ValueError as exc:
        print(f"error: {exc}")
        return EXIT_FAILURE
    for row in rows:
        print(f"{param}={row['value']}: {row['status']} cost={row['final_cost']} "
              f"err={row['asymptotic_error']} n_lin={row['n_lin']} n_fwd={row['n_fwd']}")
    return EXIT_OK if any(r["status"] == "ok" for r in rows) else EXIT_FAILURE


def greedy_trajectory(bench, layout, steps):
    """Total power with greedy control held constant from the same initial state."""
    u = greedy_baseline(layout).flatten()
    x = bench.initial_state.copy()
    power = np.empty(steps)
    for k in range(steps):
        power[k] = bench.plant.measure(x, u).sum()
        x = bench.plant.step(x, u)
    return power


@dataclass
class Comparison:
    fo: RunResult
    greedy_power: np.ndarray
    greedy_steady: float
    fo_steady: float

    @property
    def gain(self):
        return (self.fo_steady - self.greedy_steady) / self.greedy_steady


def compare_greedy(cfg):
    if not cfg.plant.startswith("farm:"):
        raise ValueError("compare-greedy needs a farm plant selector")
    fo = execute(cfg)
    layout = resolve_layout(cfg.plant, cfg)
    bench = resolve_benchmark(cfg)
    greedy = greedy_trajectory(bench, layout, len(fo.log))
    return Comparison(fo, greedy, steady_value(greedy), fo.steady_power)


def cmd_compare_greedy(cfg):
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        comp = compare_greedy(cfg)
    except (SeqFOError, ValueError) as exc:
        _write_failure(out, exc)
        print(f"error: {exc}")
        return EXIT_FAILURE
    fo_power = comp.fo.log.total_power
    with (out / "compare.csv").open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["k", "greedy_power", f"{cfg.algorithm}_power"])
        for k in range(fo_power.size):
            writer.writerow([k, repr(float(comp.greedy_power[k])), repr(float(fo_power[k]))])
    write_trajectory_csv(comp.fo.log, out / "trajectory.csv", record_time=cfg.record_time)
    layout = resolve_layout(cfg.plant, cfg)
    greedy_cost, _ = steady_cost(layout, greedy_baseline(layout))
    extra = (f"greedy_steady_power = {comp.greedy_steady!r}",
             f"greedy_steady_cost = {greedy_cost!r}",
             f"gain_percent = {100.0 * comp.gain!r}")
    (out / "summary.txt").write_text(_summary_text(comp.fo, extra))
    if cfg.emit_plot:
        write_power_svg(out / "compare.svg", {"greedy": comp.greedy_power, cfg.algorithm: fo_power},
                        title="greedy vs feedback optimization")
    print(f"greedy steady power {comp.greedy_steady / 1e6:.4f} MW, "
          f"{cfg.algorithm} steady power {comp.fo_steady / 1e6:.4f} MW, "
          f"gain {100.0 * comp.gain:.2f}%")
    return EXIT_OK
