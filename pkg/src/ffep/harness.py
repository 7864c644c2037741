"""Experiment drivers: trajectories, long-time energy logs and order studies.

Every driver returns plain rows plus a metadata dict; :func:`write_csv`
turns them into the CSV format shared by all modes (``#``-prefixed
metadata lines, a header row, shortest round-trip floats).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .exceptions import InsufficientDataError, InvalidArgumentError
from .integrator import SolverConfig, march
from .methods import get_preset, make_stepper
from .problems import get_problem

ENERGY_FLOOR = 1e-17
UNDERFLOW = 1e-14
DEFAULT_H_GRID = tuple(0.1 / 2**i for i in (4, 5, 6, 7))
MODES = ("integrate", "energy-study", "order-study")


@dataclass(frozen=True)
class ExperimentConfig:
    problem: str = "euler-a"
    method: str = "epcm1"
    r: Optional[int] = None
    h: float = 0.2
    t_end: float = 10.0
    omega: Optional[float] = None
    fp_tol: float = 1e-15
    fp_max_iter: int = 100
    quad_points: Optional[int] = None
    decimate: int = 10
    h_values: Optional[tuple] = None
    output: Optional[str] = None
    mode: str = "integrate"

    def __post_init__(self):
        if self.mode not in MODES:
            raise InvalidArgumentError(f"unknown mode {self.mode!r}")
        if not (self.h > 0 and math.isfinite(self.h)):
            raise InvalidArgumentError(f"h must be positive, got {self.h}")
        if not math.isfinite(self.t_end) or self.t_end <= 0:
            raise InvalidArgumentError(f"t_end must be positive, got {self.t_end}")
        if self.decimate < 1:
            raise InvalidArgumentError(f"decimate must be at least 1, got {self.decimate}")

    @property
    def solver(self) -> SolverConfig:
        return SolverConfig(fp_tol=self.fp_tol, fp_max_iter=self.fp_max_iter, quad_points=self.quad_points)


@dataclass
class StudyOutput:
    header: list
    rows: list
    metadata: dict = field(default_factory=dict)


def _steps_for(t_end: float, h: float) -> int:
    n = round(t_end / h)
    if n < 1:
        raise InvalidArgumentError(f"interval [0, {t_end}] holds no step of size {h}")
    if abs(n * h - t_end) > 1e-9 * max(1.0, t_end):
        raise InvalidArgumentError(f"t_end={t_end} is not a multiple of h={h}")
    return n


def _setup(cfg: ExperimentConfig, h: float):
    prob = get_problem(cfg.problem)
    omega = prob.omega if cfg.omega is None else cfg.omega
    stepper = make_stepper(cfg.method, prob.system, h, omega=omega, r=cfg.r, cfg=cfg.solver)
    return prob, omega, stepper


def _metadata(cfg: ExperimentConfig, prob, omega, **extra) -> dict:
    preset = get_preset(cfg.method, omega=omega, r=cfg.r)
    meta = {
        "mode": cfg.mode,
        "problem": prob.id,
        "problem_description": prob.description,
        "method": preset.id,
        "r": preset.r,
        "omega": omega,
        "fp_tol": cfg.fp_tol,
        "fp_max_iter": cfg.fp_max_iter,
        "quad_points": cfg.quad_points if cfg.quad_points is not None else "default",
        "y0": " ".join(repr(float(x)) for x in prob.y0),
    }
    meta.update(extra)
    return meta


def run_trajectory(cfg: ExperimentConfig, h: Optional[float] = None, t_end: Optional[float] = None):
    h = cfg.h if h is None else h
    t_end = cfg.t_end if t_end is None else t_end
    prob, omega, stepper = _setup(cfg, h)
    traj = march(stepper, prob.system, prob.y0, h, _steps_for(t_end, h))
    return prob, omega, traj


def run_integrate(cfg: ExperimentConfig) -> StudyOutput:
    """Full trajectory dump: ``t, y1..yd, H, dH, iterations``."""
    prob, omega, traj = run_trajectory(cfg)
    d = prob.system.dim
    header = ["t"] + [f"y{i + 1}" for i in range(d)] + ["H", "dH", "iterations"]
    dh = traj.energy_errors
    rows = [
        [traj.times[n], *traj.states[n], traj.energies[n], dh[n], int(traj.iteration_counts[n])]
        for n in range(len(traj))
    ]
    meta = _metadata(cfg, prob, omega, h=cfg.h, t_end=cfg.t_end, nonconverged_steps=traj.nonconverged_steps)
    return StudyOutput(header, rows, meta)


def decimation_indices(n_points: int, every: int) -> np.ndarray:
    """Every ``every``-th index, always keeping the first and last."""
    if n_points < 1:
        return np.zeros(0, dtype=int)
    idx = np.arange(0, n_points, every)
    if idx[-1] != n_points - 1:
        idx = np.append(idx, n_points - 1)
    return idx


def run_energy_study(cfg: ExperimentConfig) -> StudyOutput:
    """Energy error log: ``t, dH, log10(max(|dH|, 1e-17))``."""
    if cfg.t_end <= 0:
        raise InvalidArgumentError("energy study needs t_end > 0")
    prob, omega, traj = run_trajectory(cfg)
    dh = traj.energy_errors
    idx = decimation_indices(len(traj), cfg.decimate)
    rows = [[traj.times[n], dh[n], math.log10(max(abs(dh[n]), ENERGY_FLOOR))] for n in idx]
    meta = _metadata(
        cfg,
        prob,
        omega,
        h=cfg.h,
        t_end=cfg.t_end,
        decimate=cfg.decimate,
        max_abs_dH=float(np.max(np.abs(dh))),
        nonconverged_steps=traj.nonconverged_steps,
    )
    return StudyOutput(["t", "dH", "log10_abs_dH"], rows, meta)


def estimate_order(pairs: Sequence) -> float:
    """Least-squares slope of ``log(error)`` against ``log(h)``."""
    return _fit(pairs)[0]


def _fit(pairs):
    arr = np.asarray(pairs, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or len(arr) < 2:
        raise InvalidArgumentError("need at least two (h, error) pairs")
    if np.any(~np.isfinite(arr)) or np.any(arr <= 0):
        raise InvalidArgumentError("step sizes and errors must be positive and finite")
    x, y = np.log(arr[:, 0]), np.log(arr[:, 1])
    xm, ym = x.mean(), y.mean()
    denom = np.sum((x - xm) ** 2)
    if denom == 0.0:
        raise InvalidArgumentError("step sizes must not all coincide")
    slope = float(np.sum((x - xm) * (y - ym)) / denom)
    return slope, float(ym - slope * xm)


@dataclass
class OrderStudyResult:
    """Rows ``(h, global_error, mean_iterations, used_in_fit)`` sorted by decreasing ``h``."""

    rows: list
    slope: float
    intercept: float
    reference: str
    t_end: float
    excluded: list = field(default_factory=list)


def _reference_solution(cfg: ExperimentConfig, h_min: float):
    prob = get_problem(cfg.problem)
    if prob.exact is not None:
        return prob.exact(cfg.t_end), "exact closed-form solution"
    h_ref = h_min / 8.0
    ref_cfg = replace(cfg, method="legendre-2", r=None, h=h_ref)
    _, _, traj = run_trajectory(ref_cfg, h=h_ref, t_end=cfg.t_end)
    return traj.states[-1], f"self-reference: legendre-2 with h={h_ref!r}"


def run_order_study(cfg: ExperimentConfig) -> OrderStudyResult:
    """Global error at ``t_end`` over a grid of step sizes and the fitted slope.

    Errors below ``1e-14`` are flagged and left out of the fit.
    """
    hs = sorted(cfg.h_values or DEFAULT_H_GRID, reverse=True)
    if len(hs) < 3:
        raise InsufficientDataError("an order study needs at least three step sizes")
    y_ref, ref_desc = _reference_solution(cfg, min(hs))
    rows, excluded = [], []
    for h in hs:
        _, _, traj = run_trajectory(cfg, h=h)
        err = float(np.linalg.norm(traj.states[-1] - y_ref))
        used = math.isfinite(err) and err >= UNDERFLOW
        if not used:
            excluded.append(h)
        rows.append((h, err, float(np.mean(traj.iteration_counts[1:])), used))
    usable = [(h, e) for h, e, _, ok in rows if ok]
    if len(usable) < 3:
        raise InsufficientDataError(f"only {len(usable)} step sizes produced usable errors")
    slope, intercept = _fit(usable)
    return OrderStudyResult(rows, slope, intercept, ref_desc, cfg.t_end, excluded)


def order_study_output(cfg: ExperimentConfig, res: OrderStudyResult) -> StudyOutput:
    prob = get_problem(cfg.problem)
    omega = prob.omega if cfg.omega is None else cfg.omega
    meta = _metadata(cfg, prob, omega, t_end=cfg.t_end, reference=res.reference, slope=res.slope, intercept=res.intercept)
    if res.excluded:
        meta["excluded_underflow_h"] = " ".join(repr(h) for h in res.excluded)
    rows = [[h, e, it, int(ok)] for h, e, it, ok in res.rows]
    return StudyOutput(["h", "global_error", "mean_iterations", "used_in_fit"], rows, meta)


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(out: StudyOutput, stream=None) -> str:
    """Serialise ``out``; writes to ``stream`` when given and returns the text."""
    buf = io.StringIO()
    for key, value in out.metadata.items():
        buf.write(f"# {key}: {_fmt(value)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(out.header)
    for row in out.rows:
        writer.writerow([_fmt(x) for x in row])
    text = buf.getvalue()
    if stream is not None:
        stream.write(text)
    return text


def read_csv(text: str):
    """Parse text produced by :func:`write_csv` into ``(metadata, header, rows)``."""
    meta, lines = {}, []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition(":")
            meta[key.strip()] = value.strip()
        elif line:
            lines.append(line)
    reader = csv.reader(lines)
    header = next(reader)
    rows = [[float(x) for x in row] for row in reader]
    return meta, header, rows
