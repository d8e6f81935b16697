"""Seeded scaling scans over the embedding dimension."""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import DivergenceError, InvalidConfigError
from .gates import embed_target, gate_by_name
from .inference import TrainConfig, generate_dataset, train
from .linalg import RandomSource, haar_unitary
from .rnn import OdeConfig, RnnProblem, solve
from .slm import ModulatorConstraint

# per-trial stream purposes, appended to (m,) when deriving
RESERVOIR, COMPLEMENT, DATA = 0, 1, 2

METRICS = ("epochs_to_threshold", "final_cost")
SOLVERS = ("inference", "rnn")
WORKERS_ENV = "QUDIT_RESERVOIR_WORKERS"


@dataclass(frozen=True)
class Trial:
    reservoir: np.ndarray
    embedding: object
    source: RandomSource


def make_trial(gate: str, dim: int, m: int, seed: int, mode: str = "unitary", zero_complement: bool = False) -> Trial:
    """Reservoir and target for one ``(m, seed)`` pair, each from its own stream."""
    src = RandomSource(seed).derive(m)
    spec = gate_by_name(gate, dim)
    u = haar_unitary(m, src.derive(RESERVOIR))
    complement = np.zeros((m - dim, m - dim)) if zero_complement and m > dim else None
    emb = embed_target(spec, m, mode, src.derive(COMPLEMENT), complement=complement)
    return Trial(u, emb, src)


@dataclass(frozen=True)
class ScanConfig:
    gate: str = "x"
    dim: int = 3
    m_values: tuple[int, ...] = (4, 6, 8, 10, 12, 14, 16)
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4)
    solver: str = "inference"
    metric: str = "epochs_to_threshold"
    epoch_budget: int = 5000
    trainer: TrainConfig = field(default_factory=TrainConfig)
    n_train: int = 100
    n_valid: int = 50
    rnn_mode: str = "unitary"
    rnn_mu: float = 100.0
    ode: OdeConfig = field(default_factory=OdeConfig)

    def __post_init__(self):
        object.__setattr__(self, "m_values", tuple(int(m) for m in self.m_values))
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        if not self.m_values or not self.seeds:
            raise InvalidConfigError("a scan needs at least one M value and one seed")
        if min(self.m_values) < self.dim:
            raise InvalidConfigError(f"all M values must be >= gate dimension {self.dim}")
        if self.metric not in METRICS:
            raise InvalidConfigError(f"metric must be one of {METRICS}")
        if self.solver not in SOLVERS:
            raise InvalidConfigError(f"solver must be one of {SOLVERS}")
        if self.epoch_budget < 1:
            raise InvalidConfigError("epoch_budget must be >= 1")

    def to_json(self) -> dict:
        return {
            "gate": self.gate,
            "dim": self.dim,
            "m_values": list(self.m_values),
            "seeds": list(self.seeds),
            "solver": self.solver,
            "metric": self.metric,
            "epoch_budget": self.epoch_budget,
            "trainer": self.trainer.to_json(),
            "n_train": self.n_train,
            "n_valid": self.n_valid,
            "rnn_mode": self.rnn_mode,
            "rnn_mu": self.rnn_mu,
        }


@dataclass(frozen=True)
class ScanRecord:
    m: int
    seed: int
    metric_value: float
    converged: bool
    wall_time: float


def preset(name: str, bits: Optional[int] = None, seeds=(0, 1, 2, 3, 4)) -> ScanConfig:
    """Scan configurations for the epoch-scaling and modulator studies."""
    if name == "fig3c":
        return ScanConfig(
            m_values=(4, 6, 8, 10, 12, 14, 16),
            seeds=seeds,
            metric="epochs_to_threshold",
            epoch_budget=5000,
            trainer=TrainConfig(valid_threshold=1e-3),
        )
    if name == "fig4a":
        return ScanConfig(
            m_values=(6, 9, 15, 30),
            seeds=seeds,
            metric="final_cost",
            epoch_budget=1000,
            trainer=TrainConfig(valid_threshold=1e-4, constraint=ModulatorConstraint("phase_only")),
        )
    if name == "fig4b":
        return ScanConfig(
            m_values=(6, 9, 15, 30),
            seeds=seeds,
            metric="final_cost",
            epoch_budget=1000,
            trainer=TrainConfig(valid_threshold=1e-4, constraint=ModulatorConstraint("amplitude_signed", bits)),
        )
    raise InvalidConfigError(f"unknown preset {name!r}, expected fig3c, fig4a or fig4b")


def run_trial(config: ScanConfig, m: int, seed: int) -> ScanRecord:
    """One ``(m, seed)`` cell, reproducible on its own."""
    start = time.perf_counter()
    if config.solver == "rnn":
        trial = make_trial(config.gate, config.dim, m, seed, mode=config.rnn_mode)
        problem = RnnProblem(trial.reservoir, trial.embedding, config.rnn_mu)
        try:
            res = solve(problem, config.ode)
            value = res.steps if config.metric == "epochs_to_threshold" else res.final_error
            converged = res.converged
        except DivergenceError as exc:
            value, converged = exc.last_error, False
    else:
        trial = make_trial(config.gate, config.dim, m, seed)
        data = generate_dataset(trial.embedding, config.n_train, config.n_valid, trial.source.derive(DATA))
        tcfg = replace(
            config.trainer,
            seed=seed,
            max_epochs=config.epoch_budget,
            early_stop=config.metric == "epochs_to_threshold",
        )
        try:
            run = train(trial.reservoir, data, tcfg, n=config.dim)
            if config.metric == "epochs_to_threshold":
                value = float(run.epochs_used)
            else:
                value = run.train_history[-1]
            converged = run.converged
        except DivergenceError as exc:
            value, converged = exc.last_error, False
    return ScanRecord(int(m), int(seed), float(value), bool(converged), time.perf_counter() - start)


def _run_cell(args):
    return run_trial(*args)


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def run_scan(config: ScanConfig, workers: Optional[int] = None) -> list[ScanRecord]:
    """Run every ``(m, seed)`` cell; output is sorted by ``(m, seed)``."""
    cells = [(config, m, s) for m in config.m_values for s in config.seeds]
    workers = default_workers() if workers is None else max(1, int(workers))
    if workers == 1 or len(cells) == 1:
        records = [_run_cell(c) for c in cells]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_cell, cells))
    return sorted(records, key=lambda r: (r.m, r.seed))


def aggregate(records: list[ScanRecord]) -> list[dict]:
    """Per-M mean, sample deviation, min, max and converged fraction."""
    if not records:
        raise InvalidConfigError("cannot aggregate an empty record set")
    out = []
    for m in sorted({r.m for r in records}):
        vals = np.array([r.metric_value for r in records if r.m == m], dtype=float)
        conv = [r.converged for r in records if r.m == m]
        out.append(
            {
                "m": m,
                "count": int(vals.size),
                "mean": float(vals.mean()),
                "std": float(vals.std(ddof=1)) if vals.size > 1 else 0.0,
                "min": float(vals.min()),
                "max": float(vals.max()),
                "converged_fraction": sum(conv) / len(conv),
            }
        )
    return out


def linear_fit_correlation(xs, ys) -> float:
    """Pearson correlation, i.e. the quality of a straight-line fit."""
    xs, ys = np.asarray(xs, float), np.asarray(ys, float)
    if np.std(ys) == 0 or np.std(xs) == 0:
        return math.nan
    return float(np.corrcoef(xs, ys)[0, 1])


def count_inversions(seq) -> int:
    """Adjacent decreases in a sequence expected to be nondecreasing."""
    return sum(1 for a, b in zip(seq, seq[1:]) if b < a)
