"""Monte Carlo harness for the rank-one simulation study.

One replication draws a sample from the rank-one model at a grid point
(p, s), runs every configured method on both sides and scores the recovered
supports. Rows are sorted before emission so output bytes depend only on the
config.
"""

from __future__ import annotations

import csv
import hashlib
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from sccasupp.covariance import DataHalf, halves, row_sparsity
from sccasupp.errors import ConfigError, RankDeficient, SccaError
from sccasupp.metrics import recovery_errors
from sccasupp.model import CovCase, make_rank1_model, sample
from sccasupp.recover import (
    C1_MULT,
    K_MULT,
    SIMULATION_CUT_CONSTANTS,
    CutPolicy,
    Side,
    ct_threshold_for_model,
    ct_estimate_directions,
    recover_with_directions,
    threshold_rows,
    whitened_svd_directions,
)

METHODS = ("WhitenedSvdNaive", "CleanedWhitenedSvd", "CT", "CtSparsityAware")

RESULT_HEADER = [
    "method", "side", "p", "s", "replication_id", "seed",
    "type_one", "type_two", "hamming", "exact", "wall_time_ms", "error",
]
SUMMARY_HEADER = [
    "method", "side", "p", "s",
    "mean_type_one", "se_type_one", "mean_type_two", "se_type_two",
    "mean_hamming", "se_hamming", "exact_rate",
]

CONFIG_DIR = Path(__file__).parent / "configs"


def _fmt(x) -> str:
    return format(float(x), ".17g")


@dataclass
class ExperimentConfig:
    n: int = 400
    p_list: list = field(default_factory=lambda: [50])
    s_grid: object = field(default_factory=lambda: [0.15, 0.5, 1.0])
    rho: float = 0.5
    cov_case: str = "identity"
    methods: list = field(default_factory=lambda: list(METHODS))
    cut_constants: Optional[dict] = None
    ct_constants: dict = field(default_factory=lambda: {"K_mult": K_MULT, "C1_mult": C1_MULT})
    replications: int = 100
    seed: int = 0
    output_path: Optional[str] = None
    timing: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.n < 4:
            raise ConfigError("n must be at least 4")
        if self.replications < 1:
            raise ConfigError("replications must be >= 1")
        if not self.p_list or any(int(p) != p or p < 20 for p in self.p_list):
            raise ConfigError("p_list must hold integers >= 20 (sparsity is clamped to [2, p - 17])")
        if not 0 < self.rho < 1:
            raise ConfigError("rho must lie in (0, 1)")
        try:
            CovCase(self.cov_case)
        except ValueError:
            raise ConfigError(f"cov_case must be 'identity' or 'banded', got {self.cov_case!r}") from None
        unknown = set(self.methods) - set(METHODS)
        if unknown or not self.methods:
            raise ConfigError(f"unknown methods {sorted(unknown)}; choose from {list(METHODS)}")
        for key in ("K_mult", "C1_mult"):
            if key not in self.ct_constants:
                raise ConfigError(f"ct_constants needs {key}")
        ratios = self.ratios()
        if any(b < a for a, b in zip(ratios, ratios[1:])):
            raise ConfigError("s/sqrt(n) ratio grid must be sorted ascending")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a mapping")
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            data = yaml.safe_load(Path(path).read_text())
        except (OSError, yaml.YAMLError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        return cls.from_dict(data)

    def ratios(self) -> list:
        grid = self.s_grid
        if isinstance(grid, dict):
            try:
                lo, hi = grid["ratio_range"]
                return [float(x) for x in np.linspace(lo, hi, int(grid["count"]))]
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigError(f"s_grid mapping needs count and ratio_range: {exc}") from None
        if not isinstance(grid, (list, tuple)) or not grid:
            raise ConfigError("s_grid must be a nonempty list of ratios or a {count, ratio_range} mapping")
        return [float(x) for x in grid]

    def sparsities(self, p) -> list:
        """Distinct s = round(ratio * sqrt(n)) clamped to [2, p - 17], ascending."""
        root_n = math.sqrt(self.n)
        out = []
        for ratio in self.ratios():
            s = min(max(int(round(ratio * root_n)), 2), p - 17)
            if s not in out:
                out.append(s)
        return out

    def cut_constant(self, side: Side) -> float:
        if self.cut_constants is not None:
            return float(self.cut_constants[side.value])
        return SIMULATION_CUT_CONSTANTS[(self.cov_case, side)]


@dataclass(frozen=True)
class ResultRow:
    method: str
    side: str
    p: int
    s: int
    replication_id: int
    seed: int
    type_one: float
    type_two: float
    hamming: float
    exact: bool
    wall_time_ms: float
    error: str = ""

    def sort_key(self):
        return (self.method, self.side, self.p, self.s, self.replication_id)


def replication_seed(base_seed, p, s, replication_id) -> int:
    """base seed XOR a stable 64-bit hash of the grid point and replication."""
    digest = hashlib.blake2b(f"{p}/{s}/{replication_id}".encode(), digest_size=8).digest()
    return int(base_seed) ^ int.from_bytes(digest, "big")


def _oriented(smp, model, side):
    # Orient so the support of interest belongs to the Y block.
    if side is Side.FOR_V:
        return smp, model
    return smp.swapped(), model.transposed()


def _run_method(method, smp, model, side, s, cfg, ct_thr):
    """Recovered index set for one method on one side, plus an error tag."""
    smp, model = _oriented(smp, model, side)
    base = CutPolicy.simulation(cfg.cut_constant(side))
    if method == "WhitenedSvdNaive":
        # right directions of the full sample = left directions of the swapped problem
        V_hat = whitened_svd_directions(DataHalf(smp.Y, smp.X), model.transposed(), 1)
        cut = base.resolve(smp.n, model.p, model.q, row_sparsity(model.sigma_y_inv))
        return threshold_rows(V_hat, cut), ""

    first, _ = halves(smp)
    theta = 0.0 if method == "CleanedWhitenedSvd" else ct_thr.theta
    tag = ""
    try:
        U_hat = ct_estimate_directions(first, model, 1, theta)
    except RankDeficient as exc:
        U_hat, tag = exc.padded, "rank_deficient"
    policy = CutPolicy.sparsity_aware(base, s) if method == "CtSparsityAware" else base
    return recover_with_directions(smp, model, U_hat, policy, side).indices, tag


def _run_replication(task):
    cfg, p, s, rep = task
    model = make_rank1_model(p, p, s, cfg.rho, CovCase(cfg.cov_case))
    ct_thr = ct_threshold_for_model(model, cfg.ct_constants["K_mult"], cfg.ct_constants["C1_mult"])
    truth = model.support()
    seed = replication_seed(cfg.seed, p, s, rep)
    smp = sample(model, cfg.n, seed)
    rows = []
    for method in cfg.methods:
        for side, d_true in ((Side.FOR_U, truth.d_u), (Side.FOR_V, truth.d_v)):
            t0 = time.perf_counter()
            try:
                d_hat, tag = _run_method(method, smp, model, side, s, cfg, ct_thr)
                err = recovery_errors(d_hat, d_true, p)
                vals = (err.type_one, err.type_two, err.hamming, err.exact)
            except SccaError as exc:
                tag = type(exc).__name__
                vals = (math.nan, math.nan, math.nan, False)
            ms = (time.perf_counter() - t0) * 1000 if cfg.timing else 0.0
            rows.append(ResultRow(method, side.value, p, s, rep, seed, *vals, ms, tag))
    return rows


def run_experiment(config: ExperimentConfig) -> list:
    tasks = [
        (config, p, s, rep)
        for p in config.p_list
        for s in config.sparsities(p)
        for rep in range(config.replications)
    ]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            chunks = list(pool.map(_run_replication, tasks, chunksize=8))
    else:
        chunks = [_run_replication(t) for t in tasks]
    rows = [row for chunk in chunks for row in chunk]
    return sorted(rows, key=ResultRow.sort_key)


def emit_results(rows, path=None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RESULT_HEADER)
    for r in rows:
        writer.writerow([
            r.method, r.side, r.p, r.s, r.replication_id, r.seed,
            _fmt(r.type_one), _fmt(r.type_two), _fmt(r.hamming),
            int(r.exact), _fmt(r.wall_time_ms), r.error,
        ])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def parse_results(text) -> list:
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames != RESULT_HEADER:
        raise ConfigError(f"unexpected results header {reader.fieldnames}")
    return [
        ResultRow(
            d["method"], d["side"], int(d["p"]), int(d["s"]), int(d["replication_id"]), int(d["seed"]),
            float(d["type_one"]), float(d["type_two"]), float(d["hamming"]),
            d["exact"] == "1", float(d["wall_time_ms"]), d["error"],
        )
        for d in reader
    ]


@dataclass(frozen=True)
class SummaryRow:
    method: str
    side: str
    p: int
    s: int
    mean_type_one: float
    se_type_one: float
    mean_type_two: float
    se_type_two: float
    mean_hamming: float
    se_hamming: float
    exact_rate: float


def _mean_se(values):
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return math.nan, math.nan
    se = float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1 else 0.0
    return float(v.mean()), se


def summarize(rows) -> list:
    """Mean and standard error of each metric per (method, side, p, s).

    Rows whose metrics are NaN (failed replications) are left out.
    """
    if not rows:
        raise ValueError("nothing to summarize")
    groups = {}
    for r in rows:
        groups.setdefault((r.method, r.side, r.p, r.s), []).append(r)
    out = []
    for key in sorted(groups):
        good = [r for r in groups[key] if not math.isnan(r.hamming)]
        stats = []
        for name in ("type_one", "type_two", "hamming"):
            stats.extend(_mean_se([getattr(r, name) for r in good]))
        rate = float(np.mean([r.exact for r in good])) if good else math.nan
        out.append(SummaryRow(*key, *stats, rate))
    return out


def emit_summary(summary, path=None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SUMMARY_HEADER)
    for row in summary:
        d = asdict(row)
        writer.writerow([d[k] if k in ("method", "side", "p", "s") else _fmt(d[k]) for k in SUMMARY_HEADER])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def shipped_config(name) -> Path:
    path = CONFIG_DIR / f"{name}.yaml"
    if not path.exists():
        raise ConfigError(f"no shipped config named {name!r}")
    return path
