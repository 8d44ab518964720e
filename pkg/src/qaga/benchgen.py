"""Random spin-glass benchmarks and the two experiment harnesses.

Experiment A scores head-to-head comparisons (baseline wins / ties / QAGA
wins) per coefficient distribution and sparsity. Experiment B records the
mean number of greedy stages per threshold and sparsity.

Problems are independent, so a batch may be spread over worker processes;
results are always reassembled in problem order.
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from qaga.exceptions import ContractError
from qaga.greedy import METHODS, QagaConfig, qaga_run, solve_compare
from qaga.ising import IsingHamiltonian
from qaga.samplers import SamplerConfig

__all__ = [
    "DISTRIBUTIONS",
    "ProblemSpec",
    "gen_random",
    "problem_seed",
    "ExperimentConfig",
    "ExperimentReport",
    "StageReport",
    "run_experiment_a",
    "run_experiment_b",
    "write_report",
    "read_report",
    "TIE_TOL",
]

DISTRIBUTIONS = ("binary", "uniform", "normal")
TIE_TOL = 1e-9


@dataclass(frozen=True)
class ProblemSpec:
    n_vars: int
    sparsity: float
    dist: str = "normal"
    seed: int = 0
    zero_bias: bool = False

    def __post_init__(self):
        if self.n_vars < 1:
            raise ContractError(f"n_vars must be >= 1, got {self.n_vars}")
        if not 0.0 <= self.sparsity <= 1.0:
            raise ContractError(f"sparsity must lie in [0, 1], got {self.sparsity}")
        if self.dist not in DISTRIBUTIONS:
            raise ContractError(f"dist must be one of {DISTRIBUTIONS}, got {self.dist!r}")


def _draw(rng, dist, size):
    if dist == "binary":
        return rng.choice(np.array([-1.0, 1.0]), size=size)
    if dist == "uniform":
        return rng.uniform(-1.0, 1.0, size=size)
    return rng.standard_normal(size)


def gen_random(spec: ProblemSpec) -> IsingHamiltonian:
    """Random Ising model on variables ``0..n-1``.

    Each of the ``n(n-1)/2`` edges is kept with probability ``sparsity``.
    Every kept coupler and every local field is drawn from ``dist``; with
    ``zero_bias`` the fields are left at zero.
    """
    n = spec.n_vars
    rng = np.random.default_rng(np.random.SeedSequence(int(spec.seed)))
    fields = _draw(rng, spec.dist, n)
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(iu.size) < spec.sparsity
    couplings = _draw(rng, spec.dist, int(keep.sum()))
    h = {} if spec.zero_bias else {i: float(v) for i, v in enumerate(fields)}
    J = {(int(i), int(j)): float(v) for i, j, v in zip(iu[keep], ju[keep], couplings)}
    return IsingHamiltonian(h, J, active_vars=range(n))


def problem_seed(master: int, *tags: int) -> int:
    ss = np.random.SeedSequence(int(master), spawn_key=tuple(int(t) for t in tags))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _sparsity_tag(s: float) -> int:
    return int(round(s * 1_000_000))


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to regenerate an experiment run.

    ``sampler.seed`` is ignored; each problem draws its sampler seed from
    ``seed`` and its position in the batch.
    """

    dists: Sequence[str] = DISTRIBUTIONS
    sparsities: Sequence[float] = (0.05, 0.25, 0.5, 0.75, 1.0)
    n_vars: int = 50
    batch: int = 100
    thetas: Sequence[float] = (0.0,)
    sampler: SamplerConfig = field(default_factory=lambda: SamplerConfig(num_gauges=10))
    backend: str = "sa"
    seed: int = 0
    comparisons: Sequence[tuple[str, str]] = (("QA", "QAGA"), ("MQC", "QAGA"))
    max_stages: int | None = None
    zero_bias: bool = False
    workers: int = 1
    output: str | None = None

    def __post_init__(self):
        for a, b in self.comparisons:
            if a not in METHODS or b not in METHODS:
                raise ContractError(f"unknown method in comparison ({a}, {b})")
        for d in self.dists:
            if d not in DISTRIBUTIONS:
                raise ContractError(f"unknown distribution {d!r}")
        if self.batch < 1 or self.n_vars < 1:
            raise ContractError("batch and n_vars must be positive")
        for t in self.thetas:
            if not 0.0 <= t < 0.5:
                raise ContractError(f"theta must lie in [0, 0.5), got {t}")

    def as_dict(self) -> dict:
        """Config echo; ``workers`` and ``output`` do not affect results and are left out."""
        return {
            "dists": list(self.dists),
            "sparsities": list(self.sparsities),
            "n_vars": self.n_vars,
            "batch": self.batch,
            "thetas": list(self.thetas),
            "sampler": self.sampler.as_dict(),
            "default_sweeps": "10 * active variables" if self.sampler.sweeps is None else None,
            "backend": self.backend,
            "seed": self.seed,
            "comparisons": [list(c) for c in self.comparisons],
            "max_stages": self.max_stages,
            "zero_bias": self.zero_bias,
            "tie_tolerance": TIE_TOL,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        doc = dict(doc)
        doc.pop("default_sweeps", None)
        doc.pop("tie_tolerance", None)
        if "sampler" in doc:
            doc["sampler"] = SamplerConfig(**doc["sampler"])
        for key in ("dists", "sparsities", "thetas"):
            if key in doc:
                doc[key] = tuple(doc[key])
        if "comparisons" in doc:
            doc["comparisons"] = tuple(tuple(c) for c in doc["comparisons"])
        try:
            return cls(**doc)
        except TypeError as exc:
            raise ContractError(f"bad experiment config: {exc}") from exc


def _map(fn, tasks, workers):
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    return [fn(t) for t in tasks]


# --- experiment A -------------------------------------------------------------


@dataclass
class ExperimentReport:
    """Per-problem energies for every method plus per-cell win/tie/loss counts.

    ``summary`` rows: ``method_a, method_b, dist, sparsity, a_wins, ties,
    b_wins, batch, status``; ``status`` is ``complete`` or ``partial``.
    """

    config: dict
    methods: list[str]
    rows: list[dict] = field(default_factory=list)
    summary: list[dict] = field(default_factory=list)

    def __eq__(self, other):
        if not isinstance(other, ExperimentReport):
            return NotImplemented
        return _report_files(self) == _report_files(other)


def _solve_a(task):
    dist, s, k, pseed, n_vars, methods, cfg = task
    H = gen_random(ProblemSpec(n_vars, s, dist, pseed, cfg.zero_bias))
    row = {"dist": dist, "sparsity": s, "index": k, "seed": pseed}
    sampler_cfg = SamplerConfig(**{**cfg.sampler.as_dict(), "seed": problem_seed(pseed, 1)})
    try:
        res = solve_compare(
            H,
            methods,
            sampler_cfg=sampler_cfg,
            theta=cfg.thetas[0],
            backend=cfg.backend,
            max_stages=cfg.max_stages,
            workers=1,
        )
    except Exception as exc:  # reported as a partial cell, not raised
        row["status"] = f"error: {type(exc).__name__}: {exc}"
        for m in methods:
            row[m] = math.nan
        row["qaga_stages"] = 0
        return row
    for m in methods:
        row[m] = res[m].energy
    row["qaga_stages"] = res["QAGA"].trace.total_stages if "QAGA" in res else 0
    row["status"] = "ok"
    return row


def _score(ea, eb):
    if abs(ea - eb) <= TIE_TOL:
        return "tie"
    return "a" if ea < eb else "b"


def summarize_a(rows, comparisons, dists, sparsities) -> list[dict]:
    summary = []
    for a, b in comparisons:
        for dist in dists:
            for s in sparsities:
                cell = [r for r in rows if r["dist"] == dist and r["sparsity"] == s]
                counts = {"a": 0, "tie": 0, "b": 0}
                status = "complete"
                for r in sorted(cell, key=lambda r: r["index"]):
                    if r["status"] != "ok":
                        # the cell stops at its first failed problem
                        status = "partial"
                        break
                    counts[_score(r[a], r[b])] += 1
                summary.append(
                    {
                        "method_a": a,
                        "method_b": b,
                        "dist": dist,
                        "sparsity": s,
                        "a_wins": counts["a"],
                        "ties": counts["tie"],
                        "b_wins": counts["b"],
                        "batch": len(cell),
                        "status": status,
                    }
                )
    return summary


def run_experiment_a(cfg: ExperimentConfig) -> ExperimentReport:
    """Head-to-head comparisons on ``batch`` random problems per (dist, sparsity) cell.

    Every method in a cell sees the same problem instance and the same
    sampler seed; only the first threshold in ``cfg.thetas`` is used.
    """
    methods = [m for m in METHODS if any(m in c for c in cfg.comparisons)]
    tasks = []
    for di, dist in enumerate(cfg.dists):
        code = DISTRIBUTIONS.index(dist)
        for s in cfg.sparsities:
            for k in range(cfg.batch):
                pseed = problem_seed(cfg.seed, code, _sparsity_tag(s), k)
                tasks.append((dist, s, k, pseed, cfg.n_vars, methods, cfg))
    rows = _map(_solve_a, tasks, cfg.workers)
    summary = summarize_a(rows, cfg.comparisons, cfg.dists, cfg.sparsities)
    return ExperimentReport(cfg.as_dict(), methods, rows, summary)


# --- experiment B -------------------------------------------------------------


@dataclass
class StageReport:
    """Mean stage counts per (theta, sparsity); rows hold every run."""

    config: dict
    rows: list[dict] = field(default_factory=list)
    summary: list[dict] = field(default_factory=list)

    def __eq__(self, other):
        if not isinstance(other, StageReport):
            return NotImplemented
        return _report_files(self) == _report_files(other)

    def table(self) -> dict[tuple[float, float], float]:
        return {(r["theta"], r["sparsity"]): r["mean_stages"] for r in self.summary}


def _solve_b(task):
    theta, s, k, pseed, cfg = task
    dist = cfg.dists[0]
    H = gen_random(ProblemSpec(cfg.n_vars, s, dist, pseed, cfg.zero_bias))
    row = {"theta": theta, "sparsity": s, "index": k, "seed": pseed}
    qcfg = QagaConfig(
        theta=theta,
        sampler=SamplerConfig(**{**cfg.sampler.as_dict(), "seed": problem_seed(pseed, 1)}),
        backend=cfg.backend,
        max_stages=cfg.max_stages,
    )
    try:
        _, trace = qaga_run(H, qcfg, workers=1)
    except Exception as exc:  # reported as a partial cell, not raised
        row.update(stages=0, fallback_used=0, energy=math.nan, total_reads=0)
        row["status"] = f"error: {type(exc).__name__}: {exc}"
        return row
    row.update(
        stages=trace.total_stages,
        fallback_used=int(trace.fallback_used),
        energy=trace.final_energy,
        total_reads=trace.total_reads,
        status="ok",
    )
    return row


def summarize_b(rows, thetas, sparsities) -> list[dict]:
    summary = []
    for theta in thetas:
        for s in sparsities:
            cell = sorted(
                (r for r in rows if r["theta"] == theta and r["sparsity"] == s),
                key=lambda r: r["index"],
            )
            done = []
            status = "complete"
            for r in cell:
                if r["status"] != "ok":
                    status = "partial"
                    break
                done.append(r["stages"])
            mean = float(np.mean(done)) if done else math.nan
            summary.append(
                {
                    "theta": theta,
                    "sparsity": s,
                    "mean_stages": mean,
                    "batch": len(cell),
                    "status": status,
                }
            )
    return summary


def run_experiment_b(cfg: ExperimentConfig) -> StageReport:
    """Average stage count of the greedy solver for every (theta, sparsity) pair.

    Problems are drawn from the first distribution in ``cfg.dists`` (normal
    coefficients in the reference setup); the same problems are reused
    across thresholds.
    """
    dist = cfg.dists[0]
    code = DISTRIBUTIONS.index(dist)
    tasks = []
    for theta in cfg.thetas:
        for s in cfg.sparsities:
            for k in range(cfg.batch):
                pseed = problem_seed(cfg.seed, code, _sparsity_tag(s), k)
                tasks.append((theta, s, k, pseed, cfg))
    rows = _map(_solve_b, tasks, cfg.workers)
    return StageReport(cfg.as_dict(), rows, summarize_b(rows, cfg.thetas, cfg.sparsities))


# --- report files -------------------------------------------------------------


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


def _table(rows, header) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for r in rows:
        writer.writerow([_fmt(r[c]) for c in header])
    return buf.getvalue()


A_SUMMARY = ["method_a", "method_b", "dist", "sparsity", "a_wins", "ties", "b_wins", "batch", "status"]
B_ROWS = ["theta", "sparsity", "index", "seed", "stages", "fallback_used", "energy", "total_reads", "status"]
B_SUMMARY = ["theta", "sparsity", "mean_stages", "batch", "status"]


def _a_rows_header(methods):
    return ["dist", "sparsity", "index", "seed"] + list(methods) + ["qaga_stages", "status"]


def _report_files(report) -> dict[str, str]:
    config = json.dumps(report.config, indent=1, sort_keys=True) + "\n"
    if isinstance(report, ExperimentReport):
        return {
            "config.json": json.dumps(
                {"kind": "A", "methods": report.methods, "config": report.config},
                indent=1,
                sort_keys=True,
            )
            + "\n",
            "problems.csv": _table(report.rows, _a_rows_header(report.methods)),
            "summary.csv": _table(report.summary, A_SUMMARY),
        }
    return {
        "config.json": json.dumps({"kind": "B", "config": report.config}, indent=1, sort_keys=True)
        + "\n",
        "problems.csv": _table(report.rows, B_ROWS),
        "summary.csv": _table(report.summary, B_SUMMARY),
    }


def write_report(report, path) -> list[Path]:
    """Write ``config.json``, ``problems.csv`` and ``summary.csv`` into directory ``path``."""
    out = Path(path)
    written = []
    try:
        out.mkdir(parents=True, exist_ok=True)
        for name, text in _report_files(report).items():
            target = out / name
            target.write_text(text)
            written.append(target)
    except OSError as exc:
        raise OSError(f"cannot write report to {out}: {exc}") from exc
    return written


_INT_COLS = {"index", "seed", "a_wins", "ties", "b_wins", "batch", "stages", "fallback_used",
             "total_reads", "qaga_stages"}
_STR_COLS = {"dist", "status", "method_a", "method_b"}


def _parse_table(text):
    rows = []
    for r in csv.DictReader(io.StringIO(text)):
        rows.append(
            {
                k: (int(v) if k in _INT_COLS else v if k in _STR_COLS else float(v))
                for k, v in r.items()
            }
        )
    return rows


def read_report(path):
    """Inverse of :func:`write_report`."""
    out = Path(path)
    try:
        meta = json.loads((out / "config.json").read_text())
        rows = _parse_table((out / "problems.csv").read_text())
        summary = _parse_table((out / "summary.csv").read_text())
    except OSError as exc:
        raise OSError(f"cannot read report from {out}: {exc}") from exc
    if meta["kind"] == "A":
        return ExperimentReport(meta["config"], meta["methods"], rows, summary)
    return StageReport(meta["config"], rows, summary)
