"""Quantum-assisted greedy loop: sample, estimate per-spin uncertainty, fix, contract.

Each stage samples the current (contracted) Hamiltonian, fixes every
variable whose sample uncertainty is at most ``theta`` to its majority
value, and contracts the fixed variables away. The loop stops when a stage
fixes nothing, when everything is fixed, or after ``max_stages`` sampling
calls. Variables still free at that point take their values from MQC over
the last stage's samples.

Stage counting: every sampler call is one stage. A run in which stage 1
fixes every variable therefore reports one stage; a run whose last stage
fixes nothing counts that stage too.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Sequence

import numpy as np

from qaga.exceptions import ContractError
from qaga.ising import IsingHamiltonian, check_hamiltonian, contract_many, energy
from qaga.postprocess import mqc, mqc_vec
from qaga.samplers import SampleSet, SamplerConfig, sample

__all__ = [
    "QagaConfig",
    "StageRecord",
    "QagaTrace",
    "uncertainty",
    "uncertainties",
    "majority_sign",
    "qaga_run",
    "solve_compare",
    "MethodResult",
    "METHODS",
]


@dataclass(frozen=True)
class QagaConfig:
    theta: float = 0.0
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    backend: str = "sa"
    max_stages: int | None = None

    def __post_init__(self):
        if not 0.0 <= self.theta < 0.5:
            raise ContractError(f"theta must lie in [0, 0.5), got {self.theta}")
        if self.max_stages is not None and self.max_stages < 1:
            raise ContractError(f"max_stages must be positive, got {self.max_stages}")

    def as_dict(self) -> dict:
        return {
            "theta": self.theta,
            "backend": self.backend,
            "max_stages": self.max_stages,
            "sampler": self.sampler.as_dict(),
        }


@dataclass(frozen=True)
class StageRecord:
    stage: int
    sampled: int
    fixed: Mapping[int, int]
    best_energy: float
    remaining: int

    @property
    def vars_fixed(self) -> int:
        return len(self.fixed)


@dataclass
class QagaTrace:
    stages: list[StageRecord] = field(default_factory=list)
    fallback_used: bool = False
    fallback_assigned: int = 0
    final_energy: float = float("nan")
    total_reads: int = 0

    @property
    def total_stages(self) -> int:
        return len(self.stages)


def uncertainties(Z: SampleSet) -> np.ndarray:
    """``1 - |sum_j z_i^j| / n`` for every column of ``Z``."""
    n = len(Z)
    if n == 0:
        raise ContractError("uncertainty needs at least one sample")
    sums = Z.spins.sum(axis=0, dtype=np.int64)
    return 1.0 - np.abs(sums) / n


def uncertainty(Z: SampleSet, i: int) -> float:
    """Uncertainty of variable ``i``: 0 when all samples agree, 1 on an even split."""
    n = len(Z)
    if n == 0:
        raise ContractError("uncertainty needs at least one sample")
    total = int(Z.column(i).sum(dtype=np.int64))
    return 1.0 - abs(total) / n


def majority_sign(Z: SampleSet, i: int) -> int:
    total = int(Z.column(i).sum(dtype=np.int64))
    if total == 0:
        raise AssertionError(f"no majority at variable {i}: samples split evenly")
    return 1 if total > 0 else -1


def stage_seed(seed: int, stage: int) -> int:
    """Seed of stage ``stage`` (1-based); stage 1 reuses the master seed."""
    if stage == 1:
        return int(seed)
    ss = np.random.SeedSequence(int(seed), spawn_key=(2**32 + 2, int(stage)))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def qaga_run(
    H: IsingHamiltonian,
    cfg: QagaConfig = QagaConfig(),
    *,
    sampler: Callable[[IsingHamiltonian, SamplerConfig], SampleSet] | None = None,
    workers: int | None = None,
) -> tuple[dict[int, int], QagaTrace]:
    """Run the greedy fixing loop on ``H``.

    Returns a complete assignment over ``H.active_vars`` and the per-stage
    trace. ``sampler`` overrides the backend named in ``cfg``; it receives
    the stage Hamiltonian and a config carrying the stage seed.
    """
    check_hamiltonian(H)
    if H.num_variables == 0:
        raise ContractError("cannot run on an empty Hamiltonian")
    if sampler is None:
        kwargs = {} if cfg.backend == "exact" else {"workers": workers}

        def sampler(Ht, scfg):
            return sample(Ht, scfg, cfg.backend, **kwargs)

    max_stages = cfg.max_stages or H.num_variables
    trace = QagaTrace()
    fixed: dict[int, int] = {}
    Ht = H
    Z = None
    while Ht.num_variables > 0 and trace.total_stages < max_stages:
        stage = trace.total_stages + 1
        scfg = replace(cfg.sampler, seed=stage_seed(cfg.sampler.seed, stage))
        try:
            Z = sampler(Ht, scfg)
        except ContractError as exc:
            raise ContractError(f"stage {stage}: {exc}") from exc
        trace.total_reads += len(Z)
        u = uncertainties(Z)
        new = {}
        for k in np.flatnonzero(u <= cfg.theta):
            v = Z.variables[k]
            new[v] = majority_sign(Z, v)
        # sample energies on the contracted problem already include the offset
        best = float(Z.energies.min())
        if new:
            Ht = contract_many(Ht, new)
            fixed.update(new)
        trace.stages.append(StageRecord(stage, len(Z.variables), new, best, Ht.num_variables))
        if not new:
            break

    z = dict(fixed)
    if Ht.num_variables > 0:
        rest = Z.restrict(Ht)
        z.update(Ht.from_vector(mqc_vec(Ht, rest.spins)))
        trace.fallback_used = True
        trace.fallback_assigned = Ht.num_variables
    z = {v: z[v] for v in H.active_vars}
    trace.final_energy = energy(H, z)
    return z, trace


# --- method comparison -------------------------------------------------------


@dataclass(frozen=True)
class MethodResult:
    method: str
    energy: float
    assignment: Mapping[int, int]
    reads: int
    trace: QagaTrace | None = None


METHODS = ("QA", "MQC", "QAGA")


def solve_compare(
    H: IsingHamiltonian,
    methods: Sequence[str] = METHODS,
    *,
    sampler_cfg: SamplerConfig = SamplerConfig(num_gauges=10),
    theta: float = 0.0,
    backend: str = "sa",
    max_stages: int | None = None,
    workers: int | None = None,
) -> dict[str, MethodResult]:
    """Run the baselines and the greedy solver on the same problem and budget.

    ``QA`` is the best read of one sampler call (with spin-reversal
    transforms when ``sampler_cfg.num_gauges > 0``), ``MQC`` post-processes
    that same sample set, and ``QAGA`` uses the same sampler config for
    every stage, so its first stage sees exactly the QA samples. Energies are
    evaluated on ``H`` itself.
    """
    unknown = [m for m in methods if m not in METHODS]
    if unknown:
        raise ContractError(f"unknown method(s) {unknown}; choose from {list(METHODS)}")
    check_hamiltonian(H)
    kwargs = {} if backend == "exact" else {"workers": workers}

    shared = {}

    def baseline_samples():
        if "Z" not in shared:
            shared["Z"] = sample(H, sampler_cfg, backend, **kwargs)
        return shared["Z"]

    def stage_sampler(Ht, scfg):
        if Ht is H and scfg.seed == sampler_cfg.seed:
            return baseline_samples()
        return sample(Ht, scfg, backend, **kwargs)

    results = {}
    for name in methods:
        if name == "QA":
            Z = baseline_samples()
            z, _ = Z.lowest()
            results[name] = MethodResult(name, energy(H, z), z, len(Z))
        elif name == "MQC":
            Z = baseline_samples()
            z = mqc(H, Z)
            results[name] = MethodResult(name, energy(H, z), z, len(Z))
        else:
            cfg = QagaConfig(theta=theta, sampler=sampler_cfg, backend=backend, max_stages=max_stages)
            z, trace = qaga_run(H, cfg, sampler=stage_sampler)
            results[name] = MethodResult(name, trace.final_energy, z, trace.total_reads, trace)
    return results
