"""Samplers standing in for the annealer.

Every backend maps ``(H, SamplerConfig)`` to a :class:`SampleSet` and is a
pure function of its inputs: each read draws from its own random stream,
derived from ``(seed, gauge, read)``, so splitting reads across threads
cannot change the result.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Sequence

import numpy as np

from qaga import _kernels
from qaga.exceptions import CapacityError, ContractError, DomainMismatchError
from qaga.ising import IsingHamiltonian, check_hamiltonian

__all__ = [
    "SamplerConfig",
    "SampleSet",
    "exact_ground_state",
    "count_ground_states",
    "exact_sampler",
    "sa_sample",
    "apply_srt",
    "unapply_srt",
    "srt_sample",
    "sample",
    "get_backend",
    "BACKENDS",
    "ENUMERATION_LIMIT",
]

ENUMERATION_LIMIT = 24
_READ_BLOCK = 64
_WORKERS_ENV = "QAGA_WORKERS"


def default_workers() -> int:
    value = os.environ.get(_WORKERS_ENV)
    if value is None:
        return 1
    try:
        workers = int(value)
    except ValueError:
        raise ContractError(f"{_WORKERS_ENV} must be a positive integer, got {value!r}")
    if workers < 1:
        raise ContractError(f"{_WORKERS_ENV} must be a positive integer, got {value!r}")
    return workers


@dataclass(frozen=True)
class SamplerConfig:
    """Sampling budget, seed and annealing schedule.

    ``sweeps=None`` resolves to ``10 * n`` for an ``n``-variable problem at
    sampling time (see :meth:`resolved`).
    """

    reads: int = 1000
    seed: int = 0
    sweeps: int | None = None
    beta0: float = 0.1
    beta1: float = 10.0
    num_gauges: int = 0

    def __post_init__(self):
        if int(self.reads) < 1:
            raise ContractError(f"reads must be >= 1, got {self.reads}")
        if self.sweeps is not None and int(self.sweeps) < 1:
            raise ContractError(f"sweeps must be >= 1, got {self.sweeps}")
        if not 0 < self.beta0 < self.beta1:
            raise ContractError(f"need 0 < beta0 < beta1, got {self.beta0}, {self.beta1}")
        if int(self.num_gauges) < 0:
            raise ContractError(f"num_gauges must be >= 0, got {self.num_gauges}")
        if self.num_gauges > 0 and self.reads % self.num_gauges:
            raise ContractError(
                f"num_gauges={self.num_gauges} must divide reads={self.reads}"
            )
        if not 0 <= int(self.seed) < 2**64:
            raise ContractError(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    def resolved(self, num_variables: int) -> "SamplerConfig":
        if self.sweeps is not None:
            return self
        return replace(self, sweeps=max(1, 10 * num_variables))

    def as_dict(self) -> dict:
        return {
            "reads": self.reads,
            "seed": self.seed,
            "sweeps": self.sweeps,
            "beta0": self.beta0,
            "beta1": self.beta1,
            "num_gauges": self.num_gauges,
        }


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Reads from one sampler call.

    ``spins[j, k]`` is the value of ``variables[k]`` in read ``j``.
    """

    variables: tuple[int, ...]
    spins: np.ndarray
    energies: np.ndarray
    info: Mapping = field(default_factory=dict)

    def __post_init__(self):
        spins = np.ascontiguousarray(self.spins, dtype=np.int8)
        energies = np.ascontiguousarray(self.energies, dtype=np.float64)
        if spins.ndim != 2 or spins.shape[1] != len(self.variables):
            raise ContractError("spins must have one column per variable")
        if energies.shape != (spins.shape[0],):
            raise ContractError("need exactly one energy per sample")
        if spins.size and not np.all(np.abs(spins) == 1):
            raise ContractError("spin values must be -1 or +1")
        spins.setflags(write=False)
        energies.setflags(write=False)
        object.__setattr__(self, "variables", tuple(int(v) for v in self.variables))
        object.__setattr__(self, "spins", spins)
        object.__setattr__(self, "energies", energies)

    @classmethod
    def from_spins(cls, H: IsingHamiltonian, spins, info=None) -> "SampleSet":
        spins = np.ascontiguousarray(spins, dtype=np.int8)
        return cls(H.active_vars, spins, H.energies(spins), info or {})

    def __len__(self):
        return self.spins.shape[0]

    def __eq__(self, other):
        if not isinstance(other, SampleSet):
            return NotImplemented
        return (
            self.variables == other.variables
            and np.array_equal(self.spins, other.spins)
            and self.energies.tobytes() == other.energies.tobytes()
        )

    def __getitem__(self, j) -> dict[int, int]:
        return {v: int(s) for v, s in zip(self.variables, self.spins[j])}

    def __iter__(self):
        for j in range(len(self)):
            yield self[j]

    def lowest(self) -> tuple[dict[int, int], float]:
        """First read attaining the minimum energy."""
        j = int(np.argmin(self.energies))
        return self[j], float(self.energies[j])

    def column(self, i: int) -> np.ndarray:
        try:
            k = self.variables.index(i)
        except ValueError:
            raise KeyError(f"variable {i} is not in the sample set") from None
        return self.spins[:, k]

    def restrict(self, H: IsingHamiltonian) -> "SampleSet":
        """Project onto ``H.active_vars`` and re-evaluate energies against ``H``."""
        missing = set(H.active_vars) - set(self.variables)
        if missing:
            raise DomainMismatchError(missing, (), what="sample set")
        cols = [self.variables.index(v) for v in H.active_vars]
        return SampleSet.from_spins(H, self.spins[:, cols], self.info)


# --- exhaustive enumeration -----------------------------------------------


def _enumeration_blocks(n, block_bits=16):
    """Yield ``(start, spins)`` blocks in lexicographic order, -1 < +1, index 0 most significant."""
    total = 1 << n
    step = 1 << min(n, block_bits)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    for start in range(0, total, step):
        codes = np.arange(start, min(start + step, total), dtype=np.int64)
        bits = (codes[:, None] >> shifts[None, :]) & 1
        yield start, (2 * bits - 1).astype(np.int8)


def _check_enumerable(H):
    check_hamiltonian(H)
    if H.num_variables > ENUMERATION_LIMIT:
        raise CapacityError(
            f"exhaustive enumeration is limited to {ENUMERATION_LIMIT} variables, "
            f"problem has {H.num_variables}"
        )


def exact_ground_state(H: IsingHamiltonian) -> tuple[dict[int, int], float]:
    """Global minimum by enumeration.

    Among minimizers the lexicographically smallest assignment wins, reading
    variables in ascending index order with -1 before +1.
    """
    _check_enumerable(H)
    n = H.num_variables
    if n == 0:
        return {}, float(H.offset)
    best_e, best_z = np.inf, None
    for _, spins in _enumeration_blocks(n):
        e = H.energies(spins)
        k = int(np.argmin(e))
        if e[k] < best_e:
            best_e, best_z = float(e[k]), spins[k].copy()
    return H.from_vector(best_z), best_e


def count_ground_states(H: IsingHamiltonian, tol: float = 1e-9) -> int:
    """Number of assignments within ``tol`` of the minimum energy."""
    _check_enumerable(H)
    if H.num_variables == 0:
        return 1
    _, e_min = exact_ground_state(H)
    count = 0
    for _, spins in _enumeration_blocks(H.num_variables):
        count += int(np.count_nonzero(H.energies(spins) <= e_min + tol))
    return count


def _check_sampleable(H):
    check_hamiltonian(H)
    if H.num_variables == 0:
        raise ContractError("cannot sample an empty Hamiltonian")


def exact_sampler(H: IsingHamiltonian, cfg: SamplerConfig) -> SampleSet:
    """Idealized annealer: ``cfg.reads`` copies of the enumerated ground state."""
    _check_sampleable(H)
    z, _ = exact_ground_state(H)
    vec = H.to_vector(z)
    spins = np.repeat(vec[None, :], cfg.reads, axis=0)
    return SampleSet.from_spins(H, spins, {"backend": "exact"})


# --- simulated annealing ----------------------------------------------------


def read_generator(seed: int, gauge: int, read: int) -> np.random.Generator:
    """Independent counter-based stream for one read of one gauge."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(gauge), int(read)))
    return np.random.Generator(np.random.Philox(ss))


def _anneal_block(H, cfg, betas, gauge, reads):
    n = H.num_variables
    m = len(reads)
    init = np.empty((m, n), dtype=np.int8)
    uniforms = np.empty((m, cfg.sweeps * n))
    for row, r in enumerate(reads):
        rng = read_generator(cfg.seed, gauge, r)
        init[row] = 2 * rng.integers(0, 2, size=n, dtype=np.int8) - 1
        uniforms[row] = rng.random(cfg.sweeps * n)
    spins = init.copy()
    indptr, nbr, w = H.adjacency
    delta = _kernels.anneal(spins, uniforms, betas, H.linear, indptr, nbr, w)
    return init, spins, delta


def sa_sample(
    H: IsingHamiltonian,
    cfg: SamplerConfig,
    *,
    gauge: int = 0,
    workers: int | None = None,
    audit: bool = False,
) -> SampleSet:
    """Simulated annealing, one independent restart per read.

    Each read starts from uniform random spins and runs ``cfg.sweeps``
    Metropolis sweeps with inverse temperature spaced geometrically from
    ``beta0`` to ``beta1``. With ``audit=True`` the incrementally tracked
    energy of every read is checked against a full re-evaluation.
    """
    _check_sampleable(H)
    cfg = cfg.resolved(H.num_variables)
    workers = default_workers() if workers is None else int(workers)
    betas = np.geomspace(cfg.beta0, cfg.beta1, cfg.sweeps)
    blocks = [
        range(start, min(start + _READ_BLOCK, cfg.reads))
        for start in range(0, cfg.reads, _READ_BLOCK)
    ]
    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda b: _anneal_block(H, cfg, betas, gauge, b), blocks))
    else:
        results = [_anneal_block(H, cfg, betas, gauge, b) for b in blocks]
    spins = np.concatenate([r[1] for r in results])
    out = SampleSet.from_spins(H, spins, {"backend": "sa", "gauge": gauge})
    if audit:
        init = np.concatenate([r[0] for r in results])
        delta = np.concatenate([r[2] for r in results])
        tracked = H.energies(init) + delta
        bad = np.flatnonzero(np.abs(tracked - out.energies) > 1e-9)
        if bad.size:
            raise AssertionError(f"incremental energy drifted on reads {bad.tolist()}")
    return out


# --- spin-reversal transforms ----------------------------------------------


def _check_gauge(H, g):
    keys, active = set(g), set(H.active_vars)
    if keys != active:
        raise DomainMismatchError(active - keys, keys - active, what="gauge")
    if any(s not in (-1, 1) for s in g.values()):
        raise ContractError("gauge values must be -1 or +1")


def apply_srt(H: IsingHamiltonian, g: Mapping[int, int]) -> IsingHamiltonian:
    """Gauge-transform coefficients: ``h_i -> g_i h_i``, ``J_ij -> g_i g_j J_ij``."""
    _check_gauge(H, g)
    h = {i: g[i] * v for i, v in H.h.items()}
    J = {(i, j): g[i] * g[j] * v for (i, j), v in H.J.items()}
    return IsingHamiltonian(h, J, offset=H.offset, active_vars=H.active_vars)


def unapply_srt(S: SampleSet, g: Mapping[int, int], H: IsingHamiltonian | None = None) -> SampleSet:
    """Map gauge-frame samples back with ``z_i -> g_i z_i``.

    Energies are unchanged by the transform; if ``H`` is given they are
    re-evaluated against it instead.
    """
    keys = set(g)
    if keys != set(S.variables):
        raise DomainMismatchError(set(S.variables) - keys, keys - set(S.variables), what="gauge")
    gvec = np.array([g[v] for v in S.variables], dtype=np.int8)
    spins = S.spins * gvec[None, :]
    if H is not None:
        return SampleSet.from_spins(H, spins, S.info)
    return SampleSet(S.variables, spins, S.energies, S.info)


def draw_gauges(H: IsingHamiltonian, seed: int, k: int) -> list[dict[int, int]]:
    """``k`` gauges from the seed stream; the first is always the identity."""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=(2**32,))))
    gauges = [{v: 1 for v in H.active_vars}]
    for _ in range(1, k):
        signs = 2 * rng.integers(0, 2, size=H.num_variables) - 1
        gauges.append({v: int(s) for v, s in zip(H.active_vars, signs)})
    return gauges


def srt_sample(
    H: IsingHamiltonian,
    cfg: SamplerConfig,
    backend: Callable | str = "sa",
    **kwargs,
) -> SampleSet:
    """Split ``cfg.reads`` evenly over ``cfg.num_gauges`` spin-reversal transforms.

    Samples are mapped back to the original frame and concatenated in gauge
    order. Gauge ``k`` uses read streams tagged ``k``, so a single gauge
    reproduces the plain backend exactly.
    """
    _check_sampleable(H)
    k = cfg.num_gauges
    if k < 1:
        raise ContractError("srt_sample needs num_gauges >= 1")
    if cfg.reads % k:
        raise ContractError(f"num_gauges={k} must divide reads={cfg.reads}")
    backend = get_backend(backend) if isinstance(backend, str) else backend
    per_gauge = replace(cfg, reads=cfg.reads // k, num_gauges=0)
    parts = []
    for idx, g in enumerate(draw_gauges(H, cfg.seed, k)):
        Hg = apply_srt(H, g)
        if backend is sa_sample:
            S = sa_sample(Hg, per_gauge, gauge=idx, **kwargs)
        else:
            S = backend(Hg, replace(per_gauge, seed=_gauge_seed(cfg.seed, idx)), **kwargs)
        parts.append(unapply_srt(S, g).spins)
    spins = np.concatenate(parts)
    return SampleSet.from_spins(H, spins, {"backend": "srt", "num_gauges": k})


def _gauge_seed(seed, idx):
    if idx == 0:
        return int(seed)
    ss = np.random.SeedSequence(int(seed), spawn_key=(2**32 + 1, idx))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


BACKENDS: dict[str, Callable] = {"sa": sa_sample, "exact": exact_sampler}


def get_backend(name: str) -> Callable:
    try:
        return BACKENDS[name]
    except KeyError:
        raise ContractError(f"unknown sampler backend {name!r}; choose from {sorted(BACKENDS)}") from None


def sample(H: IsingHamiltonian, cfg: SamplerConfig, backend: str = "sa", **kwargs) -> SampleSet:
    """Sampler contract entry point.

    Routes through :func:`srt_sample` when ``cfg.num_gauges > 0``.
    """
    if cfg.num_gauges > 0:
        return srt_sample(H, cfg, backend, **kwargs)
    fn = get_backend(backend)
    if fn is exact_sampler:
        return exact_sampler(H, cfg)
    return fn(H, cfg, **kwargs)
