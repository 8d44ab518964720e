"""scikit-learn style wrappers.

The solvers treat a Hamiltonian as the data: ``fit(H)`` solves it and
stores ``assignment_``, ``spins_`` and ``energy_``. Hyperparameters follow
the usual ``get_params`` / ``set_params`` / ``clone`` protocol.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from qaga.greedy import QagaConfig, qaga_run, solve_compare
from qaga.ising import IsingHamiltonian, check_hamiltonian, energy
from qaga.samplers import SamplerConfig, sample

__all__ = ["as_hamiltonian", "QAGASolver", "BaselineSolver", "AnnealingSampler"]


def as_hamiltonian(X) -> IsingHamiltonian:
    """Coerce ``X`` to a validated :class:`IsingHamiltonian`.

    Accepts a Hamiltonian, a ``{"h": ..., "J": ..., "offset": ...}`` mapping,
    or a ``(h, J)`` pair of a field vector and a square coupling matrix (only
    the upper triangle of ``J`` is read).
    """
    if isinstance(X, IsingHamiltonian):
        return check_hamiltonian(X)
    if isinstance(X, dict):
        return check_hamiltonian(
            IsingHamiltonian(X.get("h"), X.get("J"), X.get("offset", 0.0), X.get("active_vars"))
        )
    if isinstance(X, (tuple, list)) and len(X) == 2:
        h = np.asarray(X[0], dtype=float)
        J = np.asarray(X[1], dtype=float)
        n = h.shape[0]
        if h.ndim != 1 or J.shape != (n, n):
            raise ValueError(f"expected h of shape (n,) and J of shape (n, n), got {h.shape}, {J.shape}")
        if not (np.all(np.isfinite(h)) and np.all(np.isfinite(J))):
            raise ValueError("coefficients must be finite")
        iu, ju = np.nonzero(np.triu(J, k=1))
        couplers = {(int(i), int(j)): float(J[i, j]) for i, j in zip(iu, ju)}
        return check_hamiltonian(
            IsingHamiltonian({i: float(v) for i, v in enumerate(h)}, couplers, active_vars=range(n))
        )
    raise TypeError(f"cannot interpret {type(X).__name__} as an Ising Hamiltonian")


class _SolverMixin:
    def _sampler_config(self):
        return SamplerConfig(
            reads=self.reads,
            seed=self.seed,
            sweeps=self.sweeps,
            beta0=self.beta0,
            beta1=self.beta1,
            num_gauges=self.num_gauges,
        )

    def _store(self, H, z, e):
        self.hamiltonian_ = H
        self.assignment_ = dict(z)
        self.spins_ = np.array([z[v] for v in H.active_vars], dtype=np.int8)
        self.energy_ = float(e)
        return self

    def predict(self, X=None):
        """Spin vector of the solution, in ascending variable order.

        With ``X`` the solver is refitted on ``X`` first.
        """
        if X is not None:
            self.fit(X)
        check_is_fitted(self, "spins_")
        return self.spins_

    def fit_predict(self, X, y=None):
        return self.fit(X).spins_

    def score(self, X, y=None):
        """Negative energy of the fitted assignment on ``X`` (higher is better)."""
        check_is_fitted(self, "assignment_")
        return -energy(as_hamiltonian(X), self.assignment_)


class QAGASolver(_SolverMixin, BaseEstimator):
    """Greedy sample-fix-contract solver.

    Parameters
    ----------
    theta : float, default=0.0
        Uncertainty threshold in ``[0, 0.5)``. A variable is fixed when the
        fraction-based uncertainty of its samples is at most ``theta``.
    backend : {"sa", "exact"}
    reads, seed, sweeps, beta0, beta1, num_gauges
        Sampler settings used at every stage.
    max_stages : int, optional
        Cap on sampler calls; defaults to the number of variables.

    Attributes
    ----------
    assignment_ : dict
    spins_ : ndarray of int8
    energy_ : float
    trace_ : QagaTrace
    """

    def __init__(
        self,
        theta=0.0,
        backend="sa",
        reads=1000,
        seed=0,
        sweeps=None,
        beta0=0.1,
        beta1=10.0,
        num_gauges=0,
        max_stages=None,
    ):
        self.theta = theta
        self.backend = backend
        self.reads = reads
        self.seed = seed
        self.sweeps = sweeps
        self.beta0 = beta0
        self.beta1 = beta1
        self.num_gauges = num_gauges
        self.max_stages = max_stages

    def fit(self, X, y=None):
        H = as_hamiltonian(X)
        cfg = QagaConfig(self.theta, self._sampler_config(), self.backend, self.max_stages)
        z, trace = qaga_run(H, cfg)
        self.trace_ = trace
        return self._store(H, z, trace.final_energy)


class BaselineSolver(_SolverMixin, BaseEstimator):
    """Best-of-reads (``method="QA"``) or MQC-post-processed (``method="MQC"``) sampling."""

    def __init__(
        self,
        method="QA",
        backend="sa",
        reads=1000,
        seed=0,
        sweeps=None,
        beta0=0.1,
        beta1=10.0,
        num_gauges=10,
    ):
        self.method = method
        self.backend = backend
        self.reads = reads
        self.seed = seed
        self.sweeps = sweeps
        self.beta0 = beta0
        self.beta1 = beta1
        self.num_gauges = num_gauges

    def fit(self, X, y=None):
        if self.method not in ("QA", "MQC"):
            raise ValueError(f"method must be 'QA' or 'MQC', got {self.method!r}")
        H = as_hamiltonian(X)
        res = solve_compare(H, [self.method], sampler_cfg=self._sampler_config(), backend=self.backend)
        r = res[self.method]
        return self._store(H, r.assignment, r.energy)


class AnnealingSampler(_SolverMixin, BaseEstimator):
    """Sampler as an estimator: ``fit(H)`` draws reads and keeps the sample set in ``samples_``."""

    def __init__(self, backend="sa", reads=1000, seed=0, sweeps=None, beta0=0.1, beta1=10.0, num_gauges=0):
        self.backend = backend
        self.reads = reads
        self.seed = seed
        self.sweeps = sweeps
        self.beta0 = beta0
        self.beta1 = beta1
        self.num_gauges = num_gauges

    def fit(self, X, y=None):
        H = as_hamiltonian(X)
        self.samples_ = sample(H, self._sampler_config(), self.backend)
        z, e = self.samples_.lowest()
        return self._store(H, z, e)

    def transform(self, X=None):
        """The drawn spins, one row per read."""
        if X is not None:
            self.fit(X)
        check_is_fitted(self, "samples_")
        return np.asarray(self.samples_.spins)
