"""Sparse Ising Hamiltonians, energy evaluation and variable contraction.

A Hamiltonian holds local fields ``h``, couplers ``J`` keyed by the sorted
index pair, and a constant ``offset`` that absorbs the energy of variables
that have been fixed and contracted away. Spin assignments are plain
mappings ``{index: +1 or -1}``.
"""
from __future__ import annotations

from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Mapping

import numpy as np

from qaga import _kernels
from qaga.exceptions import ContractError, DomainMismatchError, InvalidHamiltonianError

__all__ = [
    "IsingHamiltonian",
    "energy",
    "validate",
    "check_hamiltonian",
    "check_assignment",
    "contract",
    "contract_many",
]


def _normalize_couplers(J):
    out = {}
    for key, value in J.items():
        i, j = key
        i, j = int(i), int(j)
        norm = (i, j) if i <= j else (j, i)
        if norm in out:
            raise ContractError(f"coupler {norm} given more than once")
        out[norm] = float(value)
    return out


class IsingHamiltonian:
    """Immutable sparse Ising model ``offset + sum h_i z_i + sum J_ij z_i z_j``.

    Parameters
    ----------
    h : mapping of int to float
        Local fields. Active variables without an entry have field 0.
    J : mapping of (int, int) to float
        Couplers. ``(i, j)`` and ``(j, i)`` name the same coupler; supplying
        both is an error.
    offset : float
        Constant energy term.
    active_vars : iterable of int, optional
        Variable set. Defaults to every index mentioned in ``h`` or ``J``.

    Invariants (self-couplers, indices outside ``active_vars``) are not
    enforced here; see :func:`validate`.
    """

    def __init__(self, h=None, J=None, offset=0.0, active_vars: Iterable[int] | None = None):
        h = {int(i): float(v) for i, v in (h or {}).items()}
        J = _normalize_couplers(J or {})
        if active_vars is None:
            idx = set(h)
            for i, j in J:
                idx.update((i, j))
            active_vars = idx
        self._active = tuple(sorted({int(i) for i in active_vars}))
        self._h = dict(sorted(h.items()))
        self._J = dict(sorted(J.items()))
        self._offset = float(offset)

    @property
    def active_vars(self) -> tuple[int, ...]:
        return self._active

    @property
    def h(self) -> Mapping[int, float]:
        return MappingProxyType(self._h)

    @property
    def J(self) -> Mapping[tuple[int, int], float]:
        return MappingProxyType(self._J)

    @property
    def offset(self) -> float:
        return self._offset

    @property
    def num_variables(self) -> int:
        return len(self._active)

    def __len__(self):
        return len(self._active)

    def __eq__(self, other):
        if not isinstance(other, IsingHamiltonian):
            return NotImplemented
        return (
            self._active == other._active
            and self._h == other._h
            and self._J == other._J
            and self._offset == other._offset
        )

    def __hash__(self):
        return hash((self._active, tuple(self._h.items()), tuple(self._J.items()), self._offset))

    def __repr__(self):
        return (
            f"IsingHamiltonian(n={len(self._active)}, fields={len(self._h)}, "
            f"couplers={len(self._J)}, offset={self._offset!r})"
        )

    # Array views used by the samplers and vectorized energy code. Positions
    # follow ``active_vars`` order.

    @cached_property
    def position(self) -> dict[int, int]:
        return {v: p for p, v in enumerate(self._active)}

    @cached_property
    def linear(self) -> np.ndarray:
        vec = np.zeros(len(self._active))
        pos = self.position
        for i, v in self._h.items():
            vec[pos[i]] = v
        return vec

    @cached_property
    def quadratic(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Coupler arrays ``(rows, cols, values)`` as positions, sorted by key."""
        pos = self.position
        rows = np.array([pos[i] for i, _ in self._J], dtype=np.int64)
        cols = np.array([pos[j] for _, j in self._J], dtype=np.int64)
        vals = np.array(list(self._J.values()), dtype=np.float64)
        return rows, cols, vals

    @cached_property
    def adjacency(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """CSR neighbour structure ``(indptr, neighbours, weights)`` over positions."""
        n = len(self._active)
        rows, cols, vals = self.quadratic
        src = np.concatenate([rows, cols])
        dst = np.concatenate([cols, rows])
        wts = np.concatenate([vals, vals])
        order = np.lexsort((dst, src))
        src, dst, wts = src[order], dst[order], wts[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
        return indptr, dst.astype(np.int64), wts

    @cached_property
    def neighbors(self) -> dict[int, dict[int, float]]:
        nbrs: dict[int, dict[int, float]] = {v: {} for v in self._active}
        for (i, j), v in self._J.items():
            nbrs.setdefault(i, {})[j] = v
            nbrs.setdefault(j, {})[i] = v
        return nbrs

    def energies(self, spins) -> np.ndarray:
        """Energies of the rows of ``spins`` (shape ``(m, n)``, columns in ``active_vars`` order)."""
        spins = np.ascontiguousarray(spins, dtype=np.int8)
        if spins.ndim != 2 or spins.shape[1] != len(self._active):
            raise ContractError(
                f"spin matrix must have shape (m, {len(self._active)}), got {spins.shape}"
            )
        rows, cols, vals = self.quadratic
        return _kernels.batch_energy(spins, self.linear, rows, cols, vals, self._offset)

    def to_vector(self, z: Mapping[int, int]) -> np.ndarray:
        """Spin mapping as an int8 vector in ``active_vars`` order."""
        check_assignment(self, z)
        return np.array([z[v] for v in self._active], dtype=np.int8)

    def from_vector(self, vec) -> dict[int, int]:
        return {v: int(s) for v, s in zip(self._active, vec)}


def validate(H: IsingHamiltonian) -> list[str]:
    """Return every invariant violation of ``H``; an empty list means valid."""
    violations = []
    active = set(H.active_vars)
    for i in H.h:
        if i not in active:
            violations.append(f"local field index {i} not in active_vars")
    for i, j in H.J:
        if i == j:
            violations.append(f"self-coupler at {i}")
        for k in (i, j) if i != j else (i,):
            if k not in active:
                violations.append(f"coupler ({i}, {j}) index {k} not in active_vars")
    for name, values in (("h", H.h.values()), ("J", H.J.values()), ("offset", [H.offset])):
        if not all(np.isfinite(v) for v in values):
            violations.append(f"non-finite value in {name}")
    return violations


def check_hamiltonian(H) -> IsingHamiltonian:
    if not isinstance(H, IsingHamiltonian):
        raise TypeError(f"expected IsingHamiltonian, got {type(H).__name__}")
    violations = validate(H)
    if violations:
        raise InvalidHamiltonianError(violations)
    return H


def check_assignment(H: IsingHamiltonian, z: Mapping[int, int], what="assignment"):
    keys = set(z)
    active = set(H.active_vars)
    if keys != active:
        raise DomainMismatchError(active - keys, keys - active, what=what)
    bad = [i for i, s in z.items() if s not in (-1, 1)]
    if bad:
        raise ContractError(f"{what} has non-spin values at {sorted(bad)}")


def energy(H: IsingHamiltonian, z: Mapping[int, int]) -> float:
    """Energy of the complete assignment ``z``, including ``H.offset``."""
    vec = H.to_vector(z)
    return float(H.energies(vec[None, :])[0])


def contract(H: IsingHamiltonian, i: int, v: int) -> IsingHamiltonian:
    """Fix variable ``i`` to spin ``v`` and eliminate it.

    Couplers touching ``i`` fold into the neighbours' fields, and ``v * h_i``
    moves into the offset, so energies stay comparable with ``H``.
    """
    if i not in H.position:
        raise IndexError(f"variable {i} is not active")
    if v not in (-1, 1):
        raise ContractError(f"spin value must be -1 or +1, got {v!r}")
    return contract_many(H, {i: v})


def contract_many(H: IsingHamiltonian, fixes: Mapping[int, int]) -> IsingHamiltonian:
    """Contract several variables at once.

    The result does not depend on the iteration order of ``fixes``: terms
    are accumulated in sorted key order.
    """
    if not fixes:
        return H
    pos = H.position
    for i, v in fixes.items():
        if i not in pos:
            raise IndexError(f"variable {i} is not active")
        if v not in (-1, 1):
            raise ContractError(f"spin value for {i} must be -1 or +1, got {v!r}")
    fixed = {int(i): int(v) for i, v in sorted(fixes.items())}

    offset = H.offset
    h = {}
    for i, hv in H.h.items():
        if i in fixed:
            offset += fixed[i] * hv
        else:
            h[i] = hv
    J = {}
    for (i, j), jv in H.J.items():
        fi, fj = i in fixed, j in fixed
        if fi and fj:
            offset += fixed[i] * fixed[j] * jv
        elif fi:
            h[j] = h.get(j, 0.0) + fixed[i] * jv
        elif fj:
            h[i] = h.get(i, 0.0) + fixed[j] * jv
        else:
            J[(i, j)] = jv
    active = [k for k in H.active_vars if k not in fixed]
    return IsingHamiltonian(h, J, offset=offset, active_vars=active)
