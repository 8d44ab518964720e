import itertools
import sys

import numpy as np
import pytest

from qaga.ising import IsingHamiltonian


def naive_energy(H, z):
    """Direct evaluation of offset + sum h_i z_i + sum J_ij z_i z_j in plain Python."""
    e = H.offset
    for i, v in H.h.items():
        e += v * z[i]
    for (i, j), v in H.J.items():
        e += v * z[i] * z[j]
    return e


def brute_force(H):
    """All (assignment, energy) pairs via itertools.product over (-1, +1)."""
    vars_ = H.active_vars
    out = []
    for spins in itertools.product((-1, 1), repeat=len(vars_)):
        z = dict(zip(vars_, spins))
        out.append((z, naive_energy(H, z)))
    return out


def random_hamiltonian(rng, n, density=0.5, dist="normal", offset=0.0, labels=None):
    labels = list(range(n)) if labels is None else list(labels)

    def draw():
        if dist == "binary":
            return float(rng.choice([-1.0, 1.0]))
        if dist == "uniform":
            return float(rng.uniform(-1, 1))
        if dist == "int":
            return float(rng.integers(-3, 4))
        return float(rng.standard_normal())

    h = {v: draw() for v in labels if rng.random() < 0.9}
    J = {}
    for a in range(n):
        for b in range(a + 1, n):
            if rng.random() < density:
                J[(labels[a], labels[b])] = draw()
    return IsingHamiltonian(h, J, offset=offset, active_vars=labels)


def random_assignment(rng, variables):
    return {v: int(rng.choice([-1, 1])) for v in variables}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    if acceptance is None or not acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(acceptance.RESULTS):
        terminalreporter.write_line(acceptance.RESULTS[k])
