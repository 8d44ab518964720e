import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import naive_energy, random_assignment, random_hamiltonian
from qaga.exceptions import ContractError, DomainMismatchError
from qaga.ising import (
    IsingHamiltonian,
    check_hamiltonian,
    contract,
    contract_many,
    energy,
    validate,
)


@pytest.fixture
def pair():
    return IsingHamiltonian({0: 1, 1: -1}, {(0, 1): 2})


def test_energy_of_empty_hamiltonian():
    assert energy(IsingHamiltonian(), {}) == 0.0


@pytest.mark.parametrize("z, expected", [((1, 1), 2.0), ((-1, 1), -4.0), ((1, -1), 0.0), ((-1, -1), 2.0)])
def test_energy_two_spins(pair, z, expected):
    assert energy(pair, dict(enumerate(z))) == expected


def test_energy_includes_offset():
    H = IsingHamiltonian({0: 1.0}, offset=2.5)
    assert energy(H, {0: -1}) == 1.5


def test_energy_domain_mismatch_names_indices(pair):
    with pytest.raises(DomainMismatchError) as info:
        energy(pair, {0: 1, 5: 1})
    assert info.value.missing == (1,)
    assert info.value.extra == (5,)


def test_energy_rejects_non_spin_values(pair):
    with pytest.raises(ContractError):
        energy(pair, {0: 1, 1: 0})


def test_energy_matches_naive_sum(rng):
    for _ in range(50):
        H = random_hamiltonian(rng, 9, offset=rng.normal())
        z = random_assignment(rng, H.active_vars)
        assert energy(H, z) == pytest.approx(naive_energy(H, z), abs=1e-12)


def test_coupler_orientation_does_not_matter(rng):
    H1 = IsingHamiltonian({0: 0.5}, {(0, 1): 1.5, (2, 1): -0.7})
    H2 = IsingHamiltonian({0: 0.5}, {(1, 0): 1.5, (1, 2): -0.7})
    assert H1 == H2
    for spins in itertools.product((-1, 1), repeat=3):
        z = dict(enumerate(spins))
        assert energy(H1, z) == energy(H2, z)


def test_duplicate_coupler_is_an_error():
    with pytest.raises(ContractError):
        IsingHamiltonian({}, {(0, 1): 1.0, (1, 0): 2.0})


def test_missing_field_defaults_to_zero():
    H = IsingHamiltonian({}, {(0, 1): -1.0}, active_vars=[0, 1, 2])
    assert energy(H, {0: 1, 1: 1, 2: -1}) == -1.0


def test_hamiltonian_is_read_only(pair):
    with pytest.raises(TypeError):
        pair.h[0] = 3.0
    with pytest.raises(TypeError):
        pair.J[(0, 1)] = 3.0


class TestValidate:
    def test_well_formed(self, pair):
        assert validate(pair) == []

    def test_self_coupler(self):
        H = IsingHamiltonian({}, {(3, 3): 1.0})
        assert "self-coupler at 3" in validate(H)

    def test_field_outside_active_vars(self):
        H = IsingHamiltonian({7: 1.0, 0: 1.0}, {}, active_vars=[0, 1])
        (violation,) = validate(H)
        assert "7" in violation

    def test_reports_every_violation(self):
        H = IsingHamiltonian({7: 1.0}, {(3, 3): 1.0, (0, 9): 1.0}, active_vars=[0, 3])
        assert len(validate(H)) == 3

    def test_check_raises(self):
        with pytest.raises(ContractError):
            check_hamiltonian(IsingHamiltonian({}, {(3, 3): 1.0}))


class TestContract:
    def test_fix_up(self, pair):
        out = contract(pair, 0, 1)
        assert dict(out.h) == {1: 1.0}
        assert dict(out.J) == {}
        assert out.offset == 1.0
        assert out.active_vars == (1,)

    def test_fix_down(self, pair):
        out = contract(pair, 0, -1)
        assert dict(out.h) == {1: -3.0}
        assert out.offset == -1.0

    def test_isolated_variable(self):
        out = contract(IsingHamiltonian({0: 5.0}), 0, 1)
        assert out.active_vars == ()
        assert out.offset == 5.0
        assert energy(out, {}) == 5.0

    def test_input_unchanged(self, pair):
        before = (dict(pair.h), dict(pair.J), pair.offset)
        contract(pair, 1, -1)
        assert (dict(pair.h), dict(pair.J), pair.offset) == before

    def test_inactive_index(self, pair):
        with pytest.raises(IndexError):
            contract(pair, 4, 1)

    @pytest.mark.parametrize("v", [0, 2, -2])
    def test_bad_spin(self, pair, v):
        with pytest.raises(ContractError):
            contract(pair, 0, v)

    def test_sizes(self, rng):
        for _ in range(30):
            H = random_hamiltonian(rng, 7)
            i = int(rng.choice(H.active_vars))
            out = contract(H, i, 1)
            assert len(out) == len(H) - 1
            assert len(out.J) <= len(H.J)


def test_contraction_energy_identity(rng):
    for _ in range(200):
        n = int(rng.integers(1, 9))
        H = random_hamiltonian(rng, n, density=rng.random(), offset=rng.normal())
        i = int(rng.choice(H.active_vars))
        v = int(rng.choice([-1, 1]))
        Hc = contract(H, i, v)
        for _ in range(5):
            z = random_assignment(rng, Hc.active_vars)
            assert naive_energy(H, {**z, i: v}) == pytest.approx(energy(Hc, z), abs=1e-9)


class TestContractMany:
    def test_empty_fixes(self, pair):
        assert contract_many(pair, {}) is pair

    def test_fix_everything_gives_root_energy(self, rng):
        for _ in range(20):
            H = random_hamiltonian(rng, 6, offset=rng.normal())
            z = random_assignment(rng, H.active_vars)
            out = contract_many(H, z)
            assert out.active_vars == ()
            assert out.offset == pytest.approx(naive_energy(H, z), abs=1e-9)

    def test_chain_orders_agree(self):
        # dyadic coefficients, so every fold is exact whatever the order
        H = IsingHamiltonian({0: 0.25, 1: -1.5, 2: 0.75}, {(0, 1): 1.125, (1, 2): -0.5})
        a = contract(contract(H, 0, 1), 1, -1)
        b = contract(contract(H, 1, -1), 0, 1)
        c = contract_many(H, {1: -1, 0: 1})
        assert a == b == c

    def test_matches_sequential_contracts(self, rng):
        for _ in range(50):
            H = random_hamiltonian(rng, 7, offset=rng.normal())
            k = int(rng.integers(1, 7))
            chosen = [int(x) for x in rng.permutation(H.active_vars)[:k]]
            fixes = {i: int(rng.choice([-1, 1])) for i in chosen}
            seq = H
            for i in chosen:
                seq = contract(seq, i, fixes[i])
            batch = contract_many(H, fixes)
            assert seq.active_vars == batch.active_vars
            assert set(seq.J) == set(batch.J)
            assert seq.offset == pytest.approx(batch.offset, abs=1e-9)
            for key in set(seq.h) | set(batch.h):
                assert seq.h.get(key, 0.0) == pytest.approx(batch.h.get(key, 0.0), abs=1e-9)

    def test_duplicate_free_order_independence(self, rng):
        H = random_hamiltonian(rng, 8)
        fixes = {i: int(rng.choice([-1, 1])) for i in (5, 1, 3, 6)}
        reference = contract_many(H, fixes)
        for perm in itertools.permutations(fixes):
            assert contract_many(H, {i: fixes[i] for i in perm}) == reference


@settings(max_examples=60, deadline=None)
@given(
    st.integers(1, 6).flatmap(
        lambda n: st.tuples(
            st.just(n),
            st.lists(st.integers(-4, 4), min_size=n, max_size=n),
            st.lists(st.integers(-4, 4), min_size=n * (n - 1) // 2, max_size=n * (n - 1) // 2),
            st.lists(st.sampled_from([-1, 1]), min_size=n, max_size=n),
        )
    )
)
def test_contraction_identity_exact_on_integers(case):
    # integer coefficients: the identity holds exactly
    n, hs, js, spins = case
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    H = IsingHamiltonian(dict(enumerate(hs)), dict(zip(pairs, js)), active_vars=range(n))
    z = dict(enumerate(spins))
    Hc = contract(H, 0, z[0])
    rest = {k: v for k, v in z.items() if k != 0}
    assert energy(Hc, rest) == energy(H, z)


def test_energies_vectorized_matches_scalar(rng):
    H = random_hamiltonian(rng, 10)
    spins = rng.choice(np.array([-1, 1], dtype=np.int8), size=(20, 10))
    batch = H.energies(spins)
    for row, e in zip(spins, batch):
        assert energy(H, H.from_vector(row)) == e
