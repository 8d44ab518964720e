"""Greedy Ising minimization driven by sampler statistics."""
from qaga.estimators import AnnealingSampler, BaselineSolver, QAGASolver, as_hamiltonian
from qaga.greedy import QagaConfig, QagaTrace, majority_sign, qaga_run, solve_compare, uncertainty
from qaga.ising import IsingHamiltonian, contract, contract_many, energy, validate
from qaga.postprocess import disagreement_components, mqc, mqc_pair, sqc
from qaga.samplers import (
    SampleSet,
    SamplerConfig,
    apply_srt,
    exact_ground_state,
    exact_sampler,
    sa_sample,
    sample,
    srt_sample,
    unapply_srt,
)

__version__ = "0.1.0"
