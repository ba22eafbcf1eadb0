"""Low-rank matrix recovery from randomly sampled operator-basis coefficients.

The package provides dense Hermitian matrix kernels, operator bases
(Pauli tensor words, Hermitianized standard basis, custom), seeded
coefficient sampling, a nuclear-norm recovery solver, the golfing
construction of dual certificates, analytic tail bounds with Monte Carlo
validation, and stabilizer-group lower-bound constructions.
"""

from .errors import InvalidInput, OutOfWindow
from .matcore import (
    Spectrum,
    TangentSpace,
    as_hermitian,
    eig_hermitian,
    matrix_sign,
    norm,
    polar_unitary_part,
    tangent_basis,
    tangent_project,
    tangent_space,
    tilde_embed,
)
from .bases import (
    CoherenceReport,
    OperatorBasis,
    coherence,
    hermitian_standard_basis,
    mu_overlap,
    pauli_basis,
    verify_basis,
)
from .sampling import BatchPlan, SampleSet, apply_R, draw_omega, split_batches, stream_rng
from .solver import (
    RecoveryProblem,
    RecoveryResult,
    SolverConfig,
    recover,
    recover_nonhermitian,
    uniqueness_probe,
)
from .golfing import (
    Certificate,
    GolfingConfig,
    run_golfing,
    schedule_params,
    tangent_deviation_norm,
    verify_certificate,
)
from .concentration import TailBoundQuery, TailReport, eval_tail_bound, monte_carlo_tail
from . import stabilizer
from . import harness

__all__ = [
    "InvalidInput",
    "OutOfWindow",
    "Spectrum",
    "TangentSpace",
    "as_hermitian",
    "eig_hermitian",
    "matrix_sign",
    "norm",
    "polar_unitary_part",
    "tangent_basis",
    "tangent_project",
    "tangent_space",
    "tilde_embed",
    "CoherenceReport",
    "OperatorBasis",
    "coherence",
    "hermitian_standard_basis",
    "mu_overlap",
    "pauli_basis",
    "verify_basis",
    "BatchPlan",
    "SampleSet",
    "apply_R",
    "draw_omega",
    "split_batches",
    "stream_rng",
    "RecoveryProblem",
    "RecoveryResult",
    "SolverConfig",
    "recover",
    "recover_nonhermitian",
    "uniqueness_probe",
    "Certificate",
    "GolfingConfig",
    "run_golfing",
    "schedule_params",
    "tangent_deviation_norm",
    "verify_certificate",
    "TailBoundQuery",
    "TailReport",
    "eval_tail_bound",
    "monte_carlo_tail",
    "stabilizer",
    "harness",
]
