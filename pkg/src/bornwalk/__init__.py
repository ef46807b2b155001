"""bornwalk: detector weights of wave packets and absorbing martingale walks.

The pipeline mirrors a single-particle detection experiment: a detector
array partitions the plane, a Gaussian-packet wave function assigns each
region a weight (the normalized |psi|^2 mass above its cell), and an
absorbing martingale random walk on the probability simplex turns those
weights into one realized detector click per run. Exact lattice-chain
oracles and block-operator consistency checks validate both halves.
"""

from .errors import (
    BornwalkError,
    ConfigInvalid,
    DegenerateExpected,
    DegenerateState,
    DimensionMismatch,
    EigenFailure,
    NoActivePair,
    NonFiniteResult,
    NotHermitian,
    SizeExceeded,
    SolverFailure,
    TooManyUnabsorbed,
)
from .geometry import Cell, DetectorArray, region_index, validate
from .simplex import SimplexPoint
from .wavepacket import (
    GaussianPacket,
    QuadratureSpec,
    WaveFunction,
    born_weights,
    born_weights_erf,
    evaluate,
    norm_squared,
    norm_squared_erf,
)
from .blockop import (
    BlockHamiltonian,
    Dims,
    JointState,
    assemble,
    check_invariance,
    evolve,
    product_state,
    reduced_particle_state,
    simplex_map,
    uniform_block,
    verify_form,
)
from .simplexwalk import (
    DirichletMix,
    EnsembleReport,
    PairTransfer,
    WalkRun,
    ensemble,
    is_absorbed,
    run_walk,
    step,
)
from .oracle import LatticeChain, gamblers_ruin, lattice_absorption
from .harness import Scenario, ScenarioReport, chi_square, run_scenario, two_slit

__version__ = "0.1.0"

__all__ = [
    "BornwalkError",
    "ConfigInvalid",
    "DegenerateExpected",
    "DegenerateState",
    "DimensionMismatch",
    "EigenFailure",
    "NoActivePair",
    "NonFiniteResult",
    "NotHermitian",
    "SizeExceeded",
    "SolverFailure",
    "TooManyUnabsorbed",
    "Cell",
    "DetectorArray",
    "region_index",
    "validate",
    "SimplexPoint",
    "GaussianPacket",
    "QuadratureSpec",
    "WaveFunction",
    "born_weights",
    "born_weights_erf",
    "evaluate",
    "norm_squared",
    "norm_squared_erf",
    "BlockHamiltonian",
    "Dims",
    "JointState",
    "assemble",
    "check_invariance",
    "evolve",
    "product_state",
    "reduced_particle_state",
    "simplex_map",
    "uniform_block",
    "verify_form",
    "DirichletMix",
    "EnsembleReport",
    "PairTransfer",
    "WalkRun",
    "ensemble",
    "is_absorbed",
    "run_walk",
    "step",
    "LatticeChain",
    "gamblers_ruin",
    "lattice_absorption",
    "Scenario",
    "ScenarioReport",
    "chi_square",
    "run_scenario",
    "two_slit",
]
