"""Tensor-network quantum circuit simulation with exact, MPS and noisy backends."""

from .circuit import Circuit, Gate, PauliString, parse, parse_observable
from .errors import (
    AdjacencyError,
    DimensionError,
    InfeasibleError,
    InternalConsistencyError,
    NoiseModelError,
    ParseError,
    ResourceError,
    SamplingError,
    TnsimError,
)
from .executor import contract_network, execute, expectation_sliced
from .mps import MPSState, simulate_mps
from .network import OPEN, TensorNetwork
from .noise import KrausChannel, NoiseModel, load_noise_model
from .planner import ContractionPlan, plan
from .pmps import PMPSState, simulate_pmps
from .sampler import histogram, sample
from .simulator import PlanCache, Simulator, SimulatorConfig
from .tensor import Tensor

__version__ = "0.1.0"

__all__ = [
    "AdjacencyError",
    "Circuit",
    "ContractionPlan",
    "DimensionError",
    "Gate",
    "InfeasibleError",
    "InternalConsistencyError",
    "KrausChannel",
    "MPSState",
    "NoiseModel",
    "NoiseModelError",
    "OPEN",
    "PMPSState",
    "ParseError",
    "PauliString",
    "PlanCache",
    "ResourceError",
    "SamplingError",
    "Simulator",
    "SimulatorConfig",
    "Tensor",
    "TensorNetwork",
    "TnsimError",
    "contract_network",
    "execute",
    "expectation_sliced",
    "histogram",
    "load_noise_model",
    "parse",
    "parse_observable",
    "plan",
    "sample",
    "simulate_mps",
    "simulate_pmps",
]
