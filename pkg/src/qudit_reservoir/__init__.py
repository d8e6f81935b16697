"""Design qudit gates through a fixed random unitary reservoir."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    DivergenceError,
    InvalidConfigError,
    InvalidDimensionError,
    InvalidModeError,
    ParseError,
    ReservoirError,
    ValidationError,
)
from .gates import (  # noqa: E402
    GateSpec,
    TargetEmbedding,
    achieved_gate,
    embed_target,
    gate_by_name,
    gate_x,
    gate_x_squared,
    gate_z,
    projector,
    rig_input,
)
from .inference import Dataset, TrainConfig, TrainRun, cost, cost_gradient, generate_dataset, train, verify_gate  # noqa: E402
from .linalg import RandomSource, dagger, frobenius_distance, haar_unitary, matmul, unitarity_defect  # noqa: E402
from .rnn import OdeConfig, RnnProblem, SolveResult, error_functional, rnn_rhs, solve  # noqa: E402
from .slm import ModulatorConstraint, constrained_train, encode_input, retract_amplitude, retract_phase  # noqa: E402
