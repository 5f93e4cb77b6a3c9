"""Zero-delay bistochastic anonymization of data streams."""
from .errors import BistreamError
from .events import OutputEvent
from .matrix import (
    EntropyReport,
    TransitionMatrix,
    TTransform,
    compose_t_transforms,
    from_dense,
    identity,
    perfect_matrix,
)
from .multi import AttributeSpec, MultiStream, aggregate_beta
from .rng import Rng, derive, new_rng
from .stream import NumericStream, Policy, StreamTuple, init_stream, t_transform_values

__version__ = "0.1.0"
