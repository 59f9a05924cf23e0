"""
dyncrowd Core Package

Shared domain types, configuration, errors, events and the ambient services
(logging, resource measurement) every other module builds on.
"""

from .config import EngineConfig, read_config, validate_config, write_config
from .events import EngineEvent, EventKind, EventStats, replay_memberships
from .exceptions import (
    ClusteringError,
    ConfigurationError,
    DynCrowdError,
    EngineError,
    FrameOrderError,
    InsufficientMembersError,
    InvariantViolation,
    MetricsError,
    MotFormatError,
    PredictionError,
    RunDirectoryError,
    SceneSpecError,
)
from .types import (
    CentroidSample,
    CentroidTrack,
    ClusterState,
    ClusterStatus,
    FrameObservations,
    ObservationStream,
    PedestrianState,
    Point,
)

__all__ = [
    'CentroidSample',
    'CentroidTrack',
    'ClusterState',
    'ClusterStatus',
    'ClusteringError',
    'ConfigurationError',
    'DynCrowdError',
    'EngineConfig',
    'EngineError',
    'EngineEvent',
    'EventKind',
    'EventStats',
    'FrameObservations',
    'FrameOrderError',
    'ObservationStream',
    'InsufficientMembersError',
    'InvariantViolation',
    'MetricsError',
    'MotFormatError',
    'PedestrianState',
    'Point',
    'PredictionError',
    'RunDirectoryError',
    'SceneSpecError',
    'read_config',
    'replay_memberships',
    'validate_config',
    'write_config',
]
