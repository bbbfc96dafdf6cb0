from .core import BACKOFF_CAP_S, JobOutcome, Scheduler, SchedulerConfig
from .estimator import FIXED_OVERHEAD_NS, ResourceEstimator
from .policy import (
    Assignment,
    SchedulerView,
    blocked_by_reservation,
    comparator_key,
    eta_seconds,
    next_decision,
)
from .records import (
    DEFAULT_MAX_RETRIES,
    HybridConfig,
    JobDescriptor,
    JobItem,
    JobRecord,
    JobStatus,
    Reservation,
    Session,
    WorkerInfo,
)
from .spsa import SpsaOutcome, evaluation_seed, run_spsa

__all__ = [
    "BACKOFF_CAP_S",
    "JobOutcome",
    "Scheduler",
    "SchedulerConfig",
    "FIXED_OVERHEAD_NS",
    "ResourceEstimator",
    "Assignment",
    "SchedulerView",
    "blocked_by_reservation",
    "comparator_key",
    "eta_seconds",
    "next_decision",
    "DEFAULT_MAX_RETRIES",
    "HybridConfig",
    "JobDescriptor",
    "JobItem",
    "JobRecord",
    "JobStatus",
    "Reservation",
    "Session",
    "WorkerInfo",
    "SpsaOutcome",
    "evaluation_seed",
    "run_spsa",
]
