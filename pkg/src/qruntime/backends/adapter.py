"""Uniform hardware adapter contract.

Every backend - simulated here, real elsewhere - is driven through this
interface: capability discovery, calibration retrieval, payload submission,
and handle-based status/result polling. Handles move monotonically through
waiting -> running -> (done | failed), and a device executes one payload at
a time.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from enum import Enum

from ..calibration import CalibrationSnapshot
from ..capabilities import BackendCapabilities
from .counts import Counts


class HandleStatus(str, Enum):
    WAITING = "waiting"
    RUNNING = "running"
    DONE = "done"
    FAILED = "failed"


class AdapterError(Exception):
    pass


class UnknownHandle(AdapterError):
    def __init__(self, handle: str):
        super().__init__(f"unknown execution handle '{handle}'")
        self.handle = handle


class NotReady(AdapterError):
    def __init__(self, handle: str, status: HandleStatus):
        super().__init__(f"results for '{handle}' not ready (status {status.value})")
        self.handle = handle
        self.status = status


class ExecutionFailed(AdapterError):
    def __init__(self, handle: str, cause: str):
        super().__init__(f"execution '{handle}' failed: {cause}")
        self.handle = handle
        self.cause = cause


class BackendAdapter(ABC):
    """Contract every hardware adapter implements."""

    @abstractmethod
    def capabilities(self) -> BackendCapabilities: ...

    @abstractmethod
    def calibration(self) -> CalibrationSnapshot: ...

    @abstractmethod
    def submit(self, payload) -> str:
        """Enqueue an executable payload; returns an opaque handle."""

    @abstractmethod
    def status(self, handle: str) -> HandleStatus: ...

    @abstractmethod
    def results(self, handle: str) -> Counts: ...

    @abstractmethod
    def queue_depth(self) -> int: ...
