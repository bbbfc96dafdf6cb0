"""qruntime: a self-hostable quantum runtime platform.

Accepts quantum/hybrid workloads over a REST API, schedules them across
registered workers and simulated backends, compiles circuits parametrically
against fresh calibration data, and runs configurable pre/post-processing
pipelines (error mitigation) around circuit execution.
"""

__version__ = "0.1.0"
