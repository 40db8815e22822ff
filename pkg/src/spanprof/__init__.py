"""spanprof: cycle-accurate profiler for sequential and parallel pipelines.

Records per-thread span events around pipeline execution, reconstructs
per-stream profiles with nesting, calibrates and compensates for
instrumentation cost, and reports hot locations, load balance, and
nesting/cycles heatmaps.
"""

from .costmodel import CostModel
from .cycles import (CycleSourceDescriptor, MonotonicCycleSource,
                     ScriptedCycleSource, ThreadCycleSource, make_cycle_source)
from .probe import (PipelineHandle, SpanGuard, profile_parallel_task,
                    profile_sequential)
from .reconstruction import (ApplicationProfile, Span, ThreadProfile,
                             compensated_cycles, load_application_profile,
                             reconstruct_thread, total_compensated_cycles)
from .recorder import Recorder, SpanEvent

__version__ = "0.1.0"

__all__ = [
    "ApplicationProfile", "CostModel", "CycleSourceDescriptor",
    "MonotonicCycleSource", "PipelineHandle", "Recorder", "ScriptedCycleSource",
    "Span", "SpanEvent", "SpanGuard", "ThreadCycleSource", "ThreadProfile",
    "compensated_cycles", "load_application_profile", "make_cycle_source",
    "profile_parallel_task", "profile_sequential", "reconstruct_thread",
    "total_compensated_cycles",
]
