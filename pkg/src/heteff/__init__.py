"""Hierarchical host/device efficiency metrics from portable state-interval traces."""

from .intervals import FlatSet, complement, flatten, intersect, subtract, total_duration
from .metrics import (
    AnalysisError,
    DeviceMetrics,
    HostMetrics,
    MetricsReport,
    compute_report,
    device_metrics,
    host_metrics,
)
from .model import (
    DeviceActivityKind,
    DeviceDecl,
    DeviceRecord,
    HostRecord,
    HostState,
    Interval,
    InvalidTraceError,
    Trace,
    ValidationReport,
    validate,
)
from .report import RenderOptions, render_json, render_text
from .scenario import (
    Barrier,
    CpuCompute,
    Memcpy,
    OffloadKernelAsync,
    OffloadKernelSync,
    PRESET_NAMES,
    ScenarioError,
    ScenarioSpec,
    WaitDevice,
    build,
    preset,
    read_scenario,
    scale_spec,
)
from .summarize import DeviceSummary, HostSummary, summarize_device, summarize_host
from .trace_io import (
    CategoryMapping,
    MappingError,
    MappingRule,
    TraceFormatError,
    import_mapped,
    read_mapping,
    read_trace,
    write_trace,
)

__version__ = "0.1.0"
