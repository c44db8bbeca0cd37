"""The two multiplicative efficiency hierarchies, host and device.

Host tree::

    parallel_efficiency = mpi_parallel_efficiency * device_offload_efficiency
    mpi_parallel_efficiency = mpi_communication_efficiency * mpi_load_balance

Device tree::

    parallel_efficiency = load_balance * communication_efficiency
                          * orchestration_efficiency

Every metric is a ratio of exact integer duration sums, evaluated as one
double-precision division, so each product identity holds to a few ulp.
Metrics whose denominator is zero are reported as ``None`` (absent), never
coerced to 0 or 1: coercion would silently break the product identities.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import InvalidTraceError, Trace, validate
from .summarize import DeviceSummary, HostSummary, summarize_device, summarize_host


class AnalysisError(Exception):
    """The trace is structurally fine but cannot be analyzed (e.g. zero elapsed)."""


@dataclass(frozen=True)
class HostMetrics:
    """Host-side ratios in [0, 1]; ``None`` marks an undefined metric."""

    parallel_efficiency: float
    mpi_parallel_efficiency: float | None
    mpi_communication_efficiency: float | None
    mpi_load_balance: float | None
    device_offload_efficiency: float | None


@dataclass(frozen=True)
class DeviceMetrics:
    """Device-side ratios in [0, 1]; ``None`` marks an undefined metric."""

    parallel_efficiency: float
    load_balance: float | None
    communication_efficiency: float | None
    orchestration_efficiency: float | None


@dataclass(frozen=True)
class MetricsReport:
    """Full analysis result: both trees plus the raw durations they came from."""

    elapsed_ns: int
    n: int
    m: int
    host: HostMetrics | None
    device: DeviceMetrics | None
    host_summaries: tuple[HostSummary, ...]
    device_summaries: tuple[DeviceSummary, ...]
    warnings: tuple[str, ...]


def host_metrics(summaries: list[HostSummary], elapsed: int) -> HostMetrics:
    """Evaluate the host tree from per-rank duration totals.

    Offload time counts as useful at the MPI level (the work was assigned to
    that rank, it just ran on the device), so the MPI subtree is computed
    over useful + offload. When no rank has any useful or offload time the
    whole subtree is undefined and parallel efficiency is zero.
    """
    n = len(summaries)
    if n < 1:
        raise ValueError("host_metrics requires at least one rank")
    if elapsed <= 0:
        raise ValueError(f"elapsed must be positive, got {elapsed}")

    sum_u = sum(s.d_useful for s in summaries)
    loads = [s.d_useful + s.d_offload for s in summaries]
    sum_uw = sum(loads)
    max_uw = max(loads)

    if sum_uw == 0:
        return HostMetrics(0.0, None, None, None, None)
    return HostMetrics(
        parallel_efficiency=sum_u / (elapsed * n),
        mpi_parallel_efficiency=sum_uw / (elapsed * n),
        mpi_communication_efficiency=max_uw / elapsed,
        mpi_load_balance=sum_uw / (n * max_uw),
        device_offload_efficiency=sum_u / sum_uw,
    )


def device_metrics(summaries: list[DeviceSummary], elapsed: int) -> DeviceMetrics:
    """Evaluate the device tree from per-device activity totals.

    The two max terms of communication efficiency (max kernel time, max
    kernel+memory time) are taken independently and may come from different
    devices; that is what keeps the product identity exact.
    """
    m = len(summaries)
    if m < 1:
        raise ValueError("device_metrics requires at least one device")
    if elapsed <= 0:
        raise ValueError(f"elapsed must be positive, got {elapsed}")

    sum_k = sum(s.d_kernel for s in summaries)
    max_k = max(s.d_kernel for s in summaries)
    max_km = max(s.d_kernel + s.d_memory for s in summaries)

    pe = sum_k / (elapsed * m)
    if max_k == 0:
        oe = max_km / elapsed if max_km > 0 else 0.0
        return DeviceMetrics(pe, None, None, oe)
    return DeviceMetrics(
        parallel_efficiency=pe,
        load_balance=sum_k / (m * max_k),
        communication_efficiency=max_k / max_km,
        orchestration_efficiency=max_km / elapsed,
    )


def compute_report(trace: Trace) -> MetricsReport:
    """Validate, summarize, and evaluate both metric trees for a trace.

    Raises InvalidTraceError on validation errors and AnalysisError when the
    elapsed time is zero (nothing to divide by).
    """
    report = validate(trace)
    if not report.ok:
        raise InvalidTraceError(report)

    host_summaries, elapsed = summarize_host(trace)
    if elapsed == 0:
        raise AnalysisError("elapsed time is zero: trace records no activity")

    warnings = list(report.warnings)
    device_summaries: list[DeviceSummary] = []
    if trace.m >= 1:
        device_summaries, clamp_warnings = summarize_device(trace, elapsed)
        warnings.extend(clamp_warnings)

    return MetricsReport(
        elapsed_ns=elapsed,
        n=trace.n,
        m=trace.m,
        host=host_metrics(host_summaries, elapsed) if trace.n >= 1 else None,
        device=device_metrics(device_summaries, elapsed) if trace.m >= 1 else None,
        host_summaries=tuple(host_summaries),
        device_summaries=tuple(device_summaries),
        warnings=tuple(warnings),
    )
