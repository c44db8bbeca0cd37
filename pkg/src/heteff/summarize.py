"""Per-resource duration totals: the raw inputs of every efficiency ratio.

Host side follows the three-state model (useful / offload / MPI). Time not
covered by any record — gaps between a rank's records, and the lead-in
before its first record back to t = 0 — is attributed to useful
computation: instrumentation only marks MPI and offload-runtime intervals,
so uninstrumented time is computation by default.

Device side applies the post-processing pipeline: kernel records are
flattened across streams, memory records are flattened and then stripped of
any overlap with kernel time (overlap counts as computation), and whatever
remains uncovered inside ``[0, elapsed)`` is idle.
"""

from __future__ import annotations

from dataclasses import dataclass

from .intervals import complement, flatten, intersect, subtract, total_duration
from .model import (
    DeviceActivityKind,
    HostState,
    Interval,
    InvalidTraceError,
    Trace,
    validate,
)


@dataclass(frozen=True)
class HostSummary:
    """State-duration totals for one rank, gap-filled from t = 0."""

    rank: int
    d_useful: int
    d_offload: int
    d_mpi: int
    span_end: int


@dataclass(frozen=True)
class DeviceSummary:
    """Activity totals for one device; kernel + memory + idle == elapsed."""

    device_id: int
    d_kernel: int
    d_memory: int
    d_idle: int


def _require_valid(trace: Trace) -> None:
    report = validate(trace)
    if not report.ok:
        raise InvalidTraceError(report)


def summarize_host(trace: Trace) -> tuple[list[HostSummary], int]:
    """Summarize every declared rank and derive the elapsed time.

    Elapsed time is the maximum over ranks of their total accounted time
    (useful + offload + MPI, which after gap filling equals the rank's last
    record end). Traces with no host processes fall back to the latest
    device record end.

    Raises InvalidTraceError if the trace has validation errors.
    """
    _require_valid(trace)

    per_rank: dict[int, list] = {r: [] for r in trace.host_processes}
    for rec in trace.host_records:
        per_rank[rec.rank].append(rec)

    summaries = []
    for rank in trace.host_processes:
        d_offload = 0
        d_mpi = 0
        span_end = 0
        for rec in per_rank[rank]:
            if rec.state is HostState.OFFLOAD:
                d_offload += rec.interval.duration
            elif rec.state is HostState.MPI:
                d_mpi += rec.interval.duration
            span_end = max(span_end, rec.interval.end)
        # Records are mutually exclusive, so gap filling reduces to this.
        d_useful = span_end - d_offload - d_mpi
        summaries.append(HostSummary(rank, d_useful, d_offload, d_mpi, span_end))

    if trace.n >= 1:
        elapsed = max((s.span_end for s in summaries), default=0)
    else:
        elapsed = max((r.interval.end for r in trace.device_records), default=0)
    return summaries, elapsed


def summarize_device(trace: Trace, elapsed: int) -> tuple[list[DeviceSummary], list[str]]:
    """Summarize every declared device against the elapsed window ``[0, elapsed)``.

    Records extending beyond the window are clamped to it, each clamp noted
    in the returned warnings.

    Raises InvalidTraceError if the trace has validation errors.
    """
    if elapsed <= 0:
        raise ValueError(f"elapsed must be positive, got {elapsed}")
    _require_valid(trace)

    bounds = Interval(0, elapsed)
    raw: dict[int, dict[DeviceActivityKind, list[Interval]]] = {
        d.device_id: {k: [] for k in DeviceActivityKind} for d in trace.devices
    }
    clamped: dict[int, int] = {d.device_id: 0 for d in trace.devices}
    for rec in trace.device_records:
        if rec.interval.end > elapsed:
            clamped[rec.device_id] += 1
        raw[rec.device_id][rec.kind].append(rec.interval)

    summaries = []
    warnings = []
    for decl in trace.devices:
        did = decl.device_id
        kernel = intersect(flatten(raw[did][DeviceActivityKind.KERNEL]), bounds)
        memory = subtract(intersect(flatten(raw[did][DeviceActivityKind.MEMORY]), bounds), kernel)
        active = flatten(list(kernel) + list(memory))
        idle = complement(active, bounds)
        summaries.append(
            DeviceSummary(
                device_id=did,
                d_kernel=total_duration(kernel),
                d_memory=total_duration(memory),
                d_idle=total_duration(idle),
            )
        )
        if clamped[did]:
            warnings.append(
                f"device {did}: clamped {clamped[did]} record(s) extending beyond "
                f"elapsed time {elapsed}"
            )
    return summaries, warnings
