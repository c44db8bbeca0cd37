"""Canonical in-memory trace representation and structural validation.

A trace is a flat collection of state intervals: host records describe what
each MPI rank was doing (useful compute, device offloading, MPI), device
records describe accelerator activity (kernels, memory operations). All
timestamps are integer nanoseconds on a single shared epoch (t = 0), and all
intervals are half-open ``[start, end)`` so adjacent records never count an
instant twice.

Host states are mutually exclusive within a rank; overlapping host records
are a producer bug and are reported as validation errors, never repaired.
Device records may overlap freely (concurrent streams) and are resolved
later by interval algebra.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

U64_MAX = 2**64 - 1


class HostState(Enum):
    """What a host process is doing during an interval."""

    USEFUL = "useful"
    OFFLOAD = "offload"
    MPI = "mpi"


class DeviceActivityKind(Enum):
    """Recorded device activity. Idle is never recorded; it is derived."""

    KERNEL = "kernel"
    MEMORY = "memory"


@dataclass(frozen=True, order=True)
class Interval:
    """Half-open time span ``[start, end)`` in integer nanoseconds."""

    start: int
    end: int

    @property
    def duration(self) -> int:
        return self.end - self.start


@dataclass(frozen=True)
class HostRecord:
    rank: int
    state: HostState
    interval: Interval


@dataclass(frozen=True)
class DeviceRecord:
    device_id: int
    kind: DeviceActivityKind
    interval: Interval
    stream: int | None = None


@dataclass(frozen=True)
class DeviceDecl:
    """A declared device; ``owner_rank`` is informational only."""

    device_id: int
    owner_rank: int | None = None


def _host_key(r: HostRecord) -> tuple:
    return (r.rank, r.interval.start, r.interval.end, r.state.value)


def _device_key(r: DeviceRecord) -> tuple:
    stream = -1 if r.stream is None else r.stream
    return (r.device_id, r.interval.start, r.interval.end, r.kind.value, stream)


@dataclass(frozen=True)
class Trace:
    """Immutable trace: declared resources plus their state records.

    Records are stored in a canonical order, sorted per resource by
    ``(start, end)``; two traces carrying the same records compare equal
    regardless of construction order. Resource declaration order is
    preserved as given.
    """

    host_processes: tuple[int, ...] = ()
    devices: tuple[DeviceDecl, ...] = ()
    host_records: tuple[HostRecord, ...] = ()
    device_records: tuple[DeviceRecord, ...] = ()
    time_unit: str = "ns"

    def __post_init__(self) -> None:
        object.__setattr__(self, "host_processes", tuple(self.host_processes))
        object.__setattr__(self, "devices", tuple(self.devices))
        object.__setattr__(
            self, "host_records", tuple(sorted(self.host_records, key=_host_key))
        )
        object.__setattr__(
            self, "device_records", tuple(sorted(self.device_records, key=_device_key))
        )

    @property
    def n(self) -> int:
        return len(self.host_processes)

    @property
    def m(self) -> int:
        return len(self.devices)


@dataclass
class ValidationReport:
    """Findings from :func:`validate`; errors mean the trace is unusable."""

    errors: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors


class InvalidTraceError(Exception):
    """Raised when an operation requiring a valid trace receives one with errors."""

    def __init__(self, report: ValidationReport):
        self.report = report
        head = "; ".join(report.errors[:3])
        more = f" (+{len(report.errors) - 3} more)" if len(report.errors) > 3 else ""
        super().__init__(f"trace failed validation: {head}{more}")


def _check_interval(iv: Interval, where: str, report: ValidationReport) -> bool:
    """Structural checks on one interval; returns True if usable."""
    ok = True
    if not isinstance(iv.start, int) or not isinstance(iv.end, int):
        report.errors.append(f"{where}: timestamps must be integers")
        return False
    if iv.start < 0:
        report.errors.append(f"{where}: negative timestamp {iv.start}")
        ok = False
    if iv.end > U64_MAX:
        report.errors.append(f"{where}: end {iv.end} exceeds 64-bit range")
        ok = False
    if iv.start > iv.end:
        report.errors.append(f"{where}: start {iv.start} > end {iv.end}")
        ok = False
    elif iv.start == iv.end:
        report.warnings.append(f"{where}: zero-length interval at {iv.start}")
    return ok


def validate(trace: Trace) -> ValidationReport:
    """Check every trace invariant; all findings come back as report data.

    Errors: no declared resources at all, records referencing undeclared
    resources, malformed or negative intervals, and host records of any two
    states overlapping within a rank (reported with both record indices).
    Warnings: zero-length records and device records that end after the
    host-derived elapsed time (they are clamped downstream).

    Pure: validating the same trace twice yields identical reports.
    """
    report = ValidationReport()

    if trace.n == 0 and trace.m == 0:
        report.errors.append("trace declares no host processes and no devices")

    if len(set(trace.host_processes)) != trace.n:
        report.errors.append("duplicate rank ids in host_processes")
    device_ids = [d.device_id for d in trace.devices]
    if len(set(device_ids)) != trace.m:
        report.errors.append("duplicate device ids in devices")
    if trace.time_unit != "ns":
        report.errors.append(f"unsupported time unit {trace.time_unit!r}")

    ranks = set(trace.host_processes)
    for decl in trace.devices:
        if decl.owner_rank is not None and decl.owner_rank not in ranks:
            report.warnings.append(
                f"device {decl.device_id}: owner_rank {decl.owner_rank} is not a declared rank"
            )

    usable: dict[int, list[int]] = {}
    for i, rec in enumerate(trace.host_records):
        where = f"host record {i} (rank {rec.rank})"
        ok = _check_interval(rec.interval, where, report)
        if rec.rank not in ranks:
            report.errors.append(f"{where}: rank not declared")
        elif ok and rec.interval.duration > 0:
            usable.setdefault(rec.rank, []).append(i)

    # Host states are mutually exclusive per rank: any overlap is an error.
    # Records arrive start-sorted (canonical order); zero-length records are
    # empty sets and cannot overlap.
    for rank in trace.host_processes:
        cover_end = -1
        cover_idx = -1
        for i in usable.get(rank, []):
            iv = trace.host_records[i].interval
            if iv.start < cover_end:
                a, b = trace.host_records[cover_idx].interval, iv
                report.errors.append(
                    f"rank {rank}: host records {cover_idx} and {i} overlap: "
                    f"[{a.start}, {a.end}) and [{b.start}, {b.end})"
                )
            if iv.end > cover_end:
                cover_end, cover_idx = iv.end, i

    host_elapsed = max((r.interval.end for r in trace.host_records), default=0)
    ids = set(device_ids)
    for i, rec in enumerate(trace.device_records):
        where = f"device record {i} (device {rec.device_id})"
        _check_interval(rec.interval, where, report)
        if rec.device_id not in ids:
            report.errors.append(f"{where}: device not declared")
        if trace.n >= 1 and rec.interval.end > host_elapsed:
            report.warnings.append(
                f"{where}: ends at {rec.interval.end}, after host elapsed time "
                f"{host_elapsed}; it will be clamped"
            )

    return report
