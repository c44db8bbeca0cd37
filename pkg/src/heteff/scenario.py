"""Deterministic synthetic-scenario generator.

Compiles a per-rank phase program into a consistent trace by simulating
rank progress: each rank advances a host cursor, each rank's device (one
device per rank, device_id == rank) advances a busy-until cursor, and
barriers stall the fast ranks in MPI until the slowest arrives. The program
end acts as a final barrier, so every rank accounts the same elapsed time.

Phase semantics, with ``o`` the launch overhead and ``c`` the host cursor:

* ``CpuCompute(d)``      — useful [c, c+d)
* ``OffloadKernelSync(d)`` — kernel queued at max(c+o, device busy-until);
  host blocks in offload from c until the kernel ends
* ``OffloadKernelAsync(d)`` — host blocks only for the launch [c, c+o);
  the kernel is queued and must be collected by a later ``WaitDevice``
* ``WaitDevice``         — host blocks in offload until the device drains
* ``Memcpy(d)``          — transfer queued like a kernel; host blocks
  [c, c+o+d)
* ``Barrier``            — lagging ranks accrue MPI until the slowest rank

The presets reproduce common imbalance patterns (balanced offload-heavy,
host-heavy, device imbalance, host/device overlap, ...) with round duration
ratios so the resulting metrics are exact fractions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .model import (
    DeviceActivityKind,
    DeviceDecl,
    DeviceRecord,
    HostRecord,
    HostState,
    Interval,
    Trace,
)
from .trace_io import TraceFormatError, _array, _load_json, _no_extras, _obj, _take


class ScenarioError(Exception):
    """The scenario itself is inconsistent (a bug in the scenario, not in data)."""


@dataclass(frozen=True)
class CpuCompute:
    duration: int


@dataclass(frozen=True)
class OffloadKernelSync:
    duration: int


@dataclass(frozen=True)
class OffloadKernelAsync:
    duration: int


@dataclass(frozen=True)
class Memcpy:
    duration: int


@dataclass(frozen=True)
class WaitDevice:
    pass


@dataclass(frozen=True)
class Barrier:
    pass


Phase = Union[CpuCompute, OffloadKernelSync, OffloadKernelAsync, Memcpy, WaitDevice, Barrier]

_TIMED = (CpuCompute, OffloadKernelSync, OffloadKernelAsync, Memcpy)


@dataclass(frozen=True)
class ScenarioSpec:
    """One phase program per rank; one device per rank (device_id == rank)."""

    ranks: tuple[tuple[Phase, ...], ...]
    launch_overhead: int = 0


def _split_segments(program: tuple[Phase, ...]) -> list[list[Phase]]:
    segments: list[list[Phase]] = [[]]
    for phase in program:
        if isinstance(phase, Barrier):
            segments.append([])
        else:
            segments[-1].append(phase)
    return segments


def _check(spec: ScenarioSpec) -> None:
    if not spec.ranks:
        raise ScenarioError("scenario declares no ranks")
    if not isinstance(spec.launch_overhead, int) or spec.launch_overhead < 0:
        raise ScenarioError(f"launch_overhead must be a non-negative integer, got {spec.launch_overhead!r}")
    for r, program in enumerate(spec.ranks):
        for i, phase in enumerate(program):
            if isinstance(phase, _TIMED) and (
                not isinstance(phase.duration, int) or phase.duration <= 0
            ):
                raise ScenarioError(
                    f"rank {r}, phase {i}: duration must be a positive integer, "
                    f"got {phase.duration!r}"
                )


def build(spec: ScenarioSpec) -> Trace:
    """Simulate the scenario into a trace; bit-identical across runs."""
    _check(spec)
    segments = [_split_segments(p) for p in spec.ranks]
    if len({len(s) for s in segments}) != 1:
        raise ScenarioError("all rank programs must contain the same number of barriers")

    n = len(spec.ranks)
    o = spec.launch_overhead
    cursor = [0] * n
    busy_until = [0] * n
    pending_async = [False] * n
    host_records: list[HostRecord] = []
    device_records: list[DeviceRecord] = []

    def host(rank: int, state: HostState, start: int, end: int) -> None:
        if end > start:
            host_records.append(HostRecord(rank, state, Interval(start, end)))

    n_segments = len(segments[0])
    for seg in range(n_segments):
        for r in range(n):
            c = cursor[r]
            for phase in segments[r][seg]:
                if isinstance(phase, CpuCompute):
                    host(r, HostState.USEFUL, c, c + phase.duration)
                    c += phase.duration
                elif isinstance(phase, OffloadKernelSync):
                    start = max(c + o, busy_until[r])
                    end = start + phase.duration
                    device_records.append(
                        DeviceRecord(r, DeviceActivityKind.KERNEL, Interval(start, end))
                    )
                    host(r, HostState.OFFLOAD, c, end)
                    c = end
                    busy_until[r] = end
                elif isinstance(phase, OffloadKernelAsync):
                    host(r, HostState.OFFLOAD, c, c + o)
                    c += o
                    start = max(c, busy_until[r])
                    device_records.append(
                        DeviceRecord(r, DeviceActivityKind.KERNEL, Interval(start, start + phase.duration))
                    )
                    busy_until[r] = start + phase.duration
                    pending_async[r] = True
                elif isinstance(phase, Memcpy):
                    start = max(c + o, busy_until[r])
                    device_records.append(
                        DeviceRecord(r, DeviceActivityKind.MEMORY, Interval(start, start + phase.duration))
                    )
                    host(r, HostState.OFFLOAD, c, c + o + phase.duration)
                    c += o + phase.duration
                    busy_until[r] = start + phase.duration
                else:  # WaitDevice
                    if not pending_async[r]:
                        raise ScenarioError(f"rank {r}: WaitDevice with no pending async offload")
                    host(r, HostState.OFFLOAD, c, busy_until[r])
                    c = max(c, busy_until[r])
                    pending_async[r] = False
            cursor[r] = c
            if seg == n_segments - 1 and pending_async[r]:
                raise ScenarioError(f"rank {r}: async offload without a matching WaitDevice")
        barrier_time = max(cursor)
        for r in range(n):
            host(r, HostState.MPI, cursor[r], barrier_time)
            cursor[r] = barrier_time

    return Trace(
        host_processes=tuple(range(n)),
        devices=tuple(DeviceDecl(r, owner_rank=r) for r in range(n)),
        host_records=tuple(host_records),
        device_records=tuple(device_records),
    )


def _uc1(u: int) -> ScenarioSpec:
    # Offload-heavy and fully balanced: big kernel, small host compute.
    program = (OffloadKernelSync(10 * u), CpuCompute(u))
    return ScenarioSpec((program, program))


def _uc2(u: int) -> ScenarioSpec:
    # Host-heavy and fully balanced: devices get a sliver of work.
    program = (CpuCompute(10 * u), OffloadKernelSync(u))
    return ScenarioSpec((program, program))


def _uc3(u: int) -> ScenarioSpec:
    # Device imbalance 10:1 (device load balance 11/20 = 0.55); hosts idle-ish.
    return ScenarioSpec(
        (
            (CpuCompute(u), OffloadKernelSync(10 * u)),
            (CpuCompute(u), OffloadKernelSync(u)),
        )
    )


def _uc4(u: int) -> ScenarioSpec:
    # Imbalance on both sides, 10:1 in kernels and in host load.
    return ScenarioSpec(
        (
            (OffloadKernelSync(10 * u), CpuCompute(10 * u)),
            (OffloadKernelSync(u), CpuCompute(u)),
        )
    )


def _uc5(u: int) -> ScenarioSpec:
    # Balanced devices, imbalanced host compute; total CPU work == GPU work.
    return ScenarioSpec(
        (
            (OffloadKernelSync(10 * u), CpuCompute(17 * u)),
            (OffloadKernelSync(10 * u), CpuCompute(3 * u)),
        )
    )


def _uc6(u: int) -> ScenarioSpec:
    # Balanced kernels, one rank pays a large device-to-host transfer
    # (device communication efficiency 4/11 ~ 0.36).
    return ScenarioSpec(
        (
            (CpuCompute(u), OffloadKernelSync(4 * u), Memcpy(7 * u)),
            (CpuCompute(u), OffloadKernelSync(4 * u)),
        )
    )


def _uc7a(u: int) -> ScenarioSpec:
    # Sequential offload then compute; CPU work is twice the GPU work.
    program = (OffloadKernelSync(5 * u), CpuCompute(10 * u))
    return ScenarioSpec((program, program))


def _uc7b(u: int) -> ScenarioSpec:
    # Same workload as usecase7a but the kernel overlaps the host compute.
    program = (OffloadKernelAsync(5 * u), CpuCompute(10 * u), WaitDevice())
    return ScenarioSpec((program, program))


_PRESETS = {
    "usecase1": _uc1,
    "usecase2": _uc2,
    "usecase3": _uc3,
    "usecase4": _uc4,
    "usecase5": _uc5,
    "usecase6": _uc6,
    "usecase7a": _uc7a,
    "usecase7b": _uc7b,
}

PRESET_NAMES = tuple(_PRESETS)

_BASE_NS = 1000  # preset time quantum at scale 1


def preset(name: str, scale: int = 1) -> ScenarioSpec:
    """Return the named two-rank preset with all durations scaled by ``scale``."""
    if name not in _PRESETS:
        raise ValueError(f"unknown preset {name!r}; known: {', '.join(PRESET_NAMES)}")
    if not isinstance(scale, int) or scale < 1:
        raise ValueError(f"scale must be a positive integer, got {scale!r}")
    return _PRESETS[name](_BASE_NS * scale)


_PHASE_NAMES = {
    "cpu_compute": CpuCompute,
    "offload_kernel_sync": OffloadKernelSync,
    "offload_kernel_async": OffloadKernelAsync,
    "memcpy": Memcpy,
    "wait_device": WaitDevice,
    "barrier": Barrier,
}


def read_scenario(data: bytes | str) -> ScenarioSpec:
    """Parse a scenario document (see docs/formats.md)."""
    doc = _obj(_load_json(data, "scenario document"), "$")
    overhead = _take(doc, "$", "launch_overhead", required=False, default=0)
    if isinstance(overhead, bool) or not isinstance(overhead, int) or overhead < 0:
        raise TraceFormatError(f"$.launch_overhead: expected non-negative integer, got {overhead!r}")
    ranks = []
    for r, program in enumerate(_array(_take(doc, "$", "ranks"), "$.ranks")):
        phases = []
        for i, entry in enumerate(_array(program, f"$.ranks[{r}]")):
            path = f"$.ranks[{r}][{i}]"
            entry = _obj(entry, path)
            name = _take(entry, path, "phase")
            if name not in _PHASE_NAMES:
                raise TraceFormatError(
                    f"{path}.phase: expected one of {', '.join(sorted(_PHASE_NAMES))}; got {name!r}"
                )
            cls = _PHASE_NAMES[name]
            if cls in _TIMED:
                duration = _take(entry, path, "duration")
                if isinstance(duration, bool) or not isinstance(duration, int) or duration <= 0:
                    raise TraceFormatError(
                        f"{path}.duration: expected positive integer, got {duration!r}"
                    )
                phases.append(cls(duration))
            else:
                phases.append(cls())
            _no_extras(entry, path)
        ranks.append(tuple(phases))
    _no_extras(doc, "$")
    return ScenarioSpec(tuple(ranks), overhead)


def scale_spec(spec: ScenarioSpec, scale: int) -> ScenarioSpec:
    """Multiply every duration (including launch overhead) by ``scale``."""
    if not isinstance(scale, int) or scale < 1:
        raise ValueError(f"scale must be a positive integer, got {scale!r}")
    ranks = tuple(
        tuple(
            type(p)(p.duration * scale) if isinstance(p, _TIMED) else p
            for p in program
        )
        for program in spec.ranks
    )
    return ScenarioSpec(ranks, spec.launch_overhead * scale)
