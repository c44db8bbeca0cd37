import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from heteff import (
    DeviceActivityKind,
    DeviceDecl,
    DeviceRecord,
    HostRecord,
    HostState,
    Interval,
    InvalidTraceError,
    Trace,
    summarize_device,
    summarize_host,
)
from strategies import traces
from sweep_oracle import mask_of

U, W, P = HostState.USEFUL, HostState.OFFLOAD, HostState.MPI
K, M = DeviceActivityKind.KERNEL, DeviceActivityKind.MEMORY


def trace_of(host=(), devices=0, device_records=()):
    n = 1 + max((r for r, _, _, _ in host), default=-1) if host else 0
    return Trace(
        host_processes=tuple(range(n)),
        devices=tuple(DeviceDecl(d) for d in range(devices)),
        host_records=tuple(HostRecord(r, s, Interval(a, b)) for r, s, a, b in host),
        device_records=tuple(
            DeviceRecord(d, k, Interval(a, b), stream) for d, k, a, b, stream in device_records
        ),
    )


def test_exact_tiling():
    t = trace_of(host=[(0, U, 0, 4), (0, W, 4, 8), (0, P, 8, 10)])
    [s], elapsed = summarize_host(t)
    assert (s.d_useful, s.d_offload, s.d_mpi) == (4, 4, 2)
    assert s.span_end == 10
    assert elapsed == 10


def test_gaps_become_useful():
    t = trace_of(host=[(0, U, 0, 4), (0, P, 6, 10)])
    [s], elapsed = summarize_host(t)
    assert s.d_useful == 6  # [4, 6) gap attributed to useful
    assert s.d_mpi == 4
    assert elapsed == 10


def test_leading_gap_becomes_useful():
    t = trace_of(host=[(0, P, 5, 10)])
    [s], _ = summarize_host(t)
    assert s.d_useful == 5
    assert s.d_mpi == 5


def test_elapsed_is_max_over_ranks():
    t = trace_of(host=[(0, U, 0, 10), (1, U, 0, 8)])
    _, elapsed = summarize_host(t)
    assert elapsed == 10


def test_rank_without_records_contributes_zero():
    t = Trace(
        host_processes=(0, 1),
        host_records=(HostRecord(0, U, Interval(0, 10)),),
    )
    summaries, elapsed = summarize_host(t)
    assert summaries[1] == type(summaries[1])(1, 0, 0, 0, 0)
    assert elapsed == 10


def test_elapsed_falls_back_to_devices_when_no_hosts():
    t = trace_of(devices=1, device_records=[(0, K, 3, 42, None)])
    summaries, elapsed = summarize_host(t)
    assert summaries == []
    assert elapsed == 42


def test_invalid_trace_is_refused():
    t = trace_of(host=[(0, U, 0, 10), (0, P, 5, 15)])
    with pytest.raises(InvalidTraceError, match="overlap"):
        summarize_host(t)


def test_device_pipeline_kernels_absorb_memory_overlap():
    t = trace_of(
        host=[(0, U, 0, 20)],
        devices=1,
        device_records=[(0, K, 0, 10, 1), (0, K, 5, 15, 2), (0, M, 12, 20, None)],
    )
    [s], warnings = summarize_device(t, 20)
    assert (s.d_kernel, s.d_memory, s.d_idle) == (15, 5, 0)
    assert warnings == []


def test_device_with_no_records_is_all_idle():
    t = trace_of(host=[(0, U, 0, 10)], devices=1)
    [s], _ = summarize_device(t, 10)
    assert (s.d_kernel, s.d_memory, s.d_idle) == (0, 0, 10)


def test_memory_fully_inside_kernel_is_removed():
    t = trace_of(
        host=[(0, U, 0, 10)],
        devices=1,
        device_records=[(0, K, 0, 10, None), (0, M, 0, 10, None)],
    )
    [s], _ = summarize_device(t, 10)
    assert (s.d_kernel, s.d_memory, s.d_idle) == (10, 0, 0)


def test_records_beyond_elapsed_are_clamped_with_warning():
    t = trace_of(
        host=[(0, U, 0, 10)],
        devices=1,
        device_records=[(0, K, 5, 25, None), (0, M, 30, 40, None)],
    )
    [s], warnings = summarize_device(t, 10)
    assert (s.d_kernel, s.d_memory, s.d_idle) == (5, 0, 5)
    assert len(warnings) == 1 and "clamped 2 record(s)" in warnings[0]


def test_elapsed_must_be_positive():
    t = trace_of(host=[(0, U, 0, 10)], devices=1)
    with pytest.raises(ValueError):
        summarize_device(t, 0)


@given(traces(max_ranks=2, max_devices=2), st.randoms(use_true_random=False))
def test_stream_reassignment_changes_nothing(t, rng):
    _, elapsed = summarize_host(t)
    if elapsed == 0:
        return
    shuffled = Trace(
        host_processes=t.host_processes,
        devices=t.devices,
        host_records=t.host_records,
        device_records=tuple(
            DeviceRecord(r.device_id, r.kind, r.interval, rng.choice([None, 0, 5, 9]))
            for r in t.device_records
        ),
    )
    assert summarize_device(t, elapsed)[0] == summarize_device(shuffled, elapsed)[0]


@given(traces(max_ranks=2, max_devices=3))
def test_device_partition_is_exact(t):
    _, elapsed = summarize_host(t)
    if elapsed == 0:
        return
    summaries, _ = summarize_device(t, elapsed)
    for s in summaries:
        assert s.d_kernel + s.d_memory + s.d_idle == elapsed


@given(traces(max_ranks=3, max_devices=1))
def test_host_totals_match_sweep_oracle(t):
    summaries, elapsed = summarize_host(t)
    bound = elapsed + 1
    for s in summaries:
        recs = [r for r in t.host_records if r.rank == s.rank]
        mpi = mask_of([r.interval for r in recs if r.state is P], bound)
        offload = mask_of([r.interval for r in recs if r.state is W], bound)
        span = np.zeros(bound, dtype=bool)
        span[: s.span_end] = True
        useful = span & ~mpi & ~offload  # gaps inside the span count as useful
        assert s.d_mpi == int(mpi.sum())
        assert s.d_offload == int(offload.sum())
        assert s.d_useful == int(useful.sum())
        assert s.d_useful + s.d_offload + s.d_mpi == s.span_end
