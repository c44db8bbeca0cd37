"""Report rendering: human-readable text tree and machine-readable JSON.

Rounding happens only here, at render time; the report object itself always
carries full-precision values, and the JSON rendering emits them unrounded
(shortest round-trip representation). Undefined metrics render as ``n/a``
in text and ``null`` in JSON.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .metrics import MetricsReport

_GLYPHS = {"mid": "├─", "last": "└─", "bar": "│"}
_ASCII_GLYPHS = {"mid": "|-", "last": "`-", "bar": "|"}

_HOST_ROWS = (
    ("parallel_efficiency", "{pad}Parallel Efficiency"),
    ("mpi_parallel_efficiency", "{mid} MPI Parallel Eff."),
    ("mpi_communication_efficiency", "{bar}  {mid} Comm. Eff."),
    ("mpi_load_balance", "{bar}  {last} Load Balance"),
    ("device_offload_efficiency", "{last} Device Offload Eff."),
)

_DEVICE_ROWS = (
    ("parallel_efficiency", "{pad}Parallel Efficiency"),
    ("load_balance", "{mid} Load Balance"),
    ("communication_efficiency", "{mid} Communication Eff."),
    ("orchestration_efficiency", "{last} Orchestration Eff."),
)


@dataclass(frozen=True)
class RenderOptions:
    format: str = "text"
    precision: int = 2
    show_raw: bool = False
    ascii_tree: bool = False

    def __post_init__(self) -> None:
        if self.format not in ("text", "json"):
            raise ValueError(f"format must be 'text' or 'json', got {self.format!r}")
        if not 0 <= self.precision <= 6:
            raise ValueError(f"precision must be in [0, 6], got {self.precision}")


def _value(v: float | None, precision: int) -> str:
    # f-string float formatting rounds half to even.
    return "n/a" if v is None else f"{v:.{precision}f}"


def _tree_block(title: str, rows, metrics, opts: RenderOptions, empty: str) -> list[str]:
    lines = [title]
    if metrics is None:
        lines.append(f"  {empty}")
        return lines
    glyphs = _ASCII_GLYPHS if opts.ascii_tree else _GLYPHS
    labels = [
        "  " + template.format(pad="", mid=glyphs["mid"], last=glyphs["last"], bar=glyphs["bar"])
        for _, template in rows
    ]
    width = max(len(label) for label in labels) + 3
    for (field, _), label in zip(rows, labels):
        lines.append(label.ljust(width) + _value(getattr(metrics, field), opts.precision))
    return lines


def render_text(report: MetricsReport, opts: RenderOptions = RenderOptions()) -> str:
    """Render the two metric trees as an aligned text report."""
    lines = [
        f"Elapsed time: {report.elapsed_ns} ns "
        f"(n={report.n} host processes, m={report.m} devices)",
        "",
    ]
    lines += _tree_block("Host", _HOST_ROWS, report.host, opts, "no host activity")
    lines.append("")
    lines += _tree_block("Device", _DEVICE_ROWS, report.device, opts, "no device activity")
    if opts.show_raw:
        lines.append("")
        lines.append("Raw durations (ns)")
        for s in report.host_summaries:
            lines.append(
                f"  rank {s.rank}: useful {s.d_useful}, offload {s.d_offload}, "
                f"mpi {s.d_mpi}, span end {s.span_end}"
            )
        for s in report.device_summaries:
            lines.append(
                f"  device {s.device_id}: kernel {s.d_kernel}, memory {s.d_memory}, "
                f"idle {s.d_idle}"
            )
    if report.warnings:
        lines.append("")
        lines.append("Warnings")
        lines.extend(f"  - {w}" for w in report.warnings)
    return "\n".join(lines) + "\n"


def render_json(report: MetricsReport, opts: RenderOptions = RenderOptions()) -> bytes:
    """Render the report as deterministic JSON with full-precision metrics."""
    host = None
    if report.host is not None:
        host = {field: getattr(report.host, field) for field, _ in _HOST_ROWS}
    device = None
    if report.device is not None:
        device = {field: getattr(report.device, field) for field, _ in _DEVICE_ROWS}
    doc = {
        "elapsed_ns": report.elapsed_ns,
        "n": report.n,
        "m": report.m,
        "host": host,
        "device": device,
        "warnings": list(report.warnings),
    }
    if opts.show_raw:
        doc["raw"] = {
            "hosts": [
                {
                    "rank": s.rank,
                    "useful_ns": s.d_useful,
                    "offload_ns": s.d_offload,
                    "mpi_ns": s.d_mpi,
                    "span_end_ns": s.span_end,
                }
                for s in report.host_summaries
            ],
            "devices": [
                {
                    "id": s.device_id,
                    "kernel_ns": s.d_kernel,
                    "memory_ns": s.d_memory,
                    "idle_ns": s.d_idle,
                }
                for s in report.device_summaries
            ],
        }
    return (json.dumps(doc, indent=2) + "\n").encode("utf-8")
