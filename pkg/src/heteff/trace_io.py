"""Trace serialization: the native JSON format and a mapped event importer.

The native format is strict by design: unknown fields, wrong types, unknown
enum strings, and negative timestamps are all rejected with the JSON path of
the offender. Trace files are machine-produced; tolerating drift would hide
producer bugs. Writing is deterministic (fixed key order, canonical record
order), so equal traces serialize to identical bytes.

The importer converts Chrome-trace-event-style timelines (complete "X"
events with microsecond timestamps) into host/device records, driven by an
ordered first-match-wins rule list. See docs/formats.md for both schemas.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any

from .model import (
    DeviceActivityKind,
    DeviceDecl,
    DeviceRecord,
    HostRecord,
    HostState,
    Interval,
    Trace,
)

FORMAT_VERSION = 1

_HOST_STATES = {s.value: s for s in HostState}
_DEVICE_KINDS = {k.value: k for k in DeviceActivityKind}


class TraceFormatError(Exception):
    """A document does not conform to the native trace / mapping schema."""


class MappingError(Exception):
    """Import failed under default_policy=error: events matched no rule."""


def _load_json(data: bytes | str, what: str) -> Any:
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as e:
            raise TraceFormatError(f"{what} is not UTF-8: {e}") from e
    try:
        return json.loads(data)
    except json.JSONDecodeError as e:
        raise TraceFormatError(f"{what} is not valid JSON: {e}") from e


def _obj(value: Any, path: str) -> dict:
    if not isinstance(value, dict):
        raise TraceFormatError(f"{path}: expected object, got {type(value).__name__}")
    return dict(value)


def _array(value: Any, path: str) -> list:
    if not isinstance(value, list):
        raise TraceFormatError(f"{path}: expected array, got {type(value).__name__}")
    return value


def _take(obj: dict, path: str, key: str, required: bool = True, default: Any = None) -> Any:
    if key not in obj:
        if required:
            raise TraceFormatError(f"{path}: missing required field {key!r}")
        return default
    return obj.pop(key)


def _no_extras(obj: dict, path: str) -> None:
    if obj:
        raise TraceFormatError(f"{path}: unknown field {sorted(obj)[0]!r}")


def _nonneg_int(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise TraceFormatError(f"{path}: expected integer, got {value!r}")
    if value < 0:
        raise TraceFormatError(f"{path}: negative value {value}")
    return value


def _enum(value: Any, table: dict, path: str) -> Any:
    if not isinstance(value, str) or value not in table:
        options = ", ".join(sorted(table))
        raise TraceFormatError(f"{path}: expected one of {options}; got {value!r}")
    return table[value]


def read_trace(data: bytes | str) -> Trace:
    """Parse a native trace document into a Trace.

    Only structural validity is checked here (types, enum strings, sign);
    semantic invariants like host-record overlap are :func:`heteff.validate`'s
    job.
    """
    doc = _obj(_load_json(data, "trace document"), "$")

    version = _take(doc, "$", "version")
    if version != FORMAT_VERSION:
        raise TraceFormatError(f"$.version: unsupported version {version!r}")
    time_unit = _take(doc, "$", "time_unit")
    if time_unit != "ns":
        raise TraceFormatError(f"$.time_unit: expected 'ns', got {time_unit!r}")

    host_processes = []
    host_records = []
    for i, entry in enumerate(_array(_take(doc, "$", "hosts"), "$.hosts")):
        path = f"$.hosts[{i}]"
        entry = _obj(entry, path)
        rank = _nonneg_int(_take(entry, path, "rank"), f"{path}.rank")
        host_processes.append(rank)
        for j, rec in enumerate(_array(_take(entry, path, "records"), f"{path}.records")):
            rpath = f"{path}.records[{j}]"
            rec = _obj(rec, rpath)
            state = _enum(_take(rec, rpath, "state"), _HOST_STATES, f"{rpath}.state")
            start = _nonneg_int(_take(rec, rpath, "start"), f"{rpath}.start")
            end = _nonneg_int(_take(rec, rpath, "end"), f"{rpath}.end")
            _no_extras(rec, rpath)
            host_records.append(HostRecord(rank, state, Interval(start, end)))
        _no_extras(entry, path)

    devices = []
    device_records = []
    for i, entry in enumerate(_array(_take(doc, "$", "devices"), "$.devices")):
        path = f"$.devices[{i}]"
        entry = _obj(entry, path)
        did = _nonneg_int(_take(entry, path, "id"), f"{path}.id")
        owner = _take(entry, path, "owner_rank", required=False)
        if owner is not None:
            owner = _nonneg_int(owner, f"{path}.owner_rank")
        devices.append(DeviceDecl(did, owner))
        for j, rec in enumerate(_array(_take(entry, path, "records"), f"{path}.records")):
            rpath = f"{path}.records[{j}]"
            rec = _obj(rec, rpath)
            kind = _enum(_take(rec, rpath, "kind"), _DEVICE_KINDS, f"{rpath}.kind")
            stream = _take(rec, rpath, "stream", required=False)
            if stream is not None:
                stream = _nonneg_int(stream, f"{rpath}.stream")
            start = _nonneg_int(_take(rec, rpath, "start"), f"{rpath}.start")
            end = _nonneg_int(_take(rec, rpath, "end"), f"{rpath}.end")
            _no_extras(rec, rpath)
            device_records.append(DeviceRecord(did, kind, Interval(start, end), stream))
        _no_extras(entry, path)

    _no_extras(doc, "$")
    return Trace(
        host_processes=tuple(host_processes),
        devices=tuple(devices),
        host_records=tuple(host_records),
        device_records=tuple(device_records),
    )


def write_trace(trace: Trace) -> bytes:
    """Serialize a trace deterministically; equal traces yield identical bytes."""
    host_recs: dict[int, list] = {r: [] for r in trace.host_processes}
    for rec in trace.host_records:
        if rec.rank not in host_recs:
            raise ValueError(f"host record references undeclared rank {rec.rank}")
        host_recs[rec.rank].append(
            {"state": rec.state.value, "start": rec.interval.start, "end": rec.interval.end}
        )
    device_recs: dict[int, list] = {d.device_id: [] for d in trace.devices}
    for rec in trace.device_records:
        if rec.device_id not in device_recs:
            raise ValueError(f"device record references undeclared device {rec.device_id}")
        entry: dict[str, Any] = {"kind": rec.kind.value}
        if rec.stream is not None:
            entry["stream"] = rec.stream
        entry["start"] = rec.interval.start
        entry["end"] = rec.interval.end
        device_recs[rec.device_id].append(entry)

    doc = {
        "version": FORMAT_VERSION,
        "time_unit": "ns",
        "hosts": [{"rank": r, "records": host_recs[r]} for r in trace.host_processes],
        "devices": [],
    }
    for decl in trace.devices:
        entry = {"id": decl.device_id}
        if decl.owner_rank is not None:
            entry["owner_rank"] = decl.owner_rank
        entry["records"] = device_recs[decl.device_id]
        doc["devices"].append(entry)
    return (json.dumps(doc, indent=2) + "\n").encode("utf-8")


_TARGETS: dict[str, HostState | DeviceActivityKind] = {**_HOST_STATES, **_DEVICE_KINDS}
_MATCH_KEYS = ("name_contains", "name_equals", "category_contains", "category_equals")


@dataclass(frozen=True)
class MappingRule:
    """One importer rule; first matching rule in the list wins."""

    field: str  # "name" | "category"
    mode: str  # "contains" | "equals"
    pattern: str
    target: HostState | DeviceActivityKind
    resource: int | str  # fixed id, or "pid"/"tid" to take it from the event

    def matches(self, name: str, category: str) -> bool:
        subject = name if self.field == "name" else category
        return self.pattern in subject if self.mode == "contains" else self.pattern == subject


@dataclass(frozen=True)
class CategoryMapping:
    rules: tuple[MappingRule, ...]
    default_policy: str  # "drop" | "error"


def read_mapping(data: bytes | str) -> CategoryMapping:
    """Parse a mapping document (same strictness as the trace format)."""
    doc = _obj(_load_json(data, "mapping document"), "$")
    policy = _take(doc, "$", "default_policy")
    if policy not in ("drop", "error"):
        raise TraceFormatError(f"$.default_policy: expected 'drop' or 'error', got {policy!r}")

    rules = []
    entries = _array(_take(doc, "$", "rules"), "$.rules")
    if not entries:
        raise TraceFormatError("$.rules: at least one rule is required")
    for i, entry in enumerate(entries):
        path = f"$.rules[{i}]"
        entry = _obj(entry, path)
        present = [k for k in _MATCH_KEYS if k in entry]
        if len(present) != 1:
            raise TraceFormatError(
                f"{path}: exactly one of {', '.join(_MATCH_KEYS)} is required"
            )
        key = present[0]
        pattern = _take(entry, path, key)
        if not isinstance(pattern, str):
            raise TraceFormatError(f"{path}.{key}: expected string, got {pattern!r}")
        field, mode = key.rsplit("_", 1)
        field = "category" if field == "category" else "name"
        target = _enum(_take(entry, path, "target"), _TARGETS, f"{path}.target")
        resource = _take(entry, path, "resource")
        if isinstance(resource, bool) or not (
            isinstance(resource, int) or resource in ("pid", "tid")
        ):
            raise TraceFormatError(
                f"{path}.resource: expected non-negative integer, 'pid' or 'tid'; "
                f"got {resource!r}"
            )
        if isinstance(resource, int) and resource < 0:
            raise TraceFormatError(f"{path}.resource: negative value {resource}")
        _no_extras(entry, path)
        rules.append(MappingRule(field, mode, pattern, target, resource))
    _no_extras(doc, "$")
    return CategoryMapping(tuple(rules), policy)


def _us_to_ns(value: Any, path: str) -> int:
    """Exact microsecond-to-nanosecond conversion; fractional values rejected."""
    if isinstance(value, bool):
        raise TraceFormatError(f"{path}: expected number, got {value!r}")
    if isinstance(value, float):
        if not value.is_integer():
            raise TraceFormatError(
                f"{path}: fractional timestamp {value!r} (would require rounding)"
            )
        value = int(value)
    if not isinstance(value, int):
        raise TraceFormatError(f"{path}: expected number, got {value!r}")
    if value < 0:
        raise TraceFormatError(f"{path}: negative value {value}")
    return value * 1000


def import_mapped(data: bytes | str, mapping: CategoryMapping) -> tuple[Trace, list[str]]:
    """Convert a Chrome-trace-event-style document into a Trace.

    Only complete-span events (``"ph": "X"``) are considered; other phases
    (metadata, counters, ...) are ignored. Source timestamps are
    microseconds and are converted to nanoseconds exactly. Events matching
    no rule are dropped with a warning or, under default_policy=error,
    abort the import listing up to 10 offenders.
    """
    doc = _load_json(data, "events document")
    if isinstance(doc, dict):
        events = _array(doc.get("traceEvents"), "$.traceEvents")
    else:
        events = _array(doc, "$")

    host_records = []
    device_records = []
    warnings = []
    unmapped: list[str] = []
    for i, event in enumerate(events):
        path = f"$[{i}]"
        if not isinstance(event, dict) or event.get("ph") != "X":
            continue
        name = event.get("name")
        if not isinstance(name, str):
            raise TraceFormatError(f"{path}.name: expected string, got {name!r}")
        category = event.get("cat", "")
        if not isinstance(category, str):
            raise TraceFormatError(f"{path}.cat: expected string, got {category!r}")
        for key in ("ts", "dur"):
            if key not in event:
                raise TraceFormatError(f"{path}: missing required field {key!r}")
        start = _us_to_ns(event["ts"], f"{path}.ts")
        end = start + _us_to_ns(event["dur"], f"{path}.dur")

        rule = next((r for r in mapping.rules if r.matches(name, category)), None)
        if rule is None:
            if mapping.default_policy == "error":
                unmapped.append(f"event {i} ({name!r})")
            else:
                warnings.append(f"dropped unmapped event {i} ({name!r})")
            continue
        if isinstance(rule.resource, int):
            resource = rule.resource
        else:
            resource = _nonneg_int(event.get(rule.resource), f"{path}.{rule.resource}")
        if isinstance(rule.target, HostState):
            host_records.append(HostRecord(resource, rule.target, Interval(start, end)))
        else:
            device_records.append(DeviceRecord(resource, rule.target, Interval(start, end)))

    if unmapped:
        shown = "; ".join(unmapped[:10])
        more = f" (+{len(unmapped) - 10} more)" if len(unmapped) > 10 else ""
        raise MappingError(f"{len(unmapped)} event(s) matched no rule: {shown}{more}")

    trace = Trace(
        host_processes=tuple(sorted({r.rank for r in host_records})),
        devices=tuple(DeviceDecl(d) for d in sorted({r.device_id for r in device_records})),
        host_records=tuple(host_records),
        device_records=tuple(device_records),
    )
    return trace, warnings
