"""Journal-entry ingestion and the financial statements network.

A business process is the set of journal lines sharing a transaction id.
Each line's share is its value divided by the total of its side (debits
positive, credits negative), so every share lies in [-1, 1].  Interval
scaling then turns the many-valued network into a binary context.
"""

from __future__ import annotations

import csv
import io
import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .context import FormalContext

HEADER = ("ID", "TID", "FA name", "Value")
SIDE_TOLERANCE = 1e-9


class JournalParseError(ValueError):
    def __init__(self, row: int, message: str):
        super().__init__(f"row {row}: {message}")
        self.row = row


class ExtractionError(ValueError):
    def __init__(self, tid: str, message: str):
        super().__init__(f"tid {tid}: {message}")
        self.tid = tid


@dataclass(frozen=True)
class JournalLine:
    id: int
    tid: str
    account: str
    value: float


@dataclass(frozen=True)
class ScalingSpec:
    intervals: int = 5

    def __post_init__(self):
        if not isinstance(self.intervals, int) or self.intervals < 1:
            raise ValueError(f"intervals must be a positive integer, got {self.intervals!r}")


@dataclass(frozen=True)
class ManyValuedContext:
    """Processes x accounts with signed shares; absent pairs have share 0."""

    processes: tuple[str, ...]
    accounts: tuple[str, ...]
    shares: dict = field(compare=False)

    def __post_init__(self):
        object.__setattr__(self, "processes", tuple(self.processes))
        object.__setattr__(self, "accounts", tuple(self.accounts))
        known = set(self.accounts)
        shares = {}
        for p in self.processes:
            row = dict(self.shares.get(p, {}))
            unknown = set(row) - known
            if unknown:
                raise ValueError(f"process {p!r} has unknown accounts {sorted(unknown)}")
            shares[p] = {a: float(v) for a, v in row.items() if v != 0}
        object.__setattr__(self, "shares", shares)

    def __eq__(self, other):
        if not isinstance(other, ManyValuedContext):
            return NotImplemented
        return (self.processes, self.accounts, self.shares) == (
            other.processes,
            other.accounts,
            other.shares,
        )

    def share(self, process: str, account: str) -> float:
        try:
            row = self.shares[process]
        except KeyError:
            raise KeyError(f"unknown process {process!r}") from None
        return row.get(account, 0.0)

    def vector(self, process: str) -> tuple[float, ...]:
        return tuple(self.share(process, a) for a in self.accounts)

    def restrict(self, processes: Iterable[str]) -> "ManyValuedContext":
        keep = set(processes)
        missing = keep - set(self.processes)
        if missing:
            raise KeyError(f"unknown processes {sorted(missing)}")
        procs = tuple(p for p in self.processes if p in keep)
        return ManyValuedContext(procs, self.accounts, {p: self.shares[p] for p in procs})

    def to_json(self) -> dict:
        return {
            "processes": list(self.processes),
            "accounts": list(self.accounts),
            "shares": {p: {a: row[a] for a in self.accounts if a in row} for p, row in self.shares.items()},
        }

    @classmethod
    def from_json(cls, data: dict) -> "ManyValuedContext":
        return cls(tuple(data["processes"]), tuple(data["accounts"]), data.get("shares", {}))


def normalize_account(name: str) -> str:
    return re.sub(r"\s+", " ", name.strip())


def parse_journal(data: bytes | str) -> list[JournalLine]:
    """Parse a journal CSV with header ``ID,TID,FA name,Value``.

    Row numbers in errors count the header as row 1.
    """
    text = data.decode("utf-8-sig") if isinstance(data, bytes) else data
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        return []
    if tuple(h.strip() for h in header) != HEADER:
        raise JournalParseError(1, f"expected header {','.join(HEADER)!r}, got {','.join(header)!r}")
    lines: list[JournalLine] = []
    seen: set[int] = set()
    for rowno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 4:
            raise JournalParseError(rowno, f"expected 4 fields, got {len(row)}")
        raw_id, tid, account, raw_value = (c.strip() for c in row)
        try:
            line_id = int(raw_id)
        except ValueError:
            raise JournalParseError(rowno, f"ID {raw_id!r} is not an integer") from None
        if line_id in seen:
            raise JournalParseError(rowno, f"duplicate ID {line_id}")
        seen.add(line_id)
        try:
            value = float(raw_value)
        except ValueError:
            raise JournalParseError(rowno, f"value {raw_value!r} is not numeric") from None
        if not math.isfinite(value) or value == 0:
            raise JournalParseError(rowno, f"value must be finite and nonzero, got {raw_value!r}")
        account = normalize_account(account)
        if not tid:
            raise JournalParseError(rowno, "empty TID")
        if not account:
            raise JournalParseError(rowno, "empty account name")
        lines.append(JournalLine(line_id, tid, account, value))
    return lines


def process_id(tid: str) -> str:
    return f"a{tid}" if tid.isdigit() else tid


def extract_processes(lines: Sequence[JournalLine], balance_tolerance: float = 1e-6) -> ManyValuedContext:
    """Group lines by tid and normalize each side to relative shares."""
    tids: list[str] = []
    accounts: list[str] = []
    totals: dict[str, dict[str, float]] = {}
    for line in lines:
        if line.tid not in totals:
            tids.append(line.tid)
            totals[line.tid] = {}
        if line.account not in accounts:
            accounts.append(line.account)
        row = totals[line.tid]
        row[line.account] = row.get(line.account, 0.0) + line.value

    shares = {}
    for tid in tids:
        row = totals[tid]
        debit = sum(v for v in row.values() if v > 0)
        credit = -sum(v for v in row.values() if v < 0)
        if debit == 0 or credit == 0:
            raise ExtractionError(tid, "needs at least one debit and one credit line")
        if abs(debit - credit) > balance_tolerance * max(debit, credit):
            raise ExtractionError(tid, f"unbalanced: debits {debit:g} vs credits {credit:g}")
        shares[process_id(tid)] = {
            a: (v / debit if v > 0 else v / credit) for a, v in row.items() if v != 0
        }
    return ManyValuedContext(tuple(process_id(t) for t in tids), tuple(accounts), shares)


def bucket(value: float, intervals: int) -> int:
    """1-based interval index of ``value`` in [-1, 1] split into equal parts.

    Buckets are half-open on the right except the last, which is closed.
    Values within 1e-9 of a boundary snap onto it so float noise from the
    share division does not move a value across.
    """
    if not -1 - 1e-9 <= value <= 1 + 1e-9:
        raise ValueError(f"share {value} outside [-1, 1]")
    pos = (value + 1) * intervals / 2
    nearest = round(pos)
    if abs(pos - nearest) < 1e-9:
        pos = nearest
    return min(max(int(math.floor(pos)) + 1, 1), intervals)


def feature_name(account: str, k: int) -> str:
    return f"{account}#{k}"


def split_feature(feature: str) -> tuple[str, int]:
    account, _, k = feature.rpartition("#")
    if not account or not k.isdigit():
        raise ValueError(f"not a scaled feature: {feature!r}")
    return account, int(k)


def scaled_features(accounts: Iterable[str], spec: ScalingSpec) -> list[str]:
    return [feature_name(a, k) for a in accounts for k in range(1, spec.intervals + 1)]


def interval_scale(mvc: ManyValuedContext, spec: ScalingSpec) -> FormalContext:
    features = scaled_features(mvc.accounts, spec)
    index = {f: i for i, f in enumerate(features)}
    rows = []
    for p in mvc.processes:
        r = 0
        for a in mvc.accounts:
            r |= 1 << index[feature_name(a, bucket(mvc.share(p, a), spec.intervals))]
        rows.append(r)
    return FormalContext(mvc.processes, tuple(features), tuple(rows))


def validate_network(mvc: ManyValuedContext, tolerance: float = SIDE_TOLERANCE) -> list[str]:
    """Invariant violations of a network; an empty list means valid."""
    problems = []
    for p in mvc.processes:
        row = mvc.shares[p]
        for a, v in row.items():
            if not -1 <= v <= 1:
                problems.append(f"{p}: share of {a!r} is {v}, outside [-1, 1]")
        pos = sum(v for v in row.values() if v > 0)
        neg = sum(v for v in row.values() if v < 0)
        if pos == 0 or neg == 0:
            side = "debit" if pos == 0 else "credit"
            problems.append(f"{p}: no {side} side")
        if pos and abs(pos - 1) > tolerance:
            problems.append(f"{p}: debit shares sum to {pos}, expected 1")
        if neg and abs(neg + 1) > tolerance:
            problems.append(f"{p}: credit shares sum to {neg}, expected -1")
    return problems
