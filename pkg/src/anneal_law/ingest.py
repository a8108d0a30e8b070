"""Parse observed loss curves from training-log exports.

Accepts CSV (header row required) and JSON-lines (one object per line)
exports.  Rows that fail to parse are counted, and parsing aborts when more
than a configurable fraction is malformed.  Logged token counts can stand in
for step numbers given a per-step batch size.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np

from .fit import LossCurve
from .schedule import ScheduleSpec

FORMATS = ("csv", "json_lines")
DEFAULT_COLUMNS = {"step": "step", "value": "loss", "lr": "lr", "tokens": "tokens"}


class IngestError(ValueError):
    pass


@dataclass(frozen=True)
class RawLog:
    """Typed rows extracted from a training-log export.

    Steps are non-decreasing; duplicate steps were resolved last-write-wins.
    ``lrs``/``tokens`` are present only when the source carried them.
    """

    steps: np.ndarray
    values: np.ndarray
    lrs: np.ndarray | None
    tokens: np.ndarray | None
    source_format: str
    value_column: str
    malformed_rows: int = 0

    def __len__(self) -> int:
        return len(self.steps)

    def to_csv(self, path_or_buf) -> None:
        """Write the log back out as CSV (columns as originally mapped)."""
        columns = ["step", self.value_column]
        data = [self.steps, self.values]
        if self.lrs is not None:
            columns.append("lr")
            data.append(self.lrs)
        if self.tokens is not None:
            columns.append("tokens")
            data.append(self.tokens)

        def dump(fh):
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(columns)
            for row in zip(*data):
                writer.writerow([_fmt(v) for v in row])

        if hasattr(path_or_buf, "write"):
            dump(path_or_buf)
        else:
            with open(path_or_buf, "w", newline="") as fh:
                dump(fh)


def _fmt(v):
    if isinstance(v, (int, np.integer)):
        return int(v)
    return repr(float(v))


def parse(
    source,
    format: str = "csv",
    column_map: dict | None = None,
    *,
    malformed_threshold: float = 0.05,
    batch_size_tokens: float | None = None,
) -> RawLog:
    """Parse a CSV or JSON-lines export into a RawLog.

    ``column_map`` maps the logical names ``step``, ``value``, ``lr``,
    ``tokens`` to the column names in the file.  ``step`` and ``value`` are
    required; when ``step`` is absent but ``tokens`` is present,
    ``batch_size_tokens`` converts tokens to steps.  Aborts when the fraction
    of malformed rows exceeds ``malformed_threshold``.
    """
    if format not in FORMATS:
        raise IngestError(f"unknown format {format!r}")
    columns = dict(DEFAULT_COLUMNS)
    columns.update(column_map or {})

    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source) as fh:
            text = fh.read()

    if format == "csv":
        records, fieldnames = _read_csv(text)
    else:
        records, fieldnames = _read_json_lines(text)

    has_step = columns["step"] in fieldnames
    has_tokens = columns["tokens"] in fieldnames
    if not has_step and not (has_tokens and batch_size_tokens):
        raise IngestError(f"missing required column {columns['step']!r}")
    if columns["value"] not in fieldnames:
        raise IngestError(f"missing required column {columns['value']!r}")
    has_lr = columns["lr"] in fieldnames

    rows = []
    malformed = 0
    for rec in records:
        try:
            value = float(rec[columns["value"]])
            tokens = float(rec[columns["tokens"]]) if has_tokens else None
            if has_step:
                step = int(float(rec[columns["step"]]))
            else:
                step = int(round(tokens / batch_size_tokens))
            lr = float(rec[columns["lr"]]) if has_lr else None
            if not np.isfinite(value):
                raise ValueError
        except (KeyError, TypeError, ValueError):
            malformed += 1
            continue
        rows.append((step, value, lr, tokens))

    total = len(rows) + malformed
    if total == 0:
        raise IngestError("no rows found")
    if malformed / total > malformed_threshold:
        raise IngestError(
            f"{malformed}/{total} rows malformed (threshold {malformed_threshold:.0%})"
        )

    steps = [r[0] for r in rows]
    if any(b < a for a, b in zip(steps, steps[1:])):
        raise IngestError("steps must be non-decreasing")

    # Last write wins for duplicate steps.
    dedup: dict[int, tuple] = {}
    for row in rows:
        dedup[row[0]] = row
    rows = [dedup[s] for s in sorted(dedup)]

    return RawLog(
        steps=np.array([r[0] for r in rows], dtype=np.int64),
        values=np.array([r[1] for r in rows], dtype=float),
        lrs=np.array([r[2] for r in rows], dtype=float) if has_lr else None,
        tokens=np.array([r[3] for r in rows], dtype=float) if has_tokens else None,
        source_format=format,
        value_column=columns["value"],
        malformed_rows=malformed,
    )


def _read_csv(text: str):
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None:
        raise IngestError("empty CSV")
    return list(reader), set(reader.fieldnames)


def _read_json_lines(text: str):
    records = []
    fieldnames: set = set()
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError:
            obj = None
        if not isinstance(obj, dict):
            # Count at conversion time by emitting an empty record.
            obj = {}
        records.append(obj)
        fieldnames.update(obj)
    if not records:
        raise IngestError("empty JSON-lines input")
    return records, fieldnames


def to_loss_curve(
    log: RawLog,
    spec: ScheduleSpec,
    *,
    stride: int = 1,
    smooth_window: int = 1,
    drop_warmup: bool = False,
    label: str = "",
    n: float | None = None,
) -> LossCurve:
    """Turn a RawLog into a LossCurve aligned with a schedule spec.

    Optional centered moving-average smoothing (odd window; edges use the
    available neighbors), stride subsampling, and exclusion of warmup-region
    samples.  Steps are never reindexed.
    """
    if stride < 1:
        raise IngestError("stride must be >= 1")
    if smooth_window < 1 or smooth_window % 2 == 0:
        raise IngestError("smooth_window must be odd and >= 1")
    if np.any(log.steps > spec.total_steps):
        raise IngestError("log contains steps beyond the schedule's total_steps")

    values = log.values
    if smooth_window > 1:
        half = smooth_window // 2
        smoothed = np.empty_like(values)
        for i in range(len(values)):
            lo = max(0, i - half)
            hi = min(len(values), i + half + 1)
            smoothed[i] = values[lo:hi].mean()
        values = smoothed

    steps = log.steps
    keep = np.ones(len(steps), dtype=bool)
    if drop_warmup:
        keep &= steps > spec.warmup_steps
    steps = steps[keep][::stride]
    values = values[keep][::stride]
    if len(steps) == 0:
        raise IngestError("no samples left after filtering")
    return LossCurve(steps=steps, losses=values, schedule=spec, n=n, label=label)
