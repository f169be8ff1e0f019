"""CSV / JSON input and output for expression data, designs and reports.

Expression data use one row per measurement::

    gene,channel,x,t,value
    kr,U,45.5,53.0,0.81

``channel`` is ``U`` (mRNA) or ``Y`` (protein), ``x`` the A-P position in
percent, ``t`` the time in minutes.
"""
from __future__ import annotations

import csv
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .types import Channel, ChannelObservations

__all__ = [
    "DataFormatError",
    "ExpressionRecord",
    "LoadReport",
    "load_csv",
    "save_csv",
    "AffineMap",
    "normalize_domain",
    "train_test_split",
    "to_observations",
    "save_design",
    "load_design",
    "write_json",
    "read_json",
]

HEADER = ["gene", "channel", "x", "t", "value"]


class DataFormatError(ValueError):
    """Malformed input file; ``problems`` lists ``(line, message)`` pairs."""

    def __init__(self, problems):
        self.problems = list(problems)
        lines = "; ".join(f"line {ln}: {msg}" for ln, msg in self.problems[:10])
        more = f" (+{len(self.problems) - 10} more)" if len(self.problems) > 10 else ""
        super().__init__(lines + more)


@dataclass(frozen=True)
class ExpressionRecord:
    gene: str
    channel: Channel
    x: float
    t: float
    value: float


@dataclass
class LoadReport:
    records: list
    rejected: list = field(default_factory=list)  # (line, reason)
    filtered: list = field(default_factory=list)  # lines dropped by the time window
    n_rows: int = 0


def _parse_row(row, x_range):
    if len(row) != len(HEADER):
        raise ValueError(f"expected {len(HEADER)} fields, got {len(row)}")
    gene, chan, xs, ts, vs = (c.strip() for c in row)
    channel = Channel.parse(chan)
    try:
        x, t, v = float(xs), float(ts), float(vs)
    except ValueError:
        raise ValueError(f"non-numeric field in {row!r}") from None
    if not all(math.isfinite(a) for a in (x, t, v)):
        raise ValueError("non-finite numeric field")
    if not x_range[0] <= x <= x_range[1]:
        raise ValueError(f"x={x} outside [{x_range[0]}, {x_range[1]}]")
    if t < 0:
        raise ValueError(f"negative time t={t}")
    return ExpressionRecord(gene, channel, x, t, v)


def load_csv(path, t_min=None, t_max=None, genes=None, x_range=(0.0, 100.0), strict=True):
    """Read an expression CSV.

    Parameters
    ----------
    t_min, t_max
        Optional time window; rows outside it are counted in
        ``LoadReport.filtered`` (e.g. ``t_min=50`` drops the early, noisy
        part of the gap-gene data).
    genes
        Optional iterable of gene names to keep; others go to ``filtered``.
    strict
        Raise :class:`DataFormatError` if any row is invalid.  Otherwise the
        bad rows are reported in ``LoadReport.rejected``.
    """
    report = LoadReport(records=[])
    keep = None if genes is None else {g.strip() for g in genes}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header] != HEADER:
            raise DataFormatError([(1, f"header must be {','.join(HEADER)}, got {header!r}")])
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            report.n_rows += 1
            try:
                rec = _parse_row(row, x_range)
            except ValueError as exc:
                report.rejected.append((line, str(exc)))
                continue
            if (t_min is not None and rec.t < t_min) or (t_max is not None and rec.t > t_max):
                report.filtered.append(line)
            elif keep is not None and rec.gene not in keep:
                report.filtered.append(line)
            else:
                report.records.append(rec)
    if strict and report.rejected:
        raise DataFormatError(report.rejected)
    return report


def save_csv(records, path):
    rows = [[r.gene, r.channel.value, repr(r.x), repr(r.t), repr(r.value)] for r in records]
    _atomic_write(path, lambda fh: _write_rows(fh, HEADER, rows))


def _write_rows(fh, header, rows):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)


def _atomic_write(path, writer):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="", encoding="utf-8") as fh:
            writer(fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


@dataclass(frozen=True)
class AffineMap:
    """``x' = x_scale * x + x_shift`` and ``t' = t_scale * t + t_shift``."""

    x_scale: float = 1.0
    x_shift: float = 0.0
    t_scale: float = 1.0
    t_shift: float = 0.0

    def __post_init__(self):
        if self.x_scale == 0 or self.t_scale == 0:
            raise ValueError("affine map must be invertible")

    @classmethod
    def between(cls, src, dst):
        """Map the box ``src = ((x0, x1), (t0, t1))`` onto ``dst``."""
        (sx0, sx1), (st0, st1) = src
        (dx0, dx1), (dt0, dt1) = dst
        xs = (dx1 - dx0) / (sx1 - sx0)
        ts = (dt1 - dt0) / (st1 - st0)
        return cls(xs, dx0 - xs * sx0, ts, dt0 - ts * st0)

    def forward(self, x, t):
        return self.x_scale * np.asarray(x) + self.x_shift, self.t_scale * np.asarray(t) + self.t_shift

    def inverse(self, x, t):
        return (np.asarray(x) - self.x_shift) / self.x_scale, (np.asarray(t) - self.t_shift) / self.t_scale

    def to_dict(self):
        return {"x_scale": self.x_scale, "x_shift": self.x_shift, "t_scale": self.t_scale, "t_shift": self.t_shift}


def normalize_domain(records, target=((0.0, 1.0), (0.0, 1.0)), source=None):
    """Affinely map record coordinates from ``source`` (default: data bounding box) to ``target``.

    Both channels are mapped with the same transformation.  Returns the new
    records and the :class:`AffineMap`.
    """
    if not records:
        raise ValueError("normalize_domain needs at least one record")
    if source is None:
        xs = [r.x for r in records]
        ts = [r.t for r in records]
        source = ((min(xs), max(xs)), (min(ts), max(ts)))
    amap = AffineMap.between(source, target)
    out = []
    for r in records:
        x, t = amap.forward(r.x, r.t)
        out.append(ExpressionRecord(r.gene, r.channel, float(x), float(t), r.value))
    return out, amap


def train_test_split(n, train_frac=0.3, seed=0):
    """Seeded random split of ``range(n)`` into sorted train / test index arrays."""
    if not 0 < train_frac < 1:
        raise ValueError(f"train_frac must lie in (0, 1), got {train_frac}")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    k = max(1, int(round(train_frac * n)))
    return np.sort(perm[:k]), np.sort(perm[k:])


def to_observations(records, nuggets=None):
    """Group records into one :class:`ChannelObservations` per channel present."""
    nuggets = nuggets or {}
    out = []
    for ch in (Channel.U, Channel.Y):
        rs = [r for r in records if r.channel is ch]
        if rs:
            design = np.array([[r.x, r.t] for r in rs])
            out.append(ChannelObservations(ch, design, [r.value for r in rs], nuggets.get(ch, 0.0)))
    return out


def save_design(design, path):
    rows = [[repr(float(x)), repr(float(t))] for x, t in np.asarray(design)]
    _atomic_write(path, lambda fh: _write_rows(fh, ["x", "t"], rows))


def load_design(path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header] != ["x", "t"]:
            raise DataFormatError([(1, f"header must be x,t, got {header!r}")])
        pts, bad = [], []
        for row in reader:
            if not row:
                continue
            try:
                pts.append([float(row[0]), float(row[1])])
            except (ValueError, IndexError):
                bad.append((reader.line_num, f"bad design row {row!r}"))
        if bad:
            raise DataFormatError(bad)
    return np.array(pts).reshape(-1, 2)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k.value if isinstance(k, Channel) else k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, Channel):
        return obj.value
    return obj


def write_json(obj, path):
    text = json.dumps(_jsonable(obj), indent=2, sort_keys=True)
    _atomic_write(path, lambda fh: fh.write(text + "\n"))


def read_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
