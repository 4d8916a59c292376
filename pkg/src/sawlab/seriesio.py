"""Series files, external ingestion, the run cache and plot-data CSV.

A series file is UTF-8 text with LF line endings::

    # lattice: square
    # class: worm
    # provenance: fixture
    # tool: sawlab 0.1.0
    1\t1
    2\t1
    ...

Two-layer files carry ``# layout: bivariate`` and rows ``n\tk\tcount``.
Counts are decimal strings of unbounded size. Headers hold no timestamps,
so equal counts always give byte-identical files.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import re
import tempfile
import time
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from . import __version__
from .enumeration import BivariateCounts, CountSeries
from .lattice import LatticeKind, WalkClass

# Bump when a counting convention changes; stale cache entries are then ignored.
CONVENTION_VERSION = "1"


class SeriesFormatError(ValueError):
    def __init__(self, message: str, line: int | None = None, lines: list[int] | None = None):
        self.line = line
        self.lines = lines or ([line] if line is not None else [])
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)


# --------------------------------------------------------------------------
# series files


def _header(lattice, walk_class, provenance: str, extra: dict | None = None) -> list[str]:
    lines = [
        f"# lattice: {lattice.value if lattice else 'none'}",
        f"# class: {walk_class.value if walk_class else 'none'}",
        f"# provenance: {provenance}",
        f"# tool: sawlab {__version__}",
    ]
    for k, v in (extra or {}).items():
        lines.append(f"# {k}: {v}")
    return lines


def format_series(series: CountSeries | BivariateCounts, extra: dict | None = None) -> str:
    if isinstance(series, BivariateCounts):
        lines = _header(LatticeKind.TWO_LAYER, WalkClass.SAW, series.provenance,
                        {"layout": "bivariate", **(extra or {})})
        for n in range(1, series.n_max + 1):
            lines += [f"{n}\t{k}\t{c}" for k, c in enumerate(series.row(n))]
    else:
        lines = _header(series.lattice, series.walk_class, series.provenance, extra)
        lines += [f"{n}\t{c}" for n, c in series.items()]
    return "\n".join(lines) + "\n"


def write_series(path, series, extra: dict | None = None) -> str:
    """Write atomically; returns the SHA-256 digest of the file content."""
    text = format_series(series, extra)
    atomic_write(Path(path), text)
    return digest(text)


def digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def parse_header(text: str) -> dict[str, str]:
    out = {}
    for line in text.splitlines():
        if not line.startswith("#"):
            break
        key, _, value = line[1:].partition(":")
        out[key.strip()] = value.strip()
    return out


def _enum_or_none(enum_cls, value):
    return None if value in (None, "none") else enum_cls(value)


def parse_series(text: str) -> CountSeries | BivariateCounts:
    header = parse_header(text)
    bivariate = header.get("layout") == "bivariate"
    width = 3 if bivariate else 2
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != width or not all(re.fullmatch(r"-?\d+", f) for f in fields):
            raise SeriesFormatError(f"expected {width} tab-separated integers, got {line!r}", lineno)
        rows.append((lineno, tuple(int(f) for f in fields)))
    if not rows:
        raise SeriesFormatError("no data rows")
    provenance = header.get("provenance", "fixture")
    if bivariate:
        table: dict[int, dict[int, int]] = {}
        for lineno, (n, k, c) in rows:
            if not 0 <= k <= n:
                raise SeriesFormatError(f"k={k} out of range for n={n}", lineno)
            table.setdefault(n, {})[k] = c
        ns = sorted(table)
        if ns != list(range(1, len(ns) + 1)):
            raise SeriesFormatError("bivariate rows must cover n = 1, 2, ... without gaps")
        out_rows = tuple(tuple(table[n].get(k, 0) for k in range(n + 1)) for n in ns)
        return BivariateCounts(out_rows, provenance)
    prev = None
    for lineno, (n, c) in rows:
        if prev is not None and n != prev + 1:
            raise SeriesFormatError(f"n must increase by 1 (got {n} after {prev})", lineno)
        if c < 0:
            raise SeriesFormatError("counts must be non-negative", lineno)
        prev = n
    return CountSeries(
        _enum_or_none(LatticeKind, header.get("lattice")),
        _enum_or_none(WalkClass, header.get("class")),
        tuple(c for _, (_, c) in rows),
        provenance,
        start=rows[0][1][0],
    )


def read_series(path) -> CountSeries | BivariateCounts:
    return parse_series(Path(path).read_text(encoding="utf-8"))


FIXTURES = {
    ("square", "worm"): "worms_square.tsv",
    ("triangular", "worm"): "worms_triangular.tsv",
}


def fixture_path(lattice: str, walk_class: str = "worm") -> Path:
    return Path(str(resources.files("sawlab") / "data" / FIXTURES[(lattice, walk_class)]))


def load_fixture(lattice: str, walk_class: str = "worm") -> CountSeries:
    return read_series(fixture_path(lattice, walk_class))


# --------------------------------------------------------------------------
# external ingestion


def _split(line: str, fmt: str) -> list[str]:
    if fmt == "csv" or (fmt == "auto" and "," in line):
        return [f.strip() for f in line.split(",")]
    return line.split()


def parse_external(text: str, fmt: str = "auto", column: int = 1) -> list[tuple[int, int]]:
    """Parse an (n, count) listing separated by commas or whitespace.

    Comment lines (``#``, ``%``, ``//``) and blank lines are skipped, as is a
    single non-numeric header row before the data. Every other row must hold
    an integer index and an integer count; all bad rows are reported at once.
    """
    if fmt not in ("auto", "csv", "whitespace"):
        raise ValueError("format must be auto, csv or whitespace")
    out, bad = [], []
    seen_data = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip().lstrip("﻿")
        if not line or line.startswith(("#", "%", "//")):
            continue
        fields = _split(line, fmt)
        numeric = [re.fullmatch(r"[+-]?\d+", f) is not None for f in fields]
        if not seen_data and not any(numeric):
            continue  # column header
        seen_data = True
        if len(fields) <= column or not numeric[0] or not numeric[column]:
            bad.append(lineno)
            continue
        out.append((int(fields[0]), int(fields[column])))
    if bad:
        raise SeriesFormatError("unparseable rows at lines " + ", ".join(map(str, bad)), lines=bad)
    if not out:
        raise SeriesFormatError("no data rows")
    return out


def ingest_external(source: str, lattice: LatticeKind | None = None,
                    walk_class: WalkClass | None = WalkClass.SAW, fmt: str = "auto",
                    column: int = 1, allow_network: bool = False) -> CountSeries:
    """Normalise an external listing into a series (provenance ``ingested``).

    A leading n = 0 row is dropped. Indices must then run 1, 2, ... without
    gaps. URLs are only fetched with ``allow_network``.
    """
    if re.match(r"^https?://", source):
        if not allow_network:
            raise PermissionError("network fetch disabled; pass allow_network=True")
        from urllib.request import urlopen

        with urlopen(source, timeout=60) as resp:  # noqa: S310 - explicit opt-in
            text = resp.read().decode("utf-8")
    else:
        text = Path(source).read_text(encoding="utf-8")
    rows = parse_external(text, fmt, column)
    if rows[0][0] == 0:
        rows = rows[1:]
    ns = [n for n, _ in rows]
    if ns != list(range(1, len(ns) + 1)):
        raise SeriesFormatError("indices must run 1, 2, ... without gaps")
    if any(c < 0 for _, c in rows):
        raise SeriesFormatError("negative counts")
    return CountSeries(lattice, walk_class, tuple(c for _, c in rows), "ingested")


def source_note(source: str) -> dict:
    return {"source": source}


# --------------------------------------------------------------------------
# run cache


def atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


@dataclass(frozen=True)
class RunCacheEntry:
    lattice: str
    walk_class: str
    n_max: int
    convention: str
    series_path: str
    digest: str
    wall_time: float
    threads: int

    def to_json(self) -> str:
        return json.dumps(self.__dict__, indent=2, sort_keys=True) + "\n"


class RunCache:
    """Whole-run cache keyed on (lattice, class, n_max, convention version)."""

    def __init__(self, directory):
        self.dir = Path(directory)

    def _stem(self, lattice: str, walk_class: str, n_max: int) -> str:
        return f"{lattice}-{walk_class}-{n_max}-v{CONVENTION_VERSION}"

    def lookup(self, lattice: str, walk_class: str, n_max: int) -> tuple[str, RunCacheEntry] | None:
        """Cached series text, or None on a miss or a digest mismatch."""
        meta = self.dir / (self._stem(lattice, walk_class, n_max) + ".json")
        try:
            entry = RunCacheEntry(**json.loads(meta.read_text(encoding="utf-8")))
            text = (self.dir / entry.series_path).read_text(encoding="utf-8")
        except (OSError, ValueError, TypeError):
            return None
        if entry.convention != CONVENTION_VERSION or digest(text) != entry.digest:
            return None
        return text, entry

    def store(self, lattice: str, walk_class: str, n_max: int, text: str,
              wall_time: float, threads: int) -> RunCacheEntry:
        stem = self._stem(lattice, walk_class, n_max)
        atomic_write(self.dir / (stem + ".tsv"), text)
        entry = RunCacheEntry(lattice, walk_class, n_max, CONVENTION_VERSION, stem + ".tsv",
                              digest(text), round(wall_time, 6), threads)
        atomic_write(self.dir / (stem + ".json"), entry.to_json())
        return entry


def timed(fn, *args, **kwargs):
    t0 = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - t0


# --------------------------------------------------------------------------
# plot data


def format_plot_csv(rows, header=("n", "x", "y")) -> str:
    """CSV text of finite (label, x, y) rows, sorted by the first column."""
    rows = sorted(rows, key=lambda r: r[0])
    for r in rows:
        if not all(math.isfinite(float(v)) for v in r):
            raise ValueError(f"non-finite plot value in row {r}")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([r[0]] + [repr(float(v)) for v in r[1:]])
    return buf.getvalue()
