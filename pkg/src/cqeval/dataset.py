"""Ingestion of subjectively rated image databases.

Two on-disk layouts are understood, plus a synthetic-fixture variant:

* TID-style: distorted images ``iXX_YY_Z.bmp`` (reference XX 1..25,
  distortion type YY 1..24, level Z 1..5) next to references ``iXX.bmp``;
  MOS on a [0, 9] scale.
* CQD-style: method subdirectories (kmeans, mediancut, octree, wu, som)
  holding ``<N>colors_<id>.png`` with N in {4,8,16,32,64,128,256} and
  reference id 1..25; references ``<id>.png`` at the root; MOS on [0, 100],
  normalized to [0, 9] at load time.
* SYNTH: the fixture layout written by the ``distort`` command - CQD-style
  names directly in the root, references ``<id>.png``, MOS already on [0, 9].

MOS values come from a manifest CSV (``name,mos[,std]``; ``#`` comments
allowed); every image found on disk must have a MOS row, never a default.
"""

from __future__ import annotations

import csv
import dataclasses
import re
from pathlib import Path, PurePosixPath

import numpy as np

# canonical database names
TID_FULL = "TID"
TID_STAR = "TID*"
TIDD_STAR = "TIDD*"
CQD = "CQD"
TID_STAR_CQD = "TID*CQD"
TIDD_STAR_CQD = "TIDD*CQD"
SYNTH = "SYNTH"

#: the five main evaluation databases, in reporting order
MAIN_DATABASES = (TID_STAR, TIDD_STAR, CQD, TID_STAR_CQD, TIDD_STAR_CQD)

#: CQ-method sub-databases of CQD, in reporting order
METHOD_DATABASES = ("CQD-Median", "CQD-Kmeans", "CQD-Octree", "CQD-Wu", "CQD-Som")

#: method directory names (canonical, lowercase) in reporting order
CQ_METHODS = ("mediancut", "kmeans", "octree", "wu", "som")

_METHOD_TO_DATABASE = dict(zip(CQ_METHODS, METHOD_DATABASES))

#: permitted CQD color counts
CQD_LEVELS = (4, 8, 16, 32, 64, 128, 256)

_TID_DISTORTED = re.compile(r"^[iI](\d{2})_(\d{2})_(\d)\.(?:bmp|BMP)$")
_TID_REFERENCE = re.compile(r"^[iI](\d{2})\.(?:bmp|BMP)$")
_CQD_DISTORTED = re.compile(r"^(\d+)colors_(\d+)\.(?:png|PNG)$")
_CQD_REFERENCE = re.compile(r"^0*(\d+)\.(?:png|PNG)$")

#: raw MOS scale per source
MOS_SCALES = {"TID": (0.0, 9.0), "CQD": (0.0, 100.0), "SYNTH": (0.0, 9.0)}


@dataclasses.dataclass(frozen=True)
class DistortionTag:
    """Provenance of one distorted image.

    ``tid_type`` is set exactly for TID entries, ``cq_method`` exactly for
    CQD entries; ``level`` is the TID level (1..5) or the color count.
    """

    source: str
    level: int
    tid_type: int | None = None
    cq_method: str | None = None

    def __post_init__(self):
        if self.source not in MOS_SCALES:
            raise ValueError(f"unknown source {self.source!r}")
        if (self.tid_type is not None) != (self.source == "TID"):
            raise ValueError("tid_type is set exactly for TID entries")
        if (self.cq_method is not None) != (self.source == "CQD"):
            raise ValueError("cq_method is set exactly for CQD entries")
        if self.cq_method is not None and self.cq_method not in CQ_METHODS:
            raise ValueError(f"unknown CQ method {self.cq_method!r}")


@dataclasses.dataclass(frozen=True)
class DatasetEntry:
    """One (reference, distorted, MOS) record."""

    name: str  # manifest key: POSIX path relative to the database root
    reference_path: str
    distorted_path: str
    mos: float
    mos_normalized: float
    tag: DistortionTag

    def __post_init__(self):
        lo, hi = MOS_SCALES[self.tag.source]
        if not lo <= self.mos <= hi:
            raise ValueError(
                f"MOS {self.mos} outside [{lo}, {hi}] scale for {self.name}"
            )
        if not 0.0 <= self.mos_normalized <= 9.0:
            raise ValueError(f"normalized MOS out of [0, 9] for {self.name}")


@dataclasses.dataclass(frozen=True)
class Database:
    """A named, immutable collection of dataset entries."""

    name: str
    entries: tuple[DatasetEntry, ...]

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        seen = set()
        for e in self.entries:
            if e.distorted_path in seen:
                raise ValueError(f"duplicate distorted image: {e.distorted_path}")
            seen.add(e.distorted_path)

    def __len__(self) -> int:
        return len(self.entries)


@dataclasses.dataclass(frozen=True)
class NormalizationParams:
    """Affine MOS normalization: [x_min, x_max] onto [0, k]."""

    x_min: float
    x_max: float
    k: float

    def __post_init__(self):
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")
        if not self.k > 0:
            raise ValueError("k must be positive")


#: CQD's [0, 100] scale onto the TID [0, 9] scale
CQD_NORMALIZATION = NormalizationParams(0.0, 100.0, 9.0)


def normalize_mos(value: float, p: NormalizationParams) -> float:
    """Affine map of ``value`` from [x_min, x_max] onto [0, k]; endpoints exact."""
    if not p.x_min <= value <= p.x_max:
        raise ValueError(f"value {value} outside [{p.x_min}, {p.x_max}]")
    return p.k * (value - p.x_min) / (p.x_max - p.x_min)


def parse_tid_filename(name: str) -> tuple[int, int, int]:
    """Parse ``iXX_YY_Z.bmp`` into (reference id, distortion type, level)."""
    m = _TID_DISTORTED.match(name)
    if not m:
        raise ValueError(f"not a TID distorted-image name: {name!r}")
    ref, dtype, level = int(m.group(1)), int(m.group(2)), int(m.group(3))
    if not 1 <= ref <= 25:
        raise ValueError(f"reference id {ref} out of 1..25 in {name!r}")
    if not 1 <= dtype <= 24:
        raise ValueError(f"distortion type {dtype} out of 1..24 in {name!r}")
    if not 1 <= level <= 5:
        raise ValueError(f"level {level} out of 1..5 in {name!r}")
    return ref, dtype, level


def render_tid_filename(ref: int, dtype: int, level: int) -> str:
    return f"i{ref:02d}_{dtype:02d}_{level}.bmp"


def parse_cqd_filename(name: str) -> tuple[int, int]:
    """Parse ``<N>colors_<id>.png`` into (color count, reference id)."""
    m = _CQD_DISTORTED.match(name)
    if not m:
        raise ValueError(f"not a CQD distorted-image name: {name!r}")
    colors, ref = int(m.group(1)), int(m.group(2))
    if colors not in CQD_LEVELS:
        raise ValueError(f"color count {colors} not one of {CQD_LEVELS} in {name!r}")
    if not 1 <= ref <= 25:
        raise ValueError(f"reference id {ref} out of 1..25 in {name!r}")
    return colors, ref


def render_cqd_filename(colors: int, ref: int) -> str:
    return f"{colors}colors_{ref}.png"


def read_mos_manifest(path) -> dict[str, float]:
    """Read a ``name,mos[,std]`` manifest; '#' lines are comments."""
    path = Path(path)
    if not path.is_file():
        raise ValueError(f"MOS manifest not found: {path}")
    table: dict[str, float] = {}
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
    if not rows:
        raise ValueError(f"empty MOS manifest: {path}")
    header = [c.strip().lower() for c in rows[0]]
    if header[:2] != ["name", "mos"]:
        raise ValueError(f"manifest header must start with 'name,mos': {path}")
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) < 2:
            raise ValueError(f"short manifest row at {path}:{lineno}")
        name = row[0].strip()
        try:
            mos = float(row[1])
        except ValueError:
            raise ValueError(f"bad MOS value at {path}:{lineno}: {row[1]!r}") from None
        if name in table:
            raise ValueError(f"duplicate manifest name at {path}:{lineno}: {name}")
        table[name] = mos
    return table


def _index_references(directory: Path, pattern: re.Pattern) -> dict[int, Path]:
    refs = {}
    if directory.is_dir():
        for child in sorted(directory.iterdir()):
            m = pattern.match(child.name)
            if m:
                refs.setdefault(int(m.group(1)), child)
    return refs


def _make_entry(name, ref_path, dist_path, mos_by_name, source, tag):
    if name not in mos_by_name:
        raise ValueError(f"MOS missing for {name}")
    mos = mos_by_name[name]
    lo, hi = MOS_SCALES[source]
    if not lo <= mos <= hi:
        raise ValueError(f"MOS {mos} for {name} outside declared scale [{lo}, {hi}]")
    if source == "CQD":
        mos_norm = normalize_mos(mos, CQD_NORMALIZATION)
    else:
        mos_norm = mos
    return DatasetEntry(
        name=name,
        reference_path=str(ref_path),
        distorted_path=str(dist_path),
        mos=mos,
        mos_normalized=mos_norm,
        tag=tag,
    )


def load_manifest(root, source: str, mos_file=None, refs=None) -> Database:
    """Load a database from a conformant directory layout.

    ``source`` is 'TID', 'CQD' or 'SYNTH'.  ``mos_file`` defaults to
    ``<root>/mos.csv``; ``refs`` overrides the reference-image directory.
    Every distorted image found on disk must have a manifest MOS row;
    manifest rows without a matching file are ignored.
    """
    root = Path(root)
    if source not in MOS_SCALES:
        raise ValueError(f"unknown source {source!r}")
    if not root.is_dir():
        raise ValueError(f"database root not found: {root}")
    mos_by_name = read_mos_manifest(mos_file if mos_file else root / "mos.csv")
    refs_dir = Path(refs) if refs else root

    entries = []
    if source == "TID":
        ref_index = _index_references(refs_dir, _TID_REFERENCE)
        found = []
        for child in sorted(root.iterdir()):
            if child.is_file() and _TID_DISTORTED.match(child.name):
                ref_id, dtype, level = parse_tid_filename(child.name)
                found.append((ref_id, dtype, level, child))
        for ref_id, dtype, level, child in sorted(found, key=lambda t: t[:3]):
            if ref_id not in ref_index:
                raise ValueError(f"missing reference image i{ref_id:02d}.bmp for {child.name}")
            tag = DistortionTag(source="TID", level=level, tid_type=dtype)
            entries.append(
                _make_entry(child.name, ref_index[ref_id], child, mos_by_name, source, tag)
            )
        name = TID_FULL
    elif source == "CQD":
        ref_index = _index_references(refs_dir, _CQD_REFERENCE)
        for method in CQ_METHODS:
            subdir = next(
                (d for d in root.iterdir() if d.is_dir() and d.name.lower() == method),
                None,
            )
            if subdir is None:
                continue
            found = []
            for child in sorted(subdir.iterdir()):
                if child.is_file() and _CQD_DISTORTED.match(child.name):
                    colors, ref_id = parse_cqd_filename(child.name)
                    found.append((ref_id, colors, child))
            for ref_id, colors, child in sorted(found, key=lambda t: t[:2]):
                if ref_id not in ref_index:
                    raise ValueError(f"missing reference image {ref_id}.png for {child.name}")
                key = str(PurePosixPath(subdir.name) / child.name)
                tag = DistortionTag(source="CQD", level=colors, cq_method=method)
                entries.append(
                    _make_entry(key, ref_index[ref_id], child, mos_by_name, source, tag)
                )
        name = CQD
    else:  # SYNTH
        ref_index = _index_references(refs_dir, _CQD_REFERENCE)
        found = []
        for child in sorted(root.iterdir()):
            if child.is_file() and _CQD_DISTORTED.match(child.name):
                colors, ref_id = parse_cqd_filename(child.name)
                found.append((ref_id, colors, child))
        for ref_id, colors, child in sorted(found, key=lambda t: t[:2]):
            if ref_id not in ref_index:
                raise ValueError(f"missing reference image {ref_id}.png for {child.name}")
            tag = DistortionTag(source="SYNTH", level=colors)
            entries.append(
                _make_entry(child.name, ref_index[ref_id], child, mos_by_name, source, tag)
            )
        name = SYNTH

    if not entries:
        raise ValueError(f"no distorted images found under {root}")
    return Database(name=name, entries=tuple(entries))


def select_subset(db: Database, types) -> Database:
    """Restrict a TID database to the given distortion types.

    The result is named 'TID*' for {7} and 'TIDD*' for {7, 22}.
    """
    types = frozenset(int(t) for t in types)
    if any(e.tag.source != "TID" for e in db.entries):
        raise ValueError("select_subset expects a TID database")
    picked = tuple(e for e in db.entries if e.tag.tid_type in types)
    if not picked:
        raise ValueError(f"no entries with distortion types {sorted(types)}")
    if types == {7}:
        name = TID_STAR
    elif types == {7, 22}:
        name = TIDD_STAR
    else:
        name = f"TID{sorted(types)}"
    return Database(name=name, entries=picked)


def fuse(a: Database, b: Database, name: str) -> Database:
    """Concatenate two databases with already-normalized MOS.

    Fails on overlapping distorted images or MOS outside [0, 9].
    """
    for db in (a, b):
        for e in db.entries:
            if not 0.0 <= e.mos_normalized <= 9.0:
                raise ValueError(f"unnormalized MOS for {e.name} in {db.name}")
    overlap = {e.distorted_path for e in a.entries} & {e.distorted_path for e in b.entries}
    if overlap:
        raise ValueError(f"databases share distorted images, e.g. {sorted(overlap)[0]}")
    return Database(name=name, entries=a.entries + b.entries)


def split_by_method(db: Database) -> list[Database]:
    """Split a CQD database into its per-method sub-databases.

    Returned in reporting order (Median, Kmeans, Octree, Wu, Som); methods
    absent from the input are skipped.
    """
    if any(e.tag.source != "CQD" for e in db.entries):
        raise ValueError("split_by_method expects a CQD database")
    out = []
    for method in CQ_METHODS:
        picked = tuple(e for e in db.entries if e.tag.cq_method == method)
        if picked:
            out.append(Database(name=_METHOD_TO_DATABASE[method], entries=picked))
    return out


def mos_histogram(db: Database, bins: int):
    """Histogram of normalized MOS over [0, 9]: list of ((lo, hi), count)."""
    if bins < 1:
        raise ValueError("bins must be at least 1")
    values = [e.mos_normalized for e in db.entries]
    counts, edges = np.histogram(values, bins=bins, range=(0.0, 9.0))
    return [
        ((float(edges[i]), float(edges[i + 1])), int(counts[i])) for i in range(bins)
    ]


def write_database_csv(db: Database, path) -> None:
    """Export a database as a self-contained CSV (paths, MOS, tags)."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            [
                "name",
                "reference_path",
                "distorted_path",
                "mos",
                "mos_normalized",
                "source",
                "tid_type",
                "cq_method",
                "level",
            ]
        )
        for e in db.entries:
            writer.writerow(
                [
                    e.name,
                    e.reference_path,
                    e.distorted_path,
                    f"{e.mos:.6g}",
                    f"{e.mos_normalized:.6g}",
                    e.tag.source,
                    "" if e.tag.tid_type is None else e.tag.tid_type,
                    "" if e.tag.cq_method is None else e.tag.cq_method,
                    e.tag.level,
                ]
            )
