"""Command-line orchestration: score databases, build reports, make fixtures.

Subcommands:

* ``compute``  - evaluate all nine metrics over the configured databases
  and write ``scores.csv``.
* ``evaluate`` - join ``scores.csv`` back to the databases and emit the
  full report bundle (correlation table, rankings, significance codewords,
  box-plot/histogram/scatter data).
* ``distort``  - generate a rated synthetic fixture database from pristine
  reference images.
* ``fuse``     - export fused databases as self-contained CSVs.

Every output is CSV (UTF-8, LF, header row), numbers carry six significant
digits, and reruns with the same inputs are byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import dataset as ds
from . import stats
from .distort import DistortionSpec, apply_spec
from .image import ImageError, load_image, save_png
from .metrics import METRIC_ORDER, HvsParams, SsimParams, evaluate_all

_FMT = "{:.6g}"

#: reporting order of databases in every artifact
DB_ORDER = ds.MAIN_DATABASES + ds.METHOD_DATABASES + (ds.SYNTH,)

_RANK_GROUPS = (
    ("MainDB", ds.MAIN_DATABASES),
    ("All", ds.MAIN_DATABASES + ds.METHOD_DATABASES),
    ("C&sub", (ds.CQD,) + ds.METHOD_DATABASES),
)

_CONFIG_KEYS = {
    "tid-root",
    "cqd-root",
    "synth-root",
    "mos",
    "refs",
    "subset",
    "out",
    "threads",
    "seed",
    "per-channel",
    "scores",
    "levels",
    "kind",
}


@dataclasses.dataclass(frozen=True)
class RunConfig:
    """Resolved options for one command invocation."""

    tid_root: str | None = None
    cqd_root: str | None = None
    synth_root: str | None = None
    mos: tuple[str, ...] = ()
    refs: tuple[str, ...] = ()
    subset: frozenset[int] = frozenset({7, 22})
    out: str = "."
    threads: int = 1
    seed: int = 0
    per_channel: bool = False
    scores: str | None = None
    levels: tuple[int, ...] = (4, 8, 16, 32, 64)
    kind: str = "quantize"

    def __post_init__(self):
        if self.threads < 1:
            raise ValueError("threads must be at least 1")
        if self.subset not in (frozenset({7}), frozenset({7, 22})):
            raise ValueError("subset must be 7 or 7,22")


def _read_config_file(path: str) -> dict[str, str]:
    """Parse a ``key=value`` options file ('#' comments allowed)."""
    table = {}
    p = Path(path)
    if not p.is_file():
        raise ValueError(f"config file not found: {p}")
    for lineno, raw in enumerate(p.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"bad config line at {p}:{lineno}: {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _CONFIG_KEYS:
            raise ValueError(f"unknown config key {key!r} at {p}:{lineno}")
        table[key] = value.strip()
    return table


def _parse_subset(text: str) -> frozenset[int]:
    try:
        values = frozenset(int(t) for t in text.split(","))
    except ValueError:
        raise ValueError(f"bad subset {text!r}; use 7 or 7,22") from None
    if values not in (frozenset({7}), frozenset({7, 22})):
        raise ValueError(f"bad subset {text!r}; use 7 or 7,22")
    return values


def _parse_levels(text: str) -> tuple[int, ...]:
    try:
        levels = tuple(int(t) for t in text.split(","))
    except ValueError:
        raise ValueError(f"bad levels list {text!r}") from None
    if not levels or any(lv not in ds.CQD_LEVELS for lv in levels):
        raise ValueError(f"levels must come from {ds.CQD_LEVELS}")
    if len(set(levels)) != len(levels):
        raise ValueError("levels must be distinct")
    return levels


def build_config(args: argparse.Namespace) -> RunConfig:
    """Merge CLI flags over the optional config file; flags win."""
    file_cfg = _read_config_file(args.config) if args.config else {}

    def pick(cli_value, key, fallback):
        if cli_value is not None:
            return cli_value
        if key in file_cfg:
            return file_cfg[key]
        return fallback

    mos = args.mos if args.mos else tuple(
        s for s in file_cfg.get("mos", "").split(",") if s
    )
    refs = args.refs if args.refs else tuple(
        s for s in file_cfg.get("refs", "").split(",") if s
    )
    subset = pick(args.subset, "subset", "7,22")
    levels = pick(getattr(args, "levels", None), "levels", "4,8,16,32,64")
    per_channel = pick(getattr(args, "per_channel", None), "per-channel", "")
    return RunConfig(
        tid_root=pick(args.tid_root, "tid-root", None),
        cqd_root=pick(args.cqd_root, "cqd-root", None),
        synth_root=pick(args.synth_root, "synth-root", None),
        mos=tuple(mos),
        refs=tuple(refs),
        subset=_parse_subset(subset) if isinstance(subset, str) else subset,
        out=str(pick(args.out, "out", ".")),
        threads=int(pick(args.threads, "threads", 1)),
        seed=int(pick(args.seed, "seed", 0)),
        per_channel=bool(per_channel in (True, "true", "1", "yes")),
        scores=pick(getattr(args, "scores", None), "scores", None),
        levels=_parse_levels(levels) if isinstance(levels, str) else levels,
        kind=str(pick(getattr(args, "kind", None), "kind", "quantize")),
    )


def load_databases(cfg: RunConfig) -> list[ds.Database]:
    """Build every database implied by the configured roots, report order."""
    roots = [
        (label, root)
        for label, root in (
            ("TID", cfg.tid_root),
            ("CQD", cfg.cqd_root),
            ("SYNTH", cfg.synth_root),
        )
        if root
    ]
    if not roots:
        raise ValueError("no database root given (--tid-root/--cqd-root/--synth-root)")
    mos_for = {label: cfg.mos[i] if i < len(cfg.mos) else None for i, (label, _) in enumerate(roots)}
    refs_for = {label: cfg.refs[i] if i < len(cfg.refs) else None for i, (label, _) in enumerate(roots)}

    dbs: list[ds.Database] = []
    tid_star = tidd_star = cqd = None
    if cfg.tid_root:
        full = ds.load_manifest(
            cfg.tid_root, "TID", mos_file=mos_for["TID"], refs=refs_for["TID"]
        )
        tid_star = ds.select_subset(full, {7})
        dbs.append(tid_star)
        if 22 in cfg.subset:
            tidd_star = ds.select_subset(full, {7, 22})
            dbs.append(tidd_star)
    if cfg.cqd_root:
        cqd = ds.load_manifest(
            cfg.cqd_root, "CQD", mos_file=mos_for["CQD"], refs=refs_for["CQD"]
        )
        dbs.append(cqd)
        dbs.extend(ds.split_by_method(cqd))
    if tid_star is not None and cqd is not None:
        dbs.append(ds.fuse(tid_star, cqd, ds.TID_STAR_CQD))
        if tidd_star is not None:
            dbs.append(ds.fuse(tidd_star, cqd, ds.TIDD_STAR_CQD))
    if cfg.synth_root:
        dbs.append(
            ds.load_manifest(
                cfg.synth_root, "SYNTH", mos_file=mos_for["SYNTH"], refs=refs_for["SYNTH"]
            )
        )
    order = {name: i for i, name in enumerate(DB_ORDER)}
    dbs.sort(key=lambda db: order.get(db.name, len(order)))
    return dbs


def entry_key(entry: ds.DatasetEntry) -> str:
    """Collision-free score key: source label / manifest name."""
    return f"{entry.tag.source}/{entry.name}"


class _OutputSet:
    """Tracks files written by one command so failures leave nothing behind."""

    def __init__(self):
        self.paths: list[Path] = []

    def write_csv(self, path: Path, header: list[str], rows) -> None:
        tmp = path.with_name(path.name + ".tmp")
        with tmp.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
        os.replace(tmp, path)
        self.paths.append(path)

    def add(self, path: Path) -> None:
        self.paths.append(path)

    def discard_all(self) -> None:
        for path in self.paths:
            try:
                path.unlink()
            except OSError:
                pass


def _score_pair(task) -> list[tuple[str, float]]:
    """Worker: score one (reference, distorted) pair; returns (metric, value)."""
    ref_path, dist_path, sp, hp, per_channel = task
    ref = load_image(ref_path)
    dist = load_image(dist_path)
    scores = evaluate_all(ref, dist, sp, hp, per_channel=per_channel)
    return [(s.metric, s.value) for s in scores]


def cmd_compute(cfg: RunConfig) -> None:
    """Score every database entry and write ``<out>/scores.csv``."""
    dbs = load_databases(cfg)
    out_dir = Path(cfg.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    pairs: dict[str, tuple[str, str]] = {}
    for db in dbs:
        for e in db.entries:
            pairs.setdefault(entry_key(e), (e.reference_path, e.distorted_path))
    keys = list(pairs)
    sp = SsimParams()
    hp = HvsParams()
    tasks = [(pairs[k][0], pairs[k][1], sp, hp, cfg.per_channel) for k in keys]
    if cfg.threads > 1:
        with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
            results = list(pool.map(_score_pair, tasks, chunksize=4))
    else:
        results = [_score_pair(t) for t in tasks]

    rows = []
    for key, scored in zip(keys, results):
        for metric, value in scored:
            if not math.isfinite(value):
                raise ValueError(
                    f"infinite {metric} for {key}: reference listed as its own "
                    "distorted entry?"
                )
            rows.append([key, metric, _FMT.format(value)])
    outputs = _OutputSet()
    try:
        outputs.write_csv(out_dir / "scores.csv", ["name", "metric", "value"], rows)
    except BaseException:
        outputs.discard_all()
        raise


def read_scores(path) -> dict[tuple[str, str], float]:
    """Read a scores.csv back into a {(name, metric): value} table."""
    path = Path(path)
    if not path.is_file():
        raise ValueError(f"scores file not found: {path}")
    table: dict[tuple[str, str], float] = {}
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["name", "metric", "value"]:
            raise ValueError(f"bad scores header in {path}")
        for row in reader:
            if len(row) != 3:
                raise ValueError(f"bad scores row {row!r} in {path}")
            value = float(row[2])
            if not math.isfinite(value):
                raise ValueError(f"non-finite score for {row[0]}/{row[1]} in {path}")
            table[(row[0], row[1])] = value
    return table


def _sanitize(name: str) -> str:
    return name.replace("*", "star").replace("&", "and").replace(" ", "_")


def _db_columns(db: ds.Database, scores) -> tuple[dict[str, list[float]], list[float]]:
    by_metric: dict[str, list[float]] = {m: [] for m in METRIC_ORDER}
    mos = []
    for e in db.entries:
        key = entry_key(e)
        for metric in METRIC_ORDER:
            if (key, metric) not in scores:
                raise ValueError(f"incomplete scores: missing {metric} for {key}")
            by_metric[metric].append(scores[(key, metric)])
        mos.append(e.mos_normalized)
    return by_metric, mos


def cmd_evaluate(cfg: RunConfig) -> None:
    """Join scores to databases and write the report bundle into ``--out``."""
    dbs = load_databases(cfg)
    out_dir = Path(cfg.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    scores = read_scores(cfg.scores if cfg.scores else out_dir / "scores.csv")

    columns = [(db, *_db_columns(db, scores)) for db in dbs]
    triples = [(db.name, by_metric, mos) for db, by_metric, mos in columns]
    pairs, averages = stats.correlation_table(METRIC_ORDER, triples)
    corr = {
        "krocc": {(p.metric, p.database): p.krocc for p in pairs},
        "srocc": {(p.metric, p.database): p.srocc for p in pairs},
    }

    outputs = _OutputSet()
    try:
        rows = []
        for db, _, _ in columns:
            for coeff in ("krocc", "srocc"):
                rows.append(
                    [db.name, coeff.upper()]
                    + [_FMT.format(corr[coeff][(m, db.name)]) for m in METRIC_ORDER]
                )
        for coeff, idx in (("KROCC", 0), ("SROCC", 1)):
            rows.append(
                ["Average", coeff] + [_FMT.format(averages[m][idx]) for m in METRIC_ORDER]
            )
        outputs.write_csv(
            out_dir / "table1.csv", ["database", "coefficient"] + list(METRIC_ORDER), rows
        )

        present = {db.name for db, _, _ in columns}
        for coeff, fname in (("krocc", "table2_krocc_rank.csv"), ("srocc", "table3_srocc_rank.csv")):
            rows = []
            for group_name, group_dbs in _RANK_GROUPS:
                if not set(group_dbs) <= present:
                    continue
                ranking = stats.rank_databases(
                    METRIC_ORDER, list(group_dbs), corr[coeff]
                )
                for metric in METRIC_ORDER:
                    for rank, db_name in enumerate(ranking[metric], start=1):
                        rows.append([group_name, metric, rank, db_name])
            outputs.write_csv(out_dir / fname, ["group", "metric", "rank", "database"], rows)

        for coeff, fname in (("krocc", "table4_krocc_codewords.csv"), ("srocc", "table5_srocc_codewords.csv")):
            words = stats.significance_codewords(METRIC_ORDER, triples, coeff=coeff)
            rows = [[w.row_metric, w.col_metric, w.symbols] for w in words]
            outputs.write_csv(
                out_dir / fname, ["row_metric", "col_metric", "codeword"], rows
            )

        rows = []
        if len(columns) >= 4:
            for coeff in ("krocc", "srocc"):
                for metric in METRIC_ORDER:
                    summary = stats.boxplot_summary(
                        [corr[coeff][(metric, db.name)] for db, _, _ in columns]
                    )
                    rows.append(
                        [
                            metric,
                            coeff.upper(),
                            _FMT.format(summary.q1),
                            _FMT.format(summary.median),
                            _FMT.format(summary.q3),
                            _FMT.format(summary.iqr),
                            _FMT.format(summary.lower_whisker),
                            _FMT.format(summary.upper_whisker),
                            ";".join(_FMT.format(o) for o in summary.outliers),
                        ]
                    )
        outputs.write_csv(
            out_dir / "boxplot.csv",
            ["metric", "coefficient", "q1", "median", "q3", "iqr",
             "lower_whisker", "upper_whisker", "outliers"],
            rows,
        )

        rows = []
        for db, _, _ in columns:
            for (lo, hi), count in ds.mos_histogram(db, bins=9):
                rows.append([db.name, _FMT.format(lo), _FMT.format(hi), count])
        outputs.write_csv(
            out_dir / "mos_histogram.csv", ["database", "bin_lo", "bin_hi", "count"], rows
        )

        for db, by_metric, mos in columns:
            for metric in METRIC_ORDER:
                rows = [
                    [_FMT.format(m), _FMT.format(s)]
                    for m, s in zip(mos, by_metric[metric])
                ]
                outputs.write_csv(
                    out_dir / f"scatter_{_sanitize(db.name)}_{metric}.csv",
                    ["mos", "score"],
                    rows,
                )
    except BaseException:
        outputs.discard_all()
        raise


def cmd_distort(cfg: RunConfig) -> None:
    """Build a rated synthetic fixture database under ``--out``.

    References come from the first ``--refs`` directory; each is quantized
    at every requested level and written with CQD-style names.  Synthetic
    MOS = base values evenly spaced over [8.5, 1.5] by decreasing severity
    rank, plus seeded Gaussian noise (sigma 0.3), clipped to [0, 9].
    """
    if not cfg.refs:
        raise ValueError("distort needs --refs pointing at pristine images")
    refs_dir = Path(cfg.refs[0])
    if not refs_dir.is_dir():
        raise ValueError(f"reference directory not found: {refs_dir}")
    ref_files = sorted(
        p for p in refs_dir.iterdir()
        if p.is_file() and p.suffix.lower() in (".png", ".bmp")
    )
    if not ref_files:
        raise ValueError(f"no reference images under {refs_dir}")
    if len(ref_files) > 25:
        raise ValueError("fixture layout supports at most 25 reference images")
    out_dir = Path(cfg.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    # least severe first: more colors = denser grid = higher base MOS
    levels_desc = sorted(cfg.levels, reverse=True)
    bases = np.linspace(8.5, 1.5, len(levels_desc)) if len(levels_desc) > 1 else np.array([5.0])
    rng = np.random.default_rng(cfg.seed)

    outputs = _OutputSet()
    try:
        manifest_rows = []
        for ref_id, ref_file in enumerate(ref_files, start=1):
            ref_img = load_image(ref_file)
            ref_out = out_dir / f"{ref_id}.png"
            save_png(ref_img, ref_out)
            outputs.add(ref_out)
            for base, level in zip(bases, levels_desc):
                spec = DistortionSpec(kind=cfg.kind, levels=level, seed=cfg.seed)
                distorted = apply_spec(ref_img, spec)
                name = ds.render_cqd_filename(level, ref_id)
                save_png(distorted, out_dir / name)
                outputs.add(out_dir / name)
                mos = float(np.clip(base + rng.normal(0.0, 0.3), 0.0, 9.0))
                manifest_rows.append([name, f"{mos:.4f}"])

        manifest = out_dir / "mos.csv"
        tmp = manifest.with_name(manifest.name + ".tmp")
        with tmp.open("w", newline="", encoding="utf-8") as fh:
            fh.write(
                "# synthetic MOS = base(level) + N(0, 0.3^2), clipped to [0, 9]\n"
                f"# bases: levels {levels_desc} -> "
                f"{[round(float(b), 4) for b in bases]} "
                f"(evenly spaced over [8.5, 1.5] by severity rank), seed {cfg.seed}\n"
            )
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["name", "mos"])
            writer.writerows(manifest_rows)
        os.replace(tmp, manifest)
        outputs.add(manifest)
    except BaseException:
        outputs.discard_all()
        raise


def cmd_fuse(cfg: RunConfig) -> None:
    """Export every fused database implied by the roots as a CSV."""
    dbs = load_databases(cfg)
    fused = [db for db in dbs if db.name in (ds.TID_STAR_CQD, ds.TIDD_STAR_CQD)]
    if not fused:
        raise ValueError("fuse needs both --tid-root and --cqd-root")
    out_dir = Path(cfg.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = _OutputSet()
    try:
        for db in fused:
            path = out_dir / f"fused_{_sanitize(db.name)}.csv"
            ds.write_database_csv(db, path)
            outputs.add(path)
    except BaseException:
        outputs.discard_all()
        raise


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value options file; flags win")
    p.add_argument("--tid-root", help="TID-layout database root")
    p.add_argument("--cqd-root", help="CQD-layout database root")
    p.add_argument("--synth-root", help="synthetic fixture database root")
    p.add_argument(
        "--mos",
        action="append",
        help="MOS manifest path (repeat per root, order TID, CQD, SYNTH; "
        "default <root>/mos.csv)",
    )
    p.add_argument(
        "--refs",
        action="append",
        help="reference-image directory override (repeat per root)",
    )
    p.add_argument("--subset", help="TID distortion subset: 7 or 7,22 (default 7,22)")
    p.add_argument("--out", help="output directory (default .)")
    p.add_argument("--threads", type=int, help="worker processes (default 1)")
    p.add_argument("--seed", type=int, help="RNG seed for fixture MOS (default 0)")
    p.add_argument(
        "--per-channel",
        action="store_const",
        const=True,
        help="average metrics over R,G,B planes instead of luma",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cqeval",
        description="Full-reference quality evaluation for colour-quantized images.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compute", help="score all database entries")
    _add_common_flags(p)

    p = sub.add_parser("evaluate", help="build the report bundle from scores")
    _add_common_flags(p)
    p.add_argument("--scores", help="scores.csv path (default <out>/scores.csv)")

    p = sub.add_parser("distort", help="generate a rated synthetic fixture")
    _add_common_flags(p)
    p.add_argument("--levels", help="comma-separated level grid (default 4,8,16,32,64)")
    p.add_argument("--kind", choices=["quantize", "dither"], help="degradation kind")

    p = sub.add_parser("fuse", help="export fused databases as CSV")
    _add_common_flags(p)
    return parser


_COMMANDS = {
    "compute": cmd_compute,
    "evaluate": cmd_evaluate,
    "distort": cmd_distort,
    "fuse": cmd_fuse,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = build_config(args)
        _COMMANDS[args.command](cfg)
    except (ValueError, ImageError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
