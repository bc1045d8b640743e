"""Command-line pipeline: distort -> compute -> evaluate -> fuse."""

import csv
import hashlib
import math

import numpy as np
import pytest

from cqeval import load_image, load_manifest, srocc
from cqeval.cli import build_config, build_parser, main, read_scores
from .conftest import make_cqd_tree, make_tid_tree


def _tree_digest(directory):
    h = hashlib.sha256()
    for p in sorted(directory.iterdir()):
        if p.is_file():
            h.update(p.name.encode())
            h.update(p.read_bytes())
    return h.hexdigest()


def _read_rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


@pytest.fixture
def fixture_db(refs_dir, tmp_path):
    out = tmp_path / "fixture"
    rc = main(["distort", "--refs", str(refs_dir), "--out", str(out),
               "--seed", "11", "--levels", "4,8,16,32"])
    assert rc == 0
    return out


def test_distort_layout_and_manifest(refs_dir, tmp_path, fixture_db):
    files = sorted(p.name for p in fixture_db.iterdir())
    # 5 refs + 5*4 distorted + manifest
    assert len(files) == 5 + 20 + 1
    assert "mos.csv" in files
    assert "4colors_1.png" in files and "32colors_5.png" in files

    text = (fixture_db / "mos.csv").read_text(encoding="utf-8")
    assert text.startswith("#")  # formula documented in comments
    db = load_manifest(fixture_db, "SYNTH")
    assert len(db) == 20
    # severity ordering survives the noise: MOS correlates with level count
    levels = [e.tag.level for e in db.entries]
    mos = [e.mos for e in db.entries]
    assert srocc(levels, mos) > 0.8


def test_distort_identity_grid_reproduces_references(refs_dir, tmp_path):
    out = tmp_path / "ident"
    rc = main(["distort", "--refs", str(refs_dir), "--out", str(out),
               "--levels", "256"])
    assert rc == 0
    for i in range(1, 6):
        ref = load_image(out / f"{i}.png")
        dist = load_image(out / f"256colors_{i}.png")
        assert np.array_equal(ref.data, dist.data)


def test_distort_determinism(refs_dir, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        rc = main(["distort", "--refs", str(refs_dir), "--out", str(out),
                   "--seed", "4", "--levels", "4,16"])
        assert rc == 0
    assert _tree_digest(a) == _tree_digest(b)


def test_distort_rejects_bad_levels(refs_dir, tmp_path, capsys):
    rc = main(["distort", "--refs", str(refs_dir), "--out", str(tmp_path / "x"),
               "--levels", "5,9"])
    assert rc == 1
    assert "levels" in capsys.readouterr().err


def test_compute_row_count_and_determinism(fixture_db, tmp_path):
    out = tmp_path / "scores"
    rc = main(["compute", "--synth-root", str(fixture_db), "--out", str(out)])
    assert rc == 0
    rows = _read_rows(out / "scores.csv")
    assert rows[0] == ["name", "metric", "value"]
    assert len(rows) - 1 == 20 * 9  # entries x metrics
    first = (out / "scores.csv").read_bytes()

    rc = main(["compute", "--synth-root", str(fixture_db), "--out", str(out),
               "--threads", "2"])
    assert rc == 0
    assert (out / "scores.csv").read_bytes() == first


def test_compute_rejects_missing_root(tmp_path, capsys):
    rc = main(["compute", "--out", str(tmp_path)])
    assert rc == 1
    assert "root" in capsys.readouterr().err


def test_evaluate_report_bundle(fixture_db, tmp_path):
    out = tmp_path / "report"
    assert main(["compute", "--synth-root", str(fixture_db), "--out", str(out)]) == 0
    assert main(["evaluate", "--synth-root", str(fixture_db), "--out", str(out)]) == 0

    table1 = _read_rows(out / "table1.csv")
    assert table1[0][:2] == ["database", "coefficient"]
    assert len(table1[0]) == 11  # database, coefficient, nine metrics
    assert [r[0] for r in table1[1:]] == ["SYNTH", "SYNTH", "Average", "Average"]
    for row in table1[1:]:
        for cell in row[2:]:
            assert math.isfinite(float(cell))

    for fname in ("table4_krocc_codewords.csv", "table5_srocc_codewords.csv"):
        rows = _read_rows(out / fname)
        assert rows[0] == ["row_metric", "col_metric", "codeword"]
        assert len(rows) - 1 == 81  # 9 x 9 ordered metric pairs
        self_rows = [r for r in rows[1:] if r[0] == r[1]]
        assert all(set(r[2]) == {"-"} for r in self_rows)

    hist = _read_rows(out / "mos_histogram.csv")
    assert sum(int(r[3]) for r in hist[1:]) == 20

    scatter = _read_rows(out / "scatter_SYNTH_PSNR.csv")
    assert scatter[0] == ["mos", "score"]
    assert len(scatter) - 1 == 20

    # only one database: rank tables have just the header, as does boxplot
    assert len(_read_rows(out / "table2_krocc_rank.csv")) == 1
    assert len(_read_rows(out / "boxplot.csv")) == 1


def test_evaluate_end_to_end_determinism(fixture_db, tmp_path):
    outs = []
    for sub in ("r1", "r2"):
        out = tmp_path / sub
        assert main(["compute", "--synth-root", str(fixture_db), "--out", str(out)]) == 0
        assert main(["evaluate", "--synth-root", str(fixture_db), "--out", str(out)]) == 0
        outs.append(_tree_digest(out))
    assert outs[0] == outs[1]


def test_evaluate_missing_scores_errors(fixture_db, tmp_path, capsys):
    out = tmp_path / "noscores"
    rc = main(["evaluate", "--synth-root", str(fixture_db), "--out", str(out)])
    assert rc == 1
    assert "scores" in capsys.readouterr().err
    assert not (out / "table1.csv").exists()  # nothing left behind


def test_evaluate_incomplete_scores_removes_outputs(fixture_db, tmp_path, capsys):
    out = tmp_path / "partial"
    assert main(["compute", "--synth-root", str(fixture_db), "--out", str(out)]) == 0
    rows = _read_rows(out / "scores.csv")
    with open(out / "scores.csv", "w", newline="", encoding="utf-8") as fh:
        csv.writer(fh, lineterminator="\n").writerows(rows[:-1])  # drop one score
    rc = main(["evaluate", "--synth-root", str(fixture_db), "--out", str(out)])
    assert rc == 1
    assert "missing" in capsys.readouterr().err
    assert not (out / "table1.csv").exists()


def test_scores_reader_rejects_nonfinite(tmp_path):
    path = tmp_path / "scores.csv"
    path.write_text("name,metric,value\nSYNTH/x.png,PSNR,inf\n")
    with pytest.raises(ValueError):
        read_scores(path)


def test_fuse_exports_fused_databases(tmp_path):
    tid = make_tid_tree(tmp_path / "tid", refs=3, types=8, levels=2)
    cqd = make_cqd_tree(tmp_path / "cqd", refs=3, levels=(4, 8))
    out = tmp_path / "fused"
    rc = main(["fuse", "--tid-root", str(tid), "--cqd-root", str(cqd),
               "--out", str(out)])
    assert rc == 0
    names = sorted(p.name for p in out.iterdir())
    assert names == ["fused_TIDDstarCQD.csv", "fused_TIDstarCQD.csv"]
    rows = _read_rows(out / "fused_TIDstarCQD.csv")
    assert len(rows) - 1 == 3 * 2 + 3 * 5 * 2  # TID* + CQD entries


def test_fuse_requires_both_roots(tmp_path, capsys):
    tid = make_tid_tree(tmp_path / "tid", refs=2, types=8, levels=2)
    rc = main(["fuse", "--tid-root", str(tid), "--out", str(tmp_path / "o")])
    assert rc == 1


def test_config_file_flags_win(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text("threads=4\nseed=9\nsubset=7\n# comment\n")
    args = build_parser().parse_args(
        ["compute", "--config", str(cfg_file), "--seed", "2"]
    )
    cfg = build_config(args)
    assert cfg.threads == 4  # from file
    assert cfg.seed == 2  # flag wins
    assert cfg.subset == frozenset({7})


def test_config_file_unknown_key(tmp_path, capsys):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text("bogus=1\n")
    rc = main(["compute", "--config", str(cfg_file), "--out", str(tmp_path)])
    assert rc == 1
    assert "bogus" in capsys.readouterr().err


def test_tid_subset_flag_limits_databases(tmp_path):
    tid = make_tid_tree(tmp_path / "tid", refs=3, types=8, levels=2, real_types={7})
    out = tmp_path / "out7"
    assert main(["compute", "--tid-root", str(tid), "--subset", "7",
                 "--out", str(out)]) == 0
    rows = _read_rows(out / "scores.csv")
    # subset 7 only: 3 refs x 2 levels x 9 metrics
    assert len(rows) - 1 == 6 * 9


def test_compute_scores_are_namespaced_and_deduplicated(tmp_path):
    tid = make_tid_tree(tmp_path / "tid", refs=2, types=8, levels=2, real_types={7})
    out = tmp_path / "ns"
    assert main(["compute", "--tid-root", str(tid), "--out", str(out)]) == 0
    rows = _read_rows(out / "scores.csv")[1:]
    names = [r[0] for r in rows]
    assert all(n.startswith("TID/") for n in names)
    # TID* entries are a subset of TIDD*; each pair scored exactly once
    assert len(set(zip(names, (r[1] for r in rows)))) == len(rows)


def test_full_multi_database_report(tmp_path):
    """TID + CQD trees: all ten databases, rank groups, and box plots."""
    tid = make_tid_tree(tmp_path / "tid", refs=2, types=8, levels=2, real_types={7})
    cqd = make_cqd_tree(tmp_path / "cqd", refs=2, levels=(8, 32), real=True)
    out = tmp_path / "full"
    assert main(["compute", "--tid-root", str(tid), "--cqd-root", str(cqd),
                 "--out", str(out)]) == 0
    assert main(["evaluate", "--tid-root", str(tid), "--cqd-root", str(cqd),
                 "--out", str(out)]) == 0

    table1 = _read_rows(out / "table1.csv")
    dbs = [r[0] for r in table1[1::2]][:-1]
    assert dbs == ["TID*", "TIDD*", "CQD", "TID*CQD", "TIDD*CQD",
                   "CQD-Median", "CQD-Kmeans", "CQD-Octree", "CQD-Wu", "CQD-Som"]

    rank = _read_rows(out / "table2_krocc_rank.csv")
    groups = {r[0] for r in rank[1:]}
    assert groups == {"MainDB", "All", "C&sub"}
    # every (group, metric) lists each member database exactly once
    maindb_psnr = [r[3] for r in rank[1:] if r[0] == "MainDB" and r[1] == "PSNR"]
    assert sorted(maindb_psnr) == sorted(dbs[:5])

    box = _read_rows(out / "boxplot.csv")
    assert len(box) - 1 == 18  # nine metrics x two coefficients

    # scatter files exist for starred names with sanitized filenames
    assert (out / "scatter_TIDstar_PSNR.csv").exists()
    assert (out / "scatter_TIDstarCQD_WSNR.csv").exists()
