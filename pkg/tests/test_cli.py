import csv
import json

import numpy as np
import pytest

from sensemap.cli import main
from sensemap.ingest import read_corpus
from sensemap.pipeline import load_artifact, transfer_vector


@pytest.fixture(scope="module")
def bundle(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    assert main(["synth", "--out-dir", str(d), "--seed", "7", "--dim", "8", "--n-types", "60",
                 "--n-sentences", "300", "--sentence-len", "8"]) == 0
    return d


def align_args(d, out, *extra):
    return ["align", "--target-corpus", str(d / "target.tec.jsonl"), "--source-corpus", str(d / "source.tec.jsonl"),
            "--alignments", str(d / "align.txt"), "--out", str(out), *extra]


def test_synth_align_eval(bundle, tmp_path, capsys):
    out = tmp_path / "m.map.json"
    assert main(align_args(bundle, out, "--export-anchors", str(tmp_path / "anch"))) == 0
    assert (tmp_path / "anch.target.vec").read_text().splitlines()[0].endswith(" 8")
    capsys.readouterr()
    assert main(["eval-retrieval", "--artifact", str(out), "--truth", str(bundle / "truth.json")]) == 0
    text = capsys.readouterr().out
    p1 = float(text.split("P@1:")[1].split()[0])
    assert p1 >= 0.99 and "P@5:" in text


def test_align_reproducible(bundle, tmp_path):
    assert main(align_args(bundle, tmp_path / "a.json")) == 0
    assert main(["--threads", "1"] + align_args(bundle, tmp_path / "b.json")) == 0
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_no_in_recorded(bundle, tmp_path):
    assert main(align_args(bundle, tmp_path / "a.json", "--no-in")) == 0
    assert main(align_args(bundle, tmp_path / "b.json")) == 0
    a, b = json.loads((tmp_path / "a.json").read_text()), json.loads((tmp_path / "b.json").read_text())
    assert a["settings"]["use_in"] is False and b["settings"]["use_in"] is True
    diff = {k for k in a["settings"] if a["settings"][k] != b["settings"][k]}
    assert diff == {"use_in"}


def test_missing_corpus(bundle, tmp_path, capsys):
    args = align_args(bundle, tmp_path / "x.json")
    args[2] = str(tmp_path / "missing.tec.jsonl")
    assert main(args) == 1
    assert "missing.tec.jsonl" in capsys.readouterr().err


def test_format_error_names_line(tmp_path, capsys):
    bad = tmp_path / "bad.tec.jsonl"
    bad.write_text('{"dim": 2}\n{"id": 0, "tokens": ["a"], "vectors": [[1, 2]]}\n{oops\n')
    assert main(["anisotropy", "--corpus", str(bad)]) == 1
    assert "bad.tec.jsonl:3" in capsys.readouterr().err


def test_unknown_flag(bundle, tmp_path):
    assert main(align_args(bundle, tmp_path / "x.json", "--bogus")) == 1
    assert main(["frobnicate"]) == 1


def test_anisotropy_identical(tmp_path, capsys):
    p = tmp_path / "same.tec.jsonl"
    lines = ['{"dim": 3}'] + [json.dumps({"id": i, "tokens": ["a", "b"], "vectors": [[1, 2, 2], [1, 2, 2]]})
                              for i in range(20)]
    p.write_text("\n".join(lines) + "\n")
    assert main(["anisotropy", "--corpus", str(p), "--csv", str(tmp_path / "a.csv"), "--label", "same"]) == 0
    out = capsys.readouterr().out
    assert float(out.split("score:")[1]) == pytest.approx(1.0, abs=1e-12)
    rows = list(csv.reader(open(tmp_path / "a.csv")))
    assert rows[0] == ["label", "n_vectors", "sample_size", "seed", "score"]
    assert rows[1][:4] == ["same", "40", "40", "0"]


def test_in_subcommand(bundle, tmp_path):
    args = ["in", "--corpus", str(bundle / "target.tec.jsonl"), "--csv", str(tmp_path / "in.csv"),
            "--transform-out", str(tmp_path / "t.json"), "--out", str(tmp_path / "n.tec.jsonl")]
    assert main(args) == 0
    rows = list(csv.reader(open(tmp_path / "in.csv")))
    assert rows[0] == ["iteration", "mean_norm", "anisotropy_score"]
    assert [r[0] for r in rows[1:]] == ["0", "1", "2", "3", "4", "5"]
    vecs = np.concatenate([r.vectors for r in read_corpus(tmp_path / "n.tec.jsonl")])
    np.testing.assert_allclose(np.linalg.norm(vecs, axis=1), 1.0, atol=1e-12)
    # replaying the saved transform reproduces the written corpus
    assert main(["in", "--corpus", str(bundle / "target.tec.jsonl"), "--transform", str(tmp_path / "t.json"),
                 "--out", str(tmp_path / "r.tec.jsonl")]) == 0
    again = np.concatenate([r.vectors for r in read_corpus(tmp_path / "r.tec.jsonl")])
    assert np.max(np.abs(again - vecs)) <= 1e-12


def test_apply(bundle, tmp_path):
    art = tmp_path / "m.json"
    assert main(align_args(bundle, art)) == 0
    assert main(["apply", "--artifact", str(art), "--corpus", str(bundle / "target.tec.jsonl"),
                 "--out", str(tmp_path / "mapped.tec.jsonl")]) == 0
    a = load_artifact(art)
    src = list(read_corpus(bundle / "target.tec.jsonl"))
    out = list(read_corpus(tmp_path / "mapped.tec.jsonl"))
    assert [r.tokens for r in src] == [r.tokens for r in out]
    np.testing.assert_allclose(out[3].vectors[2], transfer_vector(a, src[3].vectors[2]), atol=1e-15)


def test_bad_artifact_version(tmp_path, bundle):
    p = tmp_path / "v.json"
    p.write_text(json.dumps({"version": "99"}))
    assert main(["apply", "--artifact", str(p), "--corpus", str(bundle / "target.tec.jsonl"),
                 "--out", str(tmp_path / "o")]) == 1
