import json

import pytest

from felix.cli import main, resolve_config, UsageError
from felix.synth import rule_corpus

REPLACE = {"source": "The big very loud cat", "target": "The noisy large cat"}
TINY = ["--steps", "20", "--d_model", "16", "--d_ff", "16", "--layers", "1"]


def write(path, rows):
    path.write_text("".join(json.dumps(r) + "\n" for r in rows), encoding="utf-8")
    return str(path)


def read(path):
    return [json.loads(line) for line in path.read_text(encoding="utf-8").splitlines()]


@pytest.fixture
def corpus(tmp_path):
    rows = [{"source": " ".join(s), "target": " ".join(t)} for s, t in rule_corpus(8, seed=2)] + [REPLACE]
    return write(tmp_path / "corpus.jsonl", rows)


def test_align_replacement_example(tmp_path):
    src = write(tmp_path / "c.jsonl", [REPLACE])
    assert main(["align", src, "--out", str(tmp_path / "a.jsonl")]) == 0
    (rec,) = read(tmp_path / "a.jsonl")
    assert rec["tags"] == ["KEEP", "DELETE", "DELETE", "DELETE|INS_2", "KEEP"]
    assert rec["insertion_labels"] == ["noisy", "large"]
    summary = json.loads((tmp_path / "a.jsonl.summary.json").read_text())
    assert summary["coverage_percent"] == 100.0 and summary["config"]["mode"] == "masking"


def test_align_counts_skipped(tmp_path):
    rows = [{"source": "a", "target": "a " + "x " * 9}, {"source": "a b", "target": "a b"}]
    src = write(tmp_path / "c.jsonl", rows)
    assert main(["align", src, "--out", str(tmp_path / "a.jsonl"), "--max_span", "8"]) == 0
    summary = json.loads((tmp_path / "a.jsonl.summary.json").read_text())
    assert summary["skipped"] == {"InsertionSpanTooLong": 1} and summary["aligned"] == 1


def test_align_jsonl_round_trips(tmp_path, corpus):
    out = tmp_path / "a.jsonl"
    assert main(["align", corpus, "--out", str(out)]) == 0
    for line in out.read_text().splitlines():
        assert json.dumps(json.loads(line), sort_keys=True, ensure_ascii=False) == line


def test_full_pipeline_and_self_evaluation(tmp_path, corpus):
    assert main(["align", corpus, "--out", str(tmp_path / "a.jsonl")]) == 0
    assert main(["train", str(tmp_path / "a.jsonl"), "--out-dir", str(tmp_path / "m"), *TINY]) == 0
    assert (tmp_path / "m" / "tagger.ckpt").exists() and (tmp_path / "m" / "loss_log.tsv").exists()
    assert main(["predict", corpus, "--model-dir", str(tmp_path / "m"), "--out", str(tmp_path / "p.jsonl")]) == 0
    preds = read(tmp_path / "p.jsonl")
    assert set(preds[0]) == {"source", "prediction", "tags", "chain", "masked_input"}
    # evaluate predictions against themselves: Exact must be 100.
    refs = write(tmp_path / "r.jsonl", [{"target": p["prediction"]} for p in preds])
    assert main(["evaluate", str(tmp_path / "p.jsonl"), refs, "--out-dir", str(tmp_path / "ev")]) == 0
    report = json.loads((tmp_path / "ev" / "report.json").read_text())
    assert report["exact"] == 100.0
    assert "config" in report["metadata"]
    assert "exact: 100.0000" in (tmp_path / "ev" / "report.txt").read_text()


def test_predict_without_pointing_is_source_ordered(tmp_path, corpus):
    main(["align", corpus, "--out", str(tmp_path / "a.jsonl")])
    main(["train", str(tmp_path / "a.jsonl"), "--out-dir", str(tmp_path / "m"), *TINY])
    out = tmp_path / "p.jsonl"
    assert main(["predict", corpus, "--model-dir", str(tmp_path / "m"), "--out", str(out),
                 "--pointing_enabled", "false"]) == 0
    assert all(r["chain"] == sorted(r["chain"]) for r in read(out))


def test_stats(tmp_path):
    ident = write(tmp_path / "i.jsonl", [{"source": "a b", "target": "a b"}] * 2)
    assert main(["stats", ident, "--out", str(tmp_path / "s.json")]) == 0
    st = json.loads((tmp_path / "s.json").read_text())
    assert st["ter"] == 0.0
    assert all(v["coverage_percent"] == 100.0 and v["mask_percent"] == 0.0 for v in st["settings"].values())
    one = write(tmp_path / "f.jsonl", [REPLACE])
    assert main(["stats", one, "--out", str(tmp_path / "f.json")]) == 0
    st = json.loads((tmp_path / "f.json").read_text())
    assert st["settings"]["masking/pointing"]["mask_percent"] == 50.0
    assert "coverage%" in (tmp_path / "f.json.txt").read_text()


def test_usage_errors(tmp_path, corpus):
    assert main([]) == 1
    assert main(["bogus"]) == 1
    assert main(["align", corpus]) == 1  # missing --out
    assert main(["align", corpus, "--out", str(tmp_path / "a"), "--no_such_key", "1"]) == 1
    assert main(["align", corpus, "--out", str(tmp_path / "a"), "--steps", "many"]) == 1
    cfg = write(tmp_path / "cfg.json", [])
    (tmp_path / "cfg.json").write_text('{"mode": "infilling", "bad": 1}')
    assert main(["align", corpus, "--out", str(tmp_path / "a"), "--config", cfg]) == 1


def test_config_file_and_override(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text('{"mode": "infilling", "max_span": 4}')
    cfg = resolve_config(str(path), ["--max_span", "6"])
    assert cfg["mode"] == "infilling" and cfg["max_span"] == 6
    with pytest.raises(UsageError):
        resolve_config(None, ["--heads", "3"])  # 64 is not divisible by 3


def test_data_errors(tmp_path):
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"source": "a", "target": "a"}\n{oops\n')
    assert main(["align", str(bad), "--out", str(tmp_path / "a.jsonl")]) == 2
    empty = write(tmp_path / "e.jsonl", [])
    assert main(["evaluate", empty, empty, "--out-dir", str(tmp_path / "ev")]) == 2
    assert main(["train", empty, "--out-dir", str(tmp_path / "m")]) == 2
    assert main(["stats", empty, "--out", str(tmp_path / "s.json")]) == 2
    p = write(tmp_path / "p.jsonl", [{"source": "a", "prediction": "a"}])
    r = write(tmp_path / "r.jsonl", [{"target": "a"}, {"target": "b"}])
    assert main(["evaluate", p, r, "--out-dir", str(tmp_path / "ev")]) == 2
    assert main(["predict", p, "--model-dir", str(tmp_path / "nowhere"), "--out", str(tmp_path / "x")]) == 2


def test_malformed_line_number_reported(tmp_path, capsys):
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"source": "a", "target": "a"}\n{oops\n')
    main(["align", str(bad), "--out", str(tmp_path / "a.jsonl")])
    assert "bad.jsonl:2" in capsys.readouterr().err


def test_mixed_checkpoints_rejected(tmp_path):
    c1 = write(tmp_path / "c1.jsonl", [REPLACE])
    c2 = write(tmp_path / "c2.jsonl", [{"source": "x y", "target": "y x"}])
    for name, c in (("m1", c1), ("m2", c2)):
        main(["align", c, "--out", str(tmp_path / f"{name}.jsonl")])
        main(["train", str(tmp_path / f"{name}.jsonl"), "--out-dir", str(tmp_path / name), *TINY])
    (tmp_path / "m1" / "insertion.ckpt").write_bytes((tmp_path / "m2" / "insertion.ckpt").read_bytes())
    assert main(["predict", c1, "--model-dir", str(tmp_path / "m1"), "--out", str(tmp_path / "p")]) == 2


def test_numeric_failure_exit_code(tmp_path, corpus):
    main(["align", corpus, "--out", str(tmp_path / "a.jsonl")])
    import numpy as np
    with np.errstate(all="ignore"):
        code = main(["train", str(tmp_path / "a.jsonl"), "--out-dir", str(tmp_path / "m"), *TINY, "--lr", "1e6"])
    assert code == 3
