import json
import subprocess
import sys

import pytest

from bitt.cli import EXIT_INPUT, EXIT_OK, EXIT_USAGE, run


def read_jsonl(path):
    return [json.loads(line) for line in path.read_text(encoding="utf-8").splitlines() if line.strip()]


@pytest.fixture
def corpus(tmp_path):
    path = tmp_path / "corpus.jsonl"
    assert run(["generate", "--count", "60", "--seed", "4", "--cyclic", "--antiparallel-prob", "0.2",
                "--output", str(path)]) == EXIT_OK
    return path


def test_generate_is_reproducible(tmp_path, corpus):
    again = tmp_path / "again.jsonl"
    run(["generate", "--count", "60", "--seed", "4", "--cyclic", "--antiparallel-prob", "0.2", "--output", str(again)])
    assert again.read_bytes() == corpus.read_bytes()
    assert len(read_jsonl(corpus)) == 60


def test_classify(tmp_path, corpus):
    out = tmp_path / "flags.jsonl"
    assert run(["classify", "--input", str(corpus), "--output", str(out)]) == EXIT_OK
    rows = read_jsonl(out)
    assert len(rows) == 60
    assert set(rows[0]) == {"id", "epo", "els", "ils"}
    assert not any(r["els"] and r["ils"] for r in rows)


def test_stats_json_and_table(tmp_path, corpus):
    out = tmp_path / "stats.json"
    run(["stats", "--input", str(corpus), "--output", str(out)])
    stats = json.loads(out.read_text())
    assert stats["total"] == 60
    table = tmp_path / "stats.txt"
    run(["stats", "--input", str(corpus), "--output", str(table), "--format", "table"])
    assert "EPO+ILS+ELS" in table.read_text()


def test_pipeline_matches_roundtrip(tmp_path, corpus):
    enc, dec, sc, rt = (tmp_path / n for n in ("enc.jsonl", "dec.jsonl", "score.json", "rt.json"))
    assert run(["encode", "--input", str(corpus), "--output", str(enc)]) == EXIT_OK
    assert run(["decode", "--input", str(enc), "--output", str(dec)]) == EXIT_OK
    assert run(["score", "--input", str(dec), "--gold", str(corpus), "--output", str(sc)]) == EXIT_OK
    assert run(["roundtrip", "--input", str(corpus), "--output", str(rt)]) == EXIT_OK
    assert json.loads(sc.read_text()) == json.loads(rt.read_text())["micro"]


def test_jobs_do_not_change_output(tmp_path, corpus):
    one, four = tmp_path / "one.jsonl", tmp_path / "four.jsonl"
    run(["encode", "--input", str(corpus), "--output", str(one)])
    run(["encode", "--input", str(corpus), "--output", str(four), "--jobs", "4"])
    assert one.read_bytes() == four.read_bytes()


def test_forward_only_encoding(tmp_path, corpus):
    enc = tmp_path / "enc.jsonl"
    run(["encode", "--input", str(corpus), "--output", str(enc), "--direction", "forward"])
    for rec in read_jsonl(enc):
        assert all(list(seqs) == ["forward"] for seqs in rec["groups"].values())


def test_decode_needs_tokens(tmp_path):
    bad = tmp_path / "bad.jsonl"
    bad.write_text(json.dumps({"id": "x", "groups": {}}) + "\n")
    assert run(["decode", "--input", str(bad)]) == EXIT_INPUT


def test_malformed_input(tmp_path, capsys):
    bad = tmp_path / "bad.jsonl"
    bad.write_text("{not json\n")
    assert run(["classify", "--input", str(bad)]) == EXIT_INPUT
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["code"] == "input_error" and ":1:" in err["message"]


def test_missing_file():
    assert run(["stats", "--input", "/nonexistent/corpus.jsonl"]) == EXIT_INPUT


def test_skipped_sentence_is_logged(tmp_path, capsys):
    path = tmp_path / "c.jsonl"
    path.write_text(json.dumps({"id": "s1", "tokens": ["A"], "triples": [["A", "r", "Z"]]}) + "\n")
    assert run(["stats", "--input", str(path)]) == EXIT_OK
    err = json.loads(capsys.readouterr().err.strip())
    assert err == {"level": "warning", "code": "entity_not_found", "sentence_id": "s1",
                   "message": err["message"]}


@pytest.mark.parametrize(
    "argv",
    [[], ["frobnicate"], ["stats", "--mode", "loose"], ["score"], ["generate", "--density", "0.1", "0.2", "0.3"]],
)
def test_usage_errors(argv):
    assert run(argv) == EXIT_USAGE


def test_console_entry_point(tmp_path):
    out = subprocess.run(
        [sys.executable, "-m", "bitt", "generate", "--count", "2", "--seed", "1"],
        capture_output=True, text=True, check=True,
    )
    assert len(out.stdout.splitlines()) == 2
    bad = subprocess.run([sys.executable, "-m", "bitt", "nope"], capture_output=True, text=True)
    assert bad.returncode == EXIT_USAGE
