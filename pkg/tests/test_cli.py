from __future__ import annotations

import json
from fractions import Fraction

import pytest

from rigidkatz import corpus, io
from rigidkatz.cli import main
from rigidkatz.datum import INF, FormalTypeDatum
from rigidkatz.formal_disk import Block
from rigidkatz.puiseux import PhasePart
from rigidkatz.transforms import MoebiusMap, kummer_datum, moebius

F = Fraction


@pytest.fixture
def emit(tmp_path):
    def _emit(name, **kw):
        path = tmp_path / f"{name}.json"
        assert main(["corpus", "emit", name, "--out", str(path)] + [f"--{k}={v}" for k, v in kw.items()]) == 0
        return path

    return _emit


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_corpus_list(capsys):
    code, out, _ = run(capsys, "corpus", "list")
    assert code == 0
    for name in corpus.names():
        assert name in out


def test_corpus_emit_unknown(capsys):
    code, _, err = run(capsys, "corpus", "emit", "nonesuch")
    assert code == 3 and "unknown" in err


def test_emit_kummer_with_lambda(emit):
    path = emit("kummer", **{"lambda": "1/3"})
    d = io.load(path)
    assert d == kummer_datum(F(1, 3)) and len(d.points) == 2


def test_validate_ok(emit, capsys):
    code, out, _ = run(capsys, "validate", emit("kummer"))
    assert code == 0


def test_validate_mixed_rank(tmp_path, capsys):
    d = FormalTypeDatum.make(2, {0: [Block.regular(F(1, 3)), Block.regular(F(2, 3))],
                                 1: [Block.regular(F(1, 5), mult=3)]})
    path = tmp_path / "mixed.json"
    path.write_text(io.dumps(d))
    code, out, err = run(capsys, "validate", path)
    assert code == 3
    assert "constant-rank violated" in out + err


def test_validate_malformed_fraction(emit, tmp_path, capsys):
    text = emit("kummer").read_text().replace('"1/3"', '"3/"')
    path = tmp_path / "bad.json"
    path.write_text(text)
    code, out, err = run(capsys, "validate", path)
    assert code == 3
    assert "line" in err and "column" in err


def test_missing_file(capsys):
    code, _, err = run(capsys, "validate", "/nonexistent/x.json")
    assert code == 3


def test_invariants(emit, capsys):
    code, out, _ = run(capsys, "invariants", emit("hypergeometric2"), "--json")
    assert code == 0
    report = json.loads(out)
    assert report["rig"] == 2


def test_invariants_kummer_end_euler_char(emit, capsys):
    code, out, _ = run(capsys, "invariants", emit("kummer"), "--json")
    report = json.loads(out)
    assert report["rig"] == 2 and report["chi_end"] == 2


@pytest.mark.parametrize("name", corpus.names())
def test_invariants_with_oracle_agree(emit, capsys, name):
    code, out, _ = run(capsys, "invariants", emit(name), "--oracle", "--json")
    assert code == 0
    report = json.loads(out)
    assert report["oracle"] == "agree"
    assert report["rig"] == corpus.get(name).rig


def test_reduce_kloosterman_with_trace(emit, tmp_path, capsys):
    trace_path = tmp_path / "trace.json"
    code, out, _ = run(capsys, "reduce", emit("kloosterman"), "--trace", trace_path)
    assert code == 0
    trace = json.loads(trace_path.read_text())
    ops = [op["op"] for step in trace["steps"] for op in step["ops"]]
    assert ops.count("fourier") == 1


def test_reduce_rig4(emit, capsys):
    code, out, _ = run(capsys, "reduce", emit("rig4"))
    assert code == 1 and "RigExceedsTwo" in out


def test_reduce_rig0(emit, capsys):
    code, out, _ = run(capsys, "reduce", emit("rig0"), "--json")
    assert code == 2
    report = json.loads(out)
    assert report["rig"] == 0 and report["moduli_dimension"] == 2


def test_reduce_airy(emit, capsys):
    code, out, _ = run(capsys, "reduce", emit("airy"), "--json")
    assert code == 0
    report = json.loads(out)
    assert report["verdict"] == "Solvable" and report["steps"] == 1


def test_reduce_invalid(tmp_path, capsys):
    d = FormalTypeDatum.make(1, {0: [Block.regular(F(1, 3))], 1: [Block.regular(F(1, 3))]})
    path = tmp_path / "bad.json"
    path.write_text(io.dumps(d))
    code, _, _ = run(capsys, "reduce", path)
    assert code == 3


def test_apply_fourier_to_kummer(emit, tmp_path, capsys):
    out_path = tmp_path / "ft.json"
    code, _, _ = run(capsys, "apply", emit("kummer"), "--op", '{"op": "fourier"}', "--out", out_path)
    assert code == 0
    assert io.load(out_path) == kummer_datum(F(-1, 3))


def test_apply_fourier_twice_is_negation(emit, tmp_path, capsys):
    src = emit("kloosterman")
    once, twice, neg = tmp_path / "1.json", tmp_path / "2.json", tmp_path / "neg.json"
    assert main(["apply", str(src), "--op", '{"op": "fourier"}', "--out", str(once)]) == 0
    assert main(["apply", str(once), "--op", '{"op": "fourier"}', "--out", str(twice)]) == 0
    op_file = tmp_path / "neg_op.json"
    op_file.write_text('{"op": "moebius", "params": {"matrix": [["-1", "0"], ["0", "1"]]}}')
    assert main(["apply", str(src), "--op", f"@{op_file}", "--out", str(neg)]) == 0
    capsys.readouterr()
    assert twice.read_text() == neg.read_text()
    assert io.load(twice) == moebius(corpus.emit("kloosterman"), MoebiusMap.negation())


def test_apply_skyscraper_and_bad_op(tmp_path, capsys):
    d = FormalTypeDatum.make(1, {INF: [Block.make(PhasePart.monomial(1, -1))]})
    path = tmp_path / "sky.json"
    path.write_text(io.dumps(d))
    code, out, err = run(capsys, "apply", path, "--op", '{"op": "fourier"}')
    assert code == 1 and "skyscraper" in (out + err).lower()
    code, _, _ = run(capsys, "apply", path, "--op", '{"op": "rotate"}')
    assert code == 3


def test_replay_backward_is_byte_identical(emit, tmp_path, capsys):
    for name in ("hypergeometric3", "kloosterman", "confluent"):
        src = emit(name)
        trace_path, back = tmp_path / f"{name}.trace.json", tmp_path / f"{name}.back.json"
        assert main(["reduce", str(src), "--trace", str(trace_path)]) == 0
        assert main(["replay", str(trace_path), "--backward", "--out", str(back)]) == 0
        capsys.readouterr()
        assert back.read_text() == io.dumps(io.load(src))


def test_replay_detects_tampering(emit, tmp_path, capsys):
    src = emit("hypergeometric2")
    trace_path = tmp_path / "t.json"
    assert main(["reduce", str(src), "--trace", str(trace_path)]) == 0
    raw = json.loads(trace_path.read_text())
    for step in raw["steps"]:
        for op in step["ops"]:
            if op["op"] == "mc":
                op["params"]["lambda"]["num"][0] = "1/10"
        if "lambda" in step:
            step["lambda"]["num"][0] = "1/10"
    trace_path.write_text(json.dumps(raw))
    capsys.readouterr()
    code, _, err = run(capsys, "replay", trace_path, "--backward")
    assert code == 4


def test_reduce_emitted_corpus_matches_expectations(emit, capsys):
    expected_code = {"Solvable": 0, "NoSolution": 1, "NotRigid": 2}
    for name in corpus.names():
        e = corpus.get(name)
        code, out, _ = run(capsys, "reduce", emit(name))
        assert code == expected_code[e.verdict], name
        if e.reason:
            assert e.reason in out
