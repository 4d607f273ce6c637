import json
from pathlib import Path

import pytest

from gbqs.cli import main, run_microbench
from gbqs.constructions import two_layer_one_common

CONFIGS = Path(__file__).parent.parent / "configs"
GOLDEN_SPEC = Path(__file__).parent / "data" / "two_layer_k4.json"


def test_check_quorum_verdict_and_exit_codes(capsys):
    rc = main(
        [
            "check",
            str(GOLDEN_SPEC),
            "--subset",
            "A0,A1,A2,B0,B1,B3,B4,B6,B7",
            "--encoding",
            "mbf",
            "--encoding",
            "msp",
            "--encoding",
            "msp-lup",
        ]
    )
    out = capsys.readouterr().out
    assert rc == 0
    assert out.count("quorum") == 3
    assert "not-quorum" not in out


def test_check_empty_subset_is_not_a_quorum(capsys):
    rc = main(["check", str(GOLDEN_SPEC), "--subset", ""])
    assert rc == 1
    assert "not-quorum" in capsys.readouterr().out


def test_check_encodings_agree_on_random_subsets(capsys):
    import random

    rng = random.Random(50)
    plist = json.loads(GOLDEN_SPEC.read_text())["parties"]
    for _ in range(10):
        subset = ",".join(p for p in plist if rng.random() < 0.5)
        rc = main(
            ["check", str(GOLDEN_SPEC), "--subset", subset, "--encoding", "mbf", "--encoding", "msp"]
        )
        out = capsys.readouterr().out
        lines = [ln.split(":")[1].strip().split(" ")[0] for ln in out.strip().splitlines()]
        assert len(set(lines)) == 1
        assert rc in (0, 1)


def test_check_unknown_party_exits_2(capsys):
    rc = main(["check", str(GOLDEN_SPEC), "--subset", "A0,nobody"])
    assert rc == 2
    assert "unknown parties" in capsys.readouterr().err


def test_check_parse_failure_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    rc = main(["check", str(bad), "--subset", "A0"])
    assert rc == 2


def test_usage_error_exits_2(capsys):
    assert main(["frobnicate"]) == 2


def test_enumerate_reports_count(capsys, tmp_path):
    out_file = tmp_path / "quorums.txt"
    rc = main(["enumerate", str(GOLDEN_SPEC), "--count-only", "--out", str(out_file)])
    out = capsys.readouterr().out
    assert rc == 0
    assert "minimal_quorums=216" in out
    assert len(out_file.read_text().strip().splitlines()) == 216


def test_build_msp_prints_dimensions(capsys, tmp_path):
    rc = main(["build-msp", str(GOLDEN_SPEC), "--out", str(tmp_path / "m.txt")])
    out = capsys.readouterr().out
    assert rc == 0
    assert "rows=20 cols=11 predicted_rows=20 predicted_cols=11" in out
    dump = (tmp_path / "m.txt").read_text()
    assert dump.splitlines()[0] == "20 11 2147483647"


def test_build_msp_attribute_spec_dimensions(capsys, tmp_path):
    from gbqs.config import emit_spec
    from gbqs.constructions import attribute_formula, os_location_system

    system, f_attr = os_location_system()
    spec = tmp_path / "osloc.json"
    spec.write_bytes(emit_spec(attribute_formula(system, f_attr)))
    rc = main(["build-msp", str(spec), "--out", str(tmp_path / "m.txt")])
    out = capsys.readouterr().out
    assert rc == 0
    assert "rows=32 cols=22" in out


def test_microbench_single_trial_is_well_formed(capsys):
    rc = main(
        ["microbench", str(CONFIGS / "threshold_3of4.json"), "--trials", "1", "--seed", "3"]
    )
    out = capsys.readouterr().out
    assert rc == 0
    assert "microbench encoding=mbf" in out
    assert "trials=1" in out


def test_microbench_subset_sequence_is_seed_deterministic():
    formula = two_layer_one_common(4)
    import random

    def verdicts(seed):
        universe = sorted(
            p for p in json.loads(GOLDEN_SPEC.read_text())["parties"]
        )
        rng = random.Random(seed)
        from gbqs.formula import evaluate

        return [
            evaluate(formula, frozenset(p for p in universe if rng.random() < 0.5))
            for _ in range(200)
        ]

    assert verdicts(4) == verdicts(4)
    reports_a = run_microbench(formula, trials=50, seed=4)
    reports_b = run_microbench(formula, trials=50, seed=4)
    assert [r.memory_bytes for r in reports_a] == [r.memory_bytes for r in reports_b]


def test_simulate_happy_config_exits_zero(capsys):
    rc = main(["simulate", str(CONFIGS / "happy_basic.json")])
    out = capsys.readouterr().out
    assert rc == 0
    assert "safety=ok" in out and "liveness=ok" in out


def test_simulate_over_corruption_exits_one_with_counterexample(capsys, tmp_path):
    trace_file = tmp_path / "trace.tsv"
    rc = main(
        ["simulate", str(CONFIGS / "over_corruption.json"), "--out", str(trace_file)]
    )
    out = capsys.readouterr().out
    assert rc == 1
    assert "SAFETY VIOLATION" in out
    assert "conflicting decides" in out
    assert trace_file.read_text().count("\t") > 0


def test_simulate_seed_sweep(capsys):
    rc = main(["simulate", str(CONFIGS / "equivocation_2l1c.json"), "--seeds", "3"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "sweep: 3/3 runs clean" in out


def test_simulate_config_error_exits_two(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"simulation": {"faults": [{"replica": 0, "behavior": "gremlin"}]}}')
    rc = main(["simulate", str(bad)])
    assert rc == 2
    assert "gremlin" in capsys.readouterr().err
