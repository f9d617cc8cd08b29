import csv
import io
import math

import pytest
from hypothesis import given, settings, strategies as st

from mistakebound.adversary import (
    PolicyAdversary, greedy_stream, play_policy, random_stream, worst_case_adversary, worst_case_stream,
)
from mistakebound.cli import main
from mistakebound.core import constant, powerset, singletons, write_class, write_stream
from mistakebound.dims import mb_exact
from mistakebound.experiment import ConfigError, ExperimentConfig, run_experiment
from mistakebound.learner_helly import HellyLearner
from mistakebound.soa import SoaState
from mistakebound.verify import verify_suite

from conftest import classes

S3 = singletons(3)
S3Z = S3.union([constant(3, 0)])


def test_policy_forces_two_on_proper_singletons():
    stream, mistakes = play_policy(S3, S3, HellyLearner(S3, S3))
    assert mistakes == 2 == mb_exact(S3, S3).value
    assert S3.consistent(stream)


def test_policy_with_zero_hypothesis():
    stream, mistakes = play_policy(S3, S3Z, HellyLearner(S3, S3Z))
    assert mistakes >= 1 and S3.consistent(stream)


def test_powerset_forces_two():
    P = powerset(2)
    _, mistakes = play_policy(P, P, HellyLearner(P, P))
    assert mistakes == 2
    assert worst_case_stream(P, SoaState(P, P.full)).forced == 2
    assert isinstance(worst_case_adversary(P, P), PolicyAdversary)


@settings(max_examples=40)
@given(classes(max_n=4, max_size=8))
def test_adversaries_stay_realizable(C):
    wc = worst_case_stream(C, SoaState(C, C.full), T=16)
    assert C.consistent(wc.stream)
    g = greedy_stream(C, SoaState(C, C.full), T=8)
    assert g.heuristic and C.consistent(g.stream)
    H = C.union([constant(C.n, 0), constant(C.n, 1)])
    try:
        stream, _ = play_policy(C, H, HellyLearner(C, H))
    except ValueError:  # dual Helly number infinite
        return
    assert C.consistent(stream)


def test_cap_falls_back_to_greedy():
    P = powerset(3)
    wc = worst_case_stream(P, SoaState(P, P.full), T=5, cap=3)
    assert wc.heuristic and len(wc.stream) == 5


def test_helly_experiment():
    rec = run_experiment(ExperimentConfig("helly", "singletons:3", None, T=16))
    # K(S3, S3) = 3: all-zero labels need all three points to be unrealizable
    assert rec.summary["K"] == 3 and rec.summary["bound"] == math.ceil(4 * 3 * math.log(6)) == 22
    assert rec.summary["value"] == 2 and rec.passed


def test_helly_experiment_from_files(tmp_path):
    write_class(S3, tmp_path / "c.txt")
    write_class(S3Z, tmp_path / "h.txt")
    rec = run_experiment(ExperimentConfig("helly", str(tmp_path / "c.txt"), str(tmp_path / "h.txt")))
    assert rec.summary["value"] == 1 and rec.summary["bound"] == 12 and rec.passed


def test_vote_and_maj_experiments():
    rec = run_experiment(ExperimentConfig("maj", "powerset:2", T=20))
    assert rec.summary["value"] <= 160 and rec.summary["bound"] == 160 and rec.passed
    rec = run_experiment(ExperimentConfig("vote", "powerset:2", T=20, eps="1/3"))
    assert rec.passed


def test_agnostic_experiment():
    rec = run_experiment(ExperimentConfig("agnostic", "singletons:3", adversary="random", T=8, seed=4))
    assert rec.summary["value"] <= rec.summary["bound"] and rec.passed
    assert len(rec.rows) == 8


def test_summary_recomputable_from_rows():
    rec = run_experiment(ExperimentConfig("soa", "thresholds:5", adversary="random", T=30, seed=2))
    assert rec.summary["value"] == sum(r["mistake"] for r in rec.rows)
    rec = run_experiment(ExperimentConfig("agnostic", "thresholds:3", adversary="random", T=8, seed=1))
    assert float(rec.rows[-1]["cum_regret_vs_best"]) == pytest.approx(rec.summary["value"], abs=1e-5)


def test_deterministic_and_hashed(tmp_path):
    cfg = dict(learner="vote", class_ref="thresholds:4", adversary="random", T=12, eps="0.25", seed=9)
    a = run_experiment(ExperimentConfig(**cfg, out=str(tmp_path / "a.csv")))
    b = run_experiment(ExperimentConfig(**cfg, out=str(tmp_path / "b.csv")))
    assert a.config_hash == b.config_hash
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    c = run_experiment(ExperimentConfig(**{**cfg, "seed": 10}))
    assert c.config_hash != a.config_hash


def test_ledger_appends(tmp_path):
    ledger = tmp_path / "results.csv"
    for seed in (1, 2):
        run_experiment(ExperimentConfig("soa", "singletons:4", adversary="random", T=6, seed=seed,
                                        ledger=str(ledger)))
    rows = list(csv.DictReader(ledger.open()))
    assert len(rows) == 2 and rows[0]["learner"] == "soa" and rows[1]["seed"] == "2"


@pytest.mark.parametrize("cfg", [
    dict(learner="nope", class_ref="singletons:3"),
    dict(learner="vote", class_ref="singletons:3"),
    dict(learner="vote", class_ref="singletons:3", eps="0.7"),
    dict(learner="soa", class_ref="singletons:3", adversary="replay"),
    dict(learner="soa", class_ref="singletons:3", T=0),
    dict(learner="agnostic", class_ref="singletons:3", adversary="worst"),
])
def test_invalid_configs(cfg):
    with pytest.raises(ConfigError):
        run_experiment(ExperimentConfig(**cfg))


def test_replay_must_be_realizable_and_in_domain(tmp_path):
    p = tmp_path / "s.txt"
    write_stream([(0, 1), (1, 1)], p)
    with pytest.raises(ConfigError):
        run_experiment(ExperimentConfig("soa", "singletons:3", adversary="replay", stream=str(p)))
    write_stream([(5, 0)], p)
    with pytest.raises(ConfigError):
        run_experiment(ExperimentConfig("soa", "singletons:3", adversary="replay", stream=str(p)))


# -- command line ---------------------------------------------------------------

def test_cli_dims(capsys):
    assert main(["dims", "--class", "singletons:3"]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert rows[0]["ldim"] == "1"


def test_cli_game_and_tridim(tmp_path, capsys):
    m = tmp_path / "m.txt"
    m.write_text("2 2\n10\n01\n")
    assert main(["game", "value", "--matrix", str(m)]) == 0
    assert capsys.readouterr().out.splitlines()[1].startswith("1/2,")
    assert main(["game", "tridim", "--class", "thresholds:4"]) == 0
    assert capsys.readouterr().out.splitlines()[1] == "4"


def test_cli_mb_eq_gen(tmp_path, capsys):
    assert main(["mb-exact", "--class", "singletons:3"]) == 0
    assert capsys.readouterr().out.splitlines()[1].startswith("2,")
    assert main(["eq", "--class", "singletons:3"]) == 0
    assert capsys.readouterr().out.splitlines()[1] == "3,2"
    out = tmp_path / "s.txt"
    assert main(["gen", "stream", "singletons:3", "--T", "5", "--out", str(out), "--seed", "3"]) == 0
    assert len(out.read_text().splitlines()) == 5


def test_cli_run_writes_trace(tmp_path, capsys):
    out = tmp_path / "trace.csv"
    assert main(["run", "--learner", "helly", "--class", "singletons:3", "--out", str(out)]) == 0
    assert out.read_text().startswith("round,x,label,prediction")
    assert "config=" in capsys.readouterr().err


def test_cli_exit_code_two_on_bad_input(tmp_path, capsys):
    assert main(["dims", "--class", str(tmp_path / "missing.txt")]) == 2
    bad = tmp_path / "bad.txt"
    bad.write_text("3 2\n10\n")
    assert main(["dims", "--class", str(bad)]) == 2
    assert main(["run", "--learner", "vote", "--class", "singletons:3"]) == 2
    assert "error:" in capsys.readouterr().err


def test_cli_verify_quick_reports_each_criterion(capsys):
    code = main(["verify", "--level", "quick", "--criteria", "1,9"])
    out = capsys.readouterr().out
    assert code == 0 and out.count("[PASS]") == 2


def test_cli_verify_exit_one_on_failure(capsys):
    # the lower bound fails on single-concept classes (see the acceptance tests)
    assert main(["verify", "--criteria", "2"]) == 1
    assert "[FAIL]" in capsys.readouterr().out


def test_negative_control_names_criterion():
    rep = verify_suite("full", only=[3], mutate="flip_restrict", n_random=5)
    assert not rep.ok
    assert rep.results[0].number == 3 and "InvariantViolation" in rep.results[0].details[0]
