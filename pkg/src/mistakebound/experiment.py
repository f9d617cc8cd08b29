"""Configured single runs: pick a learner and an adversary, write the trace, log a summary."""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

from .adversary import random_label_stream, random_stream, worst_case_stream
from .agnostic import agnostic_run
from .core import ConceptClass, format_class, generate, read_class, read_stream
from .dims import ldim
from .learner_helly import HellyLearner, helly_bound, lh_run
from .learner_vote import MajLearner, VoteLearner, lv_as_mistake_learner, lv_run
from .soa import SoaState, soa_run

LEARNERS = ("soa", "helly", "vote", "maj", "agnostic")
ADVERSARIES = ("worst", "random", "replay")
LEDGER_FIELDS = ("config_hash", "learner", "adversary", "T", "eps", "seed", "measure",
                 "value", "bound", "passed")


class ConfigError(ValueError):
    pass


def load_class(ref: str) -> ConceptClass:
    """A class from a file path or a generator descriptor such as ``singletons:3``."""
    if Path(ref).is_file():
        return read_class(ref)
    return generate(ref)


@dataclass
class ExperimentConfig:
    learner: str
    class_ref: str
    hypotheses_ref: str | None = None
    adversary: str = "worst"
    T: int = 64
    eps: str | None = None
    seed: int = 0
    stream: str | None = None
    out: str | None = None
    ledger: str | None = None

    def validate(self) -> None:
        if self.learner not in LEARNERS:
            raise ConfigError(f"unknown learner {self.learner!r}; choose from {', '.join(LEARNERS)}")
        if self.adversary not in ADVERSARIES:
            raise ConfigError(f"unknown adversary {self.adversary!r}")
        if self.T < 1:
            raise ConfigError("T must be positive")
        if self.adversary == "replay" and not self.stream:
            raise ConfigError("the replay adversary needs a stream file")
        if self.stream and not Path(self.stream).is_file():
            raise ConfigError(f"stream file {self.stream} not found")
        if self.learner == "vote":
            if self.eps is None:
                raise ConfigError("the vote learner needs --eps")
            if not 0 < self.epsilon < Fraction(1, 2):
                raise ConfigError("eps must lie in (0, 1/2)")
        if self.learner == "agnostic" and self.adversary == "worst":
            raise ConfigError("the agnostic learner runs on a replayed or random label stream")

    @property
    def epsilon(self) -> Fraction | None:
        if self.eps is None:
            return None
        try:
            return Fraction(self.eps).limit_denominator(10**9)
        except ValueError as exc:
            raise ConfigError(f"bad eps {self.eps!r}") from exc

    def digest(self, C: ConceptClass, H: ConceptClass | None, stream) -> str:
        """Hash of the settings and the resolved inputs (not the output paths)."""
        data = {k: v for k, v in asdict(self).items() if k not in ("out", "ledger", "class_ref",
                                                                   "hypotheses_ref", "stream")}
        data["class"] = format_class(C)
        data["hypotheses"] = format_class(H) if H is not None else None
        data["stream"] = stream
        blob = json.dumps(data, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass
class RunRecord:
    config_hash: str
    columns: tuple[str, ...]
    rows: list[dict]
    summary: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.summary.get("passed"))

    def write_csv(self, fh) -> None:
        w = csv.DictWriter(fh, fieldnames=self.columns, lineterminator="\n")
        w.writeheader()
        w.writerows(self.rows)


def _replay(cfg: ExperimentConfig, C: ConceptClass):
    stream = read_stream(cfg.stream)[: cfg.T]
    for x, _ in stream:
        if not 0 <= x < C.n:
            raise ConfigError(f"stream instance {x} outside the domain of size {C.n}")
    return stream


def _realizable_stream(cfg: ExperimentConfig, C: ConceptClass, learner):
    if cfg.adversary == "replay":
        stream = _replay(cfg, C)
        if not C.consistent(stream):
            raise ConfigError("replayed stream is not realizable by the class")
        return stream
    if cfg.adversary == "random":
        return random_stream(C, cfg.T, cfg.seed)
    return worst_case_stream(C, learner, T=cfg.T).stream


def _fmt(v) -> str:
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else str(v.numerator)
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def run_experiment(cfg: ExperimentConfig) -> RunRecord:
    """Run one configuration; deterministic given the seed."""
    cfg.validate()
    C = load_class(cfg.class_ref)
    H = load_class(cfg.hypotheses_ref) if cfg.hypotheses_ref else None
    if H is not None and H.n != C.n:
        raise ConfigError("class and hypotheses have different domain sizes")
    L = ldim(C)

    if cfg.learner == "soa":
        stream = _realizable_stream(cfg, C, SoaState(C, C.full))
        preds, mistakes, _ = soa_run(C, stream)
        cols = ("round", "x", "label", "prediction", "mistake")
        rows = [dict(zip(cols, (t, x, y, p, int(p != y)))) for t, ((x, y), p) in enumerate(zip(stream, preds), 1)]
        summary = {"measure": "mistakes", "value": mistakes, "bound": L}
    elif cfg.learner == "helly":
        H = H or C
        probe = HellyLearner(C, H)
        stream = _realizable_stream(cfg, C, probe)
        trace = lh_run(C, H, stream, learner=HellyLearner(C, H, K=probe.K, L=probe.L, cache=probe.cache))
        cols = ("round", "x", "label", "prediction", "mistake", "branches", "hypothesis")
        rows = [dict(zip(cols, (r.t, r.x, r.y, r.prediction, int(r.mistake), len(r.branches),
                                "".join(map(str, r.hypothesis))))) for r in trace.rounds]
        summary = {"measure": "mistakes", "value": trace.mistake_count,
                   "bound": math.ceil(helly_bound(trace.L, trace.K)), "K": trace.K, "L": L,
                   "branch_rounds": trace.branch_count}
    elif cfg.learner in ("vote", "maj"):
        eps = cfg.epsilon if cfg.learner == "vote" else Fraction(1, 3)
        make = (lambda cache: VoteLearner(C, eps, seed=cfg.seed, cache=cache)) if cfg.learner == "vote" \
            else (lambda cache: MajLearner(C, eps, seed=cfg.seed, cache=cache))
        cache: dict = {}
        stream = _realizable_stream(cfg, C, make(cache))
        if cfg.learner == "vote":
            trace = lv_run(C, eps, stream, learner=make(cache))
            summary = {"measure": "margin_errors", "value": trace.margin_error_count,
                       "bound": trace.bound}
        else:
            trace = lv_as_mistake_learner(C, stream, learner=make(cache))
            summary = {"measure": "mistakes", "value": trace.mistake_count, "bound": 80 * L}
        summary.update(branch_rounds=trace.branch_count, max_vote_size=trace.max_vote_size)
        cols = ("round", "x", "label", "vote_value", "vote_size", "margin_error", "mistake", "branches")
        rows = [dict(zip(cols, (r.t, r.x, r.y, _fmt(r.value), r.vote_size, int(r.margin_error),
                                int(r.mistake), r.branches))) for r in trace.rounds]
    else:
        if cfg.adversary == "replay":
            stream = _replay(cfg, C)
        else:
            stream = random_label_stream(C.n, cfg.T, cfg.seed)
        res = agnostic_run(C, stream, seed=cfg.seed)
        cols = ("round", "vote_size", "prediction", "label", "abs_loss", "cum_regret_vs_best")
        rows = [{k: _fmt(v) for k, v in row.items()} for row in res.csv_rows()]
        summary = {"measure": "regret", "value": res.regret, "bound": res.composite_bound,
                   "aggregator_regret": res.aggregator_regret, "aggregator_bound": res.aggregator_bound,
                   "trivial_regime": res.trivial_regime, "chain_ok": all(res.chain.values())}

    summary["passed"] = summary["value"] <= summary["bound"] + 1e-9 and summary.get("chain_ok", True)
    rec = RunRecord(cfg.digest(C, H, stream), cols, rows, summary)
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            rec.write_csv(fh)
    if cfg.ledger:
        append_ledger(cfg, rec)
    return rec


def append_ledger(cfg: ExperimentConfig, rec: RunRecord) -> None:
    """Add one summary row to the results CSV, writing the header for a new file."""
    path = Path(cfg.ledger)
    new = not path.exists() or path.stat().st_size == 0
    row = {"config_hash": rec.config_hash, "learner": cfg.learner, "adversary": cfg.adversary,
           "T": cfg.T, "eps": cfg.eps or "", "seed": cfg.seed,
           "measure": rec.summary["measure"], "value": _fmt(rec.summary["value"]),
           "bound": _fmt(rec.summary["bound"]), "passed": int(rec.passed)}
    with path.open("a", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=LEDGER_FIELDS, lineterminator="\n")
        if new:
            w.writeheader()
        w.writerow(row)
