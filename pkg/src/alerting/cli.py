"""Command-line harness: ``alerting {analyze,simulate,attack-demo,verify}``.

Experiments are described by a JSON file; every list under ``params`` is a
grid axis. Output tables are CSV, written to ``--out`` or stdout.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import statistics
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, TextIO

from . import adversary as adv
from . import game, verify
from .agents import NodePolicy
from .core import BribeVector, InvalidParams, Outcome, ProtocolParams, TokenAmount, format_tokens, make_params
from .protocols import (
    RoundConfig, SlotSchedule, conservation_holds, run_burned_penalty, run_lockstep,
    run_naive_commit_reveal, run_sequential, run_tee_round,
)
from .protocols.catalog import PROTOCOLS

EXIT_OK, EXIT_INVARIANT, EXIT_CONFIG = 0, 1, 2

SIM_PROTOCOLS = ("lockstep", "tee", "sequential", "burned", "naive")
ANALYZE_HEADER = ["protocol", "n", "lambda", "c", "bribe_cost", "tx_alert", "tx_noalert", "latency_class"]
SIMULATE_HEADER = [
    "protocol", "n", "lambda", "c", "strategy", "gain_G", "trials", "suppression_prob",
    "mean_adv_utility", "ci_low", "ci_high", "mean_total_bribes", "mean_tx_count", "mean_alert_slot",
]
DEMO_HEADER = ["n", "lambda", "naive_cost", "formula_cost", "naive_suppressed", "tee_alert_raised",
               "tee_spend", "quadratic_cost", "naive_over_quadratic"]


class ConfigError(ValueError):
    def __init__(self, problems: Sequence[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


# ------------------------------------------------------------------ config

@dataclass
class ExperimentSpec:
    protocol: str = "lockstep"
    grid: Dict[str, list] = field(default_factory=lambda: {"n": [3], "penalty_lambda": [1]})
    strategy: Dict[str, object] = field(default_factory=lambda: {"kind": "none"})
    nodes: str = "rational"
    trials: int = 1000
    seed: int = 0
    out: Optional[str] = None

    def points(self) -> List[ProtocolParams]:
        keys = sorted(self.grid)
        problems, out = [], []
        for combo in itertools.product(*(self.grid[k] for k in keys)):
            raw = {k: _money(v) for k, v in zip(keys, combo)}
            try:
                out.append(make_params(raw))
            except InvalidParams as exc:
                problems.extend(f"grid point {raw}: {v}" for v in exc.violations)
        if problems:
            raise ConfigError(problems)
        return out


def _money(v):
    # JSON has no exact decimals; strings such as "1.5" or "4/3" stay exact
    if isinstance(v, str):
        return Fraction(v)
    if isinstance(v, float):
        return Fraction(str(v))
    return v


def spec_from_dict(raw: Dict[str, object]) -> ExperimentSpec:
    known = {"protocol", "params", "strategy", "nodes", "trials", "seed", "out"}
    problems = [f"{k}: unknown key" for k in raw if k not in known]
    spec = ExperimentSpec()
    if "protocol" in raw:
        spec.protocol = str(raw["protocol"])
    if "params" in raw:
        params = raw["params"]
        if not isinstance(params, dict):
            problems.append("params: must be an object")
        else:
            spec.grid = {k: v if isinstance(v, list) else [v] for k, v in params.items()}
            if any(not v for v in spec.grid.values()):
                problems.append("params: empty grid axis")
    if "strategy" in raw:
        if not isinstance(raw["strategy"], dict):
            problems.append("strategy: must be an object")
        else:
            spec.strategy = dict(raw["strategy"])
    spec.nodes = str(raw.get("nodes", spec.nodes))
    for key in ("trials", "seed"):
        if key in raw:
            v = raw[key]
            if isinstance(v, bool) or not isinstance(v, int) or v < 0:
                problems.append(f"{key}: must be a nonnegative integer")
            else:
                setattr(spec, key, v)
    spec.out = raw.get("out", spec.out)  # type: ignore[assignment]
    if problems:
        raise ConfigError(problems)
    return spec


def load_spec(path: Optional[str]) -> ExperimentSpec:
    if path is None:
        return ExperimentSpec()
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError([f"{path}: {exc.strerror}"]) from None
    except json.JSONDecodeError as exc:
        raise ConfigError([f"{path}: invalid JSON ({exc})"]) from None
    if not isinstance(raw, dict):
        raise ConfigError([f"{path}: top level must be an object"])
    return spec_from_dict(raw)


def _gain(value, params: ProtocolParams) -> Fraction:
    """Gain may be a number or a named threshold, optionally with ``+<amount>``."""
    if isinstance(value, str) and value.split("+")[0].strip() in _NAMED_GAINS:
        name, _, extra = value.partition("+")
        base = _NAMED_GAINS[name.strip()](params)
        return base + (Fraction(extra.strip()) if extra else 0)
    return Fraction(_money(value))


_NAMED_GAINS = {
    "simultaneous_threshold": game.simultaneous_suppression_threshold,
    "sequential_threshold": game.sequential_suppression_threshold,
    "burned_threshold": game.burned_penalty_resistance,
}


def build_strategy(raw: Dict[str, object], params: ProtocolParams) -> adv.AdversaryStrategy:
    try:
        kind = adv.StrategyKind(raw.get("kind", "none"))
        cap = raw.get("budget_cap")
        return adv.AdversaryStrategy(
            kind=kind,
            gain_G=TokenAmount.of(_gain(raw.get("gain_G", 0), params)),
            conditional=bool(raw.get("conditional", False)),
            beta=None if raw.get("beta") is None else TokenAmount.of(_money(raw["beta"])),
            vector=tuple(TokenAmount.of(_money(x)) for x in raw.get("vector", ())),  # type: ignore[union-attr]
            budget_cap=None if cap is None else TokenAmount.of(_money(cap)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError([f"strategy: {exc}"]) from None


def node_policies(kind: str, n: int, seed: int) -> Dict[int, NodePolicy]:
    if kind == "rational":
        return {i: NodePolicy.bribed(seed) for i in range(1, n + 1)}
    if kind == "honest":
        return {}
    if kind.startswith("mixed:"):
        q = Fraction(kind.split(":", 1)[1])
        return {i: NodePolicy.mixed(q, seed) for i in range(1, n + 1)}
    raise ConfigError([f"nodes: expected rational, honest or mixed:<q>, got {kind!r}"])


# ------------------------------------------------------------------- verbs

def cmd_analyze(spec: ExperimentSpec, protocols: Sequence[str]) -> List[List[str]]:
    grid = dict(spec.grid)
    grid.setdefault("n", list(range(2, 65)))
    points = ExperimentSpec(grid=grid).points()
    rows = []
    for pid in protocols:
        info = PROTOCOLS[pid]
        for p in points:
            rows.append([pid, str(p.n), format_tokens(p.lam), format_tokens(p.c), format_tokens(info.bribe_cost(p)),
                         str(info.tx_alert(p.n)), str(info.tx_noalert(p.n)), info.latency_class])
    return rows


def run_one(protocol: str, params: ProtocolParams, policies, bribes: BribeVector, trial: int, seed: int,
            strategy: adv.AdversaryStrategy, schedule: Optional[SlotSchedule]) -> Outcome:
    cfg = RoundConfig(params, round_index=trial, seed=seed * 1_000_003 + trial)
    script = None
    if strategy.kind is adv.StrategyKind.EARLY_REVEAL_GREEDY:
        script = adv.early_reveal_script(params)
    if protocol == "lockstep":
        return run_lockstep(cfg, policies, bribes, conditional=strategy.conditional)
    if protocol == "burned":
        return run_burned_penalty(cfg, policies, bribes, conditional=strategy.conditional)
    if protocol == "tee":
        return run_tee_round(cfg, policies, bribes, conditional=strategy.conditional, collusion_script=script)
    if protocol == "naive":
        return run_naive_commit_reveal(cfg, policies, bribes, collusion_script=script,
                                       conditional=strategy.conditional)
    return run_sequential(cfg, policies, bribes, schedule)


def cmd_simulate(spec: ExperimentSpec, protocol: str) -> tuple:
    """Returns (csv rows, conservation failures)."""
    rows, failures = [], []
    for params in spec.points():
        strategy = build_strategy(spec.strategy, params)
        policies = node_policies(spec.nodes, params.n, spec.seed)
        utils: List[Fraction] = []
        spend = Fraction(0)
        suppressed = tx = 0
        slots: List[int] = []
        for t in range(spec.trials):
            schedule = SlotSchedule.for_round(params.n, t) if protocol == "sequential" else None
            bribes = adv.emit_bribes(strategy, params, schedule)
            out = run_one(protocol, params, policies, bribes, t, spec.seed, strategy, schedule)
            if not conservation_holds(out, burn=protocol == "burned"):
                failures.append((params.n, t))
            utils.append(out.adversary_payoff)
            spend += out.adversary_spend
            suppressed += out.suppressed
            tx += out.tx_count
            if out.alert_slot is not None:
                slots.append(out.alert_slot)
        k = max(1, spec.trials)
        mean = float(sum(utils, Fraction(0)) / k)
        half = 1.96 * statistics.stdev(float(u) for u in utils) / math.sqrt(k) if len(utils) > 1 else 0.0
        rows.append([
            protocol, str(params.n), format_tokens(params.lam), format_tokens(params.c), strategy.kind.value,
            format_tokens(strategy.gain_G.tokens), str(spec.trials), f"{suppressed / k:.6f}",
            f"{mean:.6f}", f"{mean - half:.6f}", f"{mean + half:.6f}", f"{float(spend / k):.6f}", f"{tx / k:.6f}",
            f"{sum(slots) / len(slots):.6f}" if slots else "",
        ])
    return rows, failures


def cmd_attack_demo(ns: Sequence[int] = (4, 8, 16, 32), lam=1, seed: int = 0) -> tuple:
    """Early-reveal script against the naive and TEE commit-reveal rounds (epsilon = 0)."""
    rows, problems = [], []
    prev_ratio = None
    for n in ns:
        p = make_params({"n": n, "penalty_lambda": lam})
        formula = game.early_reveal_attack_cost(p, 0)
        script = adv.early_reveal_script(p, 0)
        policies = node_policies("rational", n, seed)
        gain = TokenAmount.of(math.ceil(game.simultaneous_suppression_threshold(p)) + 1)
        cfg = RoundConfig(p, seed=seed)
        naive = run_naive_commit_reveal(cfg, policies, BribeVector({}, gain), collusion_script=script)
        tee = run_tee_round(cfg, policies, BribeVector({}, gain), collusion_script=script)
        quad = game.simultaneous_suppression_threshold(p)
        ratio = formula / quad
        if naive.alert_raised or naive.adversary_spend != formula:
            problems.append(f"n={n}: naive cost {naive.adversary_spend} != {formula}")
        if not tee.alert_raised:
            problems.append(f"n={n}: TEE round suppressed with budget {formula}")
        if prev_ratio is not None and not ratio < prev_ratio:
            problems.append(f"n={n}: naive/quadratic ratio did not decrease")
        prev_ratio = ratio
        rows.append([str(n), format_tokens(p.lam), format_tokens(naive.adversary_spend), format_tokens(formula),
                     str(naive.suppressed).lower(), str(tee.alert_raised).lower(),
                     format_tokens(tee.adversary_spend), format_tokens(quad), f"{float(ratio):.6f}"])
    return rows, problems


# ------------------------------------------------------------------ output

def _write_csv(header: Sequence[str], rows: Sequence[Sequence[str]], out: Optional[str], stream: TextIO) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())
    else:
        stream.write(buf.getvalue())


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="alerting", description="Bribery-resistant alerting experiments.")
    ap.add_argument("verb", choices=["analyze", "simulate", "attack-demo", "verify"])
    ap.add_argument("--config", help="JSON experiment file")
    ap.add_argument("--seed", type=int, help="base seed (overrides the config)")
    ap.add_argument("--out", help="CSV output path (default: stdout)")
    ap.add_argument("--protocol", help="protocol id")
    ap.add_argument("--trials", type=int, help="trials per grid point (verify: simulated rounds)")
    return ap


def main(argv: Optional[Sequence[str]] = None, stdout: TextIO = sys.stdout, stderr: TextIO = sys.stderr) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = load_spec(args.config)
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError(["--seed: must be nonnegative"])
            spec.seed = args.seed
        if args.trials is not None:
            if args.trials < 1:
                raise ConfigError(["--trials: must be positive"])
            spec.trials = args.trials
        out = args.out or spec.out

        if args.verb == "analyze":
            pids = [args.protocol] if args.protocol else list(PROTOCOLS)
            unknown = [p for p in pids if p not in PROTOCOLS]
            if unknown:
                raise ConfigError([f"--protocol: unknown {unknown[0]!r}; choose from {sorted(PROTOCOLS)}"])
            if args.config is None:
                spec.grid = {"n": list(range(2, 65)), "penalty_lambda": [1]}
            _write_csv(ANALYZE_HEADER, cmd_analyze(spec, pids), out, stdout)
            return EXIT_OK

        if args.verb == "simulate":
            protocol = args.protocol or spec.protocol
            if protocol not in SIM_PROTOCOLS:
                raise ConfigError([f"protocol: unknown {protocol!r}; choose from {list(SIM_PROTOCOLS)}"])
            rows, failures = cmd_simulate(spec, protocol)
            _write_csv(SIMULATE_HEADER, rows, out, stdout)
            for row in rows:
                stderr.write(f"{protocol} n={row[1]}: suppression {row[7]}, mean utility {row[8]} "
                             f"[{row[9]}, {row[10]}], mean bribes {row[11]}, tx {row[12]}\n")
            if failures:
                stderr.write(f"conservation violated in {len(failures)} rounds, first {failures[0]}\n")
                return EXIT_INVARIANT
            return EXIT_OK

        if args.verb == "attack-demo":
            ns = [int(n) for n in spec.grid["n"]] if args.config and "n" in spec.grid else [4, 8, 16, 32]
            lam = _money(spec.grid.get("penalty_lambda", [1])[0])
            rows, problems = cmd_attack_demo(ns, lam, spec.seed)
            _write_csv(DEMO_HEADER, rows, out, stdout)
            for msg in problems:
                stderr.write(msg + "\n")
            return EXIT_INVARIANT if problems else EXIT_OK

        rounds = args.trials if args.trials is not None else 10_000
        results = verify.run_all(rounds, progress=lambda r: stdout.write(r.line() + "\n"))
        failed = [r for r in results if not r.passed]
        stdout.write(f"{len(results) - len(failed)}/{len(results)} checks passed\n")
        return EXIT_INVARIANT if failed else EXIT_OK
    except (ConfigError, InvalidParams) as exc:
        stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
