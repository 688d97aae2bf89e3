"""Command-line front end.

Exit codes: 0 success, 1 domain error (bad prior, infeasible parameters),
2 usage error. Options may also come from ``--config file.json``; explicit
flags win over the file.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

from . import sim, strategies
from .errors import DomainError
from .game import GameConfig, best_response, evaluate_profile, first_exploration_stats
from .gittins import gittins_discounted, gittins_finite, single_player_value
from .priors import load_prior, moments, to_json
from .thresholds import fmt, neutral_decay_bound, region_csv, region_table, thresholds, uniform_net_gain_bounds

DEFAULT_SEED = 42
GRID_TOL = 1e-12


def parse_grid(text: str) -> list[float]:
    """``start:stop:step`` (stop exclusive beyond 1e-12) or a comma list."""
    if ":" not in text:
        try:
            out = [float(v) for v in text.split(",") if v.strip()]
        except ValueError:
            raise DomainError(f"bad number list {text!r}") from None
        if not out:
            raise DomainError("grid is empty")
        return out
    try:
        start, stop, step = (float(v) for v in text.split(":"))
    except ValueError:
        raise DomainError(f"grid must look like start:stop:step, got {text!r}") from None
    if not step > 0:
        raise DomainError("grid step must be positive")
    n = max(math.floor((stop - start) / step + 1e-9), -1)
    out = [x for x in (start + i * step for i in range(n + 1)) if x < stop - GRID_TOL]
    if not out:
        raise DomainError(f"grid {text!r} is empty")
    return out


def _clean(obj):
    """Round floats to 9 significant digits for stable output."""
    if isinstance(obj, float):
        if math.isinf(obj) or math.isnan(obj):
            return str(obj)
        return float(fmt(obj))
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def _emit(args, payload=None, text: str | None = None) -> None:
    if text is None:
        text = json.dumps(_clean(payload), sort_keys=True, indent=2) + "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def _rows_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _need(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        raise DomainError("missing required option(s): " + ", ".join("--" + m.replace("_", "-") for m in missing))


def _game(args) -> GameConfig:
    _need(args, "prior", "p")
    prior = load_prior(args.prior)
    lam = 0.0 if args.lam is None else args.lam
    if args.T is not None:
        if args.beta is not None:
            raise DomainError("--T (finite mode) and --beta (discounted mode) are mutually exclusive")
        return GameConfig(p=args.p, prior=prior, lam=lam, T=args.T)
    _need(args, "beta")
    return GameConfig(p=args.p, prior=prior, lam=lam, beta=args.beta, H=60 if args.H is None else args.H)


def cmd_moments(args):
    _need(args, "prior")
    mom = moments(load_prior(args.prior))
    _emit(args, {"m": mom.m, "w": mom.w, "m1": mom.m1, "m0": mom.m0, "m_star": mom.m_star,
                 "degenerate": mom.degenerate})


def cmd_gittins(args):
    _need(args, "prior")
    prior = load_prior(args.prior)
    if args.T is not None:
        res = gittins_finite(prior, args.T, tol=args.tol or 1e-9)
    else:
        _need(args, "beta")
        res = gittins_discounted(prior, args.beta, tol=args.tol or 1e-6)
    out = {"index": res.index, "tolerance": res.tolerance, "mode": res.mode,
           "parameter": res.parameter, "prior": to_json(prior)}
    if args.p is not None and args.beta is not None:
        v = single_player_value(prior, args.p, args.beta, args.H or 60)
        out["single_player_value"] = {"value": v.value, "error_bound": v.error_bound,
                                      "depth_used": v.depth_used}
    _emit(args, out)


def cmd_thresholds(args):
    _need(args, "prior", "beta")
    ts = thresholds(load_prior(args.prior), args.beta, tol=args.tol or 1e-6)
    out = dict(ts.__dict__)
    out["violations"] = ts.ordering_violations(args.tol or 1e-6)
    _emit(args, out)


def _load_prior_list(text: str):
    src = text.strip()
    if not src.startswith("[") and Path(src).exists():
        src = Path(src).read_text()
    try:
        items = json.loads(src)
    except json.JSONDecodeError as exc:
        raise DomainError(f"priors must be a JSON list or a file holding one: {exc}") from None
    if isinstance(items, dict):
        items = [items]
    if not isinstance(items, list):
        raise DomainError("priors must be a JSON list of prior objects")
    ids, priors = [], []
    for i, item in enumerate(items):
        pid = item.pop("id", str(i)) if isinstance(item, dict) else str(i)
        ids.append(str(pid))
        priors.append(load_prior(json.dumps(item)))
    return ids, priors


def cmd_regions(args):
    _need(args, "priors", "betas")
    ids, priors = _load_prior_list(args.priors)
    rows = region_table(priors, parse_grid(args.betas), ids, tol=args.tol or 1e-6)
    if args.format == "json":
        _emit(args, [{"prior_id": r.prior_id, "beta": r.beta, "flag": r.flag,
                      **(r.values.__dict__ if r.values else {})} for r in rows])
    else:
        _emit(args, text=region_csv(rows))


def cmd_eval(args):
    config = _game(args)
    sA = strategies.parse_strategy(args.alice or "left", config, "A")
    sB = strategies.parse_strategy(args.bob or "left", config, "B")
    res = evaluate_profile(config, sA, sB)
    out = res.to_json(config)
    out["first_exploration"] = {str(k): v for k, v in first_exploration_stats(config, sA, sB).items()}
    out["strategies"] = {"A": sA.name, "B": sB.name}
    _emit(args, out)


def cmd_best_response(args):
    config = _game(args)
    responder = (args.responder or "A").upper()
    opp_role = "B" if responder == "A" else "A"
    opp = strategies.parse_strategy(args.opponent or "copy", config, opp_role)
    forced = {}
    for spec in args.force or ():
        try:
            t, a = spec.split(":")
            forced[int(t)] = a.upper()
        except ValueError:
            raise DomainError(f"forced move must look like 0:R, got {spec!r}") from None
    strat, val = best_response(config, opp, responder, forced)
    pair = (strat, opp) if responder == "A" else (opp, strat)
    stats = first_exploration_stats(config, *pair)
    _emit(args, {"value": val.value, "error_bound": val.error_bound, "depth_used": val.depth_used,
                 "responder": responder, "opponent": opp.name,
                 "first_exploration": {str(k): v for k, v in stats.items()},
                 "config": config.to_json()})


def cmd_zerosum(args):
    from .zerosum.seqform import build_sequence_form, parse_forced, solve

    args.lam = -1.0
    config = _game(args)
    lp = build_sequence_form(config, parse_forced(args.force), max_depth=args.max_depth)
    if args.dump_tableau:
        Path(args.dump_tableau).write_text(lp.tableau_text())
    gv = solve(lp, exact=args.exact)
    out = gv.to_json()
    out["error_bound"] = config.error_bound
    _emit(args, out)


def cmd_check_osc(args):
    _need(args, "mode", "lam", "beta", "m", "p")
    fn = strategies.coop_osc_is_nash if args.mode == "coop" else strategies.comp_osc_is_nash
    ks = [args.k] if args.k is not None else list(range(1, (args.kmax or 50) + 1))
    checks = [fn(args.m, args.p, args.beta, args.lam, k) for k in ks]
    if args.format == "csv":
        rows = [(c.k, c.u_main, c.u_deviation, str(c.is_nash).lower(), c.reason) for c in checks]
        _emit(args, text=_rows_csv(("k", "u_main", "u_deviation", "is_nash", "reason"), rows))
    else:
        _emit(args, {"mode": args.mode, "checks": [c.to_json() for c in checks],
                     "any_nash": any(c.is_nash for c in checks)})


def cmd_simulate(args):
    config = _game(args)
    sA = strategies.parse_strategy(args.alice or "left", config, "A")
    sB = strategies.parse_strategy(args.bob or "left", config, "B")
    traces, summary = sim.simulate(config, sA, sB, args.horizon, args.reps or 1000, args.seed)
    if args.traces:
        Path(args.traces).write_text(sim.traces_csv(traces))
    out = summary.to_json()
    if args.window:
        out["settle"] = sim.settle_diagnostic(traces, args.window).to_json()
    _emit(args, out)


def cmd_concentration(args):
    _need(args, "prior", "k", "epsilon")
    prior = load_prior(args.prior)
    strat = strategies.parse_strategy(args.strategy or "right", None, "A")
    rep = sim.concentration_check(prior, strat, args.k, args.epsilon, args.reps or 10_000, args.seed,
                                  p=0.5 if args.p is None else args.p, horizon=args.horizon)
    _emit(args, rep.to_json())


def cmd_appendix_uniform(args):
    grid = parse_grid(args.grid or "0:1.0000001:0.01")
    rows = [(p, *uniform_net_gain_bounds(p)) for p in grid]
    if args.format == "json":
        _emit(args, [{"p": p, "lb": lb, "ub": ub} for p, lb, ub in rows])
    else:
        _emit(args, text=_rows_csv(("p", "lb", "ub"), rows))


def cmd_decay(args):
    _need(args, "alpha", "p", "beta")
    ts = parse_grid(args.grid) if args.grid else [float(args.t or 0)]
    rows = []
    for t in ts:
        k, bound = neutral_decay_bound(args.alpha, args.p, args.beta, int(round(t)))
        rows.append({"t": int(round(t)), "k": k, "bound": bound})
    _emit(args, rows if len(rows) > 1 else rows[0])


COMMANDS = {
    "moments": (cmd_moments, "prior moments m, w, m1, m0, M*"),
    "gittins": (cmd_gittins, "discounted (--beta) or finite-horizon (--T) index"),
    "thresholds": (cmd_thresholds, "every exploration threshold for (prior, beta)"),
    "regions": (cmd_regions, "threshold table over prior and beta grids (CSV)"),
    "eval": (cmd_eval, "exact evaluation of a strategy profile"),
    "best-response": (cmd_best_response, "exact best response to a named strategy"),
    "zerosum": (cmd_zerosum, "sequence-form LP value of the truncated zero-sum game"),
    "check-osc": (cmd_check_osc, "closed-form oscillating-equilibrium checks"),
    "simulate": (cmd_simulate, "Monte Carlo simulation of a profile"),
    "concentration": (cmd_concentration, "empirical check of the concentration bound"),
    "appendix-uniform": (cmd_appendix_uniform, "uniform-prior net-gain bound curves"),
    "decay": (cmd_decay, "no-exploration decay bound for neutral players"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file of option values (explicit flags win)")
    common.add_argument("--prior", help="prior as inline JSON or a file path")
    common.add_argument("--p", type=float, help="left-arm success probability")
    common.add_argument("--beta", type=float, help="discount factor (discounted mode)")
    common.add_argument("--lambda", dest="lam", type=float, help="cooperation parameter")
    common.add_argument("--T", type=int, help="finite horizon: rounds 0..T")
    common.add_argument("--H", type=int, help="truncation depth in discounted mode (default 60)")
    common.add_argument("--k", type=int)
    common.add_argument("--epsilon", type=float)
    common.add_argument("--reps", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--tol", type=float)
    common.add_argument("--format", choices=("json", "csv"))
    common.add_argument("--output", help="write to this path instead of standard output")

    parser = argparse.ArgumentParser(prog="banditduel",
                                     description="Two-player one-armed bandit toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)
    subs = {name: sub.add_parser(name, parents=[common], help=msg)
            for name, (_, msg) in COMMANDS.items()}
    subs["regions"].add_argument("--priors", help="JSON list of priors (optional 'id' field) or a file")
    subs["regions"].add_argument("--betas", help="beta grid start:stop:step or comma list")
    for name in ("eval", "simulate"):
        subs[name].add_argument("--alice", help="strategy name, e.g. copy or osc-coop:k=5")
        subs[name].add_argument("--bob", help="strategy name")
    br = subs["best-response"]
    br.add_argument("--responder", choices=("A", "B", "a", "b"))
    br.add_argument("--opponent", help="opponent strategy name")
    br.add_argument("--force", action="append", help="pin the responder's action, e.g. 0:R (repeatable)")
    zs = subs["zerosum"]
    zs.add_argument("--force", action="append", help="forced move player:round:action, e.g. A:0:R")
    zs.add_argument("--exact", action="store_true", help="solve in exact rational arithmetic")
    zs.add_argument("--max-depth", type=int, default=4)
    zs.add_argument("--dump-tableau", help="write the LP tableau text to this path")
    osc = subs["check-osc"]
    osc.add_argument("--mode", choices=("coop", "comp"))
    osc.add_argument("--m", type=float, help="point-mass risky arm mean")
    osc.add_argument("--kmax", type=int, help="check every k in 1..kmax (default 50)")
    sm = subs["simulate"]
    sm.add_argument("--horizon", type=int)
    sm.add_argument("--traces", help="write per-round traces to this CSV path")
    sm.add_argument("--window", type=int, help="settling diagnostic window")
    cc = subs["concentration"]
    cc.add_argument("--strategy", help="single-player strategy (default right)")
    cc.add_argument("--horizon", type=int)
    subs["appendix-uniform"].add_argument("--grid", help="p grid start:stop:step")
    dc = subs["decay"]
    dc.add_argument("--alpha", type=float)
    dc.add_argument("--t", type=int)
    dc.add_argument("--grid", help="t grid start:stop:step")
    return parser


def _merge_config(args, parser) -> None:
    if not args.config:
        return
    try:
        data = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise DomainError(f"cannot read config {args.config}: {exc}") from None
    if not isinstance(data, dict):
        raise DomainError("config file must hold a JSON object")
    for key, value in data.items():
        dest = {"lambda": "lam", "max-depth": "max_depth"}.get(key, key.replace("-", "_"))
        if not hasattr(args, dest):
            raise DomainError(f"unknown config key {key!r} for {args.command}")
        if dest == "prior" and isinstance(value, dict):
            value = json.dumps(value)
        if dest == "priors" and isinstance(value, list):
            value = json.dumps(value)
        if getattr(args, dest) is None:
            setattr(args, dest, value)


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        _merge_config(args, parser)
        if args.seed is None:
            args.seed = DEFAULT_SEED
        if args.format is None:
            args.format = "csv" if args.command in ("regions",) else "json"
        COMMANDS[args.command][0](args)
    except DomainError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
