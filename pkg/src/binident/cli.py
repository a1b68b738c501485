"""Command line entry point: ``binident <subcommand> ...``.

Errors exit nonzero and print ``{"category": ..., "message": ...}`` as JSON
on stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np
import yaml

from . import __version__
from .channel import ChannelParams, binary_quantize, channel_law, tamper
from .config import load_config
from .distributed import lambda2
from .errors import BinidentError, ValidationError
from .graph import is_connected
from .harness import fit_rate, monte_carlo, monte_carlo_distributed, run_trials, trial_seeds
from .output import dumps, emit_distributed, emit_identify, emit_rate
from .privacy import NoiseModel, PrivacyBudget, calibrate_sigma, sample_noise, verify_dp_condition

EXIT_CODES = {"parse": 2, "validation": 3, "fit": 4, "io": 5}


def _override_value(text: str):
    return yaml.safe_load(text)


def _overrides(args) -> dict:
    out = {}
    for item in getattr(args, "set", None) or []:
        if "=" not in item:
            raise BinidentError(f"--set expects key.path=value, got {item!r}")
        key, value = item.split("=", 1)
        out[key.strip()] = _override_value(value)
    if getattr(args, "seeds", None) is not None:
        out["harness.trials"] = args.seeds
    if getattr(args, "base_seed", None) is not None:
        out["harness.base_seed"] = args.base_seed
    if getattr(args, "iterations", None) is not None:
        out["algorithm.iterations"] = args.iterations
    if getattr(args, "jobs", None) is not None:
        out["harness.jobs"] = args.jobs
    return out


def cmd_calibrate(args) -> int:
    try:
        budget = PrivacyBudget(args.epsilon, args.delta, args.sensitivity)
    except ValueError as exc:
        raise ValidationError.single("bad_value", "(epsilon, delta) privacy budget", str(exc)) from None
    noise = calibrate_sigma(budget)
    print(dumps({"epsilon": args.epsilon, "delta": args.delta, "sensitivity": args.sensitivity,
                 "sigma": noise.sigma, "dp_slack": verify_dp_condition(budget, noise.sigma)}), end="")
    return 0


def cmd_check_channel(args) -> int:
    try:
        params = ChannelParams(args.p, args.q)
        noise = NoiseModel(args.sigma)
    except ValueError as exc:
        raise ValidationError.single("bad_value", "attack channel", str(exc)) from None
    rng = np.random.default_rng(args.seed)
    w = sample_noise(noise, rng, args.samples)
    bits = tamper(binary_quantize(w, args.gap), params, rng)
    emp = float(np.mean(bits))
    ana = float(channel_law(params, noise, args.gap))
    se = float(np.sqrt(max(ana * (1 - ana), 1e-300) / args.samples))
    print(dumps({"p": args.p, "q": args.q, "sigma": args.sigma, "gap": args.gap, "samples": args.samples,
                 "empirical_mean": emp, "analytic_mean": ana, "std_error": se,
                 "z_score": (emp - ana) / se if se > 0 else 0.0,
                 "identifiable": params.identifiable}), end="")
    return 0


def cmd_identify(args) -> int:
    cfg = load_config(args.config, _overrides(args))
    h = cfg.harness
    trajs = run_trials(cfg, h.trials, h.base_seed, h.jobs)
    files = emit_identify(cfg, trajs, args.out)
    finals = [t.final_err_sq for t in trajs]
    print(dumps({"out": str(args.out), "files": len(files), "trials": len(trajs),
                 "mean_final_err_sq": float(np.mean(finals)), "max_final_err_sq": float(np.max(finals)),
                 "gain_condition": cfg.rate_report()}), end="")
    return 0


def cmd_distributed(args) -> int:
    cfg = load_config(args.config, _overrides(args))
    cfg.validate_for("distributed")
    agg = monte_carlo_distributed(cfg)
    adj = cfg.adjacency()
    lam = lambda2(cfg)
    files = emit_distributed(cfg, agg, lam, is_connected(adj), args.out)
    print(dumps({"out": str(args.out), "files": len(files), "lambda2": lam,
                 "per_agent_mean_final_err_sq": [float(c.mean_err_sq[-1]) for c in agg.agents],
                 "final_disagreement_mean": float(agg.disagreement_mean[-1])}), end="")
    return 0


def cmd_rate(args) -> int:
    cfg = load_config(args.config, _overrides(args))
    k_lo = args.k_lo if args.k_lo is not None else cfg.harness.fit_window[0]
    k_hi = args.k_hi if args.k_hi is not None else cfg.harness.fit_window[1]
    curve = monte_carlo(cfg)
    fit = fit_rate(curve, k_lo, k_hi)
    emit_rate(cfg, curve, fit, trial_seeds(cfg.harness.base_seed, cfg.harness.trials), args.out)
    out = fit.to_dict()
    out["gain_condition"] = cfg.rate_report()
    print(dumps(out), end="")
    return 0


def _run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", required=True, help="experiment config (YAML)")
    p.add_argument("--seeds", type=int, help="number of seeded trials (overrides harness.trials)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--base-seed", type=int, help="overrides harness.base_seed and BINIDENT_SEED")
    p.add_argument("--iterations", type=int, help="overrides algorithm.iterations")
    p.add_argument("--jobs", type=int, help="worker processes for independent trials")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override any config field by dotted path, e.g. channel.p=0.1")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="binident", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("calibrate", help="noise level for an (epsilon, delta) budget")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--sensitivity", type=float, required=True)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("check-channel", help="empirical vs analytic mean of the received bit")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--gap", type=float, default=0.0)
    p.add_argument("--samples", type=int, default=100000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_check_channel)

    p = sub.add_parser("identify", help="single-center estimator trials")
    _run_flags(p)
    p.set_defaults(func=cmd_identify)

    p = sub.add_parser("distributed", help="networked estimator trials")
    _run_flags(p)
    p.set_defaults(func=cmd_distributed)

    p = sub.add_parser("rate", help="Monte Carlo curve and log-log slope fit")
    _run_flags(p)
    p.add_argument("--k-lo", type=int)
    p.add_argument("--k-hi", type=int)
    p.set_defaults(func=cmd_rate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except BinidentError as exc:
        sys.stderr.write(json.dumps(exc.to_dict()) + "\n")
        return EXIT_CODES.get(exc.category, 1)


if __name__ == "__main__":
    sys.exit(main())
