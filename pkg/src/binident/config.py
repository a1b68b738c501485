"""Experiment configuration: YAML loading, validation and echo.

A config file is nested key/value YAML::

    system:
      theta: [3, -1]
      regressor: {mode: gaussian, variance: 2.0}
    constraint: {kind: box, half_widths: [6, 6]}
    privacy: {mode: private, epsilon: 0.2, delta: 0.05, sensitivity: 0.2}
    channel: {p: 0.2, q: 0.3}
    algorithm:
      beta: 100
      step_scale: 1.0
      step_exponent: 1.0
      theta_hat_init: [1, 1]
      iterations: 100000
    rate_conditions: {f_lower: local, delta_phi: 2, h: 2, M: 6}
    graph: {topology: cycle, nodes: 5, weight: 0.5}   # distributed runs only
    harness: {trials: 50, base_seed: 2025, fit_window: [1000, 100000]}

Validation collects every violated rule before raising.
"""

from __future__ import annotations

import copy
import logging
import math
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping

import numpy as np
import yaml

from .channel import ChannelParams
from .errors import ConfigParseError, ViolationCollector
from .estimator import GainConfig, RateConditions, StepSchedule
from .graph import Adjacency, build_laplacian, is_connected, named_topology
from .privacy import NoiseModel, PrivacyBudget, calibrate_sigma
from .sysmodel import REGRESSOR_MODES, ConstraintSet, RegressorSpec, project

log = logging.getLogger(__name__)

SEED_ENV = "BINIDENT_SEED"

# rule names quoted in violations
RULE_IDENTIFIABILITY = "identifiability (p + q != 1)"
RULE_CONSTRAINT = "compact convex constraint set containing theta"
RULE_REGRESSOR = "bounded, sufficiently rich regressors"
RULE_NOISE = "noise with positive density"
RULE_STEPS = "decreasing non-summable step sizes"
RULE_GAIN = "positive gain"
RULE_GRAPH = "undirected connected graph"
RULE_PRIVACY = "(epsilon, delta) privacy budget"
RULE_PLAIN = "no-privacy mode has no injected noise"


@dataclass(frozen=True)
class PrivacySettings:
    mode: str = "private"
    epsilon: float | None = None
    delta: float | None = None
    sensitivity: float | None = None
    sigma: float | None = None

    def budget(self) -> PrivacyBudget | None:
        if self.epsilon is None or self.delta is None or self.sensitivity is None:
            return None
        return PrivacyBudget(self.epsilon, self.delta, self.sensitivity)

    def noise_model(self) -> NoiseModel:
        if self.mode == "plain":
            return NoiseModel(0.0)
        if self.sigma is not None:
            return NoiseModel(self.sigma)
        return calibrate_sigma(self.budget())

    def to_dict(self) -> dict:
        d = {"mode": self.mode}
        for k in ("epsilon", "delta", "sensitivity", "sigma"):
            v = getattr(self, k)
            if v is not None:
                d[k] = v
        return d


@dataclass(frozen=True)
class AlgorithmSettings:
    beta: float
    theta_hat_init: tuple[float, ...]
    iterations: int
    step_scale: float = 1.0
    step_exponent: float = 1.0
    log_every_step: bool = False
    log_growth: float = 1.1

    def to_dict(self) -> dict:
        return {
            "beta": self.beta,
            "step_scale": self.step_scale,
            "step_exponent": self.step_exponent,
            "theta_hat_init": list(self.theta_hat_init),
            "iterations": self.iterations,
            "log_every_step": self.log_every_step,
            "log_growth": self.log_growth,
        }


@dataclass(frozen=True)
class RateConditionSettings:
    """Analysis constants as written in the file.

    ``f_lower`` may be a number, ``"strict"`` (density infimum over
    ``|x| <= M eta``) or ``"local"`` (density at 0, the fixed point of the
    recursion).  ``eta`` defaults to the constraint set's radius.
    """

    delta_phi: float
    h: int
    M: float
    f_lower: float | str = "strict"
    eta: float | None = None

    def resolve(self, noise: NoiseModel, omega: ConstraintSet, f_mode: str | None = None) -> RateConditions:
        eta = omega.eta if self.eta is None else self.eta
        f_mode = self.f_lower if f_mode is None else f_mode
        if noise.sigma == 0:
            f_lower = 1.0  # unused by the no-noise threshold
        elif f_mode == "strict":
            f_lower = noise.density_lower_bound(self.M * eta)
        elif f_mode == "local":
            f_lower = noise.density(0.0)
        else:
            f_lower = float(f_mode)
        # a density that underflows still gives a meaningful (infinite) threshold
        return RateConditions(f_lower=max(f_lower, 5e-324), delta_phi=self.delta_phi,
                              h=self.h, M=self.M, eta=eta)

    def to_dict(self) -> dict:
        d = {"f_lower": self.f_lower, "delta_phi": self.delta_phi, "h": self.h, "M": self.M}
        if self.eta is not None:
            d["eta"] = self.eta
        return d


@dataclass(frozen=True)
class GraphSettings:
    topology: str | None = None
    nodes: int | None = None
    weight: float = 1.0
    weights: tuple[tuple[float, ...], ...] | None = None

    def adjacency(self) -> Adjacency:
        if self.weights is not None:
            return Adjacency(np.array(self.weights, dtype=float))
        return named_topology(self.topology, self.nodes, self.weight)

    def to_dict(self) -> dict:
        if self.weights is not None:
            return {"weights": [list(r) for r in self.weights]}
        return {"topology": self.topology, "nodes": self.nodes, "weight": self.weight}


@dataclass(frozen=True)
class HarnessSettings:
    trials: int = 50
    base_seed: int = 0
    fit_window: tuple[int, int] = (1000, 100000)
    jobs: int = 1

    def to_dict(self) -> dict:
        return {"trials": self.trials, "base_seed": self.base_seed,
                "fit_window": list(self.fit_window), "jobs": self.jobs}


@dataclass(frozen=True)
class ExperimentConfig:
    theta: tuple[float, ...]
    regressor: RegressorSpec
    constraint: ConstraintSet
    privacy: PrivacySettings
    channel: ChannelParams
    algorithm: AlgorithmSettings
    rate_conditions: RateConditionSettings | None = None
    graph: GraphSettings | None = None
    harness: HarnessSettings = field(default_factory=HarnessSettings)
    name: str = "experiment"

    @property
    def dim(self) -> int:
        return len(self.theta)

    def noise_model(self) -> NoiseModel:
        return self.privacy.noise_model()

    def gain(self) -> GainConfig:
        return GainConfig(self.algorithm.beta, self.privacy.mode)

    def schedule(self) -> StepSchedule:
        return StepSchedule(self.algorithm.step_scale, self.algorithm.step_exponent)

    def adjacency(self) -> Adjacency:
        return self.graph.adjacency()

    def initial_estimate(self) -> np.ndarray:
        x = np.asarray(self.algorithm.theta_hat_init, dtype=float)
        if not self.constraint.contains(x):
            log.warning("initial estimate %s lies outside the constraint set; projecting it", x.tolist())
            x = project(self.constraint, x)
        return x

    def rate_report(self) -> dict | None:
        """Gain-condition report for the configured and the strict density bound."""
        from .estimator import check_gain_condition

        if self.rate_conditions is None:
            return None
        noise = self.noise_model()
        rc = self.rate_conditions.resolve(noise, self.constraint)
        rep = check_gain_condition(self.gain(), self.channel, rc).to_dict()
        rep["conditions"] = {"delta_phi": rc.delta_phi, "h": rc.h, "M": rc.M, "eta": rc.eta}
        if self.privacy.mode == "private":
            rep["conditions"].update(f_lower=rc.f_lower, f_lower_mode=self.rate_conditions.f_lower)
        if self.privacy.mode == "private" and self.rate_conditions.f_lower != "strict":
            strict = self.rate_conditions.resolve(noise, self.constraint, "strict")
            srep = check_gain_condition(self.gain(), self.channel, strict)
            rep["strict"] = {"f_lower": strict.f_lower, "threshold": srep.threshold,
                             "satisfied": srep.satisfied}
        return rep

    def with_overrides(self, **changes) -> "ExperimentConfig":
        return replace(self, **changes)

    def validate_for(self, purpose: str) -> None:
        """Checks that depend on how the config is used."""
        errs = ViolationCollector()
        _check_runtime(self, purpose, errs)
        errs.raise_if_any()

    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            "system": {"theta": list(self.theta), "dimension": self.dim,
                       "regressor": self.regressor.to_dict()},
            "constraint": self.constraint.to_dict(),
            "privacy": self.privacy.to_dict(),
            "channel": {"p": self.channel.p, "q": self.channel.q},
            "algorithm": self.algorithm.to_dict(),
            "harness": self.harness.to_dict(),
        }
        if self.rate_conditions is not None:
            d["rate_conditions"] = self.rate_conditions.to_dict()
        if self.graph is not None:
            d["graph"] = self.graph.to_dict()
        return d

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ExperimentConfig":
        return config_from_mapping(data)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


def _is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def _vector(raw, name, errs, rule, dim=None):
    if not isinstance(raw, (list, tuple)) or not raw or not all(_is_number(v) for v in raw):
        errs.add("bad_value", rule, f"{name} must be a non-empty list of finite numbers")
        return None
    if dim is not None and len(raw) != dim:
        errs.add("dimension_mismatch", rule, f"{name} has length {len(raw)}, expected {dim}")
        return None
    return tuple(float(v) for v in raw)


def _number(section, key, errs, rule, *, default=None, required=True, check=None, what=""):
    if not isinstance(section, Mapping) or key not in section or section[key] is None:
        if required and default is None:
            errs.add("missing_field", rule, f"missing required field {key!r}")
        return default
    v = section[key]
    if not _is_number(v):
        errs.add("bad_value", rule, f"{key} must be a finite number, got {v!r}")
        return default
    if check is not None and not check(v):
        errs.add("out_of_range", rule, f"{key}={v} violates {what}")
        return default
    return v


def _section(data, key, errs, required=True):
    sec = data.get(key)
    if sec is None:
        if required:
            errs.add("missing_field", "config layout", f"missing section {key!r}")
        return {}
    if not isinstance(sec, Mapping):
        errs.add("bad_value", "config layout", f"section {key!r} must be a mapping")
        return {}
    return sec


def config_from_mapping(data: Mapping[str, Any]) -> ExperimentConfig:
    """Build and validate a config; raises ValidationError listing all problems."""
    errs = ViolationCollector()
    if not isinstance(data, Mapping):
        errs.add("bad_value", "config layout", "top level must be a mapping")
        errs.raise_if_any()

    system = _section(data, "system", errs)
    theta = _vector(system.get("theta"), "system.theta", errs, RULE_CONSTRAINT)
    dim = len(theta) if theta else None
    if dim is not None and "dimension" in system and system["dimension"] != dim:
        errs.add("dimension_mismatch", RULE_CONSTRAINT,
                 f"system.dimension={system['dimension']} but theta has length {dim}")

    regressor = _parse_regressor(system.get("regressor", {"mode": "gaussian", "variance": 2.0}), dim, errs)
    constraint = _parse_constraint(_section(data, "constraint", errs), dim, errs)
    if theta is not None and constraint is not None and constraint.dim == dim:
        if not constraint.contains(np.asarray(theta)):
            errs.add("theta_outside_constraint", RULE_CONSTRAINT, "true parameter must lie in the constraint set")

    privacy = _parse_privacy(_section(data, "privacy", errs), errs)
    channel = _parse_channel(_section(data, "channel", errs), errs)
    algorithm = _parse_algorithm(_section(data, "algorithm", errs), dim, errs)
    rate = _parse_rate(data.get("rate_conditions"), dim, errs)
    graph = _parse_graph(data.get("graph"), errs)
    harness = _parse_harness(data.get("harness") or {}, errs)

    name = data.get("name", "experiment")
    if not isinstance(name, str):
        errs.add("bad_value", "config layout", "name must be a string")
    errs.raise_if_any()

    cfg = ExperimentConfig(theta=theta, regressor=regressor, constraint=constraint, privacy=privacy,
                           channel=channel, algorithm=algorithm, rate_conditions=rate, graph=graph,
                           harness=harness, name=name)
    cfg.initial_estimate()  # warns once if the start point needs projecting
    return cfg


def _parse_regressor(raw, dim, errs) -> RegressorSpec | None:
    if not isinstance(raw, Mapping):
        errs.add("bad_value", RULE_REGRESSOR, "system.regressor must be a mapping")
        return None
    mode = raw.get("mode", "gaussian")
    if mode not in REGRESSOR_MODES:
        errs.add("bad_value", RULE_REGRESSOR, f"regressor mode must be one of {REGRESSOR_MODES}")
        return None
    if dim is None:
        return None
    if mode == "gaussian":
        var = _number(raw, "variance", errs, RULE_REGRESSOR, default=2.0, required=False,
                      check=lambda v: v > 0, what="variance > 0 (zero input cannot excite the system)")
        if var is None:
            return None
        return RegressorSpec(dim=dim, mode="gaussian", variance=float(var))
    if mode == "uniform":
        lo = _number(raw, "low", errs, RULE_REGRESSOR)
        hi = _number(raw, "high", errs, RULE_REGRESSOR)
        if lo is None or hi is None:
            return None
        if not hi > lo:
            errs.add("out_of_range", RULE_REGRESSOR, "uniform input needs high > low")
            return None
        return RegressorSpec(dim=dim, mode="uniform", low=float(lo), high=float(hi))
    seq = raw.get("sequence")
    if not isinstance(seq, (list, tuple)) or not seq:
        errs.add("missing_field", RULE_REGRESSOR, "fixed regressor mode needs a non-empty sequence")
        return None
    rows = [_vector(r, "regressor.sequence row", errs, RULE_REGRESSOR, dim) for r in seq]
    if any(r is None for r in rows):
        return None
    return RegressorSpec(dim=dim, mode="fixed", sequence=tuple(rows))


def _parse_constraint(raw, dim, errs) -> ConstraintSet | None:
    kind = raw.get("kind", "box")
    if kind == "box":
        hw = _vector(raw.get("half_widths"), "constraint.half_widths", errs, RULE_CONSTRAINT, dim)
        if hw is None:
            return None
        if any(h <= 0 for h in hw):
            errs.add("out_of_range", RULE_CONSTRAINT, "box half-widths must be > 0")
            return None
        return ConstraintSet.box(hw)
    if kind == "ball":
        c = _vector(raw.get("center"), "constraint.center", errs, RULE_CONSTRAINT, dim)
        r = _number(raw, "radius", errs, RULE_CONSTRAINT, check=lambda v: v > 0, what="radius > 0")
        if c is None or r is None:
            return None
        return ConstraintSet.ball(c, r)
    errs.add("bad_value", RULE_CONSTRAINT, f"constraint kind must be 'box' or 'ball', got {kind!r}")
    return None


def _parse_privacy(raw, errs) -> PrivacySettings | None:
    mode = raw.get("mode", "private")
    if mode not in ("private", "plain"):
        errs.add("bad_value", RULE_PRIVACY, f"privacy mode must be 'private' or 'plain', got {mode!r}")
        return None
    sigma = _number(raw, "sigma", errs, RULE_NOISE, required=False, check=lambda v: v >= 0, what="sigma >= 0")
    if mode == "plain":
        if sigma is not None and sigma > 0:
            errs.add("plain_mode_noise", RULE_PLAIN, f"plain mode requires sigma = 0, got sigma={sigma}")
        eps = raw.get("epsilon")
        return PrivacySettings(mode="plain", epsilon=eps if _is_number(eps) else None,
                               delta=raw.get("delta") if _is_number(raw.get("delta")) else None,
                               sensitivity=raw.get("sensitivity") if _is_number(raw.get("sensitivity")) else None,
                               sigma=0.0 if sigma is not None else None)
    explicit_sigma = sigma is not None
    if explicit_sigma and sigma == 0:
        errs.add("out_of_range", RULE_NOISE, "private mode needs sigma > 0; use mode: plain for no noise")
    eps = _number(raw, "epsilon", errs, RULE_PRIVACY, required=not explicit_sigma,
                  check=lambda v: v > 0, what="epsilon > 0")
    delta = _number(raw, "delta", errs, RULE_PRIVACY, required=not explicit_sigma,
                    check=lambda v: 0 < v < 0.5, what="0 < delta < 0.5")
    sens = _number(raw, "sensitivity", errs, RULE_PRIVACY, required=not explicit_sigma,
                   check=lambda v: v > 0, what="sensitivity > 0")
    return PrivacySettings(mode="private", epsilon=eps, delta=delta, sensitivity=sens, sigma=sigma)


def _parse_channel(raw, errs) -> ChannelParams | None:
    unit = lambda v: 0 <= v <= 1  # noqa: E731
    p = _number(raw, "p", errs, RULE_IDENTIFIABILITY, check=unit, what="0 <= p <= 1")
    q = _number(raw, "q", errs, RULE_IDENTIFIABILITY, check=unit, what="0 <= q <= 1")
    if p is None or q is None:
        return None
    params = ChannelParams(float(p), float(q))
    if not params.identifiable:
        errs.add("non_identifiable", RULE_IDENTIFIABILITY,
                 f"non-identifiable channel: p + q = {p + q} makes the received bits independent of theta")
    return params


def _parse_algorithm(raw, dim, errs) -> AlgorithmSettings | None:
    beta = _number(raw, "beta", errs, RULE_GAIN, check=lambda v: v > 0, what="beta > 0")
    scale = _number(raw, "step_scale", errs, RULE_STEPS, default=1.0, required=False,
                    check=lambda v: v > 0, what="step_scale > 0")
    expo = _number(raw, "step_exponent", errs, RULE_STEPS, default=1.0, required=False,
                   check=lambda v: 0 < v <= 1, what="0 < step_exponent <= 1")
    init = _vector(raw.get("theta_hat_init"), "algorithm.theta_hat_init", errs, RULE_CONSTRAINT, dim) \
        if dim is not None else None
    iters = raw.get("iterations")
    if not isinstance(iters, int) or isinstance(iters, bool) or iters < 0:
        errs.add("bad_value", "run length", "algorithm.iterations must be an integer >= 0")
        iters = None
    every = raw.get("log_every_step", False)
    if not isinstance(every, bool):
        errs.add("bad_value", "logging", "log_every_step must be true or false")
    growth = _number(raw, "log_growth", errs, "logging", default=1.1, required=False,
                     check=lambda v: v > 1, what="log_growth > 1")
    if None in (beta, init, iters):
        return None
    return AlgorithmSettings(beta=float(beta), theta_hat_init=init, iterations=iters,
                             step_scale=float(scale), step_exponent=float(expo),
                             log_every_step=bool(every), log_growth=float(growth))


def _parse_rate(raw, dim, errs) -> RateConditionSettings | None:
    if raw is None:
        return None
    rule = "rate-analysis constants"
    if not isinstance(raw, Mapping):
        errs.add("bad_value", rule, "rate_conditions must be a mapping")
        return None
    pos = lambda v: v > 0  # noqa: E731
    dphi = _number(raw, "delta_phi", errs, rule, check=pos, what="delta_phi > 0")
    M = _number(raw, "M", errs, rule, check=pos, what="M > 0")
    eta = _number(raw, "eta", errs, rule, required=False, check=pos, what="eta > 0")
    h = raw.get("h")
    if not isinstance(h, int) or isinstance(h, bool) or (dim is not None and h < dim):
        errs.add("out_of_range", rule, f"h must be an integer >= dimension, got {h!r}")
        h = None
    f = raw.get("f_lower", "strict")
    if not (f in ("strict", "local") or (_is_number(f) and f > 0)):
        errs.add("bad_value", rule, "f_lower must be a positive number, 'strict' or 'local'")
        f = None
    if None in (dphi, M, h, f):
        return None
    return RateConditionSettings(delta_phi=float(dphi), h=h, M=float(M),
                                 f_lower=f if isinstance(f, str) else float(f),
                                 eta=None if eta is None else float(eta))


def _parse_graph(raw, errs) -> GraphSettings | None:
    if raw is None:
        return None
    if not isinstance(raw, Mapping):
        errs.add("bad_graph", RULE_GRAPH, "graph must be a mapping")
        return None
    if "weights" in raw:
        w = raw["weights"]
        rows = [_vector(r, "graph.weights row", errs, RULE_GRAPH, len(w)) for r in w] \
            if isinstance(w, (list, tuple)) and w else [None]
        if any(r is None for r in rows):
            return None
        gs = GraphSettings(weights=tuple(rows))
    else:
        topo = raw.get("topology")
        n = raw.get("nodes")
        if topo not in ("cycle", "complete", "path", "empty"):
            errs.add("bad_graph", RULE_GRAPH, f"unknown topology {topo!r}")
            return None
        if not isinstance(n, int) or isinstance(n, bool) or n < 1:
            errs.add("bad_graph", RULE_GRAPH, "graph.nodes must be an integer >= 1")
            return None
        wt = _number(raw, "weight", errs, RULE_GRAPH, default=1.0, required=False,
                     check=lambda v: v >= 0, what="weight >= 0")
        gs = GraphSettings(topology=topo, nodes=n, weight=float(wt))
    for v in gs.adjacency().violations():
        errs.items.append(v)
    return gs


def _parse_harness(raw, errs) -> HarnessSettings:
    rule = "harness"
    if not isinstance(raw, Mapping):
        errs.add("bad_value", rule, "harness must be a mapping")
        return HarnessSettings()
    out = HarnessSettings()
    trials = raw.get("trials", out.trials)
    if not isinstance(trials, int) or isinstance(trials, bool) or trials < 1:
        errs.add("out_of_range", rule, "trials must be an integer >= 1")
        trials = out.trials
    seed = raw.get("base_seed", out.base_seed)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        errs.add("out_of_range", rule, "base_seed must be an integer >= 0")
        seed = out.base_seed
    jobs = raw.get("jobs", out.jobs)
    if not isinstance(jobs, int) or isinstance(jobs, bool) or jobs < 1:
        errs.add("out_of_range", rule, "jobs must be an integer >= 1")
        jobs = out.jobs
    win = raw.get("fit_window", list(out.fit_window))
    if (not isinstance(win, (list, tuple)) or len(win) != 2
            or not all(isinstance(v, int) and not isinstance(v, bool) for v in win) or not 1 <= win[0] < win[1]):
        errs.add("out_of_range", rule, "fit_window must be two integers 1 <= k_lo < k_hi")
        win = out.fit_window
    return HarnessSettings(trials=trials, base_seed=seed, fit_window=(win[0], win[1]), jobs=jobs)


def _check_runtime(cfg: ExperimentConfig, purpose: str, errs: ViolationCollector) -> None:
    if not cfg.channel.identifiable:
        errs.add("non_identifiable", RULE_IDENTIFIABILITY, "non-identifiable channel")
    if cfg.privacy.mode == "plain" and cfg.privacy.sigma:
        errs.add("plain_mode_noise", RULE_PLAIN, "plain mode requires sigma = 0")
    if purpose == "distributed":
        if cfg.graph is None:
            errs.add("missing_field", RULE_GRAPH, "distributed runs need a graph section")
            return
        adj = cfg.adjacency()
        bad = adj.violations()
        errs.items.extend(bad)
        if not bad and not is_connected(adj):
            errs.add("disconnected_graph", RULE_GRAPH,
                     f"communication graph is disconnected (lambda_2 = {build_laplacian(adj).lambda2:.3g})")


# ---------------------------------------------------------------------------
# Files
# ---------------------------------------------------------------------------


def _set_path(data: dict, dotted: str, value) -> None:
    keys = dotted.split(".")
    cur = data
    for k in keys[:-1]:
        cur = cur.setdefault(k, {})
    cur[keys[-1]] = value


def apply_overrides(data: Mapping, overrides: Mapping[str, Any] | None = None, env: Mapping | None = None) -> dict:
    """Merge dotted-key overrides into raw config data.

    Precedence: explicit overrides > ``BINIDENT_SEED`` env var > file.
    """
    data = copy.deepcopy(dict(data))
    env = os.environ if env is None else env
    if env.get(SEED_ENV):
        try:
            _set_path(data, "harness.base_seed", int(env[SEED_ENV]))
        except ValueError:
            raise ConfigParseError(f"{SEED_ENV} must be an integer, got {env[SEED_ENV]!r}") from None
    for key, value in (overrides or {}).items():
        _set_path(data, key, value)
    return data


def parse_config_text(text: str, path: str | None = None) -> dict:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        problem = getattr(exc, "problem", None) or str(exc)
        raise ConfigParseError(problem, path=path, line=line) from None
    if not isinstance(data, dict):
        raise ConfigParseError("top level must be a mapping", path=path, line=1)
    return data


def load_config(path, overrides: Mapping[str, Any] | None = None, env: Mapping | None = None) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigParseError(f"cannot read config: {exc.strerror}", path=str(path)) from None
    data = parse_config_text(text, str(path))
    return config_from_mapping(apply_overrides(data, overrides, env))


def dump_config(cfg: ExperimentConfig) -> str:
    return yaml.safe_dump(cfg.to_dict(), sort_keys=False, default_flow_style=None)
