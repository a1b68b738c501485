"""CSV and JSON result files.

File contents depend only on the inputs (no timestamps or timings), so a
rerun with the same config and seeds reproduces them byte for byte.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

from .errors import OutputError
from .streams import RNG_METADATA


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if hasattr(x, "tolist"):
        return _jsonable(x.tolist())
    if isinstance(x, float) and not math.isfinite(x):
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    return x


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def _prepare(out_dir) -> Path:
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OutputError(f"cannot create output directory {out}: {exc.strerror}") from None
    return out


def write_csv(path: Path, header, rows) -> Path:
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for row in rows:
                w.writerow([repr(float(v)) if isinstance(v, float) else v for v in row])
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror}") from None
    return path


def write_json(path: Path, obj) -> Path:
    try:
        path.write_text(dumps(obj))
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror}") from None
    return path


def _base_summary(config, seeds) -> dict:
    noise = config.noise_model()
    return {
        "config": config.to_dict(),
        "seeds": list(seeds),
        "sigma": noise.sigma,
        "rng": RNG_METADATA,
        "gain_condition": config.rate_report(),
    }


def emit_identify(config, trajectories, out_dir) -> list[Path]:
    out = _prepare(out_dir)
    files = []
    for t, tr in enumerate(trajectories):
        files.append(write_csv(out / f"trial_{t}.csv", ["k", "err_sq"], tr.rows()))
    finals = [tr.final_err_sq for tr in trajectories]
    summary = _base_summary(config, [tr.seed for tr in trajectories])
    summary["final_err_sq"] = {"mean": sum(finals) / len(finals), "max": max(finals), "per_trial": finals}
    files.append(write_json(out / "summary.json", summary))
    return files


def emit_distributed(config, agg, lambda2: float, connected: bool, out_dir) -> list[Path]:
    out = _prepare(out_dir)
    files = []
    for i, curve in enumerate(agg.agents):
        files.append(write_csv(out / f"agent_{i}.csv", ["k", "err_sq"],
                               zip(curve.ks.tolist(), curve.mean_err_sq.tolist())))
    nm = agg.network_mean
    files.append(write_csv(out / "network_mean.csv", ["k", "mean_err_sq", "std", "disagreement"],
                           zip(nm.ks.tolist(), nm.mean_err_sq.tolist(), nm.std_err_sq.tolist(),
                               agg.disagreement_mean.tolist())))
    summary = _base_summary(config, [r.seed for r in agg.runs])
    summary["lambda2"] = lambda2
    summary["connected"] = connected
    summary["final_err_sq"] = {
        "per_agent_mean": [float(c.mean_err_sq[-1]) for c in agg.agents],
        "per_agent_max": [float(c.final_err_sq.max()) for c in agg.agents],
        "network_mean": float(nm.mean_err_sq[-1]),
    }
    summary["final_disagreement_mean"] = float(agg.disagreement_mean[-1])
    files.append(write_json(out / "summary.json", summary))
    return files


def emit_rate(config, curve, fit, seeds, out_dir) -> list[Path]:
    out = _prepare(out_dir)
    files = [write_csv(out / "curve.csv", ["k", "mean_err_sq", "std"], curve.rows())]
    body = fit.to_dict()
    body["n_trials"] = curve.n_trials
    body["seeds"] = list(seeds)
    body["mode"] = config.privacy.mode
    body["gain_condition"] = config.rate_report()
    body["config"] = config.to_dict()
    files.append(write_json(out / "fit.json", body))
    return files
