import numpy as np
import pytest

from binident.config import config_from_mapping


def base_mapping(**over):
    data = {
        "name": "test",
        "system": {"theta": [3.0, -1.0], "regressor": {"mode": "gaussian", "variance": 2.0}},
        "constraint": {"kind": "box", "half_widths": [6.0, 6.0]},
        "privacy": {"mode": "private", "epsilon": 0.2, "delta": 0.05, "sensitivity": 0.2},
        "channel": {"p": 0.2, "q": 0.3},
        "algorithm": {"beta": 100.0, "theta_hat_init": [1.0, 1.0], "iterations": 2000},
        "rate_conditions": {"f_lower": "local", "delta_phi": 2.0, "h": 2, "M": 6.0},
        "harness": {"trials": 4, "base_seed": 7},
    }
    for dotted, value in over.items():
        keys = dotted.split("__")
        cur = data
        for k in keys[:-1]:
            cur = cur.setdefault(k, {})
        if value is None:
            cur.pop(keys[-1], None)
        else:
            cur[keys[-1]] = value
    return data


@pytest.fixture
def make_config():
    """Build a small validated config; keyword ``a__b=v`` sets ``data[a][b] = v``."""
    def _make(**over):
        return config_from_mapping(base_mapping(**over))
    return _make


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE: dict[str, str] = {}


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line per acceptance criterion, then assert it."""

    def record(label: str, ok: bool, detail: str) -> None:
        _ACCEPTANCE[label] = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
        assert ok, detail

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for key in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[0])):
            terminalreporter.write_line(_ACCEPTANCE[key])
