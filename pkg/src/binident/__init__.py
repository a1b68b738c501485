"""Recursive parameter identification from tampered, privatized 1-bit data."""

from .channel import ChannelParams, binary_quantize, channel_law, tamper
from .config import ExperimentConfig, load_config
from .distributed import run_distributed
from .errors import BinidentError, ConfigParseError, ValidationError
from .estimator import check_gain_condition, run_estimator
from .graph import Adjacency, build_laplacian, is_connected
from .harness import fit_rate, monte_carlo, monte_carlo_distributed
from .privacy import NoiseModel, PrivacyBudget, calibrate_sigma, q_function, q_inverse, verify_dp_condition
from .sysmodel import ConstraintSet, project, system_output

__version__ = "0.1.0"
