"""Numerical workbench for Manhattan curves of extended Schottky representations."""
from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"

from .coding import BlockWord, TruncationParams
from .config import RunConfig, fixture_config
from .fixtures import pair as fixture_pair
from .manhattan import bowen_root, entropy, rigidity_report, trace_curve
from .pressure import WeightedPotentialQuery, pressure_estimate
from .schottky import GeneratorSpec, RepPair, SchottkyRep, verify_conditions

__all__ = [
    "BlockWord", "GeneratorSpec", "RepPair", "RunConfig", "SchottkyRep", "TruncationParams",
    "WeightedPotentialQuery", "bowen_root", "entropy", "fixture_config", "fixture_pair",
    "pressure_estimate", "rigidity_report", "trace_curve", "verify_conditions", "__version__",
]
