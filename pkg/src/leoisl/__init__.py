"""Inter-plane inter-satellite link matching for LEO Walker-star constellations.

Satellites carry one antenna array per side of the pitch axis, fed either by
a Butler matrix (beam switching) or a digital beamformer (beam steering). A
greedy matcher pairs satellites in adjacent planes to maximise the sum of
rates under an interference upper bound.
"""

__version__ = "0.1.0"

from .config import ConstellationConfig, load_config, parse_config  # noqa: E402
from .constellation import build_constellation, propagate  # noqa: E402
from .matching import enumerate_feasible_edges, greedy_match, make_snapshot  # noqa: E402

__all__ = [
    "ConstellationConfig",
    "build_constellation",
    "enumerate_feasible_edges",
    "greedy_match",
    "load_config",
    "make_snapshot",
    "parse_config",
    "propagate",
]
