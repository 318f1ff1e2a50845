"""Link-level simulation of a two-source, one-relay, two-destination multicast
cell with regenerative network coding at the relay."""

from .constellation import Constellation, build_constellation, gf_superpose
from .power_allocation import RCNC, RGNC, AllocationScheme, PafSet
from .montecarlo import SfepEstimate, SimConfig, estimate_sfep, run_trial, sweep

__version__ = "0.1.0"
