"""Direct symbolic simplification of analog transfer functions.

A genetic algorithm searches for a compact sum-of-products rational function
that tracks a linear circuit's exact response over Monte Carlo parameter
samples, without first expanding the exact symbolic expression.
"""

from .kernels import BACKEND
from .netlist import CircuitModel, NetlistError, load_netlist, parse_netlist

__version__ = "0.1.0"

__all__ = ["BACKEND", "CircuitModel", "NetlistError", "load_netlist", "parse_netlist", "__version__"]
