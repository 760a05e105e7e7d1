"""4-clique network minor embedding toolkit."""
from cliquebed.hwgraph import HardwareGraph, apply_defects, generate, load, save

__version__ = "0.1.0"

__all__ = ["HardwareGraph", "apply_defects", "generate", "load", "save", "__version__"]
