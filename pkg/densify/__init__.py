"""densify – near-field aware stochastic-geometry toolkit for ultra-dense networks."""

__version__ = "0.1.0"
