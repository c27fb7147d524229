"""rankinlab: exponential sums, Bessel transforms, trace-formula and
Voronoi verification, Jutila's circle method, and Rankin-Selberg moment
experiments at desk scale."""

__version__ = "0.1.0"
