"""Noncommutative Riemannian geometry on the finite groups Z_N and Z_N x Z_M."""

from .connection import Connection
from .cyclic import CyclicFunction, GridFunction
from .metric import Metric
from .solver import enumerate_connections, star_filter
from .torus import TorusConnection, TorusMetric

__all__ = [
    "Connection",
    "CyclicFunction",
    "GridFunction",
    "Metric",
    "TorusConnection",
    "TorusMetric",
    "enumerate_connections",
    "star_filter",
]
