"""Bilinear shape functions on the unit square and Gauss quadrature helpers.

Both the flow and the elasticity element matrices are polynomial of degree
at most two per coordinate, so 2x2 Gauss-Legendre quadrature integrates them
exactly.
"""
import numpy as np

from .mesh import LOCAL_NODE_COORDS

_G = 0.5 / np.sqrt(3.0)
GAUSS_POINTS = [(0.5 + sx * _G, 0.5 + sy * _G) for sy in (-1, 1) for sx in (-1, 1)]
GAUSS_WEIGHT = 0.25


def shape_functions(x: float, y: float) -> np.ndarray:
    """Values of the four bilinear shape functions at local ``(x, y)``."""
    cx, cy = LOCAL_NODE_COORDS[:, 0], LOCAL_NODE_COORDS[:, 1]
    return (1 - cx + (2 * cx - 1) * x) * (1 - cy + (2 * cy - 1) * y)


def shape_gradients(x: float, y: float) -> np.ndarray:
    """Gradients, shape (2, 4): row 0 is d/dx, row 1 is d/dy."""
    cx, cy = LOCAL_NODE_COORDS[:, 0], LOCAL_NODE_COORDS[:, 1]
    nx = 1 - cx + (2 * cx - 1) * x
    ny = 1 - cy + (2 * cy - 1) * y
    return np.vstack([(2 * cx - 1) * ny, nx * (2 * cy - 1)])
