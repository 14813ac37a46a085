"""Design-dependent pressure field from Darcy flow with a drainage term.

The pressure satisfies ``A(rho) p = 0`` where each element contributes
``K(rho_e) Kp + D(rho_e) KDp``.  The flow coefficient ``K`` drops from ``Kv``
in void to ``Kv * epsf`` in solid, and the drainage coefficient ``D`` rises
from 0 to ``Ds``, both through a smooth Heaviside step in the filtered
density.  ``Ds`` is calibrated so that inside solid material the pressure
decays to ``r * Pin`` over a penetration depth ``Dels``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import elements
from .linalg import SolverError, SpdFactor, TripletList, compress, partition_solve
from .mesh import DofMaps

_DOMAIN_SLACK = 1e-10


@dataclass(frozen=True)
class FlowParams:
    Kv: float = 1.0
    epsf: float = 1e-7
    r: float = 0.1
    Dels: float = 2.0
    etaf: float = 0.2
    betaf: float = 8.0
    Pin: float = 1.0

    def __post_init__(self):
        if not self.Kv > 0:
            raise ValueError("Kv must be positive")
        if not 0 < self.epsf < 1:
            raise ValueError("epsf must lie in (0, 1)")
        if not 0 < self.r < 1:
            raise ValueError("r must lie in (0, 1)")
        if not self.Dels > 0:
            raise ValueError("Dels must be positive")
        if not 0 < self.etaf < 1:
            raise ValueError("etaf must lie in (0, 1)")
        if not self.betaf > 0:
            raise ValueError("betaf must be positive")
        if not self.Pin > 0:
            raise ValueError("Pin must be positive")

    @property
    def kvs(self) -> float:
        """Flow coefficient of a solid element."""
        return self.Kv * self.epsf

    @property
    def Ds(self) -> float:
        """Drainage coefficient of a solid element."""
        return (np.log(self.r) / self.Dels) ** 2 * self.kvs

    @property
    def decay_rate(self) -> float:
        """Exponential pressure decay rate ``sqrt(Ds / kvs)`` inside solid."""
        return np.sqrt(self.Ds / self.kvs)


def _check_density(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any(np.isnan(x)):
        raise ValueError("density contains NaN")
    if np.any(x < -_DOMAIN_SLACK) or np.any(x > 1 + _DOMAIN_SLACK):
        raise ValueError(f"density outside [0, 1]: min {x.min():.6g}, max {x.max():.6g}")
    return np.clip(x, 0.0, 1.0)


def smooth_heaviside(x, beta: float, eta: float):
    """``[tanh(beta*eta) + tanh(beta*(x-eta))] / [tanh(beta*eta) + tanh(beta*(1-eta))]``."""
    x = _check_density(x)
    den = np.tanh(beta * eta) + np.tanh(beta * (1 - eta))
    return (np.tanh(beta * eta) + np.tanh(beta * (x - eta))) / den


def smooth_heaviside_deriv(x, beta: float, eta: float):
    x = _check_density(x)
    den = np.tanh(beta * eta) + np.tanh(beta * (1 - eta))
    return beta * (1 - np.tanh(beta * (x - eta)) ** 2) / den


def flow_coeff(rho_filt, params: FlowParams):
    h = smooth_heaviside(rho_filt, params.betaf, params.etaf)
    return params.Kv * (1 - (1 - params.epsf) * h)


def drainage_coeff(rho_filt, params: FlowParams):
    return params.Ds * smooth_heaviside(rho_filt, params.betaf, params.etaf)


def flow_coeff_deriv(rho_filt, params: FlowParams):
    dh = smooth_heaviside_deriv(rho_filt, params.betaf, params.etaf)
    return -params.Kv * (1 - params.epsf) * dh


def drainage_coeff_deriv(rho_filt, params: FlowParams):
    return params.Ds * smooth_heaviside_deriv(rho_filt, params.betaf, params.etaf)


def element_flow_matrices() -> tuple[np.ndarray, np.ndarray]:
    """Unit-coefficient Darcy matrix ``Kp`` and drainage (mass) matrix ``KDp``."""
    Kp = np.zeros((4, 4))
    KDp = np.zeros((4, 4))
    for gx, gy in elements.GAUSS_POINTS:
        n = elements.shape_functions(gx, gy)
        dn = elements.shape_gradients(gx, gy)
        Kp += elements.GAUSS_WEIGHT * dn.T @ dn
        KDp += elements.GAUSS_WEIGHT * np.outer(n, n)
    return 0.5 * (Kp + Kp.T), 0.5 * (KDp + KDp.T)


KP, KDP = element_flow_matrices()


def _check_length(rho_filt, dofs: DofMaps) -> np.ndarray:
    rho_filt = np.asarray(rho_filt, dtype=float).ravel(order="F")
    if rho_filt.size != dofs.mesh.nel:
        raise ValueError(f"expected {dofs.mesh.nel} element densities, got {rho_filt.size}")
    return rho_filt


def assemble_flow(rho_filt, dofs: DofMaps, params: FlowParams):
    """Global flow matrix ``A`` (nno x nno) for per-element filtered densities.

    ``rho_filt`` is either a flat vector in element order or a ``(nely, nelx)``
    field (column-major flattening maps one onto the other).
    """
    rho = _check_length(rho_filt, dofs)
    kc = flow_coeff(rho, params)
    dc = drainage_coeff(rho, params)
    vals = np.outer(kc, KP.ravel()) + np.outer(dc, KDP.ravel())
    rows, cols = dofs.p_pattern
    nno = dofs.mesh.nno
    return compress(TripletList(rows, cols, vals.ravel(), (nno, nno)))


@dataclass(frozen=True)
class PressureBC:
    """Prescribed nodal pressures.  Nodes are unique; values in ``[0, Pin]``."""

    nodes: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=np.int64).ravel()
        values = np.asarray(self.values, dtype=float).ravel()
        if nodes.size != values.size:
            raise ValueError("pressure BC nodes and values differ in length")
        if np.unique(nodes).size != nodes.size:
            raise ValueError("pressure BC nodes must be unique")
        order = np.argsort(nodes)
        object.__setattr__(self, "nodes", nodes[order])
        object.__setattr__(self, "values", values[order])

    def __eq__(self, other):
        if not isinstance(other, PressureBC):
            return NotImplemented
        return np.array_equal(self.nodes, other.nodes) and np.array_equal(self.values, other.values)

    @classmethod
    def from_assignments(cls, nno: int, assignments) -> "PressureBC":
        """Apply ``(nodes, value)`` assignments in order; later ones overwrite earlier ones."""
        values = np.full(nno, np.nan)
        for nodes, value in assignments:
            values[np.asarray(nodes, dtype=np.int64)] = value
        fixed = np.flatnonzero(~np.isnan(values))
        return cls(fixed, values[fixed])


@dataclass(frozen=True, eq=False)
class PressureField:
    p: np.ndarray
    fixed_p_dofs: np.ndarray
    free_p_dofs: np.ndarray
    factor: SpdFactor | None = field(default=None, repr=False)


def solve_pressure(A, bc: PressureBC) -> PressureField:
    """Solve ``A p = 0`` with Dirichlet pressures ``bc`` by partitioning."""
    if bc.nodes.size == 0:
        raise SolverError("pressure problem has no prescribed nodes; the flow matrix is singular")
    p, factor, free = partition_solve(A, bc.nodes, bc.values, name="flow matrix A_ff")
    return PressureField(p=p, fixed_p_dofs=bc.nodes, free_p_dofs=free, factor=factor)
