"""Plane-stress bilinear elasticity driven by pressure-gradient loads ``F = -T p``."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import elements
from .darcy import PressureField
from .linalg import TripletList, compress, partition_solve
from .mesh import DofMaps


@dataclass(frozen=True)
class MaterialParams:
    E0: float = 1.0
    Emin: float = 1e-9
    nu: float = 0.3
    penal: float = 3.0

    def __post_init__(self):
        if not self.E0 > self.Emin > 0:
            raise ValueError("need E0 > Emin > 0")
        if not 0 <= self.nu < 0.5:
            raise ValueError("nu must lie in [0, 0.5)")
        if not self.penal >= 1:
            raise ValueError("penal must be >= 1")


def _check_density(rho):
    rho = np.asarray(rho, dtype=float)
    if np.any(np.isnan(rho)) or np.any(rho < -1e-10) or np.any(rho > 1 + 1e-10):
        raise ValueError("density outside [0, 1]")
    return np.clip(rho, 0.0, 1.0)


def simp_modulus(rho_filt, m: MaterialParams):
    rho = _check_density(rho_filt)
    return m.Emin + rho**m.penal * (m.E0 - m.Emin)


def simp_modulus_deriv(rho_filt, m: MaterialParams):
    rho = _check_density(rho_filt)
    return m.penal * rho ** (m.penal - 1) * (m.E0 - m.Emin)


def plane_stress_matrix(nu: float) -> np.ndarray:
    return np.array([[1, nu, 0], [nu, 1, 0], [0, 0, (1 - nu) / 2]]) / (1 - nu**2)


def element_stiffness(nu: float) -> np.ndarray:
    """8x8 stiffness of the unit square element for unit modulus and thickness."""
    C = plane_stress_matrix(nu)
    ke = np.zeros((8, 8))
    for gx, gy in elements.GAUSS_POINTS:
        dn = elements.shape_gradients(gx, gy)
        B = np.zeros((3, 8))
        B[0, 0::2] = dn[0]
        B[1, 1::2] = dn[1]
        B[2, 0::2] = dn[1]
        B[2, 1::2] = dn[0]
        ke += elements.GAUSS_WEIGHT * B.T @ C @ B
    # Exact symmetry makes the assembled K bitwise symmetric.
    return 0.5 * (ke + ke.T)


def element_transformation() -> np.ndarray:
    """8x4 matrix ``Te = int N_u^T grad(N_p)``; element forces are ``-Te p_e``."""
    Te = np.zeros((8, 4))
    for gx, gy in elements.GAUSS_POINTS:
        n = elements.shape_functions(gx, gy)
        dn = elements.shape_gradients(gx, gy)
        Te[0::2] += elements.GAUSS_WEIGHT * np.outer(n, dn[0])
        Te[1::2] += elements.GAUSS_WEIGHT * np.outer(n, dn[1])
    return Te


TE = element_transformation()


def _flat(rho_filt, dofs: DofMaps):
    rho = np.asarray(rho_filt, dtype=float).ravel(order="F")
    if rho.size != dofs.mesh.nel:
        raise ValueError(f"expected {dofs.mesh.nel} element densities, got {rho.size}")
    return rho


def assemble_stiffness(rho_filt, dofs: DofMaps, m: MaterialParams, ke=None):
    rho = _flat(rho_filt, dofs)
    if ke is None:
        ke = element_stiffness(m.nu)
    E = simp_modulus(rho, m)
    rows, cols = dofs.u_pattern
    ndof = 2 * dofs.mesh.nno
    return compress(TripletList(rows, cols, np.outer(E, ke.ravel()).ravel(), (ndof, ndof)))


def assemble_transformation(dofs: DofMaps):
    """Global ``T`` (2*nno x nno); design independent."""
    rows, cols = dofs.t_pattern
    vals = np.tile(TE.ravel(), dofs.mesh.nel)
    return compress(TripletList(rows, cols, vals, (2 * dofs.mesh.nno, dofs.mesh.nno)))


def assemble_force(p, dofs: DofMaps, T=None) -> np.ndarray:
    """Consistent nodal forces ``F = -T p`` from a nodal pressure vector or field."""
    if isinstance(p, PressureField):
        p = p.p
    p = np.asarray(p, dtype=float)
    if p.shape != (dofs.mesh.nno,):
        raise ValueError(f"pressure vector must have length {dofs.mesh.nno}")
    if T is None:
        T = assemble_transformation(dofs)
    return -(T @ p)


@dataclass(frozen=True, eq=False)
class StructuralState:
    F: np.ndarray
    u: np.ndarray
    fixed_u_dofs: np.ndarray
    free_u_dofs: np.ndarray


def solve_displacement(K, F, fixed_u_dofs, fixed_values=None) -> StructuralState:
    """Solve ``K_ff u_f = F_f - K_fc u_c``.

    ``u_c`` is zero on the fixed DOFs unless ``fixed_values`` (aligned with
    ``fixed_u_dofs``) is given.
    """
    fixed = np.asarray(fixed_u_dofs, dtype=np.int64).ravel()
    values = np.zeros(fixed.size) if fixed_values is None else np.asarray(fixed_values, dtype=float).ravel()
    fixed, first = np.unique(fixed, return_index=True)
    u, _, free = partition_solve(
        K, fixed, values[first], rhs=F,
        name="stiffness matrix K_ff (do the supports remove all rigid-body modes?)",
    )
    return StructuralState(F=np.asarray(F, dtype=float), u=u, fixed_u_dofs=fixed, free_u_dofs=free)
