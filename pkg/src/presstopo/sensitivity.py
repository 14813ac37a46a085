"""Compliance, volume constraint and their design sensitivities.

With the state equations ``A p = 0`` and ``K u = -T p``, the compliance
``C = u^T K u`` has the filtered-density derivative

    dC/drho_e = -u_e^T dK_e u_e + lam1_e^T dA_e p_e,

where the adjoint ``lam1`` solves ``A lam1 = 2 T^T u`` on the free pressure
DOFs (the structural multiplier is ``-2u`` and is never formed).  The
second term is the load sensitivity: it accounts for the pressure field
moving with the design.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import darcy
from .darcy import FlowParams, PressureField
from .elasticity import MaterialParams, StructuralState, simp_modulus_deriv
from .filtering import FilterKernel, apply_filter_transpose
from .linalg import SpdFactor
from .mesh import DofMaps


class StaleStateError(RuntimeError):
    """Raised when fields from different design iterations are combined."""


@dataclass(frozen=True, eq=False)
class SolvedState:
    """Everything computed from one physical density field."""

    rho_filt: np.ndarray
    A: object
    K: object
    T: object
    pressure: PressureField
    structure: StructuralState
    tag: int = 0

    @property
    def p(self) -> np.ndarray:
        return self.pressure.p

    @property
    def u(self) -> np.ndarray:
        return self.structure.u

    @property
    def F(self) -> np.ndarray:
        return self.structure.F


@dataclass(frozen=True, eq=False)
class SensitivityBundle:
    obj: float
    obj_sens: np.ndarray
    vol: float
    vol_sens: np.ndarray
    lam1: np.ndarray
    normf: float = 1.0
    term1: np.ndarray | None = None
    term2: np.ndarray | None = None

    @property
    def scaled_obj(self) -> float:
        return self.obj * self.normf

    @property
    def scaled_obj_sens(self) -> np.ndarray:
        return self.obj_sens * self.normf


def compliance(u, K) -> float:
    u = np.asarray(u, dtype=float)
    return float(u @ (K @ u))


def adjoint_lambda1(A, T, u, free_p_dofs, factor: SpdFactor | None = None) -> np.ndarray:
    """Solve ``A_ff lam_f = 2 (T^T u)_f``; ``lam`` vanishes on fixed pressure DOFs."""
    free = np.asarray(free_p_dofs, dtype=np.int64)
    rhs = 2.0 * (T.T @ np.asarray(u, dtype=float))
    lam = np.zeros(A.shape[0])
    if free.size == 0:
        return lam
    if factor is None:
        factor = SpdFactor(A[free][:, free], name="flow matrix A_ff")
    lam[free] = factor.solve(rhs[free])
    return lam


def stiffness_term(state: SolvedState, dofs: DofMaps, m: MaterialParams, ke) -> np.ndarray:
    """``-u_e^T dK_e/drho u_e`` per element."""
    ue = state.u[dofs.u_dofs]
    energy = np.einsum("ei,ij,ej->e", ue, ke, ue)
    return -simp_modulus_deriv(state.rho_filt, m) * energy


def load_term(state: SolvedState, lam1, dofs: DofMaps, flow: FlowParams) -> np.ndarray:
    """``lam1_e^T dA_e/drho p_e`` per element."""
    le = np.asarray(lam1)[dofs.p_dofs]
    pe = state.p[dofs.p_dofs]
    dk = darcy.flow_coeff_deriv(state.rho_filt, flow)
    dd = darcy.drainage_coeff_deriv(state.rho_filt, flow)
    return dk * np.einsum("ei,ij,ej->e", le, darcy.KP, pe) + dd * np.einsum(
        "ei,ij,ej->e", le, darcy.KDP, pe
    )


def chain_rule(dfilt, kernel: FilterKernel, act) -> np.ndarray:
    """Map a filtered-density gradient to the design variables.

    Non-design elements have their physical density overwritten after
    filtering, so their filtered-density entries carry no dependence on the
    design and are zeroed before applying the filter transpose.
    """
    seed = np.zeros_like(np.asarray(dfilt, dtype=float))
    act = np.asarray(act, dtype=np.int64)
    seed[act] = np.asarray(dfilt)[act]
    return apply_filter_transpose(seed, kernel)


def objective_sensitivity(
    state: SolvedState,
    lam1,
    lst: int,
    dofs: DofMaps,
    m: MaterialParams,
    flow: FlowParams,
    ke,
    kernel: FilterKernel,
    act,
    tag: int | None = None,
):
    """Return ``(dC/drho, term1, term2)``; terms are w.r.t. the filtered density."""
    if tag is not None and tag != state.tag:
        raise StaleStateError(f"state computed at iteration {state.tag}, requested for {tag}")
    if lst not in (0, 1):
        raise ValueError("lst must be 0 or 1")
    term1 = stiffness_term(state, dofs, m, ke)
    term2 = load_term(state, lam1, dofs, flow)
    dc_filt = term1 + lst * term2
    return chain_rule(dc_filt, kernel, act), term1, term2


def volume_and_sensitivity(rho_filt, act, volfrac: float, kernel: FilterKernel):
    """Constraint ``mean(rho_filt[act]) / volfrac - 1`` and its design gradient."""
    act = np.asarray(act, dtype=np.int64)
    if act.size == 0:
        raise ValueError("active element set is empty")
    rho = np.asarray(rho_filt, dtype=float).ravel(order="F")
    vol = rho[act].mean() / volfrac - 1.0
    dvol_filt = np.zeros(rho.size)
    dvol_filt[act] = 1.0 / (volfrac * act.size)
    return float(vol), chain_rule(dvol_filt, kernel, act)
