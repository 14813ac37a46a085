"""Optimization loop: flow solve, elasticity solve, sensitivities, MMA update, filtering."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from . import darcy
from .elasticity import assemble_force, assemble_stiffness, assemble_transformation, element_stiffness, solve_displacement
from .filtering import apply_filter, build_kernel
from .linalg import SolverError
from .mma import MmaState, mma_update
from .problems import ProblemSpec
from .sensitivity import (
    SensitivityBundle,
    SolvedState,
    adjoint_lambda1,
    compliance,
    objective_sensitivity,
    volume_and_sensitivity,
)

CHANGE_TOL = 0.01


class HistoryRow(NamedTuple):
    iter: int
    obj: float
    mean_density: float
    change: float


Callback = Callable[[int, float, float, float, np.ndarray], None]


class Model:
    """Design-independent data of a problem plus the state and sensitivity evaluations."""

    def __init__(self, spec: ProblemSpec):
        self.spec = spec
        self.dofs = spec.dofs
        self.T = assemble_transformation(self.dofs)
        self.ke = element_stiffness(spec.material.nu)
        self.kernel = build_kernel(spec.rmin, spec.nelx, spec.nely)

    def physical(self, x) -> np.ndarray:
        """Filtered density in element order with the non-design values imposed."""
        rho = apply_filter(np.asarray(x, dtype=float), self.kernel)
        rho[self.spec.active.nds] = 1.0
        rho[self.spec.active.ndv] = 0.0
        return np.clip(rho, 0.0, 1.0)

    def solve(self, rho_filt, tag: int = 0) -> SolvedState:
        spec = self.spec
        A = darcy.assemble_flow(rho_filt, self.dofs, spec.flow)
        pressure = darcy.solve_pressure(A, spec.pressure_bc)
        K = assemble_stiffness(rho_filt, self.dofs, spec.material, self.ke)
        F = assemble_force(pressure.p, self.dofs, self.T)
        structure = solve_displacement(K, F, spec.fixed_u_dofs)
        return SolvedState(rho_filt=rho_filt, A=A, K=K, T=self.T, pressure=pressure, structure=structure, tag=tag)

    def compliance(self, x) -> float:
        """Compliance of design ``x`` (full re-solve); used for finite differences."""
        state = self.solve(self.physical(x))
        return compliance(state.u, state.K)

    def sensitivities(self, state: SolvedState, normf: float = 1.0, lst: int | None = None) -> SensitivityBundle:
        """Objective and volume constraint with gradients w.r.t. the design variables."""
        spec = self.spec
        lst = spec.lst if lst is None else lst
        obj = compliance(state.u, state.K)
        factor = state.pressure.factor
        lam1 = adjoint_lambda1(state.A, self.T, state.u, state.pressure.free_p_dofs, factor)
        dc, term1, term2 = objective_sensitivity(
            state, lam1, lst, self.dofs, spec.material, spec.flow, self.ke, self.kernel, spec.active.act,
            tag=state.tag,
        )
        vol, dvol = volume_and_sensitivity(state.rho_filt, spec.active.act, spec.volfrac, self.kernel)
        return SensitivityBundle(obj=obj, obj_sens=dc, vol=vol, vol_sens=dvol, lam1=lam1, normf=normf,
                                 term1=term1, term2=term2)


@dataclass(frozen=True, eq=False)
class OptimizationResult:
    spec: ProblemSpec
    x: np.ndarray
    rho_filt: np.ndarray  # (nely, nelx)
    history: list
    reason: str  # "maxit" or "change"
    normf: float

    @property
    def iterations(self) -> int:
        return len(self.history)

    @property
    def active_mean(self) -> float:
        return float(self.rho_filt.ravel(order="F")[self.spec.active.act].mean())

    @property
    def mean_density(self) -> float:
        return float(self.rho_filt.mean())


def _field(rho, spec: ProblemSpec) -> np.ndarray:
    view = rho.reshape(spec.nely, spec.nelx, order="F").view()
    view.flags.writeable = False
    return view


def optimize(spec: ProblemSpec, callback: Callback | None = None) -> OptimizationResult:
    """Run the optimization until ``maxit`` iterations or a design change <= 0.01.

    ``callback(iteration, scaled_obj, mean_density, change, rho_field)`` is
    called after every design update with a read-only ``(nely, nelx)`` view
    of the new physical density.
    """
    model = Model(spec)
    act = spec.active.act
    x = spec.initial_design()
    rho = model.physical(x)
    mma = MmaState.initial(x[act], m=1, mvLt=spec.mvlt)

    history: list[HistoryRow] = []
    normf = 1.0
    change = 1.0
    it = 0
    while it < spec.maxit and change > CHANGE_TOL:
        it += 1
        try:
            state = model.solve(rho, tag=it)
            sens = model.sensitivities(state)
        except SolverError as exc:
            raise SolverError(f"iteration {it}: {exc}") from exc
        if it == 1:
            if not sens.obj > 0:
                raise SolverError(f"iteration 1: initial compliance {sens.obj} is not positive")
            normf = 10.0 / sens.obj
        f0 = sens.obj * normf
        res = mma_update(
            x[act], f0, sens.obj_sens[act] * normf, np.array([sens.vol]), sens.vol_sens[act][None, :], mma,
        )
        mma = res.state
        change = float(np.abs(res.xmma - x[act]).max())
        x = x.copy()
        x[act] = res.xmma
        rho = model.physical(x)
        row = HistoryRow(it, f0, float(rho.mean()), change)
        history.append(row)
        if callback is not None:
            callback(row.iter, row.obj, row.mean_density, row.change, _field(rho, spec))

    reason = "change" if history and change <= CHANGE_TOL else "maxit"
    return OptimizationResult(
        spec=spec, x=x, rho_filt=rho.reshape(spec.nely, spec.nelx, order="F"), history=history,
        reason=reason, normf=normf,
    )
