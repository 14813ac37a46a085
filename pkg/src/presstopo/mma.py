"""Method of Moving Asymptotes for problems of the form

    minimize    f_0(x) + a0*z + sum_i (c_i*y_i + 0.5*d_i*y_i**2)
    subject to  f_i(x) - a_i*z - y_i <= 0,    i = 1..m
                xmin_j <= x_j <= xmax_j
                y_i >= 0, z >= 0

Each update builds the separable convex approximation around the current
point and solves it with a primal-dual interior-point method whose
relaxation parameter is driven from 1 down to ``EPSI_MIN``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

ASY_INIT = 0.5
ASY_INCR = 1.2
ASY_DECR = 0.7
ALBEFA = 0.1
MOVE = 0.5
RAA0 = 1e-5
EPSI_MIN = 1e-10
MAX_NEWTON = 200
MAX_BACKTRACK = 50


@dataclass(frozen=True, eq=False)
class MmaState:
    """Asymptotes, design history and the problem constants a0, a, c, d."""

    low: np.ndarray
    upp: np.ndarray
    xold1: np.ndarray
    xold2: np.ndarray
    a0: float = 1.0
    a: np.ndarray = field(default_factory=lambda: np.zeros(1))
    c: np.ndarray = field(default_factory=lambda: np.full(1, 1000.0))
    d: np.ndarray = field(default_factory=lambda: np.zeros(1))
    mvLt: float = 0.1
    iter: int = 0

    @classmethod
    def initial(cls, x, m: int = 1, mvLt: float = 0.1, a0=1.0, a=0.0, c=1000.0, d=0.0):
        x = np.asarray(x, dtype=float).copy()
        return cls(
            low=np.zeros_like(x),
            upp=np.ones_like(x),
            xold1=x.copy(),
            xold2=x.copy(),
            a0=float(a0),
            a=np.broadcast_to(np.asarray(a, dtype=float), (m,)).copy(),
            c=np.broadcast_to(np.asarray(c, dtype=float), (m,)).copy(),
            d=np.broadcast_to(np.asarray(d, dtype=float), (m,)).copy(),
            mvLt=float(mvLt),
        )


@dataclass(frozen=True, eq=False)
class SubproblemInfo:
    kkt_residual: float
    newton_steps: int
    # Relaxed residual norms after each Newton step, one list per relaxation level.
    residual_history: list


@dataclass(frozen=True, eq=False)
class MmaResult:
    xmma: np.ndarray
    low: np.ndarray
    upp: np.ndarray
    lam: np.ndarray  # constraint multipliers in the units of the objective
    y: np.ndarray
    z: float
    xmin: np.ndarray
    xmax: np.ndarray
    alfa: np.ndarray
    beta: np.ndarray
    state: MmaState
    info: SubproblemInfo


def _asymptotes(it, x, xmin, xmax, xold1, xold2, low, upp):
    span = xmax - xmin
    if it <= 2:
        return x - ASY_INIT * span, x + ASY_INIT * span
    zzz = (x - xold1) * (xold1 - xold2)
    factor = np.ones_like(x)
    factor[zzz > 0] = ASY_INCR
    factor[zzz < 0] = ASY_DECR
    low = x - factor * (xold1 - low)
    upp = x + factor * (upp - xold1)
    low = np.clip(low, x - 10 * span, x - 0.01 * span)
    upp = np.clip(upp, x + 0.01 * span, x + 10 * span)
    return low, upp


def mma_update(x, f0, df0, fval, dfdx, state: MmaState, xlower=0.0, xupper=1.0) -> MmaResult:
    """One MMA iteration at design ``x``.

    Parameters
    ----------
    x : (n,) current design.
    f0 : objective value; df0 : (n,) objective gradient.
    fval : (m,) constraint values; dfdx : (m, n) constraint gradients.
    state : history and constants from the previous call (``MmaState.initial`` first).
    xlower, xupper : global variable bounds; the move limit ``state.mvLt``
        narrows them around ``x``.
    """
    x = np.asarray(x, dtype=float)
    df0 = np.asarray(df0, dtype=float)
    fval = np.atleast_1d(np.asarray(fval, dtype=float))
    dfdx = np.atleast_2d(np.asarray(dfdx, dtype=float))
    n, m = x.size, fval.size
    if x.ndim != 1 or df0.shape != (n,):
        raise ValueError(f"x and df0 must be vectors of equal length, got {x.shape} and {df0.shape}")
    if dfdx.shape != (m, n):
        raise ValueError(f"dfdx must have shape ({m}, {n}), got {dfdx.shape}")
    if state.xold1.shape != (n,) or state.c.shape != (m,):
        raise ValueError("MMA state does not match problem dimensions")
    for name, arr in (("x", x), ("f0", f0), ("df0", df0), ("fval", fval), ("dfdx", dfdx)):
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"{name} contains NaN or Inf")

    it = state.iter + 1
    xmin = np.maximum(xlower, x - state.mvLt)
    xmax = np.minimum(xupper, x + state.mvLt)
    low, upp = _asymptotes(it, x, xmin, xmax, state.xold1, state.xold2, state.low, state.upp)

    alfa = np.maximum.reduce([low + ALBEFA * (x - low), x - MOVE * (xmax - xmin), xmin])
    beta = np.minimum.reduce([upp - ALBEFA * (upp - x), x + MOVE * (xmax - xmin), xmax])

    xmami = np.maximum(xmax - xmin, 1e-5)
    ux2 = (upp - x) ** 2
    xl2 = (x - low) ** 2
    # Objective gradient normalized to unit max-norm: the subproblem minimizer
    # is then invariant to positive rescaling of the objective.
    scale = np.abs(df0).max()
    if scale == 0.0:
        scale = 1.0
    p0 = np.maximum(df0 / scale, 0.0)
    q0 = np.maximum(-df0 / scale, 0.0)
    pq0 = 0.001 * (p0 + q0) + RAA0 / xmami
    p0 = (p0 + pq0) * ux2
    q0 = (q0 + pq0) * xl2

    P = np.maximum(dfdx, 0.0)
    Q = np.maximum(-dfdx, 0.0)
    PQ = 0.001 * (P + Q) + RAA0 / xmami
    P = (P + PQ) * ux2
    Q = (Q + PQ) * xl2
    b = P @ (1.0 / (upp - x)) + Q @ (1.0 / (x - low)) - fval

    xmma, y, z, lam, info = subsolv(low, upp, alfa, beta, p0, q0, P, Q, state.a0, state.a, b, state.c, state.d)

    new_state = replace(state, low=low, upp=upp, xold1=x.copy(), xold2=state.xold1.copy(), iter=it)
    return MmaResult(
        xmma=xmma, low=low, upp=upp, lam=lam * scale, y=y, z=z,
        xmin=xmin, xmax=xmax, alfa=alfa, beta=beta, state=new_state, info=info,
    )


def _residual(v, epsi, low, upp, alfa, beta, p0, q0, P, Q, a0, a, b, c, d):
    x, y, z, lam, xsi, eta, mu, zet, s = v
    ux1 = upp - x
    xl1 = x - low
    plam = p0 + lam @ P
    qlam = q0 + lam @ Q
    gvec = P @ (1 / ux1) + Q @ (1 / xl1)
    return np.concatenate([
        plam / ux1**2 - qlam / xl1**2 - xsi + eta,
        c + d * y - mu - lam,
        [a0 - zet - a @ lam],
        gvec - a * z - y + s - b,
        xsi * (x - alfa) - epsi,
        eta * (beta - x) - epsi,
        mu * y - epsi,
        [zet * z - epsi],
        lam * s - epsi,
    ])


def subsolv(low, upp, alfa, beta, p0, q0, P, Q, a0, a, b, c, d, epsimin=EPSI_MIN):
    """Primal-dual Newton solve of the MMA subproblem.

    Returns ``(x, y, z, lam, info)``.  ``info.kkt_residual`` is the max-norm
    of the unrelaxed KKT conditions at the returned point.
    """
    n = low.size
    m = b.size
    args = (low, upp, alfa, beta, p0, q0, P, Q, a0, a, b, c, d)

    x = 0.5 * (alfa + beta)
    y = np.ones(m)
    z = 1.0
    lam = np.ones(m)
    xsi = np.maximum(1.0 / (x - alfa), 1.0)
    eta = np.maximum(1.0 / (beta - x), 1.0)
    mu = np.maximum(np.ones(m), 0.5 * c)
    zet = 1.0
    s = np.ones(m)

    epsi = 1.0
    total_steps = 0
    history = []
    while epsi > epsimin:
        res = _residual((x, y, z, lam, xsi, eta, mu, zet, s), epsi, *args)
        resnorm = np.linalg.norm(res)
        resmax = np.abs(res).max()
        level = []
        steps = 0
        while resmax > 0.9 * epsi and steps < MAX_NEWTON:
            steps += 1
            ux1 = upp - x
            xl1 = x - low
            ux2, xl2 = ux1**2, xl1**2
            plam = p0 + lam @ P
            qlam = q0 + lam @ Q
            gvec = P @ (1 / ux1) + Q @ (1 / xl1)
            GG = P / ux2 - Q / xl2
            dpsidx = plam / ux2 - qlam / xl2
            delx = dpsidx - epsi / (x - alfa) + epsi / (beta - x)
            dely = c + d * y - lam - epsi / y
            delz = a0 - a @ lam - epsi / z
            dellam = gvec - a * z - y - b + epsi / lam
            diagx = 2 * (plam / (ux2 * ux1) + qlam / (xl2 * xl1)) + xsi / (x - alfa) + eta / (beta - x)
            diagy = d + mu / y
            diaglamyi = s / lam + 1.0 / diagy
            if m < n:
                blam = dellam + dely / diagy - GG @ (delx / diagx)
                Alam = np.diag(diaglamyi) + (GG / diagx) @ GG.T
                AA = np.block([[Alam, a[:, None]], [a[None, :], np.array([[-zet / z]])]])
                sol = np.linalg.solve(AA, np.concatenate([blam, [delz]]))
                dlam, dz = sol[:m], sol[m]
                dx = -delx / diagx - (GG.T @ dlam) / diagx
            else:
                diaglamyiinv = 1.0 / diaglamyi
                dellamyi = dellam + dely / diagy
                Axx = np.diag(diagx) + (GG.T * diaglamyiinv) @ GG
                azz = zet / z + a @ (a / diaglamyi)
                axz = -GG.T @ (a / diaglamyi)
                bx = delx + GG.T @ (dellamyi / diaglamyi)
                bz = delz - a @ (dellamyi / diaglamyi)
                AA = np.block([[Axx, axz[:, None]], [axz[None, :], np.array([[azz]])]])
                sol = np.linalg.solve(AA, -np.concatenate([bx, [bz]]))
                dx, dz = sol[:n], sol[n]
                dlam = (GG @ dx) / diaglamyi - dz * (a / diaglamyi) + dellamyi / diaglamyi
            dy = -dely / diagy + dlam / diagy
            dxsi = -xsi + epsi / (x - alfa) - xsi * dx / (x - alfa)
            deta = -eta + epsi / (beta - x) + eta * dx / (beta - x)
            dmu = -mu + epsi / y - mu * dy / y
            dzet = -zet + epsi / z - zet * dz / z
            ds = -s + epsi / lam - s * dlam / lam

            # Fraction-to-boundary step keeping all positive quantities positive.
            xx = np.concatenate([y, [z], lam, xsi, eta, mu, [zet], s])
            dxx = np.concatenate([dy, [dz], dlam, dxsi, deta, dmu, [dzet], ds])
            stminv = max(
                np.max(-1.01 * dxx / xx),
                np.max(-1.01 * dx / (x - alfa)),
                np.max(1.01 * dx / (beta - x)),
                1.0,
            )
            steg = 1.0 / stminv

            old = (x, y, z, lam, xsi, eta, mu, zet, s)
            step = (dx, dy, dz, dlam, dxsi, deta, dmu, dzet, ds)
            newnorm = 2 * resnorm
            tries = 0
            while newnorm > resnorm and tries < MAX_BACKTRACK:
                tries += 1
                cand = tuple(o + steg * dv for o, dv in zip(old, step))
                res = _residual(cand, epsi, *args)
                newnorm = np.linalg.norm(res)
                steg /= 2
            if newnorm > resnorm:
                # No descent along the Newton direction: keep the current
                # point and move on to the next relaxation level.
                break
            x, y, z, lam, xsi, eta, mu, zet, s = cand
            resnorm = newnorm
            resmax = np.abs(res).max()
            level.append(resnorm)
        total_steps += steps
        history.append(level)
        epsi *= 0.1

    kkt = np.abs(_residual((x, y, z, lam, xsi, eta, mu, zet, s), 0.0, *args)).max()
    info = SubproblemInfo(kkt_residual=float(kkt), newton_steps=total_steps, residual_history=history)
    return x, y, float(z), lam, info
