"""Periodic symmetric gait synthesis.

A nominal event state Q̄, input Ū and support direction D̄ must satisfy

    M·Q̄ = O·M·S·(A(T)·Q̄ + B(T)·Ū + C(T)·D̄),      N·Q̄ = 0

which pins twelve of the sixteen unknowns; the four-dimensional family
that remains spans the two horizontal translations, the forward-speed
direction and a lateral step-width direction. Translations are removed by
anchoring the stance foot at the origin, speed is fixed through the feet
separation at the event (stride · f = v), and the final degree of freedom
is resolved by minimizing the hip-torque parameter norm ‖Ū‖².

Because every constraint is linear and the norm is quadratic, the solved
gait is exactly affine in the requested speed; `scale_gait` exploits this
to re-speed a gait without re-solving.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleGaitError, ModelConstructionError
from .lti import PhaseLTI, transition
from .models import STANCE, SWING, symmetry_ops

_RANK_TOL = 1e-9


@dataclass(frozen=True)
class PeriodicGait:
    """Nominal gait at one touchdown event, stance foot at the origin.

    qslope/uslope hold the per-unit-speed direction of the affine gait
    family so that speed changes stay inside the periodicity null space.
    """

    qbar: np.ndarray        # (12,)
    ubar: np.ndarray        # (4,) = [u_c; u_r]
    dbar: float
    T: float
    v: float
    qslope: np.ndarray      # (12,)
    uslope: np.ndarray      # (4,)

    @property
    def f(self) -> float:
        return 1.0 / self.T

    @property
    def stride(self) -> float:
        """Sagittal feet separation at the event (positive walking forward)."""
        return self.qbar[STANCE[0]] - self.qbar[SWING[0]]


def periodicity_residual(model: PhaseLTI, g: PeriodicGait) -> float:
    """Max-norm defect of the event-periodicity and rest conditions."""
    ops = symmetry_ops()
    ts = transition(model, g.T)
    r1 = ops.M @ g.qbar - ops.OMS @ (ts.A @ g.qbar + ts.B @ g.ubar + ts.C * g.dbar)
    r2 = ops.N @ g.qbar
    return max(np.max(np.abs(r1)), np.max(np.abs(r2)))


def _solve_raw(model: PhaseLTI, T: float, v: float, dbar: float) -> tuple[np.ndarray, np.ndarray]:
    """Solve the event-periodicity system for one speed.

    Unknowns z = [Q̄; Ū] ∈ R¹⁶. Rows: periodicity (8), zero foot
    velocities (4), stance-foot anchor (2), event stride (1). The leftover
    direction is resolved to minimum ‖Ū‖.
    """
    ops = symmetry_ops()
    ts = transition(model, T)
    oms = ops.OMS
    rows_p = np.hstack([ops.M - oms @ ts.A, -oms @ ts.B])
    rows_n = np.hstack([ops.N, np.zeros((4, 4))])
    base = np.vstack([rows_p, rows_n])
    sv = np.linalg.svd(base, compute_uv=False)
    nullity = 16 - int(np.sum(sv > _RANK_TOL * sv[0]))
    if nullity != 4:
        raise ModelConstructionError(
            f"gait system null space has dimension {nullity}, expected 4"
        )

    anchor = np.zeros((2, 16))
    anchor[0, STANCE[0]] = 1.0
    anchor[1, STANCE[1]] = 1.0
    # at an event the fresh swing foot trails the stance foot by one stride
    speed = np.zeros((1, 16))
    speed[0, STANCE[0]] = 1.0
    speed[0, SWING[0]] = -1.0

    lhs = np.vstack([base, anchor, speed])
    rhs = np.concatenate([oms @ ts.C * dbar, np.zeros(4), np.zeros(2), [v * T]])
    zp, *_ = np.linalg.lstsq(lhs, rhs, rcond=None)
    _, s_full, vt_full = np.linalg.svd(lhs)
    null = vt_full[int(np.sum(s_full > _RANK_TOL * s_full[0])):]
    # minimize ||U|| along the remaining free directions
    usel = np.zeros((4, 16))
    usel[:, 12:] = np.eye(4)
    gq = usel @ null.T
    if null.shape[0] > 0 and np.linalg.norm(gq) > 0:
        alpha, *_ = np.linalg.lstsq(gq, -usel @ zp, rcond=None)
        zp = zp + null.T @ alpha
    return zp[:12], zp[12:]


def solve_periodic_gait(model: PhaseLTI, f: float, v: float, dbar: float = 1.0,
                        diamond: float = 1.7) -> PeriodicGait:
    """Synthesize the symmetric gait at step frequency f and speed v.

    Raises InfeasibleGaitError when the event stride would exceed the
    footstep diamond, and ModelConstructionError when the periodicity
    system does not leave the expected four degrees of freedom.
    """
    if f <= 0:
        raise ValueError("step frequency must be positive")
    T = 1.0 / f
    if abs(v) * T > diamond:
        raise InfeasibleGaitError(
            f"stride {abs(v) * T:.3f} m exceeds the {diamond:.3f} m footstep bound"
        )
    q0, u0 = _solve_raw(model, T, 0.0, dbar)
    q1, u1 = _solve_raw(model, T, 1.0, dbar)
    qs, us = q1 - q0, u1 - u0
    gait = PeriodicGait(qbar=q0 + v * qs, ubar=u0 + v * us, dbar=dbar, T=T,
                        v=float(v), qslope=qs, uslope=us)
    res = periodicity_residual(model, gait)
    if res > 1e-9:
        raise ModelConstructionError(f"gait residual {res:.3e} exceeds 1e-9")
    return gait


def scale_gait(g: PeriodicGait, v_new: float, diamond: float = 1.7) -> PeriodicGait:
    """Re-speed a gait along its affine family, same frequency."""
    if abs(v_new) * g.T > diamond:
        raise InfeasibleGaitError(
            f"stride {abs(v_new) * g.T:.3f} m exceeds the {diamond:.3f} m footstep bound"
        )
    dv = v_new - g.v
    return PeriodicGait(
        qbar=g.qbar + dv * g.qslope,
        ubar=g.ubar + dv * g.uslope,
        dbar=g.dbar,
        T=g.T,
        v=float(v_new),
        qslope=g.qslope,
        uslope=g.uslope,
    )
