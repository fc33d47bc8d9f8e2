"""Walking-model construction and the step-to-step symmetry machinery.

Two template models share one interface:

* LIP — a single point mass at constant height above the stance foot, with
  the swing foot driven kinematically by the same piecewise-linear input
  profile so that both models expose identical controller surfaces.
* 3LP — three point masses (torso, swing leg, stance leg) at mid-limb on
  constant-height planes, thin-rod limb inertias, torso orientation held by
  ideal stance-hip control, and the two swing-hip torques as the only free
  inputs. Internal forces are eliminated at build time by solving the
  Newton–Euler balance of each limb, linearized about the upright
  configuration.

Coordinates are ordered x = (x2 swing foot, x1 pelvis, x3 stance foot),
each a 2-vector (sagittal, lateral); the full state is q = [x; dx/dt] ∈ R¹².
Inputs are u(t) = u_c + t·u_r with u_c, u_r ∈ R² (sagittal, lateral torque).
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ModelConstructionError
from .lti import PhaseLTI, input_shift, transition

# coordinate layout: [x2x, x2y, x1x, x1y, x3x, x3y]
SWING = (0, 1)
PELVIS = (2, 3)
STANCE = (4, 5)
_SAGITTAL = (0, 2, 4)
_LATERAL = (1, 3, 5)


@dataclass(frozen=True)
class BodyParams:
    """Anthropometric parameters.

    Defaults follow standard body-segment tables: hip height 0.53·height,
    one leg carrying 16.1 % of total mass, remaining mass in the torso with
    its centre halfway up the trunk. The pelvis width default is
    0.2·leg_length and only enters the lateral direction channel.
    """

    mass: float
    height: float
    gravity: float = 9.81
    leg_length: float | None = None
    pelvis_width: float | None = None
    leg_mass_fraction: float = 0.161
    thin_rod_limbs: bool = True

    def __post_init__(self):
        if self.mass <= 0 or self.height <= 0:
            raise ValueError("mass and height must be positive")
        if self.leg_length is None:
            object.__setattr__(self, "leg_length", 0.53 * self.height)
        if self.pelvis_width is None:
            object.__setattr__(self, "pelvis_width", 0.2 * self.leg_length)
        if self.leg_length <= 0:
            raise ValueError("leg length must be positive")
        if self.pelvis_width < 0:
            raise ValueError("pelvis width must be non-negative")
        if not 0.0 < self.leg_mass_fraction < 0.5:
            raise ValueError("leg mass fraction must lie in (0, 0.5)")


def _assemble(cx_p, cu_p, cd_p, cw_p) -> PhaseLTI:
    """Replicate planar 3×3 blocks over the sagittal and lateral planes.

    The two planes share identical dynamics; only the direction channel Cd
    (lateral hip offsets, sign-flipped by d) distinguishes them. Input
    column 0 is the sagittal torque, column 1 the lateral torque; the push
    columns follow the same convention.
    """
    cx = np.zeros((6, 6))
    cu = np.zeros((6, 2))
    cd = np.zeros(6)
    cw = np.zeros((6, 2))
    for plane, chan in ((_SAGITTAL, 0), (_LATERAL, 1)):
        for i, ii in enumerate(plane):
            for j, jj in enumerate(plane):
                cx[ii, jj] = cx_p[i, j]
            cu[ii, chan] = cu_p[i, 0]
            cw[ii, chan] = cw_p[i, 0]
            if chan == 1:
                cd[ii] = cd_p[i, 0]
    return PhaseLTI(n_pos=6, Cx=cx, Cu=cu, Cd=cd, Cw=cw, stance_coords=STANCE)


def build_lip(params: BodyParams) -> PhaseLTI:
    """Point-mass pendulum at constant height params.height.

    Sagittal and lateral CoM dynamics are d²x1/dt² = (g/h)(x1 − x3); the
    swing foot obeys d²x2/dt² = u(t)/(m·h) so the controller sees the same
    torque-like input channels as the three-mass model. Pushes act on the
    point mass.
    """
    g, h, m = params.gravity, params.height, params.mass
    cx_p = np.array([[0.0, 0.0, 0.0], [0.0, g / h, -g / h], [0.0, 0.0, 0.0]])
    cu_p = np.array([[1.0 / (m * h)], [0.0], [0.0]])
    cd_p = np.zeros((3, 1))
    cw_p = np.array([[0.0], [1.0 / m], [0.0]])
    return _assemble(cx_p, cu_p, cd_p, cw_p)


def build_3lp(params: BodyParams) -> PhaseLTI:
    """Three-mass model with mid-limb masses and thin-rod limb inertia.

    Per horizontal plane, the swing-leg and stance-leg moment balances with
    the pelvis-torso force/moment balance substituted in reduce to

        E · [d²x2/dt²; d²x1/dt²] = Rx·[x2; x1; x3] + Ru·τ + Rd + Rw·F

    which is inverted once here; the stance foot keeps zero acceleration.
    Hip offsets (±w/2, lateral only, flipped by d) produce the direction
    channel, and a push force is applied at the torso mass.
    """
    if params.leg_length <= 0:
        raise ValueError("degenerate geometry: zero leg length")
    g, m = params.gravity, params.mass
    m_leg = params.leg_mass_fraction * m
    m1, m2, m3 = m - 2 * m_leg, m_leg, m_leg
    hp = params.leg_length                      # hip/pelvis height
    t_off = (params.height - hp) / 2.0          # torso CoM above the pelvis
    h1 = hp + t_off
    rod = 1.0 / 12.0 if params.thin_rod_limbs else 0.0
    g1 = (2 * m1 + 2 * m2 + m3) * g

    # rows: swing-leg moment balance; stance-leg moment balance with the
    # pelvis-torso balance and stance-hip torque eliminated
    e = np.array([
        [m2 * hp * (0.25 - rod), m2 * hp * (0.25 + rod)],
        [-hp * m2 / 2.0,
         m3 * hp * rod - hp * (m1 + m2 / 2.0 + m3 / 4.0) - t_off * m1],
    ])
    rx = np.array([
        [-m2 * g / 2.0, m2 * g / 2.0, 0.0],
        [0.0, -g1 / 2.0, g1 / 2.0],
    ])
    ru = np.array([[1.0], [-1.0]])
    c2, c3 = params.pelvis_width / 2.0, -params.pelvis_width / 2.0
    rd = np.array([
        [m2 * g / 2.0 * c2],
        [-(g1 / 2.0) * c3 - c2 * m2 * g + c3 * (m1 + m2) * g],
    ])
    rw = np.array([[0.0], [-h1]])
    try:
        ei = np.linalg.inv(e)
    except np.linalg.LinAlgError as exc:
        raise ModelConstructionError("singular limb mass matrix") from exc
    zero = np.zeros((1, rx.shape[1]))
    cx_p = np.vstack([ei @ rx, zero])
    cu_p = np.vstack([ei @ ru, np.zeros((1, 1))])
    cd_p = np.vstack([ei @ rd, np.zeros((1, 1))])
    cw_p = np.vstack([ei @ rw, np.zeros((1, 1))])
    return _assemble(cx_p, cu_p, cd_p, cw_p)


def build_model(kind: str, params: BodyParams) -> PhaseLTI:
    if kind == "lip":
        return build_lip(params)
    if kind == "3lp":
        return build_3lp(params)
    raise ValueError(f"unknown model kind {kind!r}")


@dataclass(frozen=True)
class SymmetryOps:
    """Integer matrices tying consecutive single-support phases together.

    S exchanges the two legs at touchdown, M extracts the pelvis-relative
    symmetry vectors s1 = x1 − x2 and s2 = x1 − x3 with their rates,
    N selects the foot velocities, O flips lateral signs so mirrored steps
    compare in one frame, M̂ distributes a reduced vector back over the full
    state (M·M̂ = I), and Ĉ reads the terminal swing-foot velocity relative
    to the stance foot.
    """

    S: np.ndarray       # 12×12 leg exchange, S·S = I
    M: np.ndarray       # 8×12 symmetry extractor
    N: np.ndarray       # 4×12 foot-velocity selector
    O: np.ndarray       # 8×8 lateral sign flip, O·O = I
    Mhat: np.ndarray    # 12×8 distributor, M·M̂ = I₈
    Chat: np.ndarray    # 2×8 terminal-velocity constraint [0 −I I]

    @property
    def OMS(self) -> np.ndarray:
        return self.O @ self.M @ self.S


def symmetry_ops() -> SymmetryOps:
    i2 = np.eye(2)
    sx = np.zeros((6, 6))
    sx[0:2, 4:6] = i2
    sx[2:4, 2:4] = i2
    sx[4:6, 0:2] = i2
    mx = np.zeros((4, 6))
    mx[0:2, 0:2] = -i2
    mx[0:2, 2:4] = i2
    mx[2:4, 2:4] = i2
    mx[2:4, 4:6] = -i2
    mhx = np.zeros((6, 4))
    mhx[0:2, 0:2] = -i2
    mhx[0:2, 2:4] = i2
    mhx[2:4, 2:4] = i2
    n = np.zeros((4, 12))
    n[0:2, 6:8] = i2
    n[2:4, 10:12] = i2
    chat = np.zeros((2, 8))
    chat[:, 4:6] = -i2
    chat[:, 6:8] = i2
    return SymmetryOps(
        S=np.kron(np.eye(2), sx),
        M=np.kron(np.eye(2), mx),
        N=n,
        O=np.diag([1.0, -1.0] * 4),
        Mhat=np.kron(np.eye(2), mhx),
        Chat=chat,
    )


@dataclass(frozen=True)
class ErrorSystem:
    """One-step dynamics of deviations from a periodic gait.

        E[k+1] = Â(T)·E[k] + B̂(T)·ΔU[k],   Ĉ·E[k+1] = 0

    with Â(T) = O·M·S·A(T)·M̂ and B̂(T) = O·M·S·B(T). The same reduction
    evaluated over a remaining-phase horizon feeds the time-projection
    controller; `maps` re-anchors the input columns so corrective
    parameters always refer to the phase start.
    """

    Ahat: np.ndarray    # 8×8
    Bhat: np.ndarray    # 8×4
    Chat: np.ndarray    # 2×8
    T: float
    model: PhaseLTI = field(repr=False)
    ops: SymmetryOps = field(repr=False)

    def maps(self, tau_elapsed: float) -> tuple[np.ndarray, np.ndarray]:
        """Reduced transition pair over the remainder of the phase.

        Returns (Â(T−τ), B̂(T−τ)·shift(τ)) where the shift keeps corrective
        input parameters anchored at the phase start.
        """
        tau_rem = self.T - tau_elapsed
        if tau_rem < -1e-12:
            raise ValueError("elapsed time exceeds the phase period")
        ts = transition(self.model, max(tau_rem, 0.0))
        oms = self.ops.OMS
        return oms @ ts.A @ self.ops.Mhat, oms @ ts.B @ input_shift(tau_elapsed)


def error_system(model: PhaseLTI, T: float) -> ErrorSystem:
    """Assemble (Â, B̂, Ĉ) for a phase period T."""
    if T <= 0:
        raise ValueError("phase period must be positive")
    ops = symmetry_ops()
    ts = transition(model, T)
    oms = ops.OMS
    return ErrorSystem(
        Ahat=oms @ ts.A @ ops.Mhat,
        Bhat=oms @ ts.B,
        Chat=ops.Chat,
        T=float(T),
        model=model,
        ops=ops,
    )
