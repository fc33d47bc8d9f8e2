"""Closed-form propagation of second-order linear phase dynamics.

A single-support phase is governed by

    d²x/dt² = Cx·x + Cu·u(t) + Cd·d + Cw·w(t)

where x stacks horizontal position coordinates, u(t) = u_c + t·u_r is a
piecewise-linear actuation profile, d = ±1 selects the support side and
w(t) is an external push force. With q = [x; dx/dt] the solution over a
horizon t is

    q(t) = A(t)·q(0) + B(t)·[u_c; u_r] + C(t)·d + W(t)·w

and all four transition blocks come out of a single augmented matrix
exponential, so no inverse of the system matrix is ever required (the
construction is valid for singular generators).
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg


def expm(m: np.ndarray, t: float = 1.0) -> np.ndarray:
    """Matrix exponential e^{m·t} (scaling-and-squaring Padé).

    Raises ValueError for non-square or non-finite input.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix contains non-finite entries")
    return scipy.linalg.expm(m * float(t))


@dataclass(frozen=True)
class PhaseLTI:
    """Second-order single-support dynamics in acceleration form.

    Rows of every acceleration map that correspond to the stance-foot
    coordinates are identically zero: the stance foot never accelerates.
    """

    n_pos: int
    Cx: np.ndarray          # (n_pos, n_pos), 1/s²
    Cu: np.ndarray          # (n_pos, n_u), m/s² per N·m
    Cd: np.ndarray          # (n_pos,), m/s² for d = ±1
    Cw: np.ndarray          # (n_pos, n_w), m/s² per N
    stance_coords: tuple[int, ...]
    input_dim: int = 4      # constant part + ramp part of u(t)

    # first-order realization, filled in __post_init__
    a: np.ndarray = field(init=False, repr=False)
    b: np.ndarray = field(init=False, repr=False)
    cd: np.ndarray = field(init=False, repr=False)
    cw: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        n = self.n_pos
        for name in ("Cx", "Cu", "Cd", "Cw"):
            arr = getattr(self, name)
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite entries")
        if self.Cx.shape != (n, n):
            raise ValueError(f"Cx must be ({n},{n}), got {self.Cx.shape}")
        if self.Cu.shape[0] != n or self.Cd.shape != (n,) or self.Cw.shape[0] != n:
            raise ValueError("acceleration map row counts are inconsistent")
        if 2 * self.Cu.shape[1] != self.input_dim:
            raise ValueError("input_dim must cover constant and ramp parts")
        for i in self.stance_coords:
            for name in ("Cx", "Cu", "Cw"):
                if np.any(getattr(self, name)[i] != 0.0):
                    raise ValueError(f"stance row {i} of {name} must be zero")
            if self.Cd[i] != 0.0:
                raise ValueError(f"stance row {i} of Cd must be zero")
        a = np.zeros((2 * n, 2 * n))
        a[:n, n:] = np.eye(n)
        a[n:, :n] = self.Cx
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", np.vstack([np.zeros_like(self.Cu), self.Cu]))
        object.__setattr__(self, "cd", np.concatenate([np.zeros(n), self.Cd]))
        object.__setattr__(self, "cw", np.vstack([np.zeros_like(self.Cw), self.Cw]))

    @property
    def n_state(self) -> int:
        return 2 * self.n_pos


@dataclass(frozen=True)
class TransitionSet:
    """Transition blocks of one phase over a fixed horizon.

    A_0 = I, B_0 = 0, C_0 = 0, W_0 = 0, and A obeys the semigroup property
    A(t+s) = A(s)·A(t).
    """

    A: np.ndarray           # (2n, 2n)
    B: np.ndarray           # (2n, 2·n_u): columns for u_c then u_r
    C: np.ndarray           # (2n,)
    W: np.ndarray           # (2n, n_w)
    t: float


def transition(model: PhaseLTI, t: float) -> TransitionSet:
    """Closed-form A(t), B(t), C(t), W(t) for one phase.

    The piecewise-linear input u(τ) = u_c + τ·u_r and the constant d and w
    channels are appended to the generator as polynomial chains; one matrix
    exponential of the augmented block matrix yields every block at once.
    """
    if t < 0:
        raise ValueError(f"horizon must be non-negative, got {t}")
    n = model.n_state
    nu = model.b.shape[1]
    nw = model.cw.shape[1]
    dim = n + 2 * nu + 1 + nw
    m = np.zeros((dim, dim))
    m[:n, :n] = model.a
    m[:n, n:n + nu] = model.b
    m[n:n + nu, n + nu:n + 2 * nu] = np.eye(nu)   # d(u_c-chain)/dτ = u_r
    m[:n, n + 2 * nu] = model.cd
    m[:n, n + 2 * nu + 1:] = model.cw
    e = expm(m, t)
    A = e[:n, :n]
    B = e[:n, n:n + 2 * nu]
    C = e[:n, n + 2 * nu]
    W = e[:n, n + 2 * nu + 1:]
    # the stance chain x3(t) = x3(0) + t·v3(0), v3(t) = v3(0) is exact;
    # write it explicitly so stance coordinates never pick up rounding dust
    half = model.n_pos
    for i in model.stance_coords:
        for row in (i, half + i):
            A[row, :] = 0.0
            B[row, :] = 0.0
            C[row] = 0.0
            W[row, :] = 0.0
            A[row, row] = 1.0
        A[i, half + i] = t
    return TransitionSet(A=A, B=B, C=C, W=W, t=float(t))


def input_shift(tau: float, nu: int = 2) -> np.ndarray:
    """Re-anchor piecewise-linear input parameters by an elapsed time.

    Parameters anchored at a phase start, evaluated from local time tau
    onward, are equivalent to local parameters [u_c + tau·u_r; u_r].
    """
    s = np.eye(2 * nu)
    s[:nu, nu:] = tau * np.eye(nu)
    return s


def propagate(
    model: PhaseLTI,
    q0: np.ndarray,
    u: np.ndarray,
    d: float,
    t: float,
    push: np.ndarray | None = None,
    push_window: tuple[float, float] | None = None,
) -> np.ndarray:
    """Propagate a full state over [0, t] with optional push.

    `u` holds the phase-anchored parameters [u_c; u_r]. A push force that is
    constant over a sub-window [t1, t2] ⊆ [0, t] contributes
    A(t−t2)·W(t2−t1)·f by superposition.
    """
    q0 = np.asarray(q0, dtype=float)
    u = np.asarray(u, dtype=float)
    if q0.shape != (model.n_state,):
        raise ValueError(f"state must have shape ({model.n_state},)")
    if u.shape != (model.input_dim,):
        raise ValueError(f"input parameters must have shape ({model.input_dim},)")
    ts = transition(model, t)
    q = ts.A @ q0 + ts.B @ u + ts.C * d
    if push is not None:
        t1, t2 = push_window if push_window is not None else (0.0, t)
        if not (0.0 <= t1 <= t2 <= t + 1e-12):
            raise ValueError(f"push window [{t1},{t2}] not inside [0,{t}]")
        if t2 > t1:
            w = transition(model, t2 - t1).W @ np.asarray(push, dtype=float)
            q = q + transition(model, t - t2).A @ w
    return q
