"""Regulator design and the time-projection controller.

Contents:

* `solve_dare` — discrete algebraic Riccati solver (structured doubling)
  with an optional state/input cross term absorbed by completion of
  squares.
* `design_dlqr` — DLQR for the step-to-step error system subject to the
  hard terminal constraint Ĉ·E[k+1] = 0. The constraint rows are
  completed to a full basis, the last P input components are dedicated to
  constraint resolution, and the remaining reduced problem is a standard
  cross-term DARE. The composite feedback is extended off the constraint
  manifold so that Ĉ·E[k+1] = 0 holds for arbitrary measured errors and
  the event-time feedback coincides exactly with the time-projection
  solution at zero elapsed time.
* `project_input` — mid-phase correction: the measured reduced error is
  matched against a hypothetical event error that, propagated under the
  event controller, reaches the same end of phase; the resulting input
  parameters are applied immediately.
* scalar helpers mirroring the whole design for the one-dimensional test
  system dx/dt = x + u + w.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DareConvergenceError, NumericalError, ProjectionSingularError
from .models import ErrorSystem

_SING_TOL = 1e-12


def solve_dare(
    A: np.ndarray,
    B: np.ndarray,
    Q: np.ndarray,
    R: np.ndarray,
    Ncross: np.ndarray | None = None,
    tol: float = 1e-13,
    max_iter: int = 200,
) -> tuple[np.ndarray, np.ndarray]:
    """Solve P = AᵀPA − (AᵀPB+N)(R+BᵀPB)⁻¹(BᵀPA+Nᵀ) + Q, return (P, K).

    The optimal feedback is u = −K·x with K = (R+BᵀPB)⁻¹(BᵀPA+Nᵀ).
    A nonzero cross term N is absorbed into an equivalent plain DARE via
    u = v − R⁻¹Nᵀx before running the structured doubling iteration.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    R = np.atleast_2d(np.asarray(R, dtype=float))
    n = A.shape[0]
    if B.shape == (1, n) and n > 1:
        B = B.T
    A0, Q0 = A, Q
    if Ncross is not None:
        Ncross = np.atleast_2d(np.asarray(Ncross, dtype=float))
        rin = np.linalg.solve(R, Ncross.T)
        A0 = A - B @ rin
        Q0 = Q - Ncross @ rin

    # structured doubling: Ak, Gk, Hk -> P = lim Hk, quadratic convergence
    Ak = A0.copy()
    Gk = B @ np.linalg.solve(R, B.T)
    Hk = Q0.copy()
    eye = np.eye(n)
    converged = False
    for _ in range(max_iter):
        w = eye + Gk @ Hk
        try:
            wi_a = np.linalg.solve(w, Ak)
            wi_g = np.linalg.solve(w, Gk)
        except np.linalg.LinAlgError as exc:
            raise NumericalError("doubling iteration hit a singular pencil") from exc
        Hn = Hk + wi_a.T @ Hk @ Ak
        Gk = Gk + Ak @ wi_g @ Ak.T
        Ak = Ak @ wi_a
        dh = np.max(np.abs(Hn - Hk)) / max(1.0, np.max(np.abs(Hn)))
        Hk = Hn
        if dh <= tol:
            converged = True
            break
    P = 0.5 * (Hk + Hk.T)
    resid = _dare_residual(A, B, Q, R, Ncross, P)
    if not converged or resid > 1e-10:
        raise DareConvergenceError(resid, max_iter)
    rhs = B.T @ P @ A + (Ncross.T if Ncross is not None else 0.0)
    K = np.linalg.solve(R + B.T @ P @ B, rhs)
    return P, K


def _dare_residual(A, B, Q, R, Ncross, P) -> float:
    n_term = Ncross if Ncross is not None else np.zeros((A.shape[0], B.shape[1]))
    m = A.T @ P @ B + n_term
    f = A.T @ P @ A - m @ np.linalg.solve(R + B.T @ P @ B, m.T) + Q
    denom = max(1.0, float(np.max(np.abs(P))))
    return float(np.max(np.abs(P - f))) / denom


@dataclass(frozen=True)
class DlqrDesign:
    """Constrained event controller for one error system.

    K_full maps a measured event error to the corrective input parameters,
    ΔU[k] = −K_full·E[k]; the blocks record the constraint machinery so the
    mid-phase projection can reuse the same reduced regulator.
    """

    err: ErrorSystem = field(repr=False)
    Q: np.ndarray = field(repr=False)
    R: np.ndarray = field(repr=False)
    Ctilde: np.ndarray = field(repr=False)      # (N−P)×N basis completion
    Sbasis: np.ndarray = field(repr=False)      # [C̃; Ĉ], square full rank
    Gtilde: np.ndarray = field(repr=False)      # P×N constraint-resolution map
    Htilde: np.ndarray = field(repr=False)      # P×(M−P)
    Kbar: np.ndarray = field(repr=False)        # (M−P)×(N−P) reduced gain
    Abar: np.ndarray = field(repr=False)
    Bbar: np.ndarray = field(repr=False)
    K_full: np.ndarray = field(repr=False)      # M×N composite feedback
    perm: np.ndarray = field(repr=False)        # input permutation used
    constrained: bool = True

    def closed_loop(self) -> np.ndarray:
        return self.err.Ahat - self.err.Bhat @ self.K_full


def _pick_permutation(Bt: np.ndarray, n_v: int, p: int) -> np.ndarray:
    """Input ordering whose trailing P×P block is best conditioned.

    The trailing input components resolve the constraint; keep the natural
    order when it works, otherwise swap in the combination maximizing the
    smallest singular value of B̃^{ww}.
    """
    m = Bt.shape[1]
    natural = np.arange(m)
    natural_sig = np.linalg.svd(Bt[n_v:, m - p:], compute_uv=False)[-1]
    best, best_sig = natural, natural_sig
    from itertools import combinations

    for tail in combinations(range(m), p):
        head = [i for i in range(m) if i not in tail]
        perm = np.array(head + list(tail))
        sig = np.linalg.svd(Bt[n_v:, perm[m - p:]], compute_uv=False)[-1]
        if sig > best_sig:
            best, best_sig = perm, sig
    if natural_sig > _SING_TOL * max(best_sig, 1.0):
        return natural
    return best


def design_dlqr(err: ErrorSystem, Q: np.ndarray, R: np.ndarray,
                constrained: bool = True) -> DlqrDesign:
    """Design the event controller for (Â, B̂) with the Ĉ hard constraint.

    With `constrained=False` the pipeline degenerates to a plain DLQR on
    (Â, B̂) — no basis completion, no input split.
    """
    Ahat, Bhat, Chat = err.Ahat, err.Bhat, err.Chat
    n = Ahat.shape[0]
    m = Bhat.shape[1]
    Q = np.asarray(Q, dtype=float)
    R = np.asarray(R, dtype=float)

    if not constrained:
        _, K = solve_dare(Ahat, Bhat, Q, R)
        return DlqrDesign(
            err=err, Q=Q, R=R, Ctilde=np.eye(n), Sbasis=np.eye(n),
            Gtilde=np.zeros((0, n)), Htilde=np.zeros((0, m)),
            Kbar=K, Abar=Ahat, Bbar=Bhat, K_full=K, perm=np.arange(m),
            constrained=False,
        )

    p = Chat.shape[0]
    n_v = n - p
    # orthonormal complement of the constraint rows
    _, _, vt = np.linalg.svd(Chat)
    Ctilde = vt[p:]
    Sb = np.vstack([Ctilde, Chat])
    Sbi = np.linalg.inv(Sb)

    Qt = Sbi.T @ Q @ Sbi
    At = Sb @ Ahat @ Sbi
    Bt = Sb @ Bhat

    perm = _pick_permutation(Bt, n_v, p)
    Bt = Bt[:, perm]
    Rt = R[np.ix_(perm, perm)]

    Avv = At[:n_v, :n_v]
    Bvv, Bvw = Bt[:n_v, :m - p], Bt[:n_v, m - p:]
    Bwv, Bww = Bt[n_v:, :m - p], Bt[n_v:, m - p:]
    if np.linalg.svd(Bww, compute_uv=False)[-1] <= _SING_TOL:
        raise NumericalError(
            "constraint not controllable by any input component selection"
        )
    # resolve the constrained input components (on-manifold and full forms)
    Gt = -np.linalg.solve(Bww, At[n_v:, :n_v])
    Gfull = -np.linalg.solve(Bww, At[n_v:, :])
    Ht = -np.linalg.solve(Bww, Bwv)
    Abar = Avv + Bvw @ Gt
    Bbar = Bvv + Bvw @ Ht
    # reduced cost with the resolved components substituted back
    Qvv = Qt[:n_v, :n_v]
    Rvv, Rvw = Rt[:m - p, :m - p], Rt[:m - p, m - p:]
    Rwv, Rww = Rt[m - p:, :m - p], Rt[m - p:, m - p:]
    Qbar = Qvv + Gt.T @ Rww @ Gt
    Rbar = Rvv + Ht.T @ Rww @ Ht + Rvw @ Ht + Ht.T @ Rwv
    Nbar = Gt.T @ (Rwv + Rww @ Ht)
    _, Kbar = solve_dare(Abar, Bbar, Qbar, Rbar, Ncross=Nbar)

    # composite feedback, consistent with projection at zero elapsed time:
    # a measured error off the constraint manifold is matched to the
    # hypothetical on-manifold event error reaching the same end of phase
    AbarT = At[:n_v, :] + Bvw @ Gfull
    try:
        Wbar = np.linalg.solve(Abar, AbarT)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("constrained one-step map is singular") from exc
    K_perm = np.vstack([Kbar @ Wbar, Ht @ Kbar @ Wbar - Gfull]) @ Sb
    K_full = np.zeros_like(K_perm)
    K_full[perm, :] = K_perm
    return DlqrDesign(
        err=err, Q=Q, R=R, Ctilde=Ctilde, Sbasis=Sb, Gtilde=Gfull, Htilde=Ht,
        Kbar=Kbar, Abar=Abar, Bbar=Bbar, K_full=K_full, perm=perm,
        constrained=True,
    )


def project_input_unconstrained(A_tau: np.ndarray, B_tau: np.ndarray,
                                K: np.ndarray, e_t: np.ndarray) -> np.ndarray:
    """Generic time projection for an unconstrained system.

    Solves [[A(τ), B(τ)], [K, I]]·[Ê; δÛ] = [e(t); 0] where τ is the time
    elapsed since the last event, and returns δÛ. Works for scalars and
    matrices alike.
    """
    A_tau = np.atleast_2d(np.asarray(A_tau, dtype=float))
    B_tau = np.atleast_2d(np.asarray(B_tau, dtype=float))
    K = np.atleast_2d(np.asarray(K, dtype=float))
    e_t = np.atleast_1d(np.asarray(e_t, dtype=float))
    n = A_tau.shape[0]
    m = B_tau.shape[1]
    blk = np.zeros((n + m, n + m))
    blk[:n, :n] = A_tau
    blk[:n, n:] = B_tau
    blk[n:, :n] = K
    blk[n:, n:] = np.eye(m)
    rhs = np.concatenate([e_t, np.zeros(m)])
    try:
        sol = np.linalg.solve(blk, rhs)
    except np.linalg.LinAlgError as exc:
        raise ProjectionSingularError("projection block system is singular") from exc
    return sol[n:]


def project_input(design: DlqrDesign, tau_elapsed: float, e_t: np.ndarray,
                  maps: tuple[np.ndarray, np.ndarray] | None = None) -> np.ndarray:
    """Constrained time projection for the walking error system.

    Given the reduced error e(t) measured at elapsed phase time τ, finds a
    hypothetical event error and input correction such that (i) the event
    controller would have produced that correction, (ii) applying it from
    the current state reaches the same end-of-phase error, and (iii) the
    terminal swing-foot velocity constraint is met. The returned parameter
    vector is anchored at the phase start and is applied unchanged from
    time t on. Precomputed remaining-phase maps may be passed to avoid
    recomputing transitions inside sweep loops.
    """
    err = design.err
    if not 0.0 <= tau_elapsed <= err.T + 1e-12:
        raise ValueError("elapsed time outside the phase")
    a_rem, b_rem = maps if maps is not None else err.maps(tau_elapsed)
    if not design.constrained:
        return project_input_unconstrained(a_rem, b_rem, design.K_full, e_t)
    if tau_elapsed == 0.0:
        # exact algebraic identity at events; skip the block solve so the
        # two controllers produce bitwise-equal event corrections
        return -design.K_full @ np.asarray(e_t, dtype=float)
    m = err.Bhat.shape[1]
    p = err.Chat.shape[0]
    n = err.Ahat.shape[0]
    n_v = n - p
    At_t = design.Sbasis @ a_rem @ np.linalg.inv(design.Sbasis)
    Bt_t = (design.Sbasis @ b_rem)[:, design.perm]
    z = design.Sbasis @ np.asarray(e_t, dtype=float)

    # unknowns [Ŷ (n_v); δV̂ (m−p); δŴ (p); Y_next (n_v)]:
    #   remaining-phase evolution lands on the constraint manifold,
    #   event-based constrained evolution from Ŷ reaches the same point,
    #   and the event gain generated δV̂. Written without the constraint-
    #   resolution inverses so conditioning stays benign near the phase end.
    dim = n_v + m + n_v
    blk = np.zeros((dim, dim))
    rhs = np.zeros(dim)
    c0 = n_v            # δU columns
    c1 = n_v + m        # Y_next columns
    blk[:n, c0:c0 + m] = Bt_t
    blk[:n_v, c1:] -= np.eye(n_v)
    rhs[:n] = -At_t @ z
    r1 = n
    blk[r1:r1 + n_v, :n_v] = design.Abar
    blk[r1:r1 + n_v, c0:c0 + m - p] = design.Bbar
    blk[r1:r1 + n_v, c1:] = -np.eye(n_v)
    r2 = r1 + n_v
    blk[r2:, :n_v] = design.Kbar
    blk[r2:, c0:c0 + m - p] = np.eye(m - p)
    # column equilibration: near the phase end the input columns shrink
    # like the square of the remaining time and would drown in rounding
    col = np.max(np.abs(blk), axis=0)
    if np.any(col <= _SING_TOL):
        raise ProjectionSingularError(
            f"projection system singular at elapsed time {tau_elapsed:.4f}"
        )
    try:
        scaled = blk / col
        y = np.linalg.solve(scaled, rhs)
        y += np.linalg.solve(scaled, rhs - scaled @ y)   # one refinement pass
        sol = y / col
    except np.linalg.LinAlgError as exc:
        raise ProjectionSingularError(
            f"projection system singular at elapsed time {tau_elapsed:.4f}"
        ) from exc
    if not np.all(np.isfinite(sol)):
        raise ProjectionSingularError(
            f"projection system singular at elapsed time {tau_elapsed:.4f}"
        )
    du_perm = sol[c0:c0 + m]
    du = np.zeros(m)
    du[design.perm] = du_perm
    return du


# ---------------------------------------------------------------------------
# scalar system dx/dt = x + u + w, control period T


@dataclass(frozen=True)
class ScalarDesign:
    """Discrete design for the scalar benchmark system.

    gamma_d is the event-feedback gain Γ (U[k] = −Γ·X[k]), gamma_c its
    continuous-time equivalent, and the bounds are (lower, upper for plain
    event feedback, tightened upper for time projection).
    """

    T: float
    gamma_d: float
    gamma_c: float
    lo: float
    hi_dlqr: float
    hi_proj: float

    def eps(self, t: float) -> float:
        return scalar_projection_feedback(self.gamma_d, t)


def scalar_gain_bounds(T: float) -> tuple[float, float, float]:
    """Stability bounds on the scalar event gain.

    Plain event feedback is stable for 1 < Γ < (e^T+1)/(e^T−1); requiring a
    finite projection feedback throughout the phase tightens the upper
    bound to e^T/(e^T−1).
    """
    if T <= 0:
        raise ValueError("period must be positive")
    et = np.exp(T)
    return 1.0, (et + 1.0) / (et - 1.0), et / (et - 1.0)


def gain_to_continuous(gamma: float, T: float) -> float:
    """Convert a discrete gain to the equivalent continuous gain.

    Matches closed-loop eigenvalues: e^T − Γ(e^T−1) = e^{(1−γ)T}.
    """
    et = np.exp(T)
    lam = et - gamma * (et - 1.0)
    if lam <= 0:
        raise ValueError(f"discrete eigenvalue {lam:.3e} outside the log domain")
    return float(-np.log(lam) / T + 1.0)


def scalar_projection_feedback(gamma: float, t: float) -> float:
    """Instantaneous closed-loop rate ε(t) under scalar time projection.

        dx/dt = ε(t)·x,   ε(t) = 1 + 1/(−e^t/Γ + e^t − 1)

    ε(0) = 1 − Γ. Raises NumericalError within 1e-9 of the denominator
    root t0 = ln(1/(1−1/Γ)).
    """
    if gamma > 1.0:
        t0 = np.log(1.0 / (1.0 - 1.0 / gamma))
        if abs(t - t0) < 1e-9:
            raise ProjectionSingularError(
                f"projection feedback singular at t = {t0:.6f}"
            )
    denom = -np.exp(t) / gamma + np.exp(t) - 1.0
    return float(1.0 + 1.0 / denom)


def scalar_design(T: float, q: float = 1.0, r: float = 1.0) -> ScalarDesign:
    """DLQR design for the scalar system over one period."""
    et = np.exp(T)
    _, K = solve_dare(np.array([[et]]), np.array([[et - 1.0]]),
                      np.array([[q]]), np.array([[r]]))
    gamma_d = float(K[0, 0])
    lo, hi_dlqr, hi_proj = scalar_gain_bounds(T)
    return ScalarDesign(
        T=T,
        gamma_d=gamma_d,
        gamma_c=gain_to_continuous(gamma_d, T),
        lo=lo,
        hi_dlqr=hi_dlqr,
        hi_proj=hi_proj,
    )
