"""Hermitian invariant of w(t).S dynamics and its auxiliary angle ODEs.

For H(t) = w(t) . S the operator

    I(t) = (1/2) sin(lam) e^{-i gamma} S+ + (1/2) sin(lam) e^{i gamma} S-
           + cos(lam) S3

keeps its eigenvalues +-1/2 at all times (dI/dt - i [I, H] = 0) provided
the angles obey

    dlam/dt   = w0 sin(th) sin(ph - gamma)
    dgamma/dt = w0 [cos(th) - sin(th) cot(lam) cos(ph - gamma)]

where (th, ph) parametrize w(t). The rotation V = exp(beta S+ - beta* S-),
beta = -(lam/2) e^{-i gamma}, diagonalizes it: V^dag I V = S3.

cot(lam) makes lam = 0 and lam = pi singular; integration runs inside a
guard band and aborts (rather than regularizing) if the solution reaches
it, since a clipped cot corrupts dgamma/dt and with it the geometric phase.

The special cone solution: for th const and ph = Omega t, the angles
lam = const, gamma = Omega t solve the system exactly when
Omega = w0 sin(lam - th)/sin(lam); `solve_precession_lambda` inverts that
relation for the cone angle lam.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NoSolutionError, SingularityError
from .io_utils import write_csv
from .spin_algebra import hamiltonian, rotation_from_angles
from .trajectory import OmegaTrajectory

EPS_LAMBDA = 1e-6  # guard band (rad) around the cot(lambda) singularities

_MAX_SAMPLES = 4_000_000


@dataclass(frozen=True)
class InvariantParams:
    """Invariant angles and their rates at one instant."""

    lam: float
    gamma: float
    lam_dot: float
    gamma_dot: float


@dataclass
class AuxiliarySolution:
    """Dense output of one auxiliary-ODE integration on a uniform grid."""

    traj: OmegaTrajectory
    t: np.ndarray
    lam: np.ndarray
    gamma: np.ndarray
    lam_dot: np.ndarray
    gamma_dot: np.ndarray
    step: float
    adaptive: bool = False
    n_halvings: int = 0
    eps_lambda: float = EPS_LAMBDA
    max_error_rate: float = 0.0  # adaptive mode: max local error per unit time
    meta: dict = field(default_factory=dict)

    @property
    def n_samples(self) -> int:
        return int(self.t.size)

    def params_at(self, i: int) -> InvariantParams:
        return InvariantParams(
            float(self.lam[i]), float(self.gamma[i]),
            float(self.lam_dot[i]), float(self.gamma_dot[i]),
        )

    def to_csv(self, path, comments: list[str] | None = None) -> None:
        """Emit t, lambda, gamma, lambda_dot, gamma_dot, lvn_residual."""
        res = lvn_residual_samples(self)
        rows = zip(self.t.tolist(), self.lam.tolist(), self.gamma.tolist(),
                   self.lam_dot.tolist(), self.gamma_dot.tolist(), res.tolist())
        write_csv(path, ["t", "lambda", "gamma", "lambda_dot", "gamma_dot", "lvn_residual"],
                  rows, comments)


def auxiliary_rhs(traj: OmegaTrajectory, t: float, lam: float, gamma: float,
                  eps_lambda: float = EPS_LAMBDA) -> tuple[float, float]:
    """Right-hand side (dlam/dt, dgamma/dt); raises inside the guard band."""
    if not (eps_lambda < lam < math.pi - eps_lambda):
        raise SingularityError(
            f"lambda = {lam:.6g} reached the cot(lambda) guard "
            f"(eps = {eps_lambda:g}) at t = {t:.12g}", time=t)
    th, ph = traj.angles_scalar(t)
    w0 = traj.omega0
    s_th = math.sin(th)
    d = ph - gamma
    lam_dot = w0 * s_th * math.sin(d)
    gamma_dot = w0 * (math.cos(th) - s_th * math.cos(d) * math.cos(lam) / math.sin(lam))
    return lam_dot, gamma_dot


def _rk4_step(traj, t, lam, gam, h, eps):
    k1l, k1g = auxiliary_rhs(traj, t, lam, gam, eps)
    k2l, k2g = auxiliary_rhs(traj, t + 0.5 * h, lam + 0.5 * h * k1l, gam + 0.5 * h * k1g, eps)
    k3l, k3g = auxiliary_rhs(traj, t + 0.5 * h, lam + 0.5 * h * k2l, gam + 0.5 * h * k2g, eps)
    k4l, k4g = auxiliary_rhs(traj, t + h, lam + h * k3l, gam + h * k3g, eps)
    return (lam + (h / 6.0) * (k1l + 2.0 * k2l + 2.0 * k3l + k4l),
            gam + (h / 6.0) * (k1g + 2.0 * k2g + 2.0 * k3g + k4g))


def integrate_auxiliary(traj: OmegaTrajectory, lambda0: float, gamma0: float,
                        t_end: float, step: float, *, t0: float = 0.0,
                        adaptive: bool = False, error_rate_tol: float | None = None,
                        eps_lambda: float = EPS_LAMBDA,
                        max_halvings: int = 16) -> AuxiliarySolution:
    """Integrate the auxiliary angle ODEs with fixed-step RK4.

    Parameters
    ----------
    traj : OmegaTrajectory
        Drives (th(t), ph(t), w0).
    lambda0, gamma0 : float
        Initial angles; lambda0 must sit strictly inside the guard band.
    t_end, step : float
        Final time and requested step magnitude. Backward runs (t_end < t0)
        are supported; the step count is n = round(|t_end - t0| / step).
    adaptive : bool
        When set, each step is also taken as two half steps; if the
        worst-case local error rate max|y_h - y_{h/2}| / |h| ever exceeds
        `error_rate_tol` (default 1e-9 * w0, the accuracy at which the
        dense output keeps the invariant condition), the whole run is
        rerun at half the step, preserving the uniform output grid.

    Raises
    ------
    SingularityError
        If lambda reaches the cot guard; the message names the time.
    ValueError
        On non-positive step or out-of-band lambda0.
    """
    if not (step > 0.0 and math.isfinite(step)):
        raise ValueError(f"step must be positive and finite, got {step!r}")
    if not (eps_lambda < lambda0 < math.pi - eps_lambda):
        raise ValueError(
            f"lambda0 = {lambda0!r} outside the integrable band "
            f"({eps_lambda:g}, pi - {eps_lambda:g})")
    if t_end == t0:
        ld, gd = auxiliary_rhs(traj, t0, lambda0, gamma0, eps_lambda)
        return AuxiliarySolution(
            traj, np.array([t0]), np.array([lambda0]), np.array([gamma0]),
            np.array([ld]), np.array([gd]), step=step, adaptive=adaptive,
            eps_lambda=eps_lambda)

    tol = error_rate_tol if error_rate_tol is not None else 1e-9 * traj.omega0
    n = max(1, round(abs(t_end - t0) / step))
    halvings = 0
    while True:
        if n + 1 > _MAX_SAMPLES:
            raise ValueError(f"step halving exceeded {_MAX_SAMPLES} samples")
        t = np.linspace(t0, t_end, n + 1)
        h = (t_end - t0) / n
        lam = np.empty(n + 1)
        gam = np.empty(n + 1)
        lam[0], gam[0] = lambda0, gamma0
        worst_rate = 0.0
        ok = True
        for k in range(n):
            tk = t[k]
            if adaptive:
                full = _rk4_step(traj, tk, lam[k], gam[k], h, eps_lambda)
                hl, hg = _rk4_step(traj, tk, lam[k], gam[k], 0.5 * h, eps_lambda)
                lam[k + 1], gam[k + 1] = _rk4_step(traj, tk + 0.5 * h, hl, hg, 0.5 * h, eps_lambda)
                err = max(abs(full[0] - lam[k + 1]), abs(full[1] - gam[k + 1]))
                rate = err / abs(h)
                worst_rate = max(worst_rate, rate)
                if rate > tol and halvings < max_halvings:
                    ok = False
                    break
            else:
                lam[k + 1], gam[k + 1] = _rk4_step(traj, tk, lam[k], gam[k], h, eps_lambda)
            if not (eps_lambda < lam[k + 1] < math.pi - eps_lambda):
                raise SingularityError(
                    f"lambda = {lam[k + 1]:.6g} reached the cot(lambda) guard "
                    f"at t = {t[k + 1]:.12g}", time=float(t[k + 1]))
        if ok:
            break
        n *= 2
        halvings += 1
    meta = {}
    if adaptive and worst_rate > tol:
        meta["error_rate_tol_exceeded"] = True

    lam_dot = np.empty(n + 1)
    gam_dot = np.empty(n + 1)
    for k in range(n + 1):
        lam_dot[k], gam_dot[k] = auxiliary_rhs(traj, t[k], lam[k], gam[k], eps_lambda)
    return AuxiliarySolution(
        traj, t, lam, gam, lam_dot, gam_dot, step=h, adaptive=adaptive,
        n_halvings=halvings, eps_lambda=eps_lambda, max_error_rate=worst_rate,
        meta=meta)


def solve_precession_lambda(omega0: float, Omega: float, theta: float) -> float:
    """Cone angle lam with Omega = w0 sin(lam - th)/sin(lam), in (0, pi).

    Closed form: lam = atan2(sin th, cos th - Omega/w0). Degenerate
    th in {0, pi} admits a solution only for Omega = 0 (lam = th).
    """
    if not (math.isfinite(omega0) and omega0 >= 0.0):
        raise ValueError(f"omega0 must be finite and >= 0, got {omega0!r}")
    s_th = math.sin(theta)
    if omega0 == 0.0 or abs(s_th) < 1e-12:
        if Omega == 0.0:
            return float(theta)
        raise NoSolutionError(
            f"no cone angle exists for theta = {theta!r} with Omega = {Omega!r} "
            f"and omega0 = {omega0!r}")
    c_rel = math.cos(theta) - Omega / omega0
    lam = math.atan2(s_th, c_rel)
    if not (0.0 < lam < math.pi):
        raise NoSolutionError(f"cone angle left (0, pi): lam = {lam!r}")
    # internal consistency in the unamplified linear form
    # sin(lam) (cos th - Omega/w0) = cos(lam) sin th
    resid = abs(math.sin(lam) * c_rel - math.cos(lam) * s_th)
    if resid > 1e-12 * math.hypot(s_th, c_rel):
        raise ArithmeticError(f"cone-angle inversion residual {resid:g} too large")
    return lam


def invariant_matrix(lam: float, gamma: float) -> np.ndarray:
    """I(lam, gamma); Hermitian with eigenvalues exactly +-1/2."""
    c, s = math.cos(lam), math.sin(lam)
    e = complex(math.cos(gamma), -math.sin(gamma))  # e^{-i gamma}
    return np.array([[0.5 * c, 0.5 * s * e], [0.5 * s * e.conjugate(), -0.5 * c]])


def transform_V(lam: float, gamma: float) -> np.ndarray:
    """Diagonalizing rotation: V^dag I(lam, gamma) V = S3."""
    return rotation_from_angles(lam, gamma)


def d_invariant_dt(p: InvariantParams) -> np.ndarray:
    """Analytic dI/dt from the stored angle rates."""
    c, s = math.cos(p.lam), math.sin(p.lam)
    e = complex(math.cos(p.gamma), -math.sin(p.gamma))
    off = 0.5 * (c * p.lam_dot - 1j * s * p.gamma_dot) * e
    return np.array([[-0.5 * s * p.lam_dot, off], [off.conjugate(), 0.5 * s * p.lam_dot]])


def lvn_residual(p: InvariantParams, traj: OmegaTrajectory, t: float) -> float:
    """Frobenius norm of dI/dt - i [I, H(t)], in rad/s.

    Vanishes (to rounding) whenever p's rates equal the ODE right-hand
    side at (p.lam, p.gamma); a nonzero value flags rates inconsistent
    with the invariant condition.
    """
    im = invariant_matrix(p.lam, p.gamma)
    h = hamiltonian(traj.omega(t))
    r = d_invariant_dt(p) - 1j * (im @ h - h @ im)
    return float(np.linalg.norm(r))


def _residual_norms(lam, gamma, lam_dot, gamma_dot, omegas) -> np.ndarray:
    """Vectorized |dI/dt - i[I, H]|_F over stacked samples."""
    lam = np.asarray(lam)
    c, s = np.cos(lam), np.sin(lam)
    e = np.exp(-1j * np.asarray(gamma))
    n = lam.shape[0]
    im = np.empty((n, 2, 2), dtype=complex)
    im[:, 0, 0] = 0.5 * c
    im[:, 0, 1] = 0.5 * s * e
    im[:, 1, 0] = np.conj(im[:, 0, 1])
    im[:, 1, 1] = -0.5 * c
    di = np.empty_like(im)
    off = 0.5 * (c * lam_dot - 1j * s * gamma_dot) * e
    di[:, 0, 0] = -0.5 * s * lam_dot
    di[:, 0, 1] = off
    di[:, 1, 0] = np.conj(off)
    di[:, 1, 1] = 0.5 * s * lam_dot
    hm = np.empty((n, 2, 2), dtype=complex)
    hm[:, 0, 0] = 0.5 * omegas[:, 2]
    hm[:, 0, 1] = 0.5 * (omegas[:, 0] - 1j * omegas[:, 1])
    hm[:, 1, 0] = np.conj(hm[:, 0, 1])
    hm[:, 1, 1] = -0.5 * omegas[:, 2]
    r = di - 1j * (im @ hm - hm @ im)
    return np.sqrt(np.sum(np.abs(r) ** 2, axis=(1, 2)))


def lvn_residual_samples(sol: AuxiliarySolution) -> np.ndarray:
    """Residual at every sample using the stored (RHS-evaluated) rates."""
    return _residual_norms(sol.lam, sol.gamma, sol.lam_dot, sol.gamma_dot,
                           sol.traj.omega(sol.t))


def _fd_derivative_uniform(y: np.ndarray, h: float) -> np.ndarray:
    """Fourth-order finite-difference dy/dt on a uniform grid (>= 5 points)."""
    y = np.asarray(y, dtype=float)
    n = y.size
    if n < 5:
        return np.gradient(y, h)
    d = np.empty(n)
    d[2:-2] = (y[:-4] - 8.0 * y[1:-3] + 8.0 * y[3:-1] - y[4:]) / (12.0 * h)
    d[0] = (-25.0 * y[0] + 48.0 * y[1] - 36.0 * y[2] + 16.0 * y[3] - 3.0 * y[4]) / (12.0 * h)
    d[1] = (-3.0 * y[0] - 10.0 * y[1] + 18.0 * y[2] - 6.0 * y[3] + y[4]) / (12.0 * h)
    d[-2] = (3.0 * y[-1] + 10.0 * y[-2] - 18.0 * y[-3] + 6.0 * y[-4] - y[-5]) / (12.0 * h)
    d[-1] = (25.0 * y[-1] - 48.0 * y[-2] + 36.0 * y[-3] - 16.0 * y[-4] + 3.0 * y[-5]) / (12.0 * h)
    return d


def lvn_residual_series(sol: AuxiliarySolution) -> np.ndarray:
    """A-posteriori residual: rates re-estimated by finite differences.

    Unlike the stored-rate residual (which checks algebraic consistency
    and sits at rounding level for any integrator output), this one sees
    the integration error itself and scales as O(step^4) for RK4.
    """
    lam_fd = _fd_derivative_uniform(sol.lam, sol.step)
    gam_fd = _fd_derivative_uniform(sol.gamma, sol.step)
    return _residual_norms(sol.lam, sol.gamma, lam_fd, gam_fd, sol.traj.omega(sol.t))
