"""Brute-force propagators for i d/dt psi = (w(t) . S) psi.

These validate the invariant pipeline end to end and deliberately share
nothing with it beyond the 2x2 spin primitives.

Methods
-------
exponential_product
    psi_{n+1} = exp(-i H(t_n + h/2) h) psi_n with the closed-form 2x2
    exponential. Every step is exactly unitary, so total-phase comparisons
    against the invariant solution are meaningful down to ~1e-12; the
    global error is O(h^2) (midpoint commutator term).
rk4
    Classical RK4 directly on the state. Not unitary; the norm drift is
    reported, never renormalized away.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import GridMismatchError
from .io_utils import write_csv
from .spin_algebra import spin_rotation_propagators
from .trajectory import OmegaTrajectory

METHOD_EXPONENTIAL = "exponential_product"
METHOD_RK4 = "rk4"


@dataclass
class PropagatorRun:
    """States of one propagation on a uniform grid, shape (N, 2)."""

    method: str
    step: float
    t: np.ndarray
    states: np.ndarray
    unitarity_defect: float

    def thin(self, k: int) -> "PropagatorRun":
        """Keep every k-th sample (for comparison on a coarser grid)."""
        if k < 1 or (self.t.size - 1) % k != 0:
            raise ValueError(f"cannot thin {self.t.size - 1} steps by {k}")
        return PropagatorRun(self.method, self.step * k, self.t[::k],
                             self.states[::k], self.unitarity_defect)

    def to_csv(self, path, fidelity=None, overlap_phase=None, comments=None):
        """Emit t, re/im of both amplitudes and, when given, the overlap series."""
        cols = ["t", "re_plus", "im_plus", "re_minus", "im_minus"]
        data = [self.t, self.states[:, 0].real, self.states[:, 0].imag,
                self.states[:, 1].real, self.states[:, 1].imag]
        if fidelity is not None:
            cols += ["fidelity", "overlap_phase"]
            data += [fidelity, overlap_phase]
        write_csv(path, cols, zip(*[np.asarray(d).tolist() for d in data]), comments)


def propagate(traj: OmegaTrajectory, psi0: np.ndarray, t_end: float, step: float,
              method: str = METHOD_EXPONENTIAL, t0: float = 0.0) -> PropagatorRun:
    """Propagate psi0 from t0 to t_end with the given step."""
    if not (step > 0.0 and math.isfinite(step)):
        raise ValueError(f"step must be positive and finite, got {step!r}")
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (2,):
        raise ValueError(f"psi0 must be a 2-spinor, got shape {psi0.shape}")
    if traj.omega0 * step >= 0.1:
        warnings.warn(
            f"omega0*step = {traj.omega0 * step:.3g} >= 0.1; the propagator "
            "is under-resolved", stacklevel=2)
    if t_end == t0:
        return PropagatorRun(method, step, np.array([t0]),
                             psi0[None, :].copy(), 0.0)
    n = max(1, round(abs(t_end - t0) / step))
    t = np.linspace(t0, t_end, n + 1)
    h = (t_end - t0) / n
    if method == METHOD_EXPONENTIAL:
        states, defect = _propagate_exponential(traj, psi0, t, h)
    elif method == METHOD_RK4:
        states, defect = _propagate_rk4(traj, psi0, t, h)
    else:
        raise ValueError(f"unknown method {method!r}")
    return PropagatorRun(method, h, t, states, defect)


def _propagate_exponential(traj, psi0, t, h):
    mid = t[:-1] + 0.5 * h
    u = spin_rotation_propagators(traj.omega(mid), h)
    # constructed unitaries: the defect only probes rounding
    gram = np.einsum("nji,njk->nik", u.conj(), u)
    gram[:, 0, 0] -= 1.0
    gram[:, 1, 1] -= 1.0
    defect = float(np.sqrt((np.abs(gram) ** 2).sum(axis=(1, 2))).max())
    n = t.size - 1
    states = np.empty((n + 1, 2), dtype=complex)
    cp, cm = complex(psi0[0]), complex(psi0[1])
    states[0, 0], states[0, 1] = cp, cm
    u00, u01 = u[:, 0, 0].tolist(), u[:, 0, 1].tolist()
    u10, u11 = u[:, 1, 0].tolist(), u[:, 1, 1].tolist()
    for k in range(n):
        cp, cm = u00[k] * cp + u01[k] * cm, u10[k] * cp + u11[k] * cm
        states[k + 1, 0], states[k + 1, 1] = cp, cm
    return states, defect


def _propagate_rk4(traj, psi0, t, h):
    def rhs(tk, cp, cm):
        # -i (w . S) psi, expanded on components
        wx, wy, wz = traj.omega(tk)
        a = 0.5 * (wx - 1j * wy)
        return (-1j * (0.5 * wz * cp + a * cm),
                -1j * (a.conjugate() * cp - 0.5 * wz * cm))

    n = t.size - 1
    states = np.empty((n + 1, 2), dtype=complex)
    cp, cm = complex(psi0[0]), complex(psi0[1])
    states[0] = (cp, cm)
    drift = 0.0
    for k in range(n):
        tk = t[k]
        k1p, k1m = rhs(tk, cp, cm)
        k2p, k2m = rhs(tk + 0.5 * h, cp + 0.5 * h * k1p, cm + 0.5 * h * k1m)
        k3p, k3m = rhs(tk + 0.5 * h, cp + 0.5 * h * k2p, cm + 0.5 * h * k2m)
        k4p, k4m = rhs(tk + h, cp + h * k3p, cm + h * k3m)
        cp = cp + (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
        cm = cm + (h / 6.0) * (k1m + 2.0 * k2m + 2.0 * k3m + k4m)
        states[k + 1] = (cp, cm)
        drift = max(drift, abs(math.sqrt(abs(cp) ** 2 + abs(cm) ** 2) - 1.0))
    return states, drift


def fidelity(run: PropagatorRun, lr_t: np.ndarray, lr_states: np.ndarray
             ) -> tuple[np.ndarray, np.ndarray]:
    """|<psi_oracle|psi_lr>| and arg<psi_oracle|psi_lr> per sample.

    The complex overlap phase probes the total phase, not just the ray.
    """
    lr_t = np.asarray(lr_t, dtype=float)
    lr_states = np.asarray(lr_states, dtype=complex)
    if lr_t.shape != run.t.shape:
        raise GridMismatchError(
            f"time grids differ in length: {run.t.size} vs {lr_t.size}")
    scale = max(1.0, float(np.max(np.abs(run.t))))
    if not np.allclose(run.t, lr_t, rtol=0.0, atol=1e-9 * scale):
        raise GridMismatchError("time grids differ beyond 1e-9 relative")
    overlap = np.sum(run.states.conj() * lr_states, axis=1)
    return np.abs(overlap), np.angle(overlap)
