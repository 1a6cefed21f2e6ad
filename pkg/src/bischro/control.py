"""Null-control synthesis by the truncated moment method and its dual form.

Steering the first N modes to rest at time T fixes N oscillatory moments
of the control; the minimum-L^2-norm control satisfying them is an
exponential sum over the very frequencies being steered, with weights
solving the Gram system.  The dual route solves instead with the
trace-weighted coercive operator and produces the same function, which
gives a sharp cross-check.  Every synthesized control is verified by an
independent forward solve; the reported residual is never inferred from
the linear algebra.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .dynamics import ExponentialSum, evolve_controlled, modal_state, sobolev_norm
from .observability import gram

CONDITION_CAP = 1e12
TRACE_FLOOR = 1e-9


class ConditioningError(RuntimeError):
    """Gram system too ill-conditioned to produce a trustworthy control."""


@dataclass(frozen=True)
class ControlSolution:
    """Synthesized boundary control with its forward-verified residual."""

    horizon: float
    frequencies: np.ndarray
    moments: np.ndarray
    beta: np.ndarray = field(repr=False)
    control_norm: float
    residual_final: float
    gram_condition: float
    method: str

    @property
    def n_modes(self):
        return len(self.frequencies)

    def waveform(self):
        return ExponentialSum(self.frequencies, self.beta)


def moments_for_null(state0, sd, sigma_l):
    """Moments m_n = i a_n(0) / (sigma(ell) t_n) that a null control must meet.

    A mode whose trace magnitude is below TRACE_FLOOR cannot be steered
    through the boundary; it is excluded (zero moment) with a warning.
    """
    if sigma_l <= 0:
        raise ValueError("sigma at the controlled end must be positive")
    m = len(state0.coefficients)
    traces = sd.traces[:m]
    moments = np.zeros(m, dtype=complex)
    excluded = []
    for n in range(m):
        if abs(traces[n]) < TRACE_FLOOR:
            excluded.append(n + 1)
            continue
        moments[n] = 1j * state0.coefficients[n] / (sigma_l * traces[n])
    if excluded:
        warnings.warn(
            f"modes {excluded} have boundary traces below {TRACE_FLOOR:g} "
            "and were excluded from the moment problem",
            stacklevel=2,
        )
    return moments


def _verified(sd, horizon, moments, beta, cond, method, state0, sigma_l):
    lam = sd.eigenvalues[: len(beta)]
    f = ExponentialSum(lam, beta)
    norm = f.norm(horizon)
    final = evolve_controlled(state0, sd, sigma_l, f, horizon)
    n0 = sobolev_norm(state0, -0.5)
    nT = sobolev_norm(final, -0.5)
    residual = float(nT / n0) if n0 > 0 else 0.0
    return ControlSolution(
        horizon=float(horizon), frequencies=lam, moments=np.asarray(moments),
        beta=beta, control_norm=norm, residual_final=residual,
        gram_condition=cond, method=method,
    )


def synthesize_moment_control(moments, sd, horizon, condition_cap=CONDITION_CAP):
    """Minimum-norm exponential-sum control meeting the given moments.

    Solves G beta = m with the exponential Gram on (0, horizon); refuses
    when the Gram condition exceeds the cap instead of returning a
    garbage control.  The returned residual comes from a forward solve of
    the initial state the moments encode.
    """
    moments = np.asarray(moments, dtype=complex)
    N = len(moments)
    if N < 1 or N > sd.trusted_count:
        raise ValueError(f"moment count must lie in [1, trusted_count={sd.trusted_count}]")
    lam = sd.eigenvalues[:N]
    gs = gram(lam, horizon)
    if not np.isfinite(gs.condition_estimate) or gs.condition_estimate > condition_cap:
        raise ConditioningError(
            f"Gram condition {gs.condition_estimate:.3e} exceeds cap "
            f"{condition_cap:.3e}; increase the horizon or reduce the mode count"
        )
    beta = sla.solve(gs.matrix, moments, assume_a="her")
    sigma_l = sd.sigma_at_right_end()
    a0 = -1j * sigma_l * sd.traces[:N] * moments
    state0 = modal_state(sd, a0)
    return _verified(sd, horizon, moments, beta, gs.condition_estimate,
                     "moment", state0, sigma_l)


def hum_operator(sd, horizon, n_modes, sigma_l):
    """Trace-weighted coercive operator sigma(ell) t_m t_n G[m, n].

    Represents the boundary-output energy quadratic form in modal
    coordinates; Hermitian positive definite for distinct frequencies.
    """
    N = int(n_modes)
    if N < 1 or N > sd.trusted_count:
        raise ValueError(f"n_modes must lie in [1, trusted_count={sd.trusted_count}]")
    if sigma_l <= 0:
        raise ValueError("sigma at the controlled end must be positive")
    gs = gram(sd.eigenvalues[:N], horizon, traces=sd.traces[:N])
    return sigma_l * gs.weighted


def _conjugate_gradient(A, b, tol=1e-12, maxiter=None):
    n = len(b)
    maxiter = maxiter or 20 * n
    x = np.zeros(n, dtype=complex)
    r = b - A @ x
    p = r.copy()
    rs = np.vdot(r, r).real
    b_norm = np.linalg.norm(b)
    if b_norm == 0:
        return x, True
    for _ in range(maxiter):
        Ap = A @ p
        denom = np.vdot(p, Ap).real
        if denom <= 0:
            return x, False
        alpha = rs / denom
        x = x + alpha * p
        r = r - alpha * Ap
        rs_new = np.vdot(r, r).real
        if np.sqrt(rs_new) <= tol * b_norm:
            return x, True
        p = r + (rs_new / rs) * p
        rs = rs_new
    return x, False


def synthesize_hum_control(state0, sd, horizon, n_modes, sigma_l,
                           condition_cap=CONDITION_CAP, cg_tol=1e-12,
                           cg_maxiter=None):
    """Null control through the coercive-operator route.

    Solves Lambda c = i a(0) by conjugate gradients (direct solve as
    fallback when CG stalls) and emits f(t) = sum_k c_k t_k
    exp(i lambda_k t), the boundary output of the free solution with
    datum sum c_k phi_k.  Verified by forward solve of the original
    state, including any modes beyond the steered range.
    """
    N = int(n_modes)
    if N < 1 or N > sd.trusted_count:
        raise ValueError(f"n_modes must lie in [1, trusted_count={sd.trusted_count}]")
    gs = gram(sd.eigenvalues[:N], horizon)
    if not np.isfinite(gs.condition_estimate) or gs.condition_estimate > condition_cap:
        raise ConditioningError(
            f"Gram condition {gs.condition_estimate:.3e} exceeds cap "
            f"{condition_cap:.3e}; increase the horizon or reduce the mode count"
        )
    lam_op = hum_operator(sd, horizon, N, sigma_l)
    m = len(state0.coefficients)
    if m > N and np.any(state0.coefficients[N:] != 0):
        warnings.warn(
            f"initial state has nonzero coefficients beyond mode {N}; "
            "those modes are not steered",
            stacklevel=2,
        )
    rhs = np.zeros(N, dtype=complex)
    k = min(N, m)
    rhs[:k] = 1j * state0.coefficients[:k]
    c, converged = _conjugate_gradient(lam_op, rhs, tol=cg_tol, maxiter=cg_maxiter)
    method = "hum-cg"
    if not converged:
        c = sla.solve(lam_op, rhs, assume_a="her")
        method = "hum-cg-stalled-direct-fallback"
    beta = c * sd.traces[:N]
    # rhs = i a(0), so the implied moments are rhs / (sigma t_n)
    moments = rhs / (sigma_l * sd.traces[:N])
    return _verified(sd, horizon, moments, beta, gs.condition_estimate,
                     method, state0, sigma_l)
