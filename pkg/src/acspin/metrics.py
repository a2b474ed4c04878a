"""Distance and infidelity metrics plus analytic error-budget formulas.

The metrics compare propagators and prepared states up to global phase.
Both are evaluated in forms that avoid catastrophic cancellation, since
protected schedules routinely reach distances of 1e-7 and below where
1 - |trace| computed directly loses all significant digits.

The bound and threshold helpers evaluate the expressions obtained from a
Magnus expansion of the toggling-frame error: a linear distance bound for
an unprotected pulse, a quadratic bound for a corrected schedule, and the
flip-angle-error thresholds that delimit where a corrected schedule still
beats the unprotected one.
"""
from __future__ import annotations

import numpy as np

MAGNUS_RADIUS = 1.0868


def distance(u: np.ndarray, v: np.ndarray) -> float:
    """Phase-insensitive distance sqrt(1 - |Tr(U V^dag)| / d) in [0, 1].

    Computed through the identity 1 - |w| = ||U V^dag - (w/|w|) I||_F^2 / (2d)
    with w = Tr(U V^dag)/d, which stays accurate for nearly equal unitaries.
    """
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    d = u.shape[0]
    m = u @ v.conj().T
    w = np.trace(m) / d
    aw = abs(w)
    if aw < 0.5:
        return float(np.sqrt(1.0 - aw))
    diff = m - (w / aw) * np.eye(d)
    return float(np.linalg.norm(diff) / np.sqrt(2 * d))


def infidelity(u: np.ndarray, v: np.ndarray, psi0: np.ndarray) -> float:
    """State infidelity 1 - |<psi0| V^dag U |psi0>|^2 of the prepared states.

    Uses the exact identity 1 - |z|^2 = ||U psi - z V psi||^2 with
    z = <V psi | U psi>, which is cancellation-free near zero.
    """
    psi0 = np.asarray(psi0)
    nrm = np.linalg.norm(psi0)
    if abs(nrm - 1.0) > 1e-10:
        raise ValueError(f"psi0 is not normalized (norm {nrm:.6f})")
    pu = u @ psi0
    pv = v @ psi0
    z = np.vdot(pv, pu)
    return float(min(1.0, np.linalg.norm(pu - z * pv) ** 2))


def magnus_bounds(n: int, tau: float, norm_h: float) -> float:
    """Upper bound on the norm of the n-th toggling-frame Magnus term.

    General order: pi (tau ||H|| / xi)^n with convergence radius
    xi = 1.0868; the second order admits the tighter (tau ||H||)^2 / 2.
    """
    if n < 1:
        raise ValueError("Magnus order must be >= 1")
    x = tau * norm_h
    if n == 2:
        return x**2 / 2
    return float(np.pi * (x / MAGNUS_RADIUS) ** n)


def regime_thresholds(alpha: float, beta: float, gamma: float, norm_ratio: float) -> dict:
    """Analytic performance bounds and flip-angle-error thresholds.

    alpha is the corrected schedule's duration overhead tau_DCG / tau, beta
    the balanced-pair time fraction tau_BP / tau, gamma the accumulated
    control angle chi tau of the bare gate, and norm_ratio the noise scale
    h = ||H_err|| / chi.  Returns

      nodd_bound          linear distance bound gamma h / sqrt(2) for the
                          unprotected gate,
      dcg_bound           quadratic bound (alpha gamma h)^2 / (2 sqrt(2)),
      dd_error_threshold  largest flip-angle error on the decoupling pulses
                          for which the corrected bound still wins,
                          -h + lam sqrt(h) with lam = sqrt(2 / (gamma alpha^2)),
      type1_threshold     same for uniform amplitude errors that leave
                          identity gates exact, h - lam sqrt(h),
      type2_threshold     same for errors that corrupt identity gates,
                          h - ((beta-1)/(gamma alpha^2)) (-1 +
                          sqrt(1 + 2 gamma alpha^2 beta h / (beta-1)^2)),
                          which reduces to the type-1 form as beta -> 1.

    All thresholds are leading-order estimates of order lam sqrt(h) or h;
    they locate boundaries on a log scale rather than sharp transitions.
    """
    if alpha < 1 or beta < 1:
        raise ValueError("alpha and beta must be >= 1")
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    h = float(norm_ratio)
    lam = np.sqrt(2.0 / (gamma * alpha**2))
    if beta == 1:
        type2 = h - lam * np.sqrt(h)
    else:
        b = beta - 1.0
        type2 = h - (b / (gamma * alpha**2)) * (
            -1.0 + np.sqrt(1.0 + 2 * gamma * alpha**2 * beta * h / b**2)
        )
    return {
        "nodd_bound": gamma * h / np.sqrt(2.0),
        "dcg_bound": (alpha * gamma * h) ** 2 / (2 * np.sqrt(2.0)),
        "dd_error_threshold": -h + lam * np.sqrt(h),
        "type1_threshold": h - lam * np.sqrt(h),
        "type2_threshold": type2,
    }
