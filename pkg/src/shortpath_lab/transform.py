"""Scalar transforms and closed-form parameter calculators.

Everything here is a pure function of a handful of reals: the piecewise-linear
flooding transform g_eta and its mirror f, the exponent profile F, the
log-Sobolev entropy helpers, the tail-bound coefficients gamma for CSP and
k-spin ensembles, the admissible-coupling bound b_max, and the reparameterized
(theta, phi) coordinates used when the optimal value is unknown.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
from scipy.special import entr, xlogy

LN2 = math.log(2.0)

# diagnostic counter: inputs below -1 are clamped (floating H(z)/|E*| can
# undershoot -1 by rounding at the optimum)
clamp_events = {"count": 0}


def g_eta(eta: float, x):
    """Flooding transform g_eta(x) = min(0, (x + 1 - eta)/eta), mapped onto [-1, 0].

    Zeroes every cost above -(1 - eta) and linearly rescales the rest; inputs
    below -1 clamp to -1 with a warning (they only arise from rounding).
    """
    if not 0 < eta < 1:
        raise ValueError(f"eta must be in (0, 1), got {eta}")
    arr = np.asarray(x, dtype=np.float64)
    below = arr < -1.0
    if np.any(below):
        clamp_events["count"] += int(np.sum(below))
        warnings.warn(
            f"g_eta input below -1 clamped ({int(np.sum(below))} values); "
            "check E* if this is not last-ulp rounding",
            RuntimeWarning,
            stacklevel=2,
        )
        arr = np.maximum(arr, -1.0)
    out = np.minimum(0.0, (arr + 1.0 - eta) / eta)
    return out if out.ndim else float(out)


def f_eta(eta: float, x):
    """f(x) = -g_eta(-x): convex, non-decreasing, zero below 1 - eta, f(1) = 1.

    Implemented literally as the mirror of g_eta so the identity is bit-exact;
    inputs above 1 clamp silently (the mirror of g's clamp at -1).
    """
    arr = np.minimum(np.asarray(x, dtype=np.float64), 1.0)
    out = -g_eta(eta, -arr if arr.ndim else -float(arr))
    return out if np.ndim(out) else float(out)


def F(x):
    """F(x) = 1 - x + x ln x on [0, 1], with F(0) = 1 by continuity."""
    arr = np.asarray(x, dtype=np.float64)
    if np.any(arr < 0) or np.any(arr > 1):
        raise ValueError("F is defined on [0, 1]")
    out = 1.0 - arr + xlogy(arr, arr)
    return out if out.ndim else float(out)


def binary_entropy(q):
    """H2(q) in bits, with 0 log 0 = 0."""
    arr = np.asarray(q, dtype=np.float64)
    if np.any(arr < 0) or np.any(arr > 1):
        raise ValueError("binary_entropy is defined on [0, 1]")
    out = (entr(arr) + entr(1.0 - arr)) / LN2
    return out if out.ndim else float(out)


def tau_inverse(y):
    """Entropy-per-site lower bound tau^{-1}(y) = H2(1/2 - sqrt(1 - y^2)/2)."""
    arr = np.asarray(y, dtype=np.float64)
    if np.any(arr < 0) or np.any(arr > 1):
        raise ValueError("tau_inverse is defined on [0, 1]")
    q = 0.5 - 0.5 * np.sqrt(np.maximum(0.0, 1.0 - arr * arr))
    out = binary_entropy(q)
    return out if np.ndim(out) else float(out)


def _mp_eval(digits: int, fn):
    import mpmath

    with mpmath.workdps(digits):
        return fn(mpmath)


def gamma_csp(k: int, ratio: float, eta: float, digits: int | None = None):
    """Tail-bound coefficient for k-CSP: (|E*|/m)^2 (1-eta)^2 / (2 ln2 2^{2k} k^2)."""
    if k < 1 or not 0 <= eta < 1 or not 0 < ratio <= 1:
        raise ValueError("need k >= 1, 0 <= eta < 1, 0 < ratio <= 1")
    if digits is not None:
        return _mp_eval(digits, lambda mp: (mp.mpf(ratio) ** 2 * (1 - mp.mpf(eta)) ** 2)
                        / (2 * mp.log(2) * mp.mpf(2) ** (2 * k) * k**2))
    return ratio**2 * (1.0 - eta) ** 2 / (2.0 * LN2 * 4.0**k * k**2)


def gamma_kspin(k: int, eta: float, digits: int | None = None):
    """Tail-bound coefficient for the k-spin ensemble: (1-eta)^2 / (32 pi ln2 k^2)."""
    if k < 1 or not 0 <= eta < 1:
        raise ValueError("need k >= 1 and 0 <= eta < 1")
    if digits is not None:
        return _mp_eval(digits, lambda mp: (1 - mp.mpf(eta)) ** 2 / (32 * mp.pi * mp.log(2) * k**2))
    return (1.0 - eta) ** 2 / (32.0 * math.pi * LN2 * k**2)


def b_max(gamma: float, digits: int | None = None):
    """Largest coupling with guaranteed spectral conditions: ln2 * gamma / (2 + ln2)."""
    if not 0 <= gamma <= 1:
        raise ValueError("gamma must be in [0, 1]")
    if digits is not None:
        return _mp_eval(digits, lambda mp: mp.log(2) * mp.mpf(gamma) / (2 + mp.log(2)))
    return LN2 * gamma / (2.0 + LN2)


def reparameterize(w: float, eta_prime: float, b_prime: float, q_upper: float) -> tuple[float, float]:
    """Map a guess (W, eta', b') for the diagonal term to (theta, phi) coordinates.

    theta = W (1 - eta') / Q and phi = b' Q / (eta' W); any (W, eta', b') with
    the same (theta, phi) defines the same operator, which removes the
    redundant degree of freedom when E* is unknown.
    """
    if not 0 < eta_prime < 1:
        raise ValueError("eta' must be in (0, 1)")
    if not 0 <= b_prime < 1:
        raise ValueError("b' must be in [0, 1)")
    if not 0 < w <= q_upper:
        raise ValueError("need 0 < W <= Q")
    theta = w * (1.0 - eta_prime) / q_upper
    phi = b_prime * q_upper / (eta_prime * w)
    return theta, phi


def reparameterize_inverse(theta: float, phi: float, e_star_abs: float, q_upper: float) -> tuple[float, float]:
    """(eta, b) realized by a gridpoint (theta, phi) once |E*| is revealed."""
    if e_star_abs <= 0:
        raise ValueError("|E*| must be positive")
    eta = 1.0 - q_upper * theta / e_star_abs
    b = (e_star_abs / q_upper) * phi - phi * theta
    return eta, b
