"""Standard normal density, distribution function and quantile.

Scalar functions built on :func:`math.erfc`, which keeps relative accuracy in
both tails. The quantile starts from Acklam's rational approximation and is
polished with Newton steps on the CDF.
"""

from __future__ import annotations

import math

SQRT_2 = math.sqrt(2.0)
INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

# Acklam's coefficients for the lower-tail and central regions.
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def std_normal_pdf(x: float) -> float:
    return INV_SQRT_2PI * math.exp(-0.5 * x * x)


def std_normal_cdf(x: float) -> float:
    if x < 0.0:
        return 0.5 * math.erfc(-x / SQRT_2)
    return 1.0 - 0.5 * math.erfc(x / SQRT_2)


def _lower_cdf(x: float) -> float:
    # x <= 0 here; erfc keeps full relative precision in the tail
    return 0.5 * math.erfc(-x / SQRT_2)


def _initial_guess(p: float) -> float:
    """Acklam's approximation for p <= 0.5 (relative error about 1e-9)."""
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        num = ((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]
        den = (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
        return num / den
    q = p - 0.5
    r = q * q
    num = (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q
    den = ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
    return num / den


def std_normal_quantile(p: float) -> float:
    """Inverse of :func:`std_normal_cdf` on the open interval (0, 1).

    Raises
    ------
    ValueError
        If ``p`` is not strictly between 0 and 1.
    """
    p = float(p)
    if not 0.0 < p < 1.0:
        raise ValueError(f"quantile argument must lie in (0, 1), got {p!r}")
    if p == 0.5:
        return 0.0
    if p > 0.5:
        # 1 - p is exact for p >= 0.5
        return -std_normal_quantile(1.0 - p)
    x = _initial_guess(p)
    for _ in range(3):
        step = (_lower_cdf(x) - p) / std_normal_pdf(x)
        x -= step
        if abs(step) <= 1e-15 * max(1.0, abs(x)):
            break
    return min(x, 0.0)


def quantile_derivative(p: float) -> float:
    """d q(p) / dp = 1 / phi(q(p))."""
    return 1.0 / std_normal_pdf(std_normal_quantile(p))
