"""Evaluation suite: point metrics, t-based CIs, paired model comparison.

Confidence intervals follow the predictive-performance convention of
putting a t interval on the per-subject error samples (squared errors
for MSE, absolute errors for MAE). A paired comparison applies the same
interval to per-subject error differences; an interval excluding zero
flags a significant difference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    LengthMismatch,
    NonPositiveTruth,
    SampleTooSmall,
    ZeroVarianceError,
)


def _paired(y_true, y_pred, min_n: int = 1) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(y_true, dtype=float)
    b = np.asarray(y_pred, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise LengthMismatch(f"shapes {a.shape} and {b.shape} do not match")
    if a.size < min_n:
        raise LengthMismatch(f"need at least {min_n} pairs, got {a.size}")
    return a, b


def mse(y_true, y_pred) -> float:
    a, b = _paired(y_true, y_pred)
    return float(np.mean((a - b) ** 2))


def mae(y_true, y_pred) -> float:
    a, b = _paired(y_true, y_pred)
    return float(np.mean(np.abs(a - b)))


def r2(y_true, y_pred) -> float:
    a, b = _paired(y_true, y_pred, min_n=2)
    ss_tot = float(np.sum((a - a.mean()) ** 2))
    if ss_tot == 0.0:
        raise ZeroVarianceError("R^2 undefined: all true values equal")
    ss_res = float(np.sum((a - b) ** 2))
    return 1.0 - ss_res / ss_tot


def ied_pct(y_true, y_pred) -> float:
    """Share of predictions within +-20 percent of truth, boundaries included."""
    a, b = _paired(y_true, y_pred)
    if np.any(a <= 0):
        raise NonPositiveTruth("true doses must be positive")
    ideal = (b >= 0.8 * a) & (b <= 1.2 * a)
    return 100.0 * float(ideal.mean())


# Acklam's rational approximation to the standard normal quantile
# (relative error < 1.2e-9); used only to seed the t-quantile solver.
_ACKLAM_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
             1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_ACKLAM_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
             6.680131188771972e01, -1.328068155288572e01)
_ACKLAM_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
             -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_ACKLAM_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
             3.754408661907416e00)


def _normal_ppf(p: float) -> float:
    a, b, c, d = _ACKLAM_A, _ACKLAM_B, _ACKLAM_C, _ACKLAM_D
    p_low = 0.02425
    if p < p_low:
        q = math.sqrt(-2.0 * math.log(p))
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / (
            (((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0
        )
    if p > 1.0 - p_low:
        q = math.sqrt(-2.0 * math.log(1.0 - p))
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / (
            (((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0
        )
    q = p - 0.5
    r = q * q
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q / (
        ((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0
    )


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the regularized incomplete beta (Lentz)."""
    max_iter = 300
    eps = 3e-16
    fpmin = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < fpmin:
        d = fpmin
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            break
    return h


def _betai(a: float, b: float, x: float) -> float:
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    log_bt = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    bt = math.exp(log_bt)
    if x < (a + 1.0) / (a + b + 2.0):
        return bt * _betacf(a, b, x) / a
    return 1.0 - bt * _betacf(b, a, 1.0 - x) / b


def _t_cdf(t: float, df: float) -> float:
    x = df / (df + t * t)
    tail = 0.5 * _betai(df / 2.0, 0.5, x)
    return 1.0 - tail if t >= 0 else tail


def _t_pdf(t: float, df: float) -> float:
    log_norm = math.lgamma((df + 1.0) / 2.0) - math.lgamma(df / 2.0) - 0.5 * math.log(df * math.pi)
    return math.exp(log_norm - (df + 1.0) / 2.0 * math.log1p(t * t / df))


def student_t_ppf(p: float, df: int) -> float:
    """Quantile of Student's t with `df` degrees of freedom.

    Closed forms for df = 1 and 2; otherwise Newton iteration on the
    incomplete-beta CDF, seeded by the Acklam normal quantile with a
    Cornish-Fisher correction. Accurate to well below 1e-6 (the Newton
    polish converges to ~1e-15 in the CDF).
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must be in (0, 1), got {p}")
    if df < 1:
        raise ValueError(f"df must be >= 1, got {df}")
    if p == 0.5:
        return 0.0
    if p < 0.5:
        return -student_t_ppf(1.0 - p, df)
    if df == 1:
        return math.tan(math.pi * (p - 0.5))
    if df == 2:
        s = 2.0 * p - 1.0
        return s * math.sqrt(2.0 / (1.0 - s * s))

    z = _normal_ppf(p)
    t = z + (z**3 + z) / (4.0 * df) + (5.0 * z**5 + 16.0 * z**3 + 3.0 * z) / (96.0 * df**2)
    lo, hi = 0.0, max(2.0 * t, 2.0)
    while _t_cdf(hi, df) < p:
        lo, hi = hi, hi * 2.0
    for _ in range(100):
        f = _t_cdf(t, df) - p
        if abs(f) < 1e-15:
            break
        if f > 0:
            hi = t
        else:
            lo = t
        step = f / max(_t_pdf(t, df), 1e-300)
        t_new = t - step
        if not lo < t_new < hi:
            t_new = 0.5 * (lo + hi)
        if t_new == t:
            break
        t = t_new
    return t


def ci_mean(sample, level: float = 0.95) -> tuple[float, float]:
    """t interval for the mean: mean +- t_{(1+level)/2, n-1} * s / sqrt(n)."""
    x = np.asarray(sample, dtype=float)
    if x.size < 2:
        raise SampleTooSmall(f"need at least 2 observations, got {x.size}")
    m = float(x.mean())
    s = float(x.std(ddof=1))
    if s == 0.0:
        return (m, m)
    half = student_t_ppf((1.0 + level) / 2.0, x.size - 1) * s / math.sqrt(x.size)
    return (m - half, m + half)


@dataclass(frozen=True)
class EvalReport:
    n: int
    mse: float
    mse_ci: tuple[float, float]
    rmse: float
    mae: float
    mae_ci: tuple[float, float]
    r2: float
    ied_pct: float

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "mse": self.mse,
            "mse_ci": list(self.mse_ci),
            "rmse": self.rmse,
            "mae": self.mae,
            "mae_ci": list(self.mae_ci),
            "r2": self.r2,
            "ied_pct": self.ied_pct,
        }


def evaluate(y_true, y_pred) -> EvalReport:
    """Full report; CIs come from the per-subject error samples."""
    a, b = _paired(y_true, y_pred, min_n=2)
    sq = (a - b) ** 2
    ab = np.abs(a - b)
    mse_val = float(sq.mean())
    return EvalReport(
        n=a.size,
        mse=mse_val,
        mse_ci=ci_mean(sq),
        rmse=math.sqrt(mse_val),
        mae=float(ab.mean()),
        mae_ci=ci_mean(ab),
        r2=r2(a, b),
        ied_pct=ied_pct(a, b),
    )


@dataclass(frozen=True)
class PairedComparison:
    n: int
    delta_mse: float
    delta_mse_ci: tuple[float, float]
    delta_mae: float
    delta_mae_ci: tuple[float, float]
    significant_mse: bool
    significant_mae: bool

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "delta_mse": self.delta_mse,
            "delta_mse_ci": list(self.delta_mse_ci),
            "delta_mae": self.delta_mae,
            "delta_mae_ci": list(self.delta_mae_ci),
            "significant_mse": self.significant_mse,
            "significant_mae": self.significant_mae,
        }


def _excludes_zero(ci: tuple[float, float]) -> bool:
    return ci[0] > 0.0 or ci[1] < 0.0


def paired_compare(y_true, pred_base, pred_cand) -> PairedComparison:
    """Per-subject error differences, baseline minus candidate.

    Positive deltas mean the candidate improves on the baseline; the
    point estimates equal the difference of the two models' own MSE/MAE.
    """
    a, base = _paired(y_true, pred_base, min_n=2)
    a2, cand = _paired(y_true, pred_cand, min_n=2)
    if a.size != a2.size:
        raise LengthMismatch("prediction vectors differ in length")
    d_sq = (a - base) ** 2 - (a - cand) ** 2
    d_abs = np.abs(a - base) - np.abs(a - cand)
    mse_ci = ci_mean(d_sq)
    mae_ci = ci_mean(d_abs)
    return PairedComparison(
        n=a.size,
        delta_mse=float(d_sq.mean()),
        delta_mse_ci=mse_ci,
        delta_mae=float(d_abs.mean()),
        delta_mae_ci=mae_ci,
        significant_mse=_excludes_zero(mse_ci),
        significant_mae=_excludes_zero(mae_ci),
    )
