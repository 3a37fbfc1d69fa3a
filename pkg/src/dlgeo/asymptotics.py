"""Closed-form asymptotic references and the convergence-study harness.

The study drives conditional_rescaled_density over a grid of rescaled
points for several conditioning values L, forms the ratio against the
standard-Gaussian product, and fits the decay exponent alpha in
|ratio - 1| ~ L^(-alpha).  At s = 1/2 the first correction (odd in the
value fluctuation, proportional to (2s-1) L^(-3/4)) vanishes and the fit
should come out >= 1; away from s = 1/2 it should sit near 3/4 with the
sign of (2s-1).
"""

from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .density import TruncationPolicy
from .errors import DomainError
from .geodesic import ScaledQuery, conditional_rescaled_density
from .logval import LogScaledValue
from .tracywidom import default_tw

__all__ = [
    "gaussian_product",
    "t11_leading",
    "fgue_tail",
    "remark2_coefficient",
    "remark2_probability",
    "ConvergenceRecord",
    "StudyResult",
    "convergence_study",
    "fit_decay_exponent",
    "study_to_csv",
]


def gaussian_product(ell: float, x: float) -> float:
    """Product of two standard normal densities at (ell, x)."""
    return math.exp(-0.5 * (ell * ell + x * x)) / (2.0 * math.pi)


def t11_leading(L: float, ell: float, x: float, s: float) -> LogScaledValue:
    """Leading closed form of the first series term:
    exp(-(4/3) L^{3/2} - (ell^2+x^2)/2) / (16 pi^2 s(1-s) L)."""
    if L <= 0:
        raise DomainError(f"L must be positive, got {L}")
    lg = (-(4.0 / 3.0) * L ** 1.5 - 0.5 * (ell * ell + x * x)
          - math.log(16.0 * math.pi ** 2 * s * (1.0 - s) * L))
    return LogScaledValue.from_log(lg)


def fgue_tail(L: float) -> LogScaledValue:
    """Right-tail form of the endpoint density: exp(-(4/3)L^{3/2})/(8 pi L)."""
    if L <= 0:
        raise DomainError(f"L must be positive, got {L}")
    return LogScaledValue.from_log(-(4.0 / 3.0) * L ** 1.5 - math.log(8.0 * math.pi * L))


def remark2_coefficient(s: float) -> float:
    """(2s-1) / (2 sqrt(s(1-s))): coefficient of the L^(-3/4) correction."""
    if not (0.0 < s < 1.0):
        raise DomainError(f"s must lie in (0,1), got {s}")
    return (2.0 * s - 1.0) / (2.0 * math.sqrt(s * (1.0 - s)))


def _phi(t: float) -> float:
    return math.exp(-0.5 * t * t) / math.sqrt(2.0 * math.pi)


def _std_normal_mass(a: float, b: float) -> float:
    return 0.5 * (math.erf(b / math.sqrt(2)) - math.erf(a / math.sqrt(2)))


def remark2_probability(L: float, x_interval: tuple[float, float],
                        ell_interval: tuple[float, float], s: float) -> float:
    """Two-term large-L expansion of the conditional rectangle probability:
    Gaussian product mass plus L^(-3/4) * coefficient * (x mass) *
    int_ell ell phi(ell) d ell, the last integral being phi(a) - phi(b)."""
    x_mass = _std_normal_mass(*x_interval)
    e_mass = _std_normal_mass(*ell_interval)
    a, b = ell_interval
    first_moment = _phi(a) - _phi(b)
    return x_mass * e_mass + L ** -0.75 * remark2_coefficient(s) * x_mass * first_moment


# ---------------------------------------------------------------------------
# convergence study
# ---------------------------------------------------------------------------

@dataclass
class ConvergenceRecord:
    L: float
    s: float
    ell: float
    x: float
    ratio: float
    abs_err: float
    wall_time: float
    error: str | None = None


@dataclass
class StudyResult:
    records: list[ConvergenceRecord]
    s: float
    L_list: list[float]
    grid: list[tuple[float, float]]

    def point_records(self, ell: float, x: float) -> list[ConvergenceRecord]:
        return [r for r in self.records
                if r.ell == ell and r.x == x and r.error is None]

    def point_fit(self, ell: float, x: float):
        recs = self.point_records(ell, x)
        if len(recs) < 2:
            return None
        alpha, _, hw = fit_decay_exponent([r.L for r in recs],
                                          [r.abs_err for r in recs])
        return alpha, hw

    def point_signed_coefficient(self, ell: float, x: float) -> float:
        """Sign-carrying magnitude of (ratio - 1) at the largest L."""
        recs = self.point_records(ell, x)
        recs.sort(key=lambda r: r.L)
        return recs[-1].ratio - 1.0 if recs else math.nan

    def aggregate_alpha(self, require_ell: bool = False):
        """Mean fitted exponent over grid points (optionally only points
        with ell != 0, where the (2s-1) L^(-3/4) term is visible)."""
        alphas = []
        for (ell, x) in self.grid:
            if require_ell and ell == 0.0:
                continue
            fit = self.point_fit(ell, x)
            if fit is not None and math.isfinite(fit[0]):
                alphas.append(fit[0])
        return float(np.mean(alphas)) if alphas else math.nan


def fit_decay_exponent(L_values, errs) -> tuple[float, float, float]:
    """Least squares of log|err| against log L: err ~ c L^(-alpha).

    Returns (alpha, log_c, half_width) with half_width a one-sigma
    confidence half-width of alpha from the residuals.
    """
    xs = np.log(np.asarray(L_values, dtype=float))
    ys = np.log(np.abs(np.asarray(errs, dtype=float)))
    if len(xs) < 2 or not np.all(np.isfinite(ys)):
        return math.nan, math.nan, math.nan
    A = np.vstack([-xs, np.ones_like(xs)]).T
    sol, res, *_ = np.linalg.lstsq(A, ys, rcond=None)
    alpha, logc = float(sol[0]), float(sol[1])
    if len(xs) > 2 and res.size:
        sigma2 = float(res[0]) / (len(xs) - 2)
        cov = sigma2 * np.linalg.inv(A.T @ A)
        hw = math.sqrt(max(cov[0, 0], 0.0))
    else:
        hw = math.nan
    return alpha, logc, hw


def convergence_study(L_list, s: float, grid, policy: TruncationPolicy | None = None,
                      threads: int = 1) -> StudyResult:
    """Run the conditional density over L_list x grid and record ratios.

    Points evaluate independently (optionally in parallel); records are
    ordered by input order regardless of the worker count, and each
    worker runs its density evaluation single-threaded so the per-point
    numbers are identical in any configuration.
    """
    policy = policy or TruncationPolicy()
    point_policy = replace(policy, threads=1)
    tw = default_tw()
    jobs = [(float(L), (float(ell), float(x))) for L in L_list for (ell, x) in grid]

    def run(job):
        L, (ell, x) = job
        t0 = time.perf_counter()
        try:
            c = conditional_rescaled_density(ScaledQuery(L, ell, x, s),
                                             point_policy, tw)
            ratio = c.ratio
            return ConvergenceRecord(L, s, ell, x, ratio, abs(ratio - 1.0),
                                     time.perf_counter() - t0)
        except Exception as exc:  # partial results with per-point markers
            return ConvergenceRecord(L, s, ell, x, math.nan, math.nan,
                                     time.perf_counter() - t0, error=str(exc))

    if threads <= 1:
        records = [run(j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(run, jobs))
    return StudyResult(records=records, s=s,
                       L_list=[float(L) for L in L_list],
                       grid=[(float(e), float(x)) for (e, x) in grid])


def study_to_csv(result: StudyResult, path=None) -> str:
    """CSV with one row per record plus flagged per-point aggregate rows
    (wall times are deliberately not written: outputs are comparable
    byte-for-byte across thread counts)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["L", "s", "ell", "x", "ratio", "abs_err", "alpha_fit"])
    for r in result.records:
        w.writerow([repr(r.L), repr(r.s), repr(r.ell), repr(r.x),
                    "error:" + r.error if r.error else repr(r.ratio),
                    "" if r.error else repr(r.abs_err), ""])
    for (ell, x) in result.grid:
        fit = result.point_fit(ell, x)
        if fit is not None:
            w.writerow(["aggregate", repr(result.s), repr(ell), repr(x),
                        "", "", repr(fit[0])])
    w.writerow(["aggregate", repr(result.s), "all", "all", "", "",
                repr(result.aggregate_alpha())])
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text
