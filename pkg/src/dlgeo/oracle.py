"""Independent cross-checks for the main evaluator.

The brute-force route re-derives everything from scratch: its own saddle
points, its own smooth contours (hyperbolae asymptotic to the canonical
ray angles, so the uniform-node trapezoid rule converges spectrally -
wedges with an apex corner would only give O(h^2)), its own inline
integrand in the explicit four-variable form

    -e^{g1(xi1)+g2(xi2)-g1(eta1)-g2(eta2)}
      (xi1-eta2)(eta1-xi2) / ((xi1-eta1)(xi2-eta2)),

sharing nothing with the tensor evaluator beyond complex arithmetic, so
agreement is evidence rather than tautology.  A Monte Carlo estimator
with Gaussian importance density exp(-s w^2) per contour parameter gives
a second, statistical check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetError, DomainError
from .logval import LogScaledValue
from .density import z_combination_weights, _combos

__all__ = [
    "OracleReport",
    "HyperbolaFamily",
    "t11_bruteforce",
    "mc_estimate",
    "McEstimate",
    "z_methods_compare",
    "verify_suite",
]


@dataclass
class OracleReport:
    target_id: str
    main_value: LogScaledValue
    oracle_value: LogScaledValue
    rel_diff: float
    budget_used: int
    threshold: float = math.nan
    passed: bool | None = None

    def to_json_dict(self) -> dict:
        return {
            "target_id": self.target_id,
            "main_log_mag": self.main_value.log_mag,
            "main_sign": self.main_value.sign,
            "oracle_log_mag": self.oracle_value.log_mag,
            "oracle_sign": self.oracle_value.sign,
            "rel_diff": self.rel_diff,
            "budget_used": self.budget_used,
            "threshold": self.threshold,
            "passed": self.passed,
        }


def _rel_diff(a: LogScaledValue, b: LogScaledValue) -> float:
    """|a/b - 1| through the log-scaled ratio (stable for tiny values)."""
    if a.is_zero() and b.is_zero():
        return 0.0
    if a.is_zero() or b.is_zero():
        return math.inf
    return abs((a / b).value() - 1.0)


# ---------------------------------------------------------------------------
# smooth alternative contours
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HyperbolaFamily:
    """Four smooth contours for the explicit four-variable integral.

    Each is a hyperbola branch through an apex, asymptotic to the
    canonical ray angles; ``curvature`` sets the turning radius and
    ``apex_shift`` moves the level-1 contours off the exact saddles
    (used to realise *distinct* families for invariance checks).
    """

    query_s: float
    ell1: float
    ell2: float
    x: float
    curvature: float = 0.9
    apex_shift: float = 0.3
    half_length: float = 0.0  # 0: derive from the decay scale

    def apexes(self) -> dict[str, float]:
        s, x = self.query_s, self.x
        if self.ell1 <= 0 or self.ell2 <= 0:
            raise DomainError("brute-force oracle needs positive value arguments")
        a1 = -x / (2 * s) - math.sqrt(self.ell1 / s)
        b1 = -x / (2 * s) + math.sqrt(self.ell1 / s)
        a2 = x / (2 * (1 - s)) - math.sqrt(self.ell2 / (1 - s))
        b2 = x / (2 * (1 - s)) + math.sqrt(self.ell2 / (1 - s))
        d = self.apex_shift
        return {"L,in": a1 - d, "L": a2, "R,in": b1 + d, "R": b2}

    def param_range(self) -> float:
        if self.half_length > 0:
            return self.half_length
        scale = min(self.query_s, 1 - self.query_s) ** -0.5
        return 3.5 * scale + 2.5 * max(self.ell1, self.ell2) ** 0.25

    def points(self, name: str, t: np.ndarray):
        """Contour point and d(point)/dt at parameter t (upward traversal)."""
        c = self.apexes()[name]
        a = self.curvature
        sq = np.sqrt(t * t + a * a)
        if name.startswith("L"):
            z = c + 0.5 * a + 1j * (math.sqrt(3) / 2) * t - 0.5 * sq
            dz = 1j * (math.sqrt(3) / 2) - 0.5 * t / sq
        else:
            z = c - 0.5 * a + 1j * (math.sqrt(3) / 2) * t + 0.5 * sq
            dz = 1j * (math.sqrt(3) / 2) + 0.5 * t / sq
        return z, dz


def _exponents(fam: HyperbolaFamily):
    s = fam.query_s

    def gp1(z):
        return -s / 3.0 * z ** 3 - fam.x / 2.0 * z ** 2 + (fam.ell1 - fam.x ** 2 / (4 * s)) * z

    def gp2(z):
        return (-(1 - s) / 3.0 * z ** 3 + fam.x / 2.0 * z ** 2
                + (fam.ell2 - fam.x ** 2 / (4 * (1 - s))) * z)

    return gp1, gp2


def _contour_data(fam: HyperbolaFamily, n: int):
    """Nodes, trapezoid weights (with the 1/(2 pi i) measure folded in),
    exponent values and per-contour shifts for the four contours."""
    T = fam.param_range()
    t = np.linspace(-T, T, n)
    dt = t[1] - t[0]
    w_tr = np.full(n, dt)
    w_tr[0] *= 0.5
    w_tr[-1] *= 0.5
    gp1, gp2 = _exponents(fam)
    out = {}
    for name, gp, sgn in (("L,in", gp1, +1), ("R,in", gp1, -1),
                          ("L", gp2, +1), ("R", gp2, -1)):
        z, dz = fam.points(name, t)
        expo = sgn * gp(z)
        shift = float(np.max(expo.real))
        out[name] = (z, w_tr * dz / (2j * math.pi) * np.exp(expo - shift), shift)
    return out


def t11_bruteforce(query, family: HyperbolaFamily | None = None,
                   dense_nodes: int = 100, budget: float = 1e8) -> LogScaledValue:
    """Quadruple trapezoid evaluation of the explicit (1,1) integral."""
    if float(dense_nodes) ** 4 > budget:
        raise BudgetError(
            f"{dense_nodes}^4 = {float(dense_nodes)**4:.3g} evaluations exceed "
            f"budget {budget:.3g}")
    fam = family or HyperbolaFamily(query.s, query.ell1, query.ell2, query.x)
    data = _contour_data(fam, dense_nodes)
    zx1, wx1, s1 = data["L,in"]
    ze1, we1, s2 = data["R,in"]
    zx2, wx2, s3 = data["L"]
    ze2, we2, s4 = data["R"]
    e1 = ze1[:, None, None]
    x2 = zx2[None, :, None]
    e2 = ze2[None, None, :]
    w3 = we1[:, None, None] * wx2[None, :, None] * we2[None, None, :]
    total = 0j
    for i in range(dense_nodes):
        x1 = complex(zx1[i])
        kern = (x1 - e2) * (e1 - x2) / ((x1 - e1) * (x2 - e2))
        total += wx1[i] * np.sum(kern * w3)
    return LogScaledValue.from_complex(-total, log_shift=s1 + s2 + s3 + s4)


# ---------------------------------------------------------------------------
# Monte Carlo estimator
# ---------------------------------------------------------------------------

@dataclass
class McEstimate:
    value: LogScaledValue
    rel_std_err: float
    n_samples: int
    seed: int


_MC_BLOCK = 1 << 14


def mc_estimate(query, n_samples: int, seed: int,
                family: HyperbolaFamily | None = None) -> McEstimate:
    """Importance-sampled estimate of the (1,1) integral.

    Per contour parameter w the proposal is the Gaussian envelope
    exp(-s_j w^2) of the integrand (s_j = s for the level-1 pair, 1-s for
    the level-2 pair).  Samples are drawn in fixed-size blocks with
    per-block child seeds, and block moments combine in a fixed order, so
    the estimate is bit-identical for a given seed regardless of worker
    configuration.
    """
    fam = family or HyperbolaFamily(query.s, query.ell1, query.ell2, query.x)
    gp1, gp2 = _exponents(fam)
    roles = (("L,in", gp1, +1, query.s), ("R,in", gp1, -1, query.s),
             ("L", gp2, +1, 1 - query.s), ("R", gp2, -1, 1 - query.s))
    # reference shifts at the apexes keep block values O(1)
    shifts = []
    for name, gp, sgn, _ in roles:
        z0, _ = fam.points(name, np.zeros(1))
        shifts.append(float((sgn * gp(z0[0])).real))
    shift_total = sum(shifts)

    n_blocks = math.ceil(n_samples / _MC_BLOCK)
    children = np.random.SeedSequence(seed).spawn(n_blocks)
    acc_sum = 0j
    acc_sq = 0.0
    count = 0
    for b in range(n_blocks):
        m = min(_MC_BLOCK, n_samples - b * _MC_BLOCK)
        rng = np.random.Generator(np.random.PCG64(children[b]))
        vals = np.empty(m, dtype=complex)
        ratio = np.ones(m, dtype=complex)
        zs = []
        for (name, gp, sgn, sj), sh in zip(roles, shifts):
            sigma = 1.0 / math.sqrt(2.0 * sj)
            t = rng.normal(0.0, sigma, size=m)
            q_pdf = np.exp(-sj * t * t) * math.sqrt(sj / math.pi)
            z, dz = fam.points(name, t)
            ratio = ratio * np.exp(sgn * gp(z) - sh) * dz / (2j * math.pi) / q_pdf
            zs.append(z)
        x1, e1, x2, e2 = zs
        kern = (x1 - e2) * (e1 - x2) / ((x1 - e1) * (x2 - e2))
        vals = -kern * ratio
        acc_sum += complex(np.sum(vals))
        acc_sq += float(np.sum(np.abs(vals) ** 2))
        count += m
    mean = acc_sum / count
    var = max(acc_sq / count - abs(mean) ** 2, 0.0)
    std_err = math.sqrt(var / count)
    rel = std_err / abs(mean) if mean != 0 else math.inf
    return McEstimate(LogScaledValue.from_complex(mean, log_shift=shift_total),
                      rel, count, seed)


# ---------------------------------------------------------------------------
# z-route comparison
# ---------------------------------------------------------------------------

def z_methods_compare(k1: int, k2: int, inner, z_radius: float = 0.5,
                      z_nodes: int = 128) -> OracleReport:
    """Circle-quadrature vs residue-reduction composition of the same
    per-combination inner values."""
    vals = {c: complex(inner(c)) for c in _combos(k1)}
    totals = {}
    for method in ("circle", "residue"):
        w = z_combination_weights(k1, k2, method, z_radius, z_nodes)
        totals[method] = sum(w[c] * vals[c] for c in _combos(k1))
    a = LogScaledValue.from_complex(totals["circle"])
    b = LogScaledValue.from_complex(totals["residue"])
    if a.is_zero() and b.is_zero():
        rel = 0.0
    elif a.is_zero() or b.is_zero():
        rel = abs(totals["circle"] - totals["residue"])
    else:
        rel = _rel_diff(a, b)
    return OracleReport("z_circle_vs_residue", a, b, rel,
                        budget_used=z_nodes * len(vals))


# ---------------------------------------------------------------------------
# the verification gate
# ---------------------------------------------------------------------------

def verify_suite(budget: float = 1e8, seed: int = 20240901, threads: int = 1,
                 L: float = 9.0, s: float = 0.5,
                 policy=None) -> list[OracleReport]:
    """Oracle gate at the standard calibration point (conditioning value
    L, fluctuations zero): brute force vs the tensor evaluator, family
    invariance of the brute force, Monte Carlo 3-sigma agreement, and the
    z-route identity on random rational inner values."""
    from .density import DensityQuery, SeriesTermSpec, TruncationPolicy, prepare_grids, term_T
    from .contour import build_saddle_contours

    policy = policy or TruncationPolicy()
    q = DensityQuery(s * L, (1 - s) * L, 0.0, s)
    fam = build_saddle_contours(q, gap=policy.contour_gap,
                                vertical_cap=policy.vertical_cap)
    grids = prepare_grids(q, fam, policy.scheme)
    spec = SeriesTermSpec(1, 1, policy.z_radius, policy.z_nodes, grids)
    main, _ = term_T(spec, q, z_method=policy.z_method, threads=threads,
                     budget=policy.budget)

    reports = []
    n4 = int(budget ** 0.25)
    bf1 = t11_bruteforce(q, HyperbolaFamily(s, q.ell1, q.ell2, q.x,
                                            curvature=0.9, apex_shift=0.3),
                         dense_nodes=n4, budget=budget)
    reports.append(OracleReport("t11_bruteforce_vs_term", main, bf1,
                                _rel_diff(main, bf1), n4 ** 4,
                                threshold=1e-4))
    bf2 = t11_bruteforce(q, HyperbolaFamily(s, q.ell1, q.ell2, q.x,
                                            curvature=1.4, apex_shift=0.55),
                         dense_nodes=n4, budget=budget)
    reports.append(OracleReport("t11_bruteforce_family_invariance", bf1, bf2,
                                _rel_diff(bf1, bf2), 2 * n4 ** 4,
                                threshold=1e-4))

    n_mc = max(1 << 16, min(int(budget // 16), 1 << 21))
    mc = mc_estimate(q, n_mc, seed)
    rel = _rel_diff(main, mc.value)
    rep = OracleReport("mc_vs_term", main, mc.value, rel, mc.n_samples,
                       threshold=3.0 * mc.rel_std_err)
    reports.append(rep)

    rng = np.random.Generator(np.random.PCG64(seed + 1))
    combo_index = {c: i for i, c in enumerate(sorted(_combos(1)))}
    worst = 0.0
    rep_z = None
    for _ in range(20):
        coef = rng.normal(size=4) + 1j * rng.normal(size=4)

        def inner(combo, coef=coef):
            return coef[combo_index[combo]]

        rep_z = z_methods_compare(1, 1, inner)
        worst = max(worst, rep_z.rel_diff)
    reports.append(OracleReport("z_circle_vs_residue_random", rep_z.main_value,
                                rep_z.oracle_value, worst, 20 * 128 * 4,
                                threshold=1e-10))

    for r in reports:
        if not math.isnan(r.threshold):
            r.passed = bool(r.rel_diff <= r.threshold)
    return reports
