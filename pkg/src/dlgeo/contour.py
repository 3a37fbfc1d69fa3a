"""Complex integration paths and their quadrature grids.

The series for the geodesic density integrates over six contours: three in
the left half plane running from e^{-2*pi*i/3}*infinity up to
e^{+2*pi*i/3}*infinity (ordered, left to right, "L,in" / "L" / "L,out"),
and three mirrored contours in the right half plane running from
e^{-pi*i/3}*infinity up to e^{+pi*i/3}*infinity (ordered, left to right,
"R,out" / "R" / "R,in").

Three constructions are provided:

* ``build_saddle_contours`` - the generic family used for evaluation:
  vertical segments through (or as close as the nesting order allows to)
  the exact saddle points of the cubic exponents, continued by rays at the
  canonical angles.
* ``build_paper_contours`` - the steepest-descent family with vertical
  parts of half-length L^(-1/4)*log(L) centred at the large-L expansion
  of the saddles.
* ``build_lemma32_contours`` - the pure-ray family anchored at
  -sqrt(L) - c_i*L^(-1/4) (and mirror), for constants c1 < c2 < c3 < 2*c1.

Discretisation uses fixed-order Gauss-Legendre panels; unbounded rays are
truncated where an attached decay certificate A*exp(-B*w - C*w^3) falls
below exp(-log_cap) of its peak.  All constructions are conjugation
symmetric, so grids applied to conjugation-symmetric integrands produce
real results up to rounding.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CertificateError, DomainError, GeometryError, InvariantError

__all__ = [
    "PathSegment",
    "ContourFamily",
    "QuadratureGrid",
    "Lemma32ContourParams",
    "DecayCertificate",
    "PanelScheme",
    "SaddlePair",
    "saddle_points",
    "exponent_saddles",
    "build_saddle_contours",
    "build_paper_contours",
    "build_lemma32_contours",
    "discretize",
    "cubic_decay_certificate",
    "family_min_distance",
    "export_grids_csv",
    "CONTOUR_NAMES",
    "LEFT_CONTOURS",
    "RIGHT_CONTOURS",
]

CONTOUR_NAMES = ("L,in", "L", "L,out", "R,out", "R", "R,in")
LEFT_CONTOURS = ("L,in", "L", "L,out")
RIGHT_CONTOURS = ("R,out", "R", "R,in")

_ANGLE_UP_LEFT = 2.0 * math.pi / 3.0
_ANGLE_UP_RIGHT = math.pi / 3.0


# ---------------------------------------------------------------------------
# path segments and families
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PathSegment:
    """A straight piece of a contour: anchor + direction*t, t in [0, length].

    ``orientation`` is +1 when the contour traverses the segment in the
    ``direction`` sense and -1 when it traverses it the opposite way (used
    for the incoming ray, which is anchored at its finite end).
    ``length`` is math.inf for rays.
    """

    anchor: complex
    direction: complex
    length: float
    orientation: int

    def __post_init__(self):
        if abs(abs(self.direction) - 1.0) > 1e-14:
            raise InvariantError(
                f"segment direction must be unit modulus, got {self.direction!r}")
        if not (self.length > 0):
            raise InvariantError("segment length must be positive")
        if self.orientation not in (-1, 1):
            raise InvariantError("orientation must be +1 or -1")

    @property
    def unbounded(self) -> bool:
        return math.isinf(self.length)

    def point(self, t):
        return self.anchor + self.direction * t


@dataclass(frozen=True)
class ContourFamily:
    """The six integration contours plus their anchor saddle points.

    Contour lists follow the traversal order (from the lower ray, through
    the vertical part if any, out the upper ray).  ``saddle_left`` and
    ``saddle_right`` record the reference points the construction was
    anchored at (diagnostic; the exact per-exponent saddles are returned
    by :func:`saddle_points`).

    ``ordering`` is "fig1" when the six contours respect the canonical
    in/mid/out nesting (required by terms with k1 + k2 >= 3, whose kernel
    has poles between same-side contours) and "natural" when each contour
    simply sits at its own saddle.  The first (1,1) term has no same-side
    poles, so its value is identical on both; the natural mode stays
    numerically conditioned when the two saddles per side separate widely
    (large rescaled location), where forcing the nesting would put one
    contour far up its exponential hill.
    """

    gamma_L_in: tuple[PathSegment, ...]
    gamma_L: tuple[PathSegment, ...]
    gamma_L_out: tuple[PathSegment, ...]
    gamma_R_out: tuple[PathSegment, ...]
    gamma_R: tuple[PathSegment, ...]
    gamma_R_in: tuple[PathSegment, ...]
    saddle_left: complex
    saddle_right: complex
    label: str = "generic"
    log_cap: float = 36.0
    ordering: str = "fig1"

    def contour(self, name: str) -> tuple[PathSegment, ...]:
        return {
            "L,in": self.gamma_L_in,
            "L": self.gamma_L,
            "L,out": self.gamma_L_out,
            "R,out": self.gamma_R_out,
            "R": self.gamma_R,
            "R,in": self.gamma_R_in,
        }[name]

    def items(self):
        for name in CONTOUR_NAMES:
            yield name, self.contour(name)


@dataclass(frozen=True)
class Lemma32ContourParams:
    """Offsets c1 < c2 < c3 < 2*c1 for the pure-ray contour family."""

    c1: float
    c2: float
    c3: float

    def __post_init__(self):
        if not (0 < self.c1 < self.c2 < self.c3 < 2 * self.c1):
            raise InvariantError(
                f"need 0 < c1 < c2 < c3 < 2*c1, got {(self.c1, self.c2, self.c3)}")


@dataclass
class QuadratureGrid:
    """Nodes and weights for one contour.

    Weights absorb the traversal direction, the panel Jacobian and the
    1/(2*pi*i) measure, so sum(weights * f(nodes)) approximates
    int_Gamma f(z) dz / (2*pi*i).  ``truncation_bound`` is an upper
    estimate of the discarded tail mass of the attached decay
    certificates (absolute, in certificate units).
    """

    nodes: np.ndarray
    weights: np.ndarray
    segment_ids: np.ndarray
    truncation_bound: float
    contour_id: str = ""

    def __len__(self):
        return len(self.nodes)


# ---------------------------------------------------------------------------
# saddle points
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SaddlePair:
    left: float
    right: float


def exponent_saddles(ell: float, x: float, s_coeff: float, tilt: float) -> SaddlePair:
    """Roots of d/dz [-(s_coeff/3) z^3 - (tilt/2) z^2 + (ell - x^2/(4 s_coeff)) z].

    The derivative is quadratic with discriminant 4*s_coeff*ell, so real
    saddles exist iff ell > 0; they sit at -tilt/(2 s_coeff) +- sqrt(ell/s_coeff).
    """
    if ell <= 0:
        raise DomainError(f"saddles are real only for positive value argument, got {ell}")
    center = -tilt / (2.0 * s_coeff)
    half = math.sqrt(ell / s_coeff)
    return SaddlePair(center - half, center + half)


def saddle_points(query) -> tuple[SaddlePair, SaddlePair]:
    """Saddle pairs of the two cubic exponents of a density query.

    ``query`` needs attributes ell1, ell2, x, s.  The first exponent has
    cubic coefficient s and tilt +x, the second 1-s and tilt -x.  Raises
    DomainError unless both value arguments are positive (v1 supports the
    real-saddle regime only).
    """
    g1 = exponent_saddles(query.ell1, query.x, query.s, query.x)
    g2 = exponent_saddles(query.ell2, query.x, 1.0 - query.s, -query.x)
    return g1, g2


# ---------------------------------------------------------------------------
# contour constructions
# ---------------------------------------------------------------------------

def _wedge(apex: complex, side: str, half_height: float) -> tuple[PathSegment, ...]:
    """Vertical segment of half-length ``half_height`` through ``apex``
    continued by rays at the canonical angles; pure wedge if half_height=0."""
    ang = _ANGLE_UP_LEFT if side == "L" else _ANGLE_UP_RIGHT
    up = complex(math.cos(ang), math.sin(ang))
    down = up.conjugate()
    segs = []
    if half_height > 0:
        lo = apex - 1j * half_height
        hi = apex + 1j * half_height
        segs.append(PathSegment(lo, down, math.inf, -1))
        segs.append(PathSegment(lo, 1j, 2.0 * half_height, +1))
        segs.append(PathSegment(hi, up, math.inf, +1))
    else:
        segs.append(PathSegment(apex, down, math.inf, -1))
        segs.append(PathSegment(apex, up, math.inf, +1))
    return tuple(segs)


def _check_family_geometry(apexes: dict[str, float], ordering: str) -> None:
    """Verify apex placement.

    fig1: left half plane, left to right, L,in < L < L,out < 0; right
    half plane 0 < R,out < R < R,in.  natural: all left apexes negative,
    all right apexes positive, apexes distinct per side (contours of one
    side are horizontal translates, so distinct apexes cannot intersect).
    """
    a = apexes
    if ordering == "fig1":
        ok = (a["L,in"] < a["L"] < a["L,out"] < 0.0 < a["R,out"] < a["R"] < a["R,in"])
    else:
        left = [a["L,in"], a["L"], a["L,out"]]
        right = [a["R,out"], a["R"], a["R,in"]]
        ok = (max(left) < 0.0 < min(right)
              and len({round(v, 14) for v in left}) == 3
              and len({round(v, 14) for v in right}) == 3)
    if not ok:
        raise GeometryError(
            f"contour apexes violate the {ordering} placement rules: {a}")


def _assemble(apexes: dict[str, float], half_height: float, saddle_left: complex,
              saddle_right: complex, label: str, log_cap: float,
              ordering: str = "fig1") -> ContourFamily:
    _check_family_geometry(apexes, ordering)
    return ContourFamily(
        gamma_L_in=_wedge(apexes["L,in"], "L", half_height),
        gamma_L=_wedge(apexes["L"], "L", half_height),
        gamma_L_out=_wedge(apexes["L,out"], "L", half_height),
        gamma_R_out=_wedge(apexes["R,out"], "R", half_height),
        gamma_R=_wedge(apexes["R"], "R", half_height),
        gamma_R_in=_wedge(apexes["R,in"], "R", half_height),
        saddle_left=saddle_left,
        saddle_right=saddle_right,
        label=label,
        log_cap=log_cap,
        ordering=ordering,
    )


def build_saddle_contours(query, gap: float = 0.6, vertical_cap: float = 9.0,
                          log_cap: float = 36.0, mode: str = "strict") -> ContourFamily:
    """Saddle-anchored family for a generic (positive-value) query.

    strict mode (for the full series): the "L" / "R" contours pass
    exactly through the left/right saddles of the second exponent; the
    in/out contours sit at the first exponent's saddles when the nesting
    order allows and are pushed just far enough (gap * scale) to keep the
    family ordered otherwise.

    natural mode (sufficient for the first term, which has no same-side
    poles): in/mid contours sit exactly at their own saddles, separated
    only when closer than gap * scale; the unused out contours are parked
    beyond the in contours.  This keeps the evaluation conditioned when
    the per-side saddles separate widely.

    All six share one vertical half-length, sized so the Gaussian factor
    at the flattest saddle decays by exp(-vertical_cap) across it;
    sharing the height makes the contours horizontal translates of one
    another, so distinct apexes guarantee the family never
    self-intersects.
    """
    (g1, g2) = saddle_points(query)
    s = query.s
    scale = (query.ell1 + query.ell2) ** (-0.25)
    d = gap * scale

    if mode == "strict":
        apexes = {
            "L": g2.left,
            "L,in": min(g1.left, g2.left - d),
            "L,out": max(g1.left, g2.left + d),
            "R": g2.right,
            "R,in": max(g1.right, g2.right + d),
            "R,out": min(g1.right, g2.right - d),
        }
        ordering = "fig1"
    elif mode == "natural":
        def push(anchor, other):
            # keep `anchor` at its saddle, but at least d away from `other`
            if abs(anchor - other) >= d:
                return anchor
            return other - d if anchor <= other else other + d

        lin = push(g1.left, g2.left)
        rin = push(g1.right, g2.right)
        apexes = {
            "L": g2.left,
            "L,in": lin,
            "L,out": min(lin, g2.left) - 2.0 * d,  # parked; null weight in the first term
            "R": g2.right,
            "R,in": rin,
            "R,out": max(rin, g2.right) + 2.0 * d,
        }
        ordering = "natural"
    else:
        raise DomainError(f"unknown contour mode {mode!r}")

    # second-derivative magnitudes at the saddles set the Gaussian widths
    curv = min(2.0 * math.sqrt(s * query.ell1), 2.0 * math.sqrt((1 - s) * query.ell2))
    half_height = math.sqrt(2.0 * vertical_cap / curv)
    return _assemble(apexes, half_height, complex(min(g1.left, g2.left)),
                     complex(max(g1.right, g2.right)), f"saddle-{mode}", log_cap,
                     ordering)


def build_paper_contours(L: float, ell: float, x: float, s: float,
                         log_cap: float = 36.0, out_gap: float = 0.8,
                         min_gap: float = 0.35) -> ContourFamily:
    """Steepest-descent family: verticals of half-length L^(-1/4)*log(L)
    centred at the large-L saddle expansions, continued by the canonical
    rays.

    Only four centres are prescribed by the expansion (the out-contours do
    not enter the leading term); the out-contours are synthesised at
    ``out_gap * L^(-1/4)`` beyond the corresponding inner pair.  At
    ell = x = 0 the "in" and middle centres coincide; the middle contour
    is then nudged by ``min_gap * L^(-1/4)`` to keep the family disjoint
    (legitimate: no integrand pole separates the two).  Centres out of
    order by more than that raise GeometryError (possible for negative
    ell + x at small L).
    """
    if L <= 0:
        raise DomainError(f"L must be positive, got {L}")
    if not (0 < s < 1):
        raise DomainError(f"s must lie in (0,1), got {s}")
    q = L ** (-0.25)
    X = x * math.sqrt(s * (1 - s)) * q
    r1 = 0.5 * math.sqrt((1 - s) / s) * ell * q
    r2 = 0.5 * math.sqrt(s / (1 - s)) * ell * q

    c_L_in = -X / (2 * s) - math.sqrt(L) - r1
    c_L = X / (2 * (1 - s)) - math.sqrt(L) + r2
    c_R_in = -X / (2 * s) + math.sqrt(L) + r1
    c_R = X / (2 * (1 - s)) + math.sqrt(L) - r2

    g = min_gap * q
    if c_L < c_L_in - g or c_R > c_R_in + g:
        raise GeometryError(
            f"section-3.1 centres out of order beyond the tie-break margin: "
            f"L-side ({c_L_in:.4g}, {c_L:.4g}), R-side ({c_R:.4g}, {c_R_in:.4g})")
    c_L = max(c_L, c_L_in + g)
    c_R = min(c_R, c_R_in - g)

    apexes = {
        "L,in": c_L_in,
        "L": c_L,
        "L,out": c_L + out_gap * q,
        "R,in": c_R_in,
        "R": c_R,
        "R,out": c_R - out_gap * q,
    }
    half_height = q * math.log(L)
    return _assemble(apexes, half_height, complex(-math.sqrt(L)),
                     complex(math.sqrt(L)), "paper-3.1", log_cap)


def build_lemma32_contours(L: float, params: Lemma32ContourParams,
                           log_cap: float = 36.0) -> ContourFamily:
    """Pure-ray family anchored at -sqrt(L) - c_i L^(-1/4) and mirror.

    Apexes, left to right on the left side: c3 (innermost), c2, c1;
    mirrored on the right.  The nesting order of the definition follows
    from c1 < c2 < c3.
    """
    if L <= 0:
        raise DomainError(f"L must be positive, got {L}")
    q = L ** (-0.25)
    root = math.sqrt(L)
    apexes = {
        "L,in": -root - params.c3 * q,
        "L": -root - params.c2 * q,
        "L,out": -root - params.c1 * q,
        "R,in": root + params.c3 * q,
        "R": root + params.c2 * q,
        "R,out": root + params.c1 * q,
    }
    return _assemble(apexes, 0.0, complex(-root), complex(root), "lemma-3.2", log_cap)


# ---------------------------------------------------------------------------
# decay certificates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DecayCertificate:
    """Certified bound A*exp(-B*w - C*w^3) on the integrand magnitude along
    a ray, w = arclength from the ray anchor.  B, C >= 0 and B + C > 0."""

    log_amplitude: float
    linear_rate: float
    cubic_rate: float

    def __post_init__(self):
        if self.linear_rate < 0 or self.cubic_rate < 0:
            raise InvariantError("certificate rates must be nonnegative")
        if self.linear_rate == 0 and self.cubic_rate == 0:
            raise InvariantError("certificate must certify some decay")

    def decay_exponent(self, w):
        return self.linear_rate * w + self.cubic_rate * w ** 3

    def truncation_length(self, log_cap: float) -> float:
        """Smallest w with B*w + C*w^3 >= log_cap (monotone; bisection)."""
        b, c = self.linear_rate, self.cubic_rate
        if c == 0:
            return log_cap / b
        # both terms are nonnegative, so the single-rate crossings bracket
        hi = (log_cap / c) ** (1.0 / 3.0)
        if b > 0:
            hi = min(hi, log_cap / b)
        lo = 0.0
        for _ in range(100):
            mid = 0.5 * (lo + hi)
            if self.decay_exponent(mid) >= log_cap:
                hi = mid
            else:
                lo = mid
        return hi

    def tail_bound(self, w: float) -> float:
        """Upper bound on int_w^inf A e^{-B t - C t^3} dt.

        Beyond w the exponent decreases at rate >= B + 3*C*w^2, so the
        tail is at most the boundary value divided by that rate.
        """
        rate = self.linear_rate + 3.0 * self.cubic_rate * w ** 2
        return math.exp(self.log_amplitude - self.decay_exponent(w)) / rate


def cubic_decay_certificate(coeffs, poly_degree: int = 0) -> DecayCertificate:
    """Certificate for |poly(w)| * exp(c0 + c1 w + c2 w^2 + c3 w^3), c3 < 0.

    The polynomial factor of degree p is absorbed via (1+w)^p <= e^{p w};
    half of the cubic decay is kept as the certified C, and whatever
    remains of the exponent is bounded by its maximum over [0, inf), which
    exists because the residual cubic still has negative leading
    coefficient.
    """
    c0, c1, c2, c3 = (float(c) for c in coeffs)
    if c3 >= 0:
        raise CertificateError(
            f"exponent must decay cubically along the ray (c3={c3:.3e} >= 0)")
    a = c1 + poly_degree
    C = -0.5 * c3
    B = max(0.0, -a)
    # residual r(w) = c0 + (a+B) w + c2 w^2 + (c3 + C) w^3, leading coef c3/2 < 0
    r = np.polynomial.Polynomial([c0, a + B, c2, c3 + C])
    crit = [0.0]
    dr = r.deriv()
    roots = dr.roots()
    crit.extend(t.real for t in roots if abs(t.imag) < 1e-12 and t.real > 0)
    log_A = max(float(r(t)) for t in crit)
    return DecayCertificate(log_A, B, C)


# ---------------------------------------------------------------------------
# discretisation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PanelScheme:
    """Fixed-order Gauss-Legendre panel layout.

    ``panels_per_unit`` controls panel density on the vertical (near
    saddle) part; rays start with a panel of length ``ray_first`` and
    stretch geometrically by ``ray_stretch`` until the certified
    truncation length is covered.
    """

    order: int = 16
    panels_per_unit: float = 4.0
    ray_first: float = 1.0
    ray_stretch: float = 1.7

    def __post_init__(self):
        if self.order < 2:
            raise InvariantError("panel order must be >= 2")
        if self.panels_per_unit <= 0 or self.ray_first <= 0 or self.ray_stretch <= 1:
            raise InvariantError("panel layout parameters out of range")


def _gl_cache():
    cache = {}

    def get(order):
        if order not in cache:
            t, w = np.polynomial.legendre.leggauss(order)
            cache[order] = (t, w)
        return cache[order]

    return get


_gl_nodes = _gl_cache()


def _panel_points(a: float, b: float, order: int):
    t, w = _gl_nodes(order)
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    return mid + half * t, half * w


def _ray_breaks(total: float, first: float, stretch: float) -> list[float]:
    """Panel breakpoints 0 = w0 < w1 < ... covering [0, total]."""
    breaks = [0.0]
    step = min(first, total)
    while breaks[-1] < total:
        nxt = breaks[-1] + step
        if nxt >= total - 1e-12 * max(total, 1.0):
            nxt = total
        breaks.append(nxt)
        step *= stretch
    return breaks


def discretize(family: ContourFamily, scheme: PanelScheme,
               certificates: dict | None = None,
               log_cap: float | None = None) -> dict[str, QuadratureGrid]:
    """Build one quadrature grid per contour of the family.

    ``certificates`` maps (contour_name, segment_index) -> DecayCertificate
    for every unbounded segment; CertificateError is raised when one is
    missing.  Finite segments are covered by equal panels at the scheme's
    density; rays are truncated at the certified length for ``log_cap``
    (default: the family's) and covered by geometrically stretched panels.

    Weights include the traversal orientation, the direction Jacobian and
    the 1/(2*pi*i) measure, so a grid applied to f gives
    int f(z) dz/(2*pi*i).
    """
    cap = family.log_cap if log_cap is None else log_cap
    certificates = certificates or {}
    grids: dict[str, QuadratureGrid] = {}
    for name, segments in family.items():
        nodes, weights, seg_ids = [], [], []
        tail = 0.0
        for k, seg in enumerate(segments):
            if seg.unbounded:
                cert = certificates.get((name, k))
                if cert is None:
                    raise CertificateError(
                        f"no decay certificate for unbounded segment {k} of {name}")
                length = cert.truncation_length(cap)
                tail += cert.tail_bound(length)
                breaks = _ray_breaks(length, scheme.ray_first, scheme.ray_stretch)
            else:
                # equal panels on the (conjugation-symmetric) finite segment;
                # the layout is symmetric about its midpoint for any count
                length = seg.length
                n_pan = max(1, math.ceil(length * scheme.panels_per_unit))
                breaks = list(np.linspace(0.0, length, n_pan + 1))
            for a, b in zip(breaks[:-1], breaks[1:]):
                t, w = _panel_points(a, b, scheme.order)
                nodes.append(seg.anchor + seg.direction * t)
                weights.append(w * seg.direction * seg.orientation / (2j * math.pi))
                seg_ids.append(np.full(len(t), k, dtype=int))
        grids[name] = QuadratureGrid(
            nodes=np.concatenate(nodes),
            weights=np.concatenate(weights),
            segment_ids=np.concatenate(seg_ids),
            truncation_bound=tail,
            contour_id=name,
        )
    return grids


# ---------------------------------------------------------------------------
# geometry checks and export
# ---------------------------------------------------------------------------

def _segment_distance(s1: PathSegment, s2: PathSegment, tmax: float = 1e6) -> float:
    """Euclidean distance between two (possibly unbounded) segments.

    Unbounded parameters are capped at ``tmax``; for the wedge families
    used here the minimum is always attained well inside that range.
    """
    p1, d1 = np.array([s1.anchor.real, s1.anchor.imag]), np.array([s1.direction.real, s1.direction.imag])
    p2, d2 = np.array([s2.anchor.real, s2.anchor.imag]), np.array([s2.direction.real, s2.direction.imag])
    L1 = min(s1.length, tmax)
    L2 = min(s2.length, tmax)
    r = p1 - p2
    a, b, c = 1.0, float(d1 @ d2), 1.0
    e, f = float(d1 @ r), float(d2 @ r)
    den = a * c - b * b

    def clamp(v, hi):
        return min(max(v, 0.0), hi)

    if den > 1e-14:
        t = clamp((b * f - c * e) / den, L1)
    else:
        t = 0.0
    u = clamp((b * t + f) / c, L2)
    t = clamp((b * u - e) / a, L1)
    best = np.hypot(*(p1 + d1 * t - p2 - d2 * u))
    # boundary sweeps guard the clamped corners
    for tt in (0.0, L1):
        uu = clamp(b * tt + f, L2)
        best = min(best, np.hypot(*(p1 + d1 * tt - p2 - d2 * uu)))
    for uu in (0.0, L2):
        tt = clamp(b * uu - e, L1)
        best = min(best, np.hypot(*(p1 + d1 * tt - p2 - d2 * uu)))
    return float(best)


def family_min_distance(family: ContourFamily) -> float:
    """Minimum pairwise distance between distinct contours of the family."""
    best = math.inf
    names = list(CONTOUR_NAMES)
    for i, ni in enumerate(names):
        for nj in names[i + 1:]:
            for s1 in family.contour(ni):
                for s2 in family.contour(nj):
                    best = min(best, _segment_distance(s1, s2))
    return best


def export_grids_csv(grids: dict[str, QuadratureGrid], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["contour_id", "segment_id", "node_re", "node_im",
                         "weight_re", "weight_im"])
        for name in CONTOUR_NAMES:
            if name not in grids:
                continue
            g = grids[name]
            cid = name.replace(",", "_")
            for z, w, sid in zip(g.nodes, g.weights, g.segment_ids):
                writer.writerow([cid, int(sid), repr(z.real), repr(z.imag),
                                 repr(w.real), repr(w.imag)])
