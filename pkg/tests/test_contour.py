import math

import numpy as np
import pytest

from dlgeo.contour import (
    DecayCertificate,
    Lemma32ContourParams,
    PanelScheme,
    PathSegment,
    build_lemma32_contours,
    build_paper_contours,
    build_saddle_contours,
    cubic_decay_certificate,
    discretize,
    export_grids_csv,
    family_min_distance,
    saddle_points,
    CONTOUR_NAMES,
)
from dlgeo.density import DensityQuery
from dlgeo.errors import CertificateError, DomainError, GeometryError, InvariantError
from tests.conftest import scaled_to_raw


# -- saddle points -----------------------------------------------------------

def test_saddles_symmetric_point():
    g1, g2 = saddle_points(DensityQuery(8.0, 8.0, 0.0, 0.5))
    assert g1.left == pytest.approx(-4.0)
    assert g1.right == pytest.approx(4.0)
    assert g2.left == pytest.approx(-4.0)


def test_saddles_via_scaling_map():
    # at x = ell = 0 the scaled point (L, s) has both saddles at +-sqrt(L)
    q = scaled_to_raw(16.0, 0.0, 0.0, 0.5)
    g1, g2 = saddle_points(q)
    for pair in (g1, g2):
        assert pair.left == pytest.approx(-4.0)
        assert pair.right == pytest.approx(4.0)


def test_saddle_offcenter():
    g1, _ = saddle_points(DensityQuery(2.0, 2.0, 0.2, 0.5))
    assert g1.left == pytest.approx(-2.2)


def test_saddle_ordering_and_domain():
    g1, g2 = saddle_points(DensityQuery(3.0, 5.0, 0.7, 0.3))
    assert g1.left < 0 < g1.right
    assert g2.left < 0 < g2.right
    with pytest.raises(DomainError):
        saddle_points(DensityQuery(-1.0, 5.0, 0.0, 0.5))
    with pytest.raises(DomainError):
        saddle_points(DensityQuery(5.0, 0.0, 0.0, 0.5))


# -- constructions -----------------------------------------------------------

def test_paper_contours_centers():
    fam = build_paper_contours(16.0, 0.0, 0.0, 0.5)
    assert fam.gamma_L_in[1].anchor.real == pytest.approx(-4.0)
    assert fam.gamma_R_in[1].anchor.real == pytest.approx(4.0)
    fam = build_paper_contours(16.0, 1.0, 0.0, 0.5)
    # vertical center shifts by (1/2)sqrt((1-s)/s) * ell * L^(-1/4) = 0.25
    assert fam.gamma_L_in[1].anchor.real == pytest.approx(-4.25)
    # vertical half-length is L^(-1/4) log L
    seg = fam.gamma_L_in[1]
    assert seg.length == pytest.approx(2.0 * 16 ** -0.25 * math.log(16.0))


def test_paper_contours_geometry_error():
    # strongly negative ell at small L swaps the in/mid centers
    with pytest.raises(GeometryError):
        build_paper_contours(4.0, -3.0, 0.0, 0.5)


def test_lemma32_apexes_and_gaps():
    fam = build_lemma32_contours(16.0, Lemma32ContourParams(1.0, 1.3, 1.8))
    assert fam.gamma_L_out[0].anchor.real == pytest.approx(-4.5)  # -4 - 1*16^(-1/4)
    gap = fam.gamma_L[0].anchor.real - fam.gamma_L_in[0].anchor.real
    assert gap == pytest.approx(0.25)  # (c3-c2) * 16^(-1/4)


def test_lemma32_params_invariant():
    with pytest.raises(InvariantError):
        Lemma32ContourParams(1.0, 2.1, 2.2)
    with pytest.raises(InvariantError):
        Lemma32ContourParams(1.0, 0.9, 1.5)


def test_lemma32_min_distance_formula():
    # paper's distance between neighbouring ray contours: (sqrt3/2) c L^(-1/4)
    L = 9.0
    params = Lemma32ContourParams(1.0, 1.3, 1.8)
    fam = build_lemma32_contours(L, params)
    want = (math.sqrt(3) / 2) * min(params.c3 - params.c2, params.c2 - params.c1) * L ** -0.25
    assert family_min_distance(fam) == pytest.approx(want, rel=1e-9)


def test_conjugation_symmetry_of_families(rng):
    for _ in range(5):
        L = float(rng.uniform(9, 30))
        ell = float(rng.uniform(-1, 1))
        x = float(rng.uniform(-0.5, 0.5))
        s = float(rng.uniform(0.3, 0.7))
        for fam in (build_paper_contours(L, abs(ell), x, s),
                    build_saddle_contours(scaled_to_raw(L, ell, x, s))):
            for name, segs in fam.items():
                pts = set()
                for seg in segs:
                    pts.add((round(seg.anchor.real, 12), round(seg.anchor.imag, 12)))
                for (re, im) in pts:
                    assert (re, -im) in pts


def test_section31_centers_approach_saddles():
    # centers differ from the exact saddles by O(L^(-3/4)); fitted decay
    # exponent of the difference should be at least that order
    ell, x, s = 1.0, 0.7, 0.5
    Ls = [16.0, 81.0, 256.0]
    diffs = []
    for L in Ls:
        fam = build_paper_contours(L, ell, x, s)
        q = scaled_to_raw(L, ell, x, s)
        g1, _ = saddle_points(q)
        diffs.append(abs(fam.gamma_L_in[1].anchor + 1j * fam.gamma_L_in[1].length / 2
                         - g1.left))
    slope = np.polyfit(np.log(Ls), np.log(diffs), 1)[0]
    assert slope <= -0.70
    assert max(d * L ** 0.75 for d, L in zip(diffs, Ls)) < 10.0


def test_no_intersection_invariant(rng):
    for _ in range(4):
        q = scaled_to_raw(float(rng.uniform(6, 25)), float(rng.uniform(-2, 2)),
                          float(rng.uniform(-2, 2)), float(rng.uniform(0.3, 0.7)))
        fam = build_saddle_contours(q)
        assert family_min_distance(fam) > 1e-3


def test_natural_mode_sits_on_saddles():
    # widely separated per-side saddles: natural mode anchors each contour
    # at its own saddle instead of forcing the nesting
    q = scaled_to_raw(6.0, -3.0, 5.5, 0.5)
    fam = build_saddle_contours(q, mode="natural")
    assert fam.ordering == "natural"
    g1, g2 = saddle_points(q)
    apex = fam.gamma_R_in[1].anchor + 1j * fam.gamma_R_in[1].length / 2
    assert apex.real == pytest.approx(g1.right)
    assert abs(apex.imag) < 1e-12
    apex_mid = fam.gamma_R[1].anchor + 1j * fam.gamma_R[1].length / 2
    assert apex_mid.real == pytest.approx(g2.right)
    assert family_min_distance(fam) > 1e-6
    # strict mode still builds here but parks the eta-1 contour far from
    # its saddle (the reason natural mode exists)
    strict = build_saddle_contours(q)
    apex_s = strict.gamma_R_in[1].anchor + 1j * strict.gamma_R_in[1].length / 2
    assert abs(apex_s.real - g1.right) > 1.0


# -- certificates and discretisation ----------------------------------------

def test_certificate_linear_example():
    cert = DecayCertificate(log_amplitude=0.0, linear_rate=1.0, cubic_rate=0.0)
    assert cert.truncation_length(30.0) == pytest.approx(30.0)
    assert cert.tail_bound(30.0) <= math.exp(-30.0) * (1 + 1e-12)


def test_certificate_from_cubic_validity(rng):
    for _ in range(20):
        c = (float(rng.uniform(-5, 5)), float(rng.uniform(-4, 4)),
             float(rng.uniform(-3, 3)), float(rng.uniform(-2.0, -0.1)))
        p = int(rng.integers(0, 13))
        cert = cubic_decay_certificate(c, p)
        w = np.linspace(0.0, 20.0, 400)
        envelope = cert.log_amplitude - cert.linear_rate * w - cert.cubic_rate * w ** 3
        actual = c[0] + c[1] * w + c[2] * w ** 2 + c[3] * w ** 3 + p * w
        assert np.all(actual <= envelope + 1e-9)


def test_certificate_requires_decay():
    with pytest.raises(CertificateError):
        cubic_decay_certificate((0.0, 1.0, 0.0, 0.5))


def _finite_segment_grid(a, b, order=16):
    seg = PathSegment(a, (b - a) / abs(b - a), abs(b - a), +1)
    fam_like = [("seg", (seg,))]

    class Stub:
        log_cap = 36.0

        def items(self):
            return iter(fam_like)

    return discretize(Stub(), PanelScheme(order=order, panels_per_unit=1.0),
                      {})["seg"]


def test_grid_exact_on_constants():
    a, b = -0.3 + 0.2j, 1.1 + 0.9j
    g = _finite_segment_grid(a, b)
    total = g.weights.sum()
    want = (b - a) / (2j * math.pi)
    assert abs(total - want) <= 1e-13 * abs(want)


def test_grid_polynomial_exactness():
    g = _finite_segment_grid(-1.0 + 0j, 1.0 + 0j)
    val = (g.weights * g.nodes ** 2).sum()
    want = (2.0 / 3.0) / (2j * math.pi)
    assert abs(val - want) <= 1e-13


def test_discretize_requires_certificates():
    fam = build_lemma32_contours(9.0, Lemma32ContourParams(1.0, 1.3, 1.8))
    with pytest.raises(CertificateError):
        discretize(fam, PanelScheme())


def test_ray_truncation_length_and_bound():
    seg = PathSegment(0j, complex(math.cos(2 * math.pi / 3), math.sin(2 * math.pi / 3)),
                      math.inf, +1)

    class Stub:
        log_cap = 30.0

        def items(self):
            return iter([("ray", (seg,))])

    cert = DecayCertificate(0.0, 1.0, 0.0)
    g = discretize(Stub(), PanelScheme(order=8, ray_first=5.0, ray_stretch=2.0),
                   {("ray", 0): cert}, log_cap=30.0)["ray"]
    # nodes live on the first 30 units of the ray
    dist = np.abs(g.nodes)
    assert dist.max() <= 30.0 + 1e-9
    assert dist.max() >= 29.0
    assert g.truncation_bound <= math.exp(-30.0) * (1 + 1e-12)


def test_grid_csv_export(tmp_path):
    q = DensityQuery(4.5, 4.5, 0.0, 0.5)
    from dlgeo.density import build_grids, TruncationPolicy
    fam = build_saddle_contours(q)
    grids = build_grids(q, fam, TruncationPolicy().scheme)
    path = tmp_path / "grids.csv"
    export_grids_csv(grids, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "contour_id,segment_id,node_re,node_im,weight_re,weight_im"
    assert len(lines) == 1 + sum(len(g.nodes) for g in grids.values())
    names = {ln.split(",")[0] for ln in lines[1:]}
    assert names == {n.replace(",", "_") for n in CONTOUR_NAMES}
