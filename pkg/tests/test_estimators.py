import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from imcflab import (Curve, SphereGrid, TimeGrid, build_delta, curve_length,
                     diameter_bound_check, distance_lower_bound_check,
                     distance_sample, embedding_constant, hls_bounds,
                     length_gap_dt, length_gap_leaf, sample_points,
                     select_parallel_curve, swif_excision_bound,
                     swif_pair_bound, uniform_distance, volume_bound_check,
                     well_embedded_gap)
from imcflab.estimators import (DeltaMetric, EmbeddingReport, GhatMetric,
                                curve_from_functions)
from imcflab.fields import perturbed_delta, rotsym_field_from_h
from imcflab.geodesics import DistanceSample

from helpers import perturbed_field

T_LN4 = 2.0 * np.log(2.0)


# -- curves -----------------------------------------------------------------------

def test_curve_validation():
    with pytest.raises(ValueError):
        Curve(np.array([[0.0, 1.0, 1.0], [0.0, 1.0, 1.0]]))
    with pytest.raises(ValueError):
        Curve(np.array([[0.0, 1, 1], [0.5, 1, 1], [0.2, 1, 1]]), monotone_t=True)
    c = Curve(np.array([[0.0, 1, 1], [0.5, 1, 1], [0.2, 1, 1]]))
    assert not c.monotone_t


def test_curve_length_examples(flat_ln4):
    ev = flat_ln4.eval()
    radial = curve_from_functions(lambda s: T_LN4 * s,
                                  lambda s: np.full_like(s, 1.0),
                                  lambda s: np.full_like(s, 2.0), n=4001)
    assert abs(curve_length(GhatMetric(ev), radial) - 1.0) < 1e-6
    loop = curve_from_functions(lambda s: np.zeros_like(s),
                                lambda s: np.full_like(s, np.pi / 2),
                                lambda s: 2 * np.pi * s, n=4001, closed=True)
    assert abs(curve_length(DeltaMetric(1.0), loop) - 2 * np.pi) < 1e-5


def test_curve_length_homogeneity(flat_small):
    # scaling the leaf metric by 4 doubles the length of a leaf curve
    loop = curve_from_functions(lambda s: np.zeros_like(s),
                                lambda s: np.full_like(s, np.pi / 2),
                                lambda s: np.pi * s, n=2001)
    base = curve_length(DeltaMetric(1.0), loop)
    scaled = curve_length(DeltaMetric(2.0), loop)   # g scales by r0^2 = 4
    assert abs(scaled - 2 * base) < 1e-10


def test_curve_outside_domain_rejected(flat_small):
    c = curve_from_functions(lambda s: 2.0 * s, lambda s: np.full_like(s, 1.0),
                             lambda s: np.full_like(s, 1.0), n=64)
    with pytest.raises(ValueError):
        curve_length(GhatMetric(flat_small.eval()), c, T_max=flat_small.times.T)


# -- length gaps -------------------------------------------------------------------

def _random_monotone_curve(rng, T, n=801):
    t0 = rng.uniform(0, 0.3 * T)
    t1 = rng.uniform(0.6 * T, T)
    th0, th1 = rng.uniform(0.4, np.pi - 0.4, 2)
    ph0 = rng.uniform(0, 2 * np.pi)
    dph = rng.uniform(-1.5, 1.5)
    w = rng.uniform(0.5, 2.0)
    return curve_from_functions(
        lambda s: t0 + (t1 - t0) * s,
        lambda s: th0 + (th1 - th0) * (3 * s**2 - 2 * s**3),
        lambda s: ph0 + dph * np.sin(w * s) / np.sin(w), n=n)


def test_length_gap_dt_flat_zero(flat_small):
    c = _random_monotone_curve(np.random.default_rng(0), 1.0)
    g = length_gap_dt(flat_small, c)
    assert g.lhs < 1e-12
    assert g.rhs_corrected < 1e-7


def test_length_gap_dt_shifted_coefficient(small_sphere, small_times):
    # 1/H^2 = (r0^2/4) e^t + eps exactly
    eps = 0.01
    t = small_times.t_nodes
    h_t = 1.0 / np.sqrt(0.25 * np.exp(t) + eps)
    f = rotsym_field_from_h(1.0, small_sphere, small_times, h_t)
    c = curve_from_functions(lambda s: s, lambda s: np.full_like(s, 1.2),
                             lambda s: np.full_like(s, 0.5), n=2001)
    g = length_gap_dt(f, c)
    assert g.lhs <= g.rhs_corrected
    assert g.rhs_corrected == pytest.approx(np.sqrt(1.0) * (eps**2) ** 0.25, rel=1e-3)


def test_length_gap_dt_random_sweep(small_sphere, small_times):
    rng = np.random.default_rng(23)
    fields = [perturbed_field(1.0, small_sphere, small_times,
                              eps=rng.uniform(0.01, 0.2), a=rng.uniform(0.5, 2),
                              c=rng.integers(1, 3))
              for _ in range(3)]
    for f in fields:
        for _ in range(15):
            c = _random_monotone_curve(rng, 1.0)
            g = length_gap_dt(f, c)
            assert g.lhs <= g.rhs_corrected + 1e-12


def test_length_gap_dt_rejects_non_monotone(flat_small):
    c = Curve(np.array([[0.0, 1, 1], [0.5, 1.1, 1], [0.2, 1.2, 1]]))
    with pytest.raises(ValueError):
        length_gap_dt(flat_small, c)


def test_length_gap_leaf_exact_round(flat_small):
    c = _random_monotone_curve(np.random.default_rng(1), 1.0)
    g = length_gap_leaf(flat_small, c)
    assert g.lhs < 1e-12 and g.rhs < 1e-7


def test_length_gap_leaf_conformal(small_sphere, small_times):
    eps = 0.01
    f = perturbed_delta(1.0, small_sphere, small_times,
                        g_factor=lambda t, th, ph: 1.0 + eps)
    rng = np.random.default_rng(4)
    for _ in range(10):
        c = _random_monotone_curve(rng, 1.0)
        g = length_gap_leaf(f, c)
        assert g.lhs <= g.rhs + 1e-12
        assert g.integral > 0


# -- parallel-curve selection ---------------------------------------------------------

def _radial_chart_line(t0, t1, th, ph, n=301):
    return curve_from_functions(lambda s: t0 + (t1 - t0) * s,
                                lambda s: np.full_like(s, th),
                                lambda s: np.full_like(s, ph), n=n)


def test_select_parallel_flat_tie(flat_small):
    c = _radial_chart_line(0.1, 0.8, 1.1, 0.4)
    sel = select_parallel_curve(flat_small, c, eps=0.05)
    assert np.allclose(sel.tau, 0.0)
    assert sel.connector_length == 0.0


def test_select_parallel_avoids_ridge(small_sphere, small_times):
    # ridge of bad radial coefficient along the phi = 0.4 meridian
    def factor(t, th, ph):
        return 1.0 + 0.5 * np.exp(-((np.mod(ph - 0.4 + np.pi, 2 * np.pi)
                                     - np.pi) / 0.05) ** 2)
    f = perturbed_delta(1.0, small_sphere, small_times, h_factor=factor)
    c = _radial_chart_line(0.1, 0.8, np.pi / 2, 0.4)
    sel = select_parallel_curve(f, c, eps=0.1)
    assert np.linalg.norm(sel.tau) > 0
    base = select_parallel_curve(f, c, eps=1e-9)
    assert sel.objective < base.objective
    assert sel.connector_length <= 2 * 0.1 + 1e-12


def test_select_parallel_rejects_crooked(flat_small):
    c = _random_monotone_curve(np.random.default_rng(2), 1.0)
    with pytest.raises(ValueError):
        select_parallel_curve(flat_small, c, eps=0.05)


# -- uniform distance / embedding ------------------------------------------------------

def test_uniform_distance_trivial_and_doubled(flat_small):
    pts = sample_points(flat_small.times, 6, 2)
    ds = distance_sample(flat_small, pts)
    assert uniform_distance(ds, ds).value == 0.0
    doubled = DistanceSample(pts, 2 * ds.matrix, "shooting")
    u = uniform_distance(ds, doubled)
    assert abs(u.value - ds.matrix.max()) < 1e-14
    i, j = u.argmax
    assert ds.matrix[i, j] == ds.matrix.max()


def test_uniform_distance_schwarzschild_trend(small_sphere, small_times):
    from imcflab.rotsym import FamilyParams, make_profile, reparam_to_imcf_time
    flat = build_delta(1.0, small_sphere, small_times)
    pts = sample_points(small_times, 10, 4)
    ds_flat = distance_sample(flat, pts)
    vals = []
    for m in (0.05, 0.02, 0.01):
        prof = make_profile(FamilyParams(kind="schwarzschild", r0=1.0, m=m),
                            (0.0, 1.2), n=1025)
        rep = reparam_to_imcf_time(prof, small_sphere, small_times)
        vals.append(uniform_distance(distance_sample(rep.field, pts), ds_flat).value)
    assert vals[0] > vals[1] > vals[2] > 0


def test_uniform_distance_is_a_metric(flat_small):
    pts = sample_points(flat_small.times, 5, 2)
    base = distance_sample(flat_small, pts)
    rng = np.random.default_rng(8)
    samples = [base]
    for _ in range(2):
        bump = rng.uniform(0.9, 1.1, size=base.matrix.shape)
        bump = 0.5 * (bump + bump.T)
        np.fill_diagonal(bump, 0.0)
        samples.append(DistanceSample(pts, base.matrix * bump, "shooting"))
    a, b, c = samples
    dab = uniform_distance(a, b).value
    dbc = uniform_distance(b, c).value
    dac = uniform_distance(a, c).value
    assert dac <= dab + dbc + 1e-12
    assert dab == uniform_distance(b, a).value
    assert uniform_distance(a, a).value == 0.0


def test_uniform_distance_rejects_point_mismatch(flat_small):
    pts = sample_points(flat_small.times, 5, 2)
    ds = distance_sample(flat_small, pts)
    other = DistanceSample(pts + 0.01, ds.matrix, "shooting")
    with pytest.raises(ValueError):
        uniform_distance(ds, other)


def test_embedding_constant_trivial_and_formula(flat_small):
    pts = sample_points(flat_small.times, 6, 2)
    ds = distance_sample(flat_small, pts)
    rep = embedding_constant(ds, ds)
    assert rep.C_M == 0.0 and rep.S_M == 0.0
    made = EmbeddingReport(C_M=1.0, S_M=np.sqrt(1.0 * (3.0 + 1.0)), diam=3.0,
                           argmax_pair=(0, 1))
    assert made.S_M == 2.0


def test_embedding_constant_flat_collar_vs_graph(flat_small):
    pts = sample_points(flat_small.times, 8, 3, t_lo=0.1, t_hi=0.9)
    sub = distance_sample(flat_small, pts, t_lo=0.1, t_hi=0.9)
    full = distance_sample(flat_small, pts)
    emb = embedding_constant(sub, full)
    assert emb.C_M > 0
    sub_g = distance_sample(flat_small, pts, method="graph", t_lo=0.1, t_hi=0.9)
    full_g = distance_sample(flat_small, pts, method="graph")
    emb_g = embedding_constant(sub_g, full_g)
    h = sub_g.mesh["h"]
    assert abs(emb_g.C_M - emb.C_M) < 6 * h


def test_embedding_requires_subset(flat_small):
    pts = sample_points(flat_small.times, 5, 2)
    ds = distance_sample(flat_small, pts)
    shifted = DistanceSample(pts + 0.11, ds.matrix, "shooting")
    with pytest.raises(ValueError):
        embedding_constant(shifted, ds)


# -- intrinsic-flat ledgers -------------------------------------------------------------

def test_swif_pair_bound_arithmetic():
    a = EmbeddingReport(C_M=0.0, S_M=0.1, diam=1.0, argmax_pair=(0, 0))
    b = EmbeddingReport(C_M=0.0, S_M=0.0, diam=1.0, argmax_pair=(0, 0))
    rep = swif_pair_bound(a, b, volumes=(10.0, 1.0), areas=(4.0, 1.0),
                          wall_terms=(0.0, 0.0))
    assert abs(rep.total - 1.4) < 1e-14
    zero = swif_pair_bound(b, b, (0, 0), (0, 0), (0, 0))
    assert zero.total == 0.0
    # monotone nondecreasing in every input term
    more = swif_pair_bound(a, b, (11.0, 1.0), (4.0, 1.0), (0.0, 0.0))
    assert more.total >= rep.total
    more = swif_pair_bound(a, b, (10.0, 1.0), (4.0, 1.0), (0.5, 0.2))
    assert more.total >= rep.total
    with pytest.raises(ValueError):
        swif_pair_bound(a, b, (-1.0, 0.0), (0.0, 0.0), (0.0, 0.0))


def test_swif_excision_arithmetic():
    rep = swif_excision_bound(0.1, ((0.05, 20.0), (1.0, 1.0)), (0.3, 0.4))
    assert abs(rep.total - 2.8) < 1e-14
    assert swif_excision_bound(0, ((0, 0), (0, 0)), (0, 0)).total == 0.0
    with pytest.raises(ValueError):
        swif_excision_bound(-1.0, ((0, 0), (0, 0)), (0, 0))


@given(st.lists(st.floats(min_value=0, max_value=10), min_size=7, max_size=7),
       st.floats(min_value=0, max_value=5))
@settings(max_examples=50, deadline=None)
def test_swif_bounds_monotone_in_inputs(vals, bump):
    inner, S0, z0, Si, zi, e0, ei = vals
    base = swif_excision_bound(inner, ((S0, z0), (Si, zi)), (e0, ei)).total
    more = swif_excision_bound(inner + bump, ((S0, z0), (Si, zi)), (e0, ei)).total
    assert more >= base
    more2 = swif_excision_bound(inner, ((S0 + bump, z0), (Si, zi)), (e0, ei)).total
    assert more2 >= base


def test_hls_bounds(flat_small):
    pts = sample_points(flat_small.times, 6, 2)
    ds = distance_sample(flat_small, pts)
    res = hls_bounds(ds, ds, lam=2.0, mass_term=5.0, n=3)
    assert res.eps == 0.0 and res.gh_bound == 0.0 and res.swif_bound == 0.0
    eps = 0.1
    bumped = DistanceSample(pts, ds.matrix * (1 + eps / ds.matrix.max()), "shooting")
    res2 = hls_bounds(bumped, ds, lam=2.0, mass_term=5.0, n=3)
    assert res2.gh_bound == pytest.approx(2 * res2.eps)
    assert res2.swif_bound == pytest.approx(4 * 16 * 2 * res2.eps * 5.0)
    res3 = hls_bounds(bumped, ds, lam=2.0, mass_term=10.0, n=3)
    assert res3.swif_bound == pytest.approx(2 * res2.swif_bound)


def test_hls_rejects_ratio_violation(flat_small):
    pts = sample_points(flat_small.times, 5, 2)
    ds = distance_sample(flat_small, pts)
    stretched = DistanceSample(pts, 3.0 * ds.matrix, "shooting")
    with pytest.raises(ValueError, match="ratio"):
        hls_bounds(stretched, ds, lam=2.0, mass_term=1.0, n=3)


# -- volume / diameter bounds ------------------------------------------------------------

def test_volume_bound_flat_ln4(flat_ln4):
    h_env = lambda t: 0.5 * np.exp(0.5 * np.asarray(t))
    rep = volume_bound_check(flat_ln4, h_env)
    assert abs(rep.vol - 28 * np.pi / 3) < 1e-6
    assert rep.envelope_ok
    assert rep.bound >= rep.vol
    col = volume_bound_check(flat_ln4, h_env, collar=(0.0, T_LN4))
    assert col.collar_vol == 0.0


def test_volume_envelope_violation_flagged(flat_ln4):
    rep = volume_bound_check(flat_ln4, lambda t: 0.4 * np.exp(0.5 * np.asarray(t)))
    assert not rep.envelope_ok
    assert rep.bound > 0          # bound still reported


def test_diameter_bound(flat_small):
    pts = sample_points(flat_small.times, 10, 4)
    ds = distance_sample(flat_small, pts)
    h_env = lambda t: 0.5 * np.exp(0.5 * np.asarray(t))
    D_leaf = np.pi * np.exp(0.5) + 1e-9
    rep = diameter_bound_check(flat_small, h_env, D_leaf, ds)
    assert rep.leaf_diam_ok
    assert rep.diam_est <= rep.bound
    assert rep.control_bound >= rep.diam_est


def test_diameter_degenerate_window():
    f = build_delta(1.0, SphereGrid(8, 16), TimeGrid(1e-9, 5))
    pts = sample_points(f.times, 6, 2)
    ds = distance_sample(f, pts)
    h_env = lambda t: 0.5 * np.exp(0.5 * np.asarray(t))
    D_leaf = np.pi + 1e-6
    rep = diameter_bound_check(f, h_env, D_leaf, ds)
    assert rep.bound == pytest.approx(D_leaf, rel=1e-6)


def test_schwarzschild_diameter_and_lower_bounds(schwarzschild_unit):
    f = schwarzschild_unit.field
    fp_min = float(schwarzschild_unit.profile.f_prime.min())
    h_env = lambda t: 0.5 * np.exp(0.5 * np.asarray(t)) / fp_min
    pts = sample_points(f.times, 8, 3)
    ds = distance_sample(f, pts)
    D_leaf = np.pi * np.exp(0.5) + 1e-9
    rep = diameter_bound_check(f, h_env, D_leaf, ds)
    assert rep.diam_est <= rep.bound


# -- well-embeddedness and floors -----------------------------------------------------------

def test_well_embedded_gap_full_domain_zero(flat_small):
    assert well_embedded_gap(flat_small, (0.2, 0.8), (0.0, 1.0)) == 0.0


def test_well_embedded_gap_monotone(flat_small):
    g1 = well_embedded_gap(flat_small, (0.2, 0.8), (0.1, 0.9))
    g2 = well_embedded_gap(flat_small, (0.2, 0.8), (0.05, 0.95))
    g3 = well_embedded_gap(flat_small, (0.2, 0.8), (0.0, 1.0))
    assert g1 > 0
    assert g1 >= g2 >= g3 == 0.0


def test_well_embedded_requires_nesting(flat_small):
    with pytest.raises(ValueError):
        well_embedded_gap(flat_small, (0.1, 0.9), (0.2, 0.8))


def test_distance_lower_bound_flat(flat_small):
    D = (np.exp(0.5) - 1) + np.pi * np.exp(0.5)
    rep = distance_lower_bound_check(flat_small, 50.0, D, n_sphere=5, n_levels=2)
    assert rep.hypothesis_ok and rep.checked
    assert rep.min_hat_minus_bar >= -1e-12      # metrics coincide
    assert rep.passed


def test_distance_lower_bound_perturbed(small_sphere, small_times):
    D = (np.exp(0.5) - 1) + np.pi * np.exp(0.5)
    mins = []
    for j in (10.0, 100.0, 1000.0):
        h_t = 1.0 / np.sqrt(0.25 * np.exp(small_times.t_nodes) - 1.0 / j)
        fj = rotsym_field_from_h(1.0, small_sphere, small_times, h_t)
        rep = distance_lower_bound_check(fj, j, D, n_sphere=6, n_levels=3)
        assert rep.hypothesis_ok
        assert rep.passed, (j, rep.min_hat_minus_bar, rep.floor_hat_bar)
        mins.append(rep.min_hat_minus_bar)
    assert mins[0] < mins[1] < mins[2] <= 0     # floors tighten as j grows


def test_distance_lower_bound_hypothesis_failure(small_sphere, small_times):
    h_t = 1.0 / np.sqrt(0.25 * np.exp(small_times.t_nodes) - 0.2)
    fj = rotsym_field_from_h(1.0, small_sphere, small_times, h_t)
    rep = distance_lower_bound_check(fj, 1000.0, 1.0)
    assert not rep.hypothesis_ok and not rep.checked
