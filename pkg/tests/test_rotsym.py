import json

import numpy as np
import pytest

from imcflab import ClassBounds, TimeGrid, hawking_mass
from imcflab.rotsym import (FamilyParams, RotSymProfile, hawking_mass_profile,
                            make_profile, mean_curvature_profile,
                            reparam_to_imcf_time, ricci_nn_profile,
                            scalar_curvature_profile, validate_class_membership,
                            write_profile_csv)


def test_flat_profile_values():
    p = make_profile(FamilyParams(kind="flat", r0=1.0), (0.0, 2.0), 257)
    k = np.argmin(np.abs(p.s_nodes - 1.0))
    assert abs(p.f[k] - 2.0) < 1e-12
    assert np.abs(p.f_prime - 1.0).max() < 1e-10
    assert np.abs(hawking_mass_profile(p)).max() < 1e-9
    assert np.abs(scalar_curvature_profile(p)).max() < 1e-6


def test_schwarzschild_slope_closed_form():
    p = make_profile(FamilyParams(kind="schwarzschild", r0=3.0, m=1.0),
                     (0.0, 2.0), 1025)
    assert abs(p.f_prime[0] - np.sqrt(1.0 / 3.0)) < 1e-8
    H = mean_curvature_profile(p)
    assert abs(H[0] - (2.0 / 3.0) * np.sqrt(1.0 / 3.0)) < 1e-8
    # m_H constant across the profile, scalar curvature cancels
    assert np.abs(hawking_mass_profile(p) - 1.0).max() < 1e-8
    assert np.abs(scalar_curvature_profile(p)[5:-5]).max() < 1e-8
    assert np.abs(ricci_nn_profile(p) + 2.0 / p.f**3).max() < 1e-6


def test_schwarzschild_near_horizon_H_small():
    p = make_profile(FamilyParams(kind="schwarzschild", r0=2.0 + 1e-4, m=1.0),
                     (0.0, 0.5), 513)
    assert mean_curvature_profile(p)[0] < 0.02


def test_horizon_violation_rejected():
    with pytest.raises(ValueError, match="horizon"):
        make_profile(FamilyParams(kind="schwarzschild", r0=1.0, m=1.0))


def test_round_cap_scalar_curvature():
    s = np.linspace(0.4, 1.4, 513)
    p = RotSymProfile(s_nodes=s - 0.4, f=np.sin(s), fp=np.cos(s))
    R = scalar_curvature_profile(p)
    assert np.abs(R[5:-5] - 6.0).max() < 1e-6


def test_gravity_well_depth_zero_is_flat():
    p = make_profile(FamilyParams(kind="gravity_well", r0=1.0, well_depth=0.0),
                     (0.0, 2.0), 257)
    assert np.abs(p.f - (1.0 + p.s_nodes)).max() < 1e-12


def test_gravity_well_dip_template():
    p = make_profile(FamilyParams(kind="gravity_well", r0=1.0, well_depth=0.4,
                                  well_width=0.5, well_center=1.0), (0.0, 2.5), 2049)
    fp = p.f_prime
    assert fp.min() < 0.65 and fp.min() > 0.55   # dips by ~0.4
    assert abs(fp[0] - 1) < 1e-8 and abs(fp[-1] - 1) < 1e-8
    # returning to flat forces some negative scalar curvature at the exit edge
    assert scalar_curvature_profile(p).min() < 0


def test_gravity_well_mass_template_R_nonneg():
    p = make_profile(FamilyParams(kind="gravity_well", r0=1.0, m=0.1,
                                  well_width=0.5, well_center=0.8), (0.0, 2.5), 4097)
    R = scalar_curvature_profile(p)
    assert R.min() > -1e-6           # spline-noise floor at the collar joins
    mh = hawking_mass_profile(p)
    assert np.all(np.diff(mh) > -1e-10)
    assert abs(mh[-1] - 0.1) < 1e-6
    assert abs(mh[0]) < 1e-9


def test_excessive_well_rejected():
    with pytest.raises(ValueError):
        make_profile(FamilyParams(kind="gravity_well", r0=0.05, m=0.2,
                                  well_width=0.25, well_center=0.2), (0.0, 1.0))


def test_geroch_monotone_random_mass_wells():
    rng = np.random.default_rng(11)
    n_ok = 0
    while n_ok < 10:
        m = rng.uniform(0.02, 0.3)
        w = rng.uniform(0.2, 0.8)
        c = rng.uniform(0.4, 1.2)
        p = make_profile(FamilyParams(kind="gravity_well", r0=1.0, m=m,
                                      well_width=w, well_center=c), (0.0, 3.0), 4097)
        if scalar_curvature_profile(p).min() < -1e-6 or p.f_prime.min() <= 0:
            continue
        n_ok += 1
        mh = hawking_mass_profile(p)
        assert np.diff(mh).min() > -1e-10


def test_reparam_flat_closed_form(small_sphere):
    p = make_profile(FamilyParams(kind="flat", r0=1.0), (0.0, 2.0), 1025)
    rep = reparam_to_imcf_time(p, small_sphere, TimeGrid(1.0, 65))
    s = np.linspace(0.0, 1.5, 64)
    assert np.abs(rep.t_of_s(s) - 2 * np.log(1 + s)).max() < 1e-10
    t = np.linspace(0.0, 1.0, 64)
    assert np.abs(rep.s_of_t(t) - (np.exp(t / 2) - 1)).max() < 1e-10
    assert abs(rep.t_of_s(0.0)) < 1e-14


def test_reparam_roundtrip_and_area_law(schwarzschild_heavy):
    rep = schwarzschild_heavy
    s = np.linspace(0.0, 4.0, 257)
    assert np.abs(rep.s_of_t(rep.t_of_s(s)) - s).max() < 1e-10
    f = rep.field
    from imcflab import leaf_area
    for i in (0, 51, 128):
        t = f.times.t_nodes[i]
        assert abs(leaf_area(f, i) - 36 * np.pi * np.exp(t)) < 1e-10 * 36 * np.pi


def test_profile_vs_quadrature_hawking(schwarzschild_unit):
    rep = schwarzschild_unit
    mh_prof = hawking_mass_profile(rep.profile)
    for i in (0, 64, 128):
        s = float(rep.s_of_t(rep.field.times.t_nodes[i]))
        expect = np.interp(s, rep.profile.s_nodes, mh_prof)
        assert abs(hawking_mass(rep.field, i) - expect) < 1e-8


def test_reparam_rejects_short_profile(small_sphere):
    p = make_profile(FamilyParams(kind="flat", r0=1.0), (0.0, 0.2), 257)
    with pytest.raises(ValueError, match="horizon"):
        reparam_to_imcf_time(p, small_sphere, TimeGrid(1.0, 65))


def test_validate_class_membership(flat_small):
    ok = ClassBounds(r0=1.0, H0=0.5, H1=2.5, A1=3.0, T=1.0)
    rep = validate_class_membership(flat_small, ok)
    assert rep.passed
    # |A| = H/sqrt(2) for the umbilic round leaves
    assert abs(rep["A_bound"].worst_value - 2.0 / np.sqrt(2.0)) < 1e-12
    tight = ClassBounds(r0=1.0, H0=0.5, H1=1.0, A1=3.0, T=1.0)
    rep2 = validate_class_membership(flat_small, tight)
    assert not rep2["H_upper"].passed
    assert rep2["H_upper"].worst_node[0] == 0       # worst at t = 0
    assert rep2["H_lower"].passed


def test_validate_near_horizon_margin(small_sphere):
    p = make_profile(FamilyParams(kind="schwarzschild", r0=2.01, m=1.0),
                     (0.0, 3.0), 2049)
    rep_t = reparam_to_imcf_time(p, small_sphere, TimeGrid(0.5, 33))
    bounds = ClassBounds(r0=2.01, H0=0.05, H1=2.0, A1=3.0, T=0.5)
    rep = validate_class_membership(rep_t.field, bounds)
    assert rep["H_lower"].margin < 0.05     # tiny margin above the floor


def test_profile_consistency_invariant():
    p = make_profile(FamilyParams(kind="schwarzschild", r0=1.0, m=0.2),
                     (0.0, 1.5), 1025)
    fd = np.gradient(p.f, p.s_nodes)
    ds = p.s_nodes[1] - p.s_nodes[0]
    assert np.abs(fd[2:-2] - p.f_prime[2:-2]).max() < 10 * ds**2


def test_rejects_nonpositive_slope():
    s = np.linspace(0.0, 1.0, 65)
    with pytest.raises(ValueError):
        RotSymProfile(s_nodes=s, f=1.0 + np.sin(4 * s))


def test_profile_csv_roundtrip(tmp_path):
    params = FamilyParams(kind="schwarzschild", r0=1.0, m=0.1)
    p = make_profile(params, (0.0, 1.0), 129)
    path = tmp_path / "prof.csv"
    write_profile_csv(p, path, params)
    rows = path.read_text().strip().splitlines()
    assert rows[0] == "s,f,f_prime,f_second,R,H,m_H"
    assert len(rows) == 130
    side = json.loads((tmp_path / "prof.csv.json").read_text())
    assert side["kind"] == "schwarzschild" and side["m"] == 0.1
