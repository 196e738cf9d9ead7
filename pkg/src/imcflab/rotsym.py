"""Rotationally symmetric 3-metrics ds^2 + f(s)^2 sigma and their flows.

Coordinate spheres foliate these metrics exactly: H = 2 f'/f, the leaves are
umbilic with A = (H/2) g, and the area law forces flow time t = 2 ln(f/f(0)).
The module builds the example families (flat, Schwarzschild, gravity wells),
converts profiles to :class:`AnnulusField` data, and audits class membership.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.integrate import cumulative_simpson, solve_ivp
from scipy.interpolate import CubicSpline

from .bumps import bump_window, smoothstep5
from .fields import AnnulusField, ClassBounds, hawking_mass, leaf_area, rotsym_field_from_h
from .grids import SphereGrid, TimeGrid
from .leafops import principal_curvatures


@dataclass
class RotSymProfile:
    """Areal-radius profile f(s) of a rotationally symmetric metric.

    Derivative samples may be supplied by the constructor (the example
    families all know f' in closed form); otherwise they come from the f
    spline.  Evaluation between nodes is spline-backed either way; not-a-knot
    ends, since natural ends would force f'' = 0 there and cost four orders
    of accuracy in the mass diagnostics.
    """

    s_nodes: np.ndarray
    f: np.ndarray
    fp: Optional[np.ndarray] = None
    label: str = ""
    _spline: CubicSpline = dc_field(default=None, repr=False)
    _dspline: CubicSpline = dc_field(default=None, repr=False)

    def __post_init__(self):
        self.s_nodes = np.asarray(self.s_nodes, dtype=float)
        self.f = np.asarray(self.f, dtype=float)
        if self._spline is None:
            self._spline = CubicSpline(self.s_nodes, self.f, bc_type="not-a-knot")
        if self.fp is None:
            self.fp = self._spline.derivative(1)(self.s_nodes)
        else:
            self.fp = np.asarray(self.fp, dtype=float)
        if self._dspline is None:
            self._dspline = CubicSpline(self.s_nodes, self.fp, bc_type="not-a-knot")
        if np.any(self.f <= 0):
            raise ValueError("areal radius must be positive")
        if np.any(self.fp <= 0):
            raise ValueError("profile needs f' > 0 (mean curvature positivity)")
        # stored slope must be the slope of the stored radii; the O(ds^2)
        # comparison constant scales with the profile's own third derivative
        ds = np.diff(self.s_nodes).max()
        fd = np.gradient(self.f, self.s_nodes)[2:-2]
        f3 = np.gradient(np.gradient(self.fp, self.s_nodes), self.s_nodes)
        tol = ds**2 * (np.abs(f3).max() + 1.0) * 10.0 + 1e-10
        if np.abs(fd - self.fp[2:-2]).max() > tol:
            raise ValueError("stored f' is inconsistent with the f samples")

    @property
    def f_prime(self) -> np.ndarray:
        return self.fp

    @property
    def f_second(self) -> np.ndarray:
        return self._dspline.derivative(1)(self.s_nodes)

    def at(self, s):
        """(f, f', f'') at arbitrary s."""
        s = np.asarray(s, dtype=float)
        return (self._spline(s), self._dspline(s),
                self._dspline.derivative(1)(s))


@dataclass(frozen=True)
class FamilyParams:
    """Parameters of the rotationally symmetric example families.

    ``gravity_well`` has two templates.  With m == 0 the slope f' dips by
    ``well_depth`` over a collar of width ``well_width`` and returns to flat;
    the return edge necessarily carries some negative scalar curvature (a
    metric that is flat on both sides of a well cannot have R >= 0), so R is
    only checked a posteriori.  With m > 0 the well is realized as a smooth
    mass turn-on across the collar, which keeps R >= 0 at the price of a
    Schwarzschild far side.
    """

    kind: str
    r0: float = 1.0
    m: float = 0.0
    well_depth: float = 0.0
    well_width: float = 1.0
    well_center: float = 0.5

    def __post_init__(self):
        if self.kind not in ("flat", "schwarzschild", "gravity_well"):
            raise ValueError(f"unknown family kind {self.kind!r}")
        if self.m < 0:
            raise ValueError("mass parameter must be nonnegative")
        if self.well_width <= 0:
            raise ValueError("well width must be positive")
        if not 0.0 <= self.well_depth < 1.0:
            raise ValueError("well depth is the f' dip and must lie in [0, 1)")


def _solve_f_ode(fprime_of, r0: float, s_max: float, n: int):
    sol = solve_ivp(lambda s, y: [fprime_of(s, y[0])], (0.0, s_max), [r0],
                    method="DOP853", rtol=1e-12, atol=1e-13, dense_output=True)
    if not sol.success:
        raise ValueError(f"profile integration failed: {sol.message}")
    s = np.linspace(0.0, s_max, n)
    f = sol.sol(s)[0]
    fp = np.array([fprime_of(sk, fk) for sk, fk in zip(s, f)])
    return s, f, fp


def make_profile(params: FamilyParams, s_range=(0.0, 3.0), n: int = 2049) -> RotSymProfile:
    """Build one family member on the arclength window ``s_range``."""
    s_min, s_max = s_range
    if s_min != 0.0:
        raise ValueError("profiles are anchored at s = 0")
    r0 = params.r0

    if params.kind == "flat":
        s = np.linspace(0.0, s_max, n)
        return RotSymProfile(s, r0 + s, fp=np.ones(n), label="flat")

    if params.kind == "schwarzschild":
        if r0 <= 2.0 * params.m:
            raise ValueError(
                f"horizon violation: need f(0) = {r0} > 2m = {2 * params.m}")
        s, f, fp = _solve_f_ode(
            lambda s, f: np.sqrt(max(1.0 - 2.0 * params.m / f, 0.0)),
            r0, s_max, n)
        return RotSymProfile(s, f, fp=fp, label=f"schwarzschild(m={params.m})")

    # gravity_well
    c, w, d = params.well_center, params.well_width, params.well_depth
    if params.m > 0.0:
        # mass turn-on across the collar: R = 4 mu'/(f' f^2) >= 0 by shape
        def mu(s):
            return params.m * smoothstep5((s - c) / w + 0.5)

        def fprime(s, f):
            val = 1.0 - 2.0 * mu(s) / f
            if val <= 0.0:
                raise ValueError("well parameters drive f' to zero (f <= 2 mu)")
            return np.sqrt(val)

        s, f, fp = _solve_f_ode(fprime, r0, s_max, n)
        prof = RotSymProfile(s, f, fp=fp, label=f"masswell(m={params.m},w={w})")
    else:
        if d <= 0.0:
            s = np.linspace(0.0, s_max, n)
            return RotSymProfile(s, r0 + s, fp=np.ones(n),
                                 label="gravity_well(depth=0)")
        s = np.linspace(0.0, s_max, n)
        fp = 1.0 - d * bump_window((s - (c - 0.5 * w)) / w)
        if np.any(fp <= 0):
            raise ValueError("well depth drives f' nonpositive")
        f = r0 + cumulative_simpson(fp, x=s, initial=0.0)
        prof = RotSymProfile(s, f, fp=fp, label=f"dipwell(d={d},w={w})")
    if np.any(prof.f_prime <= 0):
        raise ValueError("constructed well violates f' > 0")
    return prof


# -- pointwise curvature of the profile ---------------------------------------

def mean_curvature_profile(p: RotSymProfile) -> np.ndarray:
    """H(s) = 2 f'/f of the coordinate spheres."""
    return 2.0 * p.f_prime / p.f


def scalar_curvature_profile(p: RotSymProfile) -> np.ndarray:
    """R(s) = 2 (1 - f'^2)/f^2 - 4 f''/f."""
    fp, fpp = p.f_prime, p.f_second
    return 2.0 * (1.0 - fp**2) / p.f**2 - 4.0 * fpp / p.f


def ricci_nn_profile(p: RotSymProfile) -> np.ndarray:
    """Radial Ricci curvature Rc(nu, nu) = -2 f''/f."""
    return -2.0 * p.f_second / p.f


def sectional_tangent_profile(p: RotSymProfile) -> np.ndarray:
    """Ambient sectional curvature tangent to the spheres: (1 - f'^2)/f^2."""
    return (1.0 - p.f_prime**2) / p.f**2


def hawking_mass_profile(p: RotSymProfile) -> np.ndarray:
    """m_H(s) = (f/2)(1 - f'^2)."""
    return 0.5 * p.f * (1.0 - p.f_prime**2)


# -- flow-time reparameterization ----------------------------------------------

@dataclass
class ReparamResult:
    t_of_s: CubicSpline
    s_of_t: CubicSpline
    field: AnnulusField
    profile: RotSymProfile


def reparam_to_imcf_time(p: RotSymProfile, sphere: SphereGrid,
                         times: TimeGrid) -> ReparamResult:
    """Reparameterize the profile by flow time t = 2 ln(f(s)/f(0)).

    The returned field has r0 = f(0), H(t) = H(s(t)) and the leaf metric
    forced to r0^2 e^t sigma by the area law.
    """
    f0 = p.f[0]
    t_s = 2.0 * np.log(p.f / f0)
    if np.any(np.diff(t_s) <= 0):
        raise ValueError("flow time is not strictly increasing along the profile")
    if t_s[-1] < times.T:
        raise ValueError(
            f"profile covers t up to {t_s[-1]:.4f} < requested horizon {times.T}")
    t_of_s = CubicSpline(p.s_nodes, t_s)
    s_of_t = CubicSpline(t_s, p.s_nodes)
    s_at = s_of_t(times.t_nodes)
    f, fp, _ = p.at(s_at)
    h_t = 2.0 * fp / f
    field = rotsym_field_from_h(f0, sphere, times, h_t, label=p.label)
    return ReparamResult(t_of_s=t_of_s, s_of_t=s_of_t, field=field, profile=p)


# -- class membership audit ----------------------------------------------------

@dataclass
class ConditionReport:
    name: str
    passed: bool
    worst_value: float
    worst_node: tuple
    margin: float


@dataclass
class ClassReport:
    conditions: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions)

    def __getitem__(self, name: str) -> ConditionReport:
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)


def validate_class_membership(field: AnnulusField, bounds: ClassBounds,
                              area_rtol: float = 1e-6) -> ClassReport:
    """Check the declared bounds node-wise; violations become report entries."""
    conds = []
    n_t = field.times.n_t

    h_min, h_min_node = np.inf, None
    h_max, h_max_node = -np.inf, None
    a_max, a_max_node = -np.inf, None
    for i in range(n_t):
        H = field.H_leaf(i)
        lo = np.unravel_index(np.argmin(H), H.shape)
        hi = np.unravel_index(np.argmax(H), H.shape)
        if H[lo] < h_min:
            h_min, h_min_node = float(H[lo]), (i, *map(int, lo))
        if H[hi] > h_max:
            h_max, h_max_node = float(H[hi]), (i, *map(int, hi))
        lam1, lam2 = principal_curvatures(field.g_leaf(i), field.A_leaf(i))
        a_norm = np.sqrt(lam1**2 + lam2**2)
        am = np.unravel_index(np.argmax(a_norm), a_norm.shape)
        if a_norm[am] > a_max:
            a_max, a_max_node = float(a_norm[am]), (i, *map(int, am))

    conds.append(ConditionReport("H_lower", h_min >= bounds.H0, h_min,
                                 h_min_node, h_min - bounds.H0))
    conds.append(ConditionReport("H_upper", h_max <= bounds.H1, h_max,
                                 h_max_node, bounds.H1 - h_max))
    conds.append(ConditionReport("A_bound", a_max <= bounds.A1, a_max,
                                 a_max_node, bounds.A1 - a_max))

    area0 = leaf_area(field, 0)
    target = 4.0 * np.pi * bounds.r0**2
    area_ok = abs(area0 - target) <= area_rtol * target
    conds.append(ConditionReport("area_radius", bool(area_ok), area0, (0,),
                                 area_rtol * target - abs(area0 - target)))

    m0 = hawking_mass(field, 0)
    conds.append(ConditionReport("hawking_nonneg", m0 >= -1e-12, m0, (0,), m0))
    return ClassReport(conds)


# -- serialization ---------------------------------------------------------------

def write_profile_csv(p: RotSymProfile, path, params: Optional[FamilyParams] = None):
    """Profile CSV (s, f, f', f'', R, H, m_H) plus a JSON parameter sidecar."""
    path = Path(path)
    R = scalar_curvature_profile(p)
    H = mean_curvature_profile(p)
    mh = hawking_mass_profile(p)
    fp, fpp = p.f_prime, p.f_second
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["s", "f", "f_prime", "f_second", "R", "H", "m_H"])
        for row in zip(p.s_nodes, p.f, fp, fpp, R, H, mh):
            writer.writerow([repr(float(v)) for v in row])
    if params is not None:
        sidecar = path.with_suffix(path.suffix + ".json")
        with open(sidecar, "w") as fh:
            json.dump({"kind": params.kind, "r0": params.r0, "m": params.m,
                       "well_depth": params.well_depth,
                       "well_width": params.well_width,
                       "well_center": params.well_center,
                       "label": p.label}, fh, indent=2, sort_keys=True)
