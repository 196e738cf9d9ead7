"""Annulus fields: the discretized geometry of S^2 x [0, T].

An :class:`AnnulusField` holds mean curvature H, the leaf metric g and the
second fundamental form A on a sphere x time grid.  The foliation metric is
``ghat = H^-2 dt^2 + g`` and the flat reference is
``delta = (r0^2/4) e^t dt^2 + r0^2 e^t sigma``.

Rotationally symmetric fields store only t-profiles (the leaf metric is then
forced to ``r0^2 e^t sigma`` by the area law) and broadcast per leaf; general
fields store full arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import CubicSpline

from .grids import SphereGrid, TimeGrid
from .leafops import LeafCalc, det_2x2

SIXTEEN_PI = 16.0 * np.pi


def sigma_matrix(sphere: SphereGrid) -> np.ndarray:
    """Round metric sigma = diag(1, sin^2 theta) at the grid nodes."""
    s = np.zeros((sphere.n_theta, sphere.n_phi, 2, 2))
    s[..., 0, 0] = 1.0
    s[..., 1, 1] = (sphere.sin_theta**2)[:, None]
    return s


class FieldEval:
    """Continuous (off-grid) evaluation interface used by curves/geodesics.

    Subclasses supply H, its first derivatives, and the scalar factors of a
    rotationally symmetric leaf geometry, or full componentwise callables.
    ``leaf_round`` marks evaluators whose leaf metric is a t-only multiple of
    the round metric (their leaf symbols are the round ones).
    """

    rotsym = False
    leaf_round = False

    def h(self, t, theta, phi):
        raise NotImplementedError

    def dh(self, t, theta, phi):
        """(dH/dt, dH/dtheta, dH/dphi)."""
        raise NotImplementedError

    def g_components(self, t, theta, phi):
        """(g_thth, g_thph, g_phph) of the leaf metric."""
        raise NotImplementedError

    def a_components(self, t, theta, phi):
        """(A_thth, A_thph, A_phph)."""
        raise NotImplementedError


class DeltaEval(FieldEval):
    """Closed forms for the flat annulus field."""

    rotsym = True
    leaf_round = True

    def __init__(self, r0: float):
        self.r0 = r0

    def h(self, t, theta=None, phi=None):
        return (2.0 / self.r0) * np.exp(-0.5 * np.asarray(t, dtype=float))

    def dh(self, t, theta=None, phi=None):
        h = self.h(t)
        return -0.5 * h, np.zeros_like(h), np.zeros_like(h)

    def rho2(self, t):
        return self.r0**2 * np.exp(np.asarray(t, dtype=float))

    def g_components(self, t, theta, phi):
        r2 = self.rho2(t)
        return r2, np.zeros_like(r2), r2 * np.sin(theta) ** 2

    def a_components(self, t, theta, phi):
        gtt, gtp, gpp = self.g_components(t, theta, phi)
        half_h = 0.5 * self.h(t)
        return half_h * gtt, half_h * gtp, half_h * gpp


class RotsymEval(FieldEval):
    """Spline-backed rotationally symmetric field: H = H(t), g = r0^2 e^t sigma."""

    rotsym = True
    leaf_round = True

    def __init__(self, r0: float, t_nodes: np.ndarray, h_samples: np.ndarray):
        self.r0 = r0
        self._spline = CubicSpline(t_nodes, h_samples)
        self._dspline = self._spline.derivative()

    def h(self, t, theta=None, phi=None):
        return self._spline(np.asarray(t, dtype=float))

    def dh(self, t, theta=None, phi=None):
        h = self.h(t)
        return self._dspline(np.asarray(t, dtype=float)), np.zeros_like(h), np.zeros_like(h)

    def rho2(self, t):
        return self.r0**2 * np.exp(np.asarray(t, dtype=float))

    def g_components(self, t, theta, phi):
        r2 = self.rho2(t)
        return r2, np.zeros_like(r2), r2 * np.sin(theta) ** 2

    def a_components(self, t, theta, phi):
        gtt, gtp, gpp = self.g_components(t, theta, phi)
        half_h = 0.5 * self.h(t)
        return half_h * gtt, half_h * gtp, half_h * gpp


class CallableEval(FieldEval):
    """Perturbations of the flat field given by smooth closed-form factors."""

    def __init__(self, r0: float, h_factor=None, dh_factor=None, g_factor=None,
                 dg_factor=None):
        self.r0 = r0
        self.leaf_round = g_factor is None
        self.base = DeltaEval(r0)
        self.h_factor = h_factor
        self.dh_factor = dh_factor          # (d/dt, d/dtheta, d/dphi) of h_factor
        self.g_factor = g_factor
        self.dg_factor = dg_factor

    def h(self, t, theta, phi):
        h0 = self.base.h(t)
        if self.h_factor is None:
            return h0 * np.ones_like(np.asarray(theta, dtype=float))
        return h0 * self.h_factor(t, theta, phi)

    def dh(self, t, theta, phi):
        h0 = self.base.h(t)
        if self.h_factor is None:
            z = np.zeros_like(h0 * np.ones_like(np.asarray(theta, dtype=float)))
            return -0.5 * h0 + z, z, z
        f = self.h_factor(t, theta, phi)
        ft, fth, fph = self.dh_factor(t, theta, phi)
        return -0.5 * h0 * f + h0 * ft, h0 * fth, h0 * fph

    def _gf(self, t, theta, phi):
        return 1.0 if self.g_factor is None else self.g_factor(t, theta, phi)

    def g_components(self, t, theta, phi):
        gtt, gtp, gpp = self.base.g_components(t, theta, phi)
        c = self._gf(t, theta, phi)
        return c * gtt, c * gtp, c * gpp

    def a_components(self, t, theta, phi):
        gtt, gtp, gpp = self.g_components(t, theta, phi)
        half_h = 0.5 * self.h(t, theta, phi)
        return half_h * gtt, half_h * gtp, half_h * gpp


@dataclass
class AnnulusField:
    """Sampled foliation geometry on a sphere x time grid.

    For ``rotsym`` fields only the t-profile of H is stored; ``g`` is the
    forced ``r0^2 e^t sigma`` and ``A = (H/2) g``.  General fields carry full
    (n_t, n_theta, n_phi, 2, 2) arrays for g and A.
    """

    sphere: SphereGrid
    times: TimeGrid
    r0: float
    rotsym: bool
    label: str = ""
    h_t: Optional[np.ndarray] = None                # (n_t,) when rotsym
    H_arr: Optional[np.ndarray] = None              # (n_t, nth, nph) when general
    g_arr: Optional[np.ndarray] = None              # (n_t, nth, nph, 2, 2)
    A_arr: Optional[np.ndarray] = None
    ev: Optional[FieldEval] = None
    _sigma: np.ndarray = dc_field(default=None, repr=False)

    def __post_init__(self):
        if self._sigma is None:
            self._sigma = sigma_matrix(self.sphere)
        if self.rotsym:
            if self.h_t is None:
                raise ValueError("rotsym field needs h_t samples")
            if np.any(self.h_t <= 0):
                raise ValueError("mean curvature must be positive")
        else:
            for name, arr in (("H", self.H_arr), ("g", self.g_arr), ("A", self.A_arr)):
                if arr is None:
                    raise ValueError(f"general field needs the {name} array")
            if np.any(self.H_arr <= 0):
                raise ValueError("mean curvature must be positive")
            if (np.any(self.g_arr[..., 0, 0] <= 0)
                    or np.any(det_2x2(self.g_arr) <= 0)):
                raise ValueError("leaf metric must be positive definite")
            if np.max(np.abs(self.g_arr[..., 0, 1] - self.g_arr[..., 1, 0])) > 1e-12:
                raise ValueError("leaf metric must be symmetric")

    # -- shapes -----------------------------------------------------------
    @property
    def shape(self):
        return (self.times.n_t, self.sphere.n_theta, self.sphere.n_phi)

    def rho2(self, t_index: int) -> float:
        return self.r0**2 * np.exp(self.times.t_nodes[t_index])

    # -- leaf accessors ----------------------------------------------------
    def H_leaf(self, t_index: int) -> np.ndarray:
        if self.rotsym:
            return np.broadcast_to(self.h_t[t_index], self.shape[1:])
        return self.H_arr[t_index]

    def g_leaf(self, t_index: int) -> np.ndarray:
        if self.rotsym:
            return self.rho2(t_index) * self._sigma
        return self.g_arr[t_index]

    def A_leaf(self, t_index: int) -> np.ndarray:
        if self.rotsym:
            return 0.5 * self.h_t[t_index] * self.rho2(t_index) * self._sigma
        return self.A_arr[t_index]

    def sqrt_det_g_leaf(self, t_index: int) -> np.ndarray:
        if self.rotsym:
            return self.rho2(t_index) * np.broadcast_to(
                self.sphere.sin_theta[:, None], self.shape[1:]
            )
        return np.sqrt(det_2x2(self.g_arr[t_index]))

    def H_full(self) -> np.ndarray:
        if self.rotsym:
            return np.broadcast_to(self.h_t[:, None, None], self.shape)
        return self.H_arr

    def h_min(self) -> float:
        return float(self.h_t.min()) if self.rotsym else float(self.H_arr.min())

    def h_max(self) -> float:
        return float(self.h_t.max()) if self.rotsym else float(self.H_arr.max())

    # -- continuous evaluation ----------------------------------------------
    def eval(self) -> FieldEval:
        if self.ev is None:
            self.ev = _grid_eval(self)
        return self.ev


class _GridEval(FieldEval):
    """Interpolating fallback evaluator for fields without closed forms."""

    def __init__(self, field: AnnulusField):
        from scipy.interpolate import RegularGridInterpolator

        self.rotsym = field.rotsym
        sphere, times = field.sphere, field.times
        self._interp = {}
        th = sphere.theta_nodes
        ph = np.concatenate([sphere.phi_nodes, [2.0 * np.pi]])

        def wrap(arr):
            return np.concatenate([arr, arr[:, :, :1]], axis=2)

        H = np.asarray(field.H_full())
        self._interp["H"] = RegularGridInterpolator(
            (times.t_nodes, th, ph), wrap(H), method="cubic",
            bounds_error=False, fill_value=None)
        g = np.stack([field.g_leaf(i) for i in range(times.n_t)])
        A = np.stack([field.A_leaf(i) for i in range(times.n_t)])
        for name, arr in (("g", g), ("A", A)):
            for (a, b), key in (((0, 0), "tt"), ((0, 1), "tp"), ((1, 1), "pp")):
                self._interp[f"{name}{key}"] = RegularGridInterpolator(
                    (times.t_nodes, th, ph), wrap(arr[..., a, b]), method="cubic",
                    bounds_error=False, fill_value=None)
        self._dt = 1e-5 * times.dt
        self._dang = 1e-6

    def _pt(self, t, theta, phi):
        t, theta, phi = np.broadcast_arrays(
            np.asarray(t, float), np.asarray(theta, float), np.asarray(phi, float))
        return np.stack([t, theta, np.mod(phi, 2.0 * np.pi)], axis=-1)

    def h(self, t, theta, phi):
        return self._interp["H"](self._pt(t, theta, phi))

    def dh(self, t, theta, phi):
        f = self._interp["H"]
        e, da = self._dt, self._dang
        dt = (f(self._pt(t + e, theta, phi)) - f(self._pt(t - e, theta, phi))) / (2 * e)
        dth = (f(self._pt(t, theta + da, phi)) - f(self._pt(t, theta - da, phi))) / (2 * da)
        dph = (f(self._pt(t, theta, phi + da)) - f(self._pt(t, theta, phi - da))) / (2 * da)
        return dt, dth, dph

    def g_components(self, t, theta, phi):
        p = self._pt(t, theta, phi)
        return (self._interp["gtt"](p), self._interp["gtp"](p), self._interp["gpp"](p))

    def a_components(self, t, theta, phi):
        p = self._pt(t, theta, phi)
        return (self._interp["Att"](p), self._interp["Atp"](p), self._interp["App"](p))


def _grid_eval(field: AnnulusField) -> FieldEval:
    if field.rotsym:
        return RotsymEval(field.r0, field.times.t_nodes, field.h_t)
    return _GridEval(field)


# -- constructors -----------------------------------------------------------

def build_delta(r0: float, sphere: SphereGrid, times: TimeGrid) -> AnnulusField:
    """Flat annulus field: H = (2/r0) e^{-t/2}, g = r0^2 e^t sigma, A = (H/2) g."""
    if r0 <= 0:
        raise ValueError("r0 must be positive")
    h_t = (2.0 / r0) * np.exp(-0.5 * times.t_nodes)
    return AnnulusField(sphere=sphere, times=times, r0=r0, rotsym=True,
                        label="delta", h_t=h_t, ev=DeltaEval(r0))


def rotsym_field_from_h(r0: float, sphere: SphereGrid, times: TimeGrid,
                        h_t: np.ndarray, label: str = "") -> AnnulusField:
    """Rotationally symmetric field with prescribed H(t) profile."""
    h_t = np.asarray(h_t, dtype=float)
    f = AnnulusField(sphere=sphere, times=times, r0=r0, rotsym=True,
                     label=label, h_t=h_t)
    f.ev = RotsymEval(r0, times.t_nodes, h_t)
    return f


def perturbed_delta(r0: float, sphere: SphereGrid, times: TimeGrid,
                    h_factor: Callable = None, dh_factor: Callable = None,
                    g_factor: Callable = None, label: str = "") -> AnnulusField:
    """General field built from smooth factors multiplying the flat H and g.

    ``A`` is set to (H/2) g, the umbilic convention of the synthetic families.
    """
    ev = CallableEval(r0, h_factor=h_factor, dh_factor=dh_factor, g_factor=g_factor)
    th, ph = sphere.mesh()
    n_t = times.n_t
    H = np.empty((n_t, sphere.n_theta, sphere.n_phi))
    g = np.empty((n_t, sphere.n_theta, sphere.n_phi, 2, 2))
    A = np.empty_like(g)
    for i, t in enumerate(times.t_nodes):
        H[i] = ev.h(t, th, ph)
        gtt, gtp, gpp = ev.g_components(t, th, ph)
        g[i, ..., 0, 0], g[i, ..., 0, 1] = gtt, gtp
        g[i, ..., 1, 0], g[i, ..., 1, 1] = gtp, gpp
        A[i] = 0.5 * H[i][..., None, None] * g[i]
    return AnnulusField(sphere=sphere, times=times, r0=r0, rotsym=False,
                        label=label, H_arr=H, g_arr=g, A_arr=A, ev=ev)


# -- leaf functionals --------------------------------------------------------

def integrate_leaf(field: AnnulusField, t_index: int, integrand: np.ndarray) -> float:
    """Integrate per-node samples over the leaf with the measure of g."""
    integrand = np.asarray(integrand, dtype=float)
    if not np.all(np.isfinite(integrand)):
        raise ValueError("non-finite integrand rejected")
    if integrand.shape != field.shape[1:]:
        raise ValueError("integrand shape does not match the leaf grid")
    dens = field.sqrt_det_g_leaf(t_index) / field.sphere.sin_theta[:, None]
    return field.sphere.integrate_sigma(integrand * dens)


def leaf_area(field: AnnulusField, t_index: int) -> float:
    return integrate_leaf(field, t_index, np.ones(field.shape[1:]))


def hawking_mass(field: AnnulusField, t_index: int) -> float:
    """sqrt(|Sigma|/(16 pi)^3) (16 pi - int H^2 dmu) of one leaf."""
    area = leaf_area(field, t_index)
    h2 = integrate_leaf(field, t_index, field.H_leaf(t_index) ** 2)
    return float(np.sqrt(area / SIXTEEN_PI**3) * (SIXTEEN_PI - h2))


def average_H2(field: AnnulusField, t_index: int) -> float:
    """Area average of H^2 over the leaf.

    For the round limit the value is (4/r0^2) e^{-t}; that power of r0 is
    forced by dimensional consistency with the area law.
    """
    area = leaf_area(field, t_index)
    return integrate_leaf(field, t_index, field.H_leaf(t_index) ** 2) / area


def euler_characteristic(field: AnnulusField, t_index: int) -> float:
    """(1/2 pi) int K dmu with K from g by finite differences (Brioschi)."""
    calc = LeafCalc(field.sphere)
    K = calc.gauss_curvature(field.g_leaf(t_index))
    return integrate_leaf(field, t_index, K) / (2.0 * np.pi)


def _delta_frame_norm_sq(field_r0: float, t: float, sin_theta: np.ndarray,
                         dE, dg) -> np.ndarray:
    """|D|^2 in a delta-orthonormal frame for D = dE dt^2 + dg (leaf part)."""
    scale = field_r0**2 * np.exp(t)
    out = (4.0 / scale * dE) ** 2 * np.ones(dg.shape[:-2])
    s = np.stack([np.ones_like(sin_theta), sin_theta])  # frame scalings per index
    for a in range(2):
        for b in range(2):
            out = out + (dg[..., a, b] / (scale * s[a][:, None] * s[b][:, None])) ** 2
    return out


def l2_metric_gap(fieldA: AnnulusField, fieldB: AnnulusField,
                  region=None) -> float:
    """int over the region of |ghat_A - ghat_B|^2_delta against ghat_A's volume.

    The tensor norm is the frame norm in a delta-orthonormal frame; the
    volume form is (1/H_A) sqrt(det g_A) dtheta dphi dt.
    """
    if fieldA.shape != fieldB.shape or abs(fieldA.r0 - fieldB.r0) > 1e-13:
        raise ValueError("fields live on different grids")
    times = fieldA.times
    i0, i1 = 0, times.n_t - 1
    if region is not None:
        a, b = region
        i0, i1 = times.index_of(a), times.index_of(b)
        if i1 - i0 < 2:
            raise ValueError("region must span at least three time nodes")
    sin_th = fieldA.sphere.sin_theta
    leaf_vals = np.empty(i1 - i0 + 1)
    for k, i in enumerate(range(i0, i1 + 1)):
        t = times.t_nodes[i]
        HA, HB = fieldA.H_leaf(i), fieldB.H_leaf(i)
        dE = 1.0 / HA**2 - 1.0 / HB**2
        dg = fieldA.g_leaf(i) - fieldB.g_leaf(i)
        nrm = _delta_frame_norm_sq(fieldA.r0, t, sin_th, dE, dg)
        dens = nrm / HA * fieldA.sqrt_det_g_leaf(i) / sin_th[:, None]
        leaf_vals[k] = fieldA.sphere.integrate_sigma(dens)
    return float(simpson(leaf_vals, x=times.t_nodes[i0:i1 + 1]))


# -- class bounds -------------------------------------------------------------

@dataclass(frozen=True)
class ClassBounds:
    """Declared bounds cutting out the admissible family of foliated regions.

    ``I0`` is stored only (never computed); ``h_of_t`` is an optional
    integrable envelope with 1/H <= h(t).
    """

    r0: float
    H0: float
    H1: float
    A1: float
    T: float
    I0: float = 0.0
    diam_bound: Optional[float] = None
    h_of_t: Optional[Callable] = None

    def __post_init__(self):
        if not (0 < self.H0 < self.H1 < np.inf):
            raise ValueError("need 0 < H0 < H1 < infinity")
        if min(self.r0, self.A1, self.T) <= 0 or not np.isfinite(self.r0 + self.A1 + self.T):
            raise ValueError("r0, A1, T must be positive and finite")
