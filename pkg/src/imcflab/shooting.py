"""Geodesic distances on rotationally symmetric annuli by direction shooting.

A rotationally symmetric field reduces, on the totally geodesic plane through
two points, to the strip metric E(t) dt^2 + G(t) dalpha^2 with
G(t) = r0^2 e^t (forced by the area law).  Free geodesics conserve
L = G alpha', so shooting over the launch direction is a one-dimensional
root-find on the swept angle; segment lengths and angles are quadratures with
a square-root substitution absorbing the turning-point singularity.

Paths may contain an inner-boundary arc (a great circle of the bottom
leaf), which is the minimizing shape once the free swing saturates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq

_QQ = 80
_QX, _QW = np.polynomial.legendre.leggauss(_QQ)
_QX = 0.5 * (_QX + 1.0)          # nodes on (0, 1)
_QW = 0.5 * _QW


@dataclass(frozen=True)
class StripMetric:
    """E(t) dt^2 + r0^2 e^t dalpha^2 on t in [t_lo, t_hi]."""

    E: Callable              # vectorized E(t) > 0
    r0: float
    t_lo: float
    t_hi: float

    def G(self, t):
        return self.r0**2 * np.exp(np.asarray(t, dtype=float))

    def sqrtG(self, t):
        return self.r0 * np.exp(0.5 * np.asarray(t, dtype=float))


def strip_for_field(field, t_lo=None, t_hi=None) -> StripMetric:
    """Reduced strip metric of a rotationally symmetric field's ghat."""
    ev = field.eval()
    if not ev.rotsym:
        raise ValueError("strip reduction needs a rotationally symmetric field")
    lo = 0.0 if t_lo is None else float(t_lo)
    hi = field.times.T if t_hi is None else float(t_hi)
    return StripMetric(E=lambda t: 1.0 / ev.h(t) ** 2, r0=field.r0, t_lo=lo, t_hi=hi)


def strip_for_flat(r0: float, T: float, t_lo: float = 0.0, t_hi=None) -> StripMetric:
    """Strip of the flat annulus metric (also of gbar on rotsym fields)."""
    hi = T if t_hi is None else t_hi
    return StripMetric(E=lambda t: (r0**2 / 4.0) * np.exp(np.asarray(t, dtype=float)),
                       r0=r0, t_lo=t_lo, t_hi=hi)


def _segment(strip: StripMetric, L, t_a, t_b):
    """(length, swing) of the free segment from t_a up to t_b at Clairaut L.

    The lower endpoint t_a may be a turning point (G(t_a) = L^2); the
    substitution t = t_a + (t_b - t_a) u^2 keeps the quadrature smooth.
    """
    L = np.atleast_1d(np.asarray(L, dtype=float))
    span = t_b - t_a
    if span <= 0:
        z = np.zeros_like(L)
        return z, z
    t = t_a + span * _QX[None, :] ** 2
    jac = 2.0 * span * _QX[None, :]
    G = strip.G(t)
    E = strip.E(t) * np.ones_like(G)
    gap = np.maximum(G - L[:, None] ** 2, 0.0)
    with np.errstate(divide="ignore"):
        core = np.sqrt(E * G / np.where(gap > 0, gap, np.inf))
    length = np.sum(core * jac * _QW[None, :], axis=1)
    swing = np.sum(core * (L[:, None] / G) * jac * _QW[None, :], axis=1)
    return length, swing


def _radial_length(strip: StripMetric, t_a, t_b):
    if t_b < t_a:
        t_a, t_b = t_b, t_a
    t = t_a + (t_b - t_a) * _QX
    return float((t_b - t_a) * np.sum(np.sqrt(strip.E(t)) * _QW))


@dataclass
class ShootResult:
    distance: float
    method: str = "shooting"
    branch: str = ""
    fallback: bool = False
    local_min_only: bool = False


def strip_distance(strip: StripMetric, t1: float, t2: float, alpha: float,
                   n_scan: int = 48) -> ShootResult:
    """Distance between (t1, 0) and (t2, alpha) in the strip, alpha in [0, pi]."""
    if t2 < t1:
        t1, t2 = t2, t1
    t1 = max(t1, strip.t_lo)
    t2 = min(t2, strip.t_hi)
    alpha = float(abs(alpha))
    if alpha < 1e-14:
        if abs(t2 - t1) < 1e-15:
            return ShootResult(0.0, branch="point")
        return ShootResult(_radial_length(strip, t1, t2), branch="radial")

    candidates = []

    def monotone_swing(L):
        _, sw = _segment(strip, L, t1, t2)
        return float(sw[0])

    L_top = np.sqrt(strip.G(t1))
    swing_top = monotone_swing(L_top)
    if swing_top >= alpha:
        # direct branch: swing is pointwise increasing in L, single root
        Ls = brentq(lambda L: monotone_swing(L) - alpha, 0.0, L_top, xtol=1e-13)
        ln, _ = _segment(strip, Ls, t1, t2)
        candidates.append((float(ln[0]), "direct"))

    if t1 > strip.t_lo + 1e-15:
        # dipping branch, parameterized by the turning depth t*
        def dip_swing(ts):
            L = np.sqrt(strip.G(ts))
            _, s1 = _segment(strip, L, ts, t1)
            _, s2 = _segment(strip, L, ts, t2)
            return float(s1[0] + s2[0])

        def dip_length(ts):
            L = np.sqrt(strip.G(ts))
            l1, _ = _segment(strip, L, ts, t1)
            l2, _ = _segment(strip, L, ts, t2)
            return float(l1[0] + l2[0])

        ts_grid = np.linspace(strip.t_lo, t1, n_scan)
        vals = np.array([dip_swing(ts) - alpha for ts in ts_grid])
        for k in range(len(ts_grid) - 1):
            if vals[k] == 0.0:
                candidates.append((dip_length(ts_grid[k]), "dip"))
            elif vals[k] * vals[k + 1] < 0:
                ts = brentq(lambda x: dip_swing(x) - alpha,
                            ts_grid[k], ts_grid[k + 1], xtol=1e-13)
                candidates.append((dip_length(ts), "dip"))

    # boundary branch: tangent descent to the floor, arc, tangent ascent
    L_b = np.sqrt(strip.G(strip.t_lo))
    l1, s1 = _segment(strip, L_b, strip.t_lo, t1)
    l2, s2 = _segment(strip, L_b, strip.t_lo, t2)
    free_swing = float(s1[0] + s2[0])
    if alpha >= free_swing - 1e-12:
        arc = strip.sqrtG(strip.t_lo) * max(alpha - free_swing, 0.0)
        candidates.append((float(l1[0] + l2[0]) + arc, "boundary"))

    if not candidates:
        return ShootResult(np.inf, fallback=True, branch="none")
    dist, branch = min(candidates, key=lambda c: c[0])
    return ShootResult(dist, branch=branch)


def great_circle_angle(th1, ph1, th2, ph2) -> float:
    c = (np.cos(th1) * np.cos(th2)
         + np.sin(th1) * np.sin(th2) * np.cos(ph1 - ph2))
    return float(np.arccos(np.clip(c, -1.0, 1.0)))


def _segments_vec(strip: StripMetric, L, t_a, t_b):
    """Vectorized (length, swing) of free segments with per-row limits."""
    L, t_a, t_b = np.broadcast_arrays(np.asarray(L, float), np.asarray(t_a, float),
                                      np.asarray(t_b, float))
    span = np.maximum(t_b - t_a, 0.0)
    t = t_a[..., None] + span[..., None] * _QX**2
    jac = 2.0 * span[..., None] * _QX
    G = strip.G(t)
    E = strip.E(t) * np.ones_like(G)
    gap = G - L[..., None] ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        core = np.sqrt(E * G / np.where(gap > 0, gap, np.inf))
    length = np.sum(core * jac * _QW, axis=-1)
    with np.errstate(invalid="ignore"):
        swing = np.sum(core * (L[..., None] / G) * jac * _QW, axis=-1)
    return length, swing


def strip_distance_batch(strip: StripMetric, t1, t2, alpha, iters: int = 60
                         ) -> np.ndarray:
    """Distances for many (t1, t2, alpha) rows at once.

    Vector bisection on the launch parameter per branch; rows whose residual
    check fails are re-solved by the scalar routine.
    """
    t1 = np.asarray(t1, float).copy()
    t2 = np.asarray(t2, float).copy()
    alpha = np.abs(np.asarray(alpha, float))
    swap = t2 < t1
    t1[swap], t2[swap] = t2[swap].copy(), t1[swap].copy()
    t1 = np.clip(t1, strip.t_lo, strip.t_hi)
    t2 = np.clip(t2, strip.t_lo, strip.t_hi)
    n = len(t1)
    out = np.full(n, np.nan)

    radial = alpha < 1e-14
    if np.any(radial):
        ta, tb = t1[radial], t2[radial]
        t = ta[:, None] + (tb - ta)[:, None] * _QX
        out[radial] = np.sum(np.sqrt(strip.E(t)) * _QW, axis=-1) * (tb - ta)

    todo = ~radial
    L_top = np.sqrt(strip.G(t1))
    _, swing_top = _segments_vec(strip, L_top, t1, t2)

    direct = todo & (swing_top >= alpha)
    if np.any(direct):
        lo = np.zeros(int(direct.sum()))
        hi = L_top[direct]
        for _ in range(iters):
            mid = 0.5 * (lo + hi)
            _, sw = _segments_vec(strip, mid, t1[direct], t2[direct])
            high = sw > alpha[direct]
            hi = np.where(high, mid, hi)
            lo = np.where(high, lo, mid)
        mid = 0.5 * (lo + hi)
        ln, sw = _segments_vec(strip, mid, t1[direct], t2[direct])
        res = np.abs(sw - alpha[direct])
        vals = np.where(res < 1e-7 * (1.0 + alpha[direct]), ln, np.nan)
        out[direct] = vals

    deep = todo & ~direct
    if np.any(deep):
        L_b = np.sqrt(strip.G(strip.t_lo))
        l1, s1 = _segments_vec(strip, np.full(int(deep.sum()), L_b),
                               np.full(int(deep.sum()), strip.t_lo), t1[deep])
        l2, s2 = _segments_vec(strip, np.full(int(deep.sum()), L_b),
                               np.full(int(deep.sum()), strip.t_lo), t2[deep])
        free_swing = s1 + s2
        free_len = l1 + l2
        a = alpha[deep]
        boundary = a >= free_swing
        vals = np.where(boundary,
                        free_len + strip.sqrtG(strip.t_lo) * np.maximum(a - free_swing, 0.0),
                        np.nan)
        # dipping rows: turning depth bisection on [t_lo, t1]
        dip = ~boundary
        if np.any(dip):
            idx = np.where(deep)[0][dip]
            lo = np.full(len(idx), strip.t_lo)
            hi = t1[idx]
            for _ in range(iters):
                mid = 0.5 * (lo + hi)
                Lm = np.sqrt(strip.G(mid))
                _, sa = _segments_vec(strip, Lm, mid, t1[idx])
                _, sb = _segments_vec(strip, Lm, mid, t2[idx])
                sw = sa + sb
                # swing shrinks as the turning point rises toward t1
                low = sw < alpha[idx]
                hi = np.where(low, mid, hi)
                lo = np.where(low, lo, mid)
            mid = 0.5 * (lo + hi)
            Lm = np.sqrt(strip.G(mid))
            la, sa = _segments_vec(strip, Lm, mid, t1[idx])
            lb, sb = _segments_vec(strip, Lm, mid, t2[idx])
            res = np.abs(sa + sb - alpha[idx])
            dip_vals = np.where(res < 1e-7 * (1.0 + alpha[idx]), la + lb, np.nan)
            tmp = vals.copy()
            tmp[dip] = dip_vals
            vals = tmp
        out[deep] = vals

    bad = np.isnan(out)
    for k in np.where(bad)[0]:
        out[k] = strip_distance(strip, t1[k], t2[k], alpha[k]).distance
    return out


def strip_distance_points(strip: StripMetric, p, q) -> ShootResult:
    """Distance between (t, theta, phi) points via the strip reduction."""
    alpha = great_circle_angle(p[1], p[2], q[1], q[2])
    return strip_distance(strip, p[0], q[0], alpha)


def strip_distance_matrix(strip: StripMetric, points: np.ndarray) -> np.ndarray:
    """Symmetric pairwise distance matrix over (t, theta, phi) points."""
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    iu, ju = np.triu_indices(n, k=1)
    cth = np.cos(pts[:, 1])
    sth = np.sin(pts[:, 1])
    cosang = (cth[iu] * cth[ju]
              + sth[iu] * sth[ju] * np.cos(pts[iu, 2] - pts[ju, 2]))
    alpha = np.arccos(np.clip(cosang, -1.0, 1.0))
    vals = strip_distance_batch(strip, pts[iu, 0], pts[ju, 0], alpha)
    mat = np.zeros((n, n))
    mat[iu, ju] = vals
    mat[ju, iu] = vals
    return mat


# -- closed-form oracle for the flat annulus ----------------------------------

def flat_annulus_distance(r0: float, p, q, r_floor: Optional[float] = None) -> float:
    """Exact Euclidean distance in the annulus outside radius r_floor.

    Points are (t, theta, phi) with radius r = r0 e^{t/2}; the shortest path
    is the chord when it clears the floor sphere, otherwise two tangents
    joined by a great-circle arc on the floor.
    """
    rf = r0 if r_floor is None else r_floor
    r1, r2 = r0 * np.exp(0.5 * p[0]), r0 * np.exp(0.5 * q[0])
    alpha = great_circle_angle(p[1], p[2], q[1], q[2])
    chord = np.sqrt(max(r1**2 + r2**2 - 2.0 * r1 * r2 * np.cos(alpha), 0.0))
    if alpha <= 1e-15:
        return float(abs(r2 - r1))
    # distance from the center to the chord
    h = r1 * r2 * np.sin(alpha) / chord if chord > 0 else min(r1, r2)
    clears = (h >= rf) or (np.cos(alpha) >= 0 and
                           min(r1, r2) ** 2 >= max(r1, r2) ** 2 - chord**2)
    # the foot of the perpendicular lies between the endpoints iff both
    # projections are acute; otherwise the chord stays outside the floor
    cos1 = (r1**2 + chord**2 - r2**2) / (2.0 * r1 * chord) if chord > 0 else 1.0
    cos2 = (r2**2 + chord**2 - r1**2) / (2.0 * r2 * chord) if chord > 0 else 1.0
    if cos1 < 0 or cos2 < 0:
        clears = True          # obtuse corner: closest approach is an endpoint
    else:
        clears = h >= rf
    if clears:
        return float(chord)
    tangent = np.sqrt(r1**2 - rf**2) + np.sqrt(r2**2 - rf**2)
    wrap = alpha - np.arccos(np.clip(rf / r1, -1, 1)) - np.arccos(np.clip(rf / r2, -1, 1))
    return float(tangent + rf * max(wrap, 0.0))
