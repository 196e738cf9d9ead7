"""Geodesic integration, two-route distance solving, and distance samples.

``integrate_geodesic`` advances the standard geodesic system
``x''^a = -Gamma^a_bc x'^b x'^c`` of ghat with a fixed-step RK4 scheme and
event localization at the annulus boundaries.  ``shoot_distance`` solves the
two-point problem (exactly reduced for rotationally symmetric fields,
Nelder-Mead direction search otherwise) and ``graph_distance`` is the
independent mesh-graph oracle.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np

from .fields import AnnulusField, FieldEval
from .graphmesh import GraphOracle, MeshParams
from .shooting import ShootResult, strip_distance_points, strip_for_field


@dataclass
class GeodesicState:
    T: float
    theta: float
    phi: float
    dT: float
    dtheta: float
    dphi: float

    def as_array(self) -> np.ndarray:
        return np.array([self.T, self.theta, self.phi,
                         self.dT, self.dtheta, self.dphi])

    @staticmethod
    def from_array(y) -> "GeodesicState":
        return GeodesicState(*map(float, y))


def _leaf_christoffel(ev: FieldEval, t, th, ph, eps=1e-6):
    """Leaf symbols Gamma^k_ij at a point; closed form for round-leaf fields."""
    if getattr(ev, "leaf_round", ev.rotsym):
        out = np.zeros((2, 2, 2))
        s, c = np.sin(th), np.cos(th)
        out[0, 1, 1] = -s * c
        cot = c / s
        out[1, 0, 1] = out[1, 1, 0] = cot
        return out
    # numeric derivatives of the metric components
    def comps(tt, hh, pp):
        a, b, c_ = ev.g_components(tt, hh, pp)
        return np.array([[a, b], [b, c_]], dtype=float).reshape(2, 2)

    g = comps(t, th, ph)
    dth_g = (comps(t, th + eps, ph) - comps(t, th - eps, ph)) / (2 * eps)
    dph_g = (comps(t, th, ph + eps) - comps(t, th, ph - eps)) / (2 * eps)
    dg = np.stack([dth_g, dph_g])           # d_l g_ab
    ginv = np.linalg.inv(g)
    out = np.zeros((2, 2, 2))
    for k in range(2):
        for i in range(2):
            for j in range(2):
                s = 0.0
                for l in range(2):
                    s += ginv[k, l] * (dg[i][l, j] + dg[j][l, i] - dg[l][i, j])
                out[k, i, j] = 0.5 * s
    return out


def geodesic_rhs(ev: FieldEval, y: np.ndarray) -> np.ndarray:
    T, th, ph, dT, dth, dph = y
    h = float(np.asarray(ev.h(T, th, ph)).reshape(()))
    ht, hth, hph = (float(np.asarray(v).reshape(())) for v in ev.dh(T, th, ph))
    att, atp, app = (float(np.asarray(v).reshape(())) for v in ev.a_components(T, th, ph))
    gtt, gtp, gpp = (float(np.asarray(v).reshape(())) for v in ev.g_components(T, th, ph))

    A_q = att * dth * dth + 2 * atp * dth * dph + app * dph * dph
    ddT = (ht / h) * dT * dT + (2.0 / h) * (hth * dth + hph * dph) * dT + h * A_q

    det = gtt * gpp - gtp * gtp
    ginv = np.array([[gpp, -gtp], [-gtp, gtt]]) / det
    A = np.array([[att, atp], [atp, app]])
    dang = np.array([dth, dph])
    gradH = np.array([hth, hph])
    gamma = _leaf_christoffel(ev, T, th, ph)
    dd_ang = (-np.einsum("kij,i,j->k", gamma, dang, dang)
              - (2.0 / h) * (ginv @ (A @ dang)) * dT
              - (dT * dT / h**3) * (ginv @ gradH))
    return np.array([dT, dth, dph, ddT, dd_ang[0], dd_ang[1]])


def ghat_speed_sq(ev: FieldEval, y: np.ndarray) -> float:
    T, th, ph, dT, dth, dph = y
    h = float(np.asarray(ev.h(T, th, ph)).reshape(()))
    gtt, gtp, gpp = (float(np.asarray(v).reshape(())) for v in ev.g_components(T, th, ph))
    return dT * dT / h**2 + gtt * dth**2 + 2 * gtp * dth * dph + gpp * dph**2


@dataclass
class GeodesicPath:
    s: np.ndarray
    states: np.ndarray              # (n, 6)
    stop_reason: str                # "length" | "boundary" | "pole" | "h_floor"
    energy_drift: float

    def state(self, k) -> GeodesicState:
        return GeodesicState.from_array(self.states[k])

    def zero_dT_events(self):
        """Indices where dT changes sign strictly inside the path."""
        s = np.sign(self.states[:, 3])
        return [k for k in range(1, len(s) - 1) if s[k - 1] != s[k + 1] and
                (s[k] == 0 or s[k - 1] * s[k + 1] < 0)]


def _rk4_step(ev, y, h):
    k1 = geodesic_rhs(ev, y)
    k2 = geodesic_rhs(ev, y + 0.5 * h * k1)
    k3 = geodesic_rhs(ev, y + 0.5 * h * k2)
    k4 = geodesic_rhs(ev, y + h * k3)
    return y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def integrate_geodesic(field: AnnulusField, init: GeodesicState, length: float,
                       step: float = 1e-3, h0: Optional[float] = None,
                       drift_budget: float = 1e-6) -> GeodesicPath:
    """Unit-speed geodesic of ghat from ``init``; stops at boundary crossings.

    The initial velocity is normalized to unit ghat-speed.  Hitting mean
    curvature below 1e-8 of the declared class floor ``h0`` aborts the run
    (the admissible class demands H bounded away from zero), as does a pole
    approach where the chart degenerates.  A run whose speed drift exceeds
    ``drift_budget`` per unit length is rejected and retried at half step
    (twice), then flagged.
    """
    budget = drift_budget * max(length, 1.0)
    for attempt in range(3):
        path = _integrate_fixed_step(field, init, length, step, h0)
        if path.energy_drift <= budget or attempt == 2:
            return path
        step *= 0.5
    return path


def _integrate_fixed_step(field: AnnulusField, init: GeodesicState,
                          length: float, step: float,
                          h0: Optional[float]) -> GeodesicPath:
    ev = field.eval()
    T_max = field.times.T
    y = init.as_array()
    sp = np.sqrt(ghat_speed_sq(ev, y))
    if sp <= 0:
        raise ValueError("initial velocity must be nonzero")
    y[3:] /= sp
    h_floor = 1e-8 * (field.h_min() if h0 is None else h0)

    out = [y.copy()]
    svals = [0.0]
    s = 0.0
    reason = "length"
    while s < length - 1e-15:
        hstep = min(step, length - s)
        y_new = _rk4_step(ev, y, hstep)
        if not (0.0 <= y_new[0] <= T_max):
            # event localization: bisect the step onto the boundary
            lo, hi = 0.0, hstep
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                ymid = _rk4_step(ev, y, mid)
                if 0.0 <= ymid[0] <= T_max:
                    lo = mid
                else:
                    hi = mid
            y = _rk4_step(ev, y, lo)
            bound = 0.0 if abs(y[0]) < abs(y[0] - T_max) else T_max
            y[0] = min(max(y[0], 0.0), T_max) if abs(y[0] - bound) > 1e-12 else bound
            s += lo
            out.append(y.copy())
            svals.append(s)
            reason = "boundary"
            break
        if float(np.asarray(ev.h(y_new[0], y_new[1], y_new[2])).reshape(())) < h_floor:
            reason = "h_floor"
            break
        if np.sin(y_new[1]) < 1e-9:
            reason = "pole"
            break
        y = y_new
        s += hstep
        out.append(y.copy())
        svals.append(s)

    states = np.array(out)
    drift = abs(np.sqrt(ghat_speed_sq(ev, states[-1])) - 1.0)
    return GeodesicPath(np.array(svals), states, reason, drift)


# -- two-point distances --------------------------------------------------------

def _flat_chart(r0, pts):
    pts = np.atleast_2d(pts)
    r = r0 * np.exp(0.5 * pts[:, 0])
    th, ph = pts[:, 1], pts[:, 2]
    return np.column_stack([r * np.sin(th) * np.cos(ph),
                            r * np.sin(th) * np.sin(ph),
                            r * np.cos(th)])


def _shoot_3d(field: AnnulusField, p, q, step=4e-3) -> ShootResult:
    """Direction search for general fields; results carry a local-min flag."""
    from scipy.optimize import minimize

    ev = field.eval()
    p, q = np.asarray(p, float), np.asarray(q, float)
    xq = _flat_chart(field.r0, q)[0]
    h = float(np.asarray(ev.h(*p)).reshape(()))
    gtt, gtp, gpp = (float(np.asarray(v).reshape(())) for v in ev.g_components(*p))
    # ghat-orthonormal frame at p
    e0 = np.array([h, 0.0, 0.0])
    e1 = np.array([0.0, 1.0 / np.sqrt(gtt), 0.0])
    v2 = np.array([0.0, -gtp / gtt, 1.0])
    n2 = np.sqrt(gpp - gtp**2 / gtt)
    e2 = v2 / n2
    cap = 4.0 * float(np.linalg.norm(_flat_chart(field.r0, p)[0] - xq)) + 1.0

    best = {"miss": np.inf, "s": np.inf}

    def run(angles):
        a, b = angles
        v = (np.cos(a) * e0 + np.sin(a) * np.cos(b) * e1 + np.sin(a) * np.sin(b) * e2)
        init = GeodesicState(p[0], p[1], p[2], *v)
        path = integrate_geodesic(field, init, cap, step=step)
        xs = _flat_chart(field.r0, path.states[:, :3])
        miss = np.linalg.norm(xs - xq, axis=1)
        k = int(np.argmin(miss))
        if miss[k] < best["miss"]:
            best["miss"], best["s"] = float(miss[k]), float(path.s[k])
        return float(miss[k])

    # aim along the flat chart as the starting guess
    d0 = xq - _flat_chart(field.r0, p)[0]
    guess = None
    for a in np.linspace(0.1, np.pi - 0.1, 5):
        for b in np.linspace(0, 2 * np.pi, 6, endpoint=False):
            v = np.cos(a) * e0 + np.sin(a) * np.cos(b) * e1 + np.sin(a) * np.sin(b) * e2
            move = _flat_chart(field.r0, p + 1e-3 * v)[0] - _flat_chart(field.r0, p)[0]
            score = -np.dot(move, d0)
            if guess is None or score < guess[0]:
                guess = (score, (a, b))
    res = minimize(run, x0=np.array(guess[1]), method="Nelder-Mead",
                   options={"xatol": 1e-6, "fatol": 1e-10, "maxiter": 60})
    run(res.x)
    tol = 0.05 * cap
    if best["miss"] > tol:
        g = graph_distance(field, p, q)
        return ShootResult(g.distance, method="graph", fallback=True)
    return ShootResult(best["s"], method="shooting", local_min_only=True)


def shoot_distance(field: AnnulusField, p, q, t_lo: float = None,
                   t_hi: float = None) -> ShootResult:
    """Minimal geodesic length between two (t, theta, phi) points.

    Rotationally symmetric fields reduce to the great-circle strip and are
    solved by bisection on the launch direction; general fields run a
    Nelder-Mead direction search and fall back to the graph oracle.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if np.allclose(p, q):
        return ShootResult(0.0, branch="point")
    if field.eval().rotsym:
        strip = strip_for_field(field, t_lo=t_lo, t_hi=t_hi)
        res = strip_distance_points(strip, p, q)
        if res.fallback:
            g = graph_distance(field, p, q, t_lo=t_lo or 0.0, t_hi=t_hi)
            return ShootResult(g.distance, method="graph", fallback=True)
        return res
    return _shoot_3d(field, p, q)


@dataclass
class GraphResult:
    distance: float
    h: float
    method: str = "graph"
    mesh: Optional[MeshParams] = None


def graph_distance(field: AnnulusField, p, q, refinement: int = 1,
                   t_lo: float = 0.0, t_hi: float = None) -> GraphResult:
    """Mesh-graph distance; ``refinement`` doubles the oracle mesh per level."""
    params = MeshParams.at_refinement(refinement, t_lo=t_lo, t_hi=t_hi)
    oracle = GraphOracle(field, params=params, points=[p, q])
    return GraphResult(oracle.distance(0, 1), h=oracle.h_mesh, mesh=params)


# -- distance samples ------------------------------------------------------------

@dataclass
class DistanceSample:
    points: np.ndarray              # (n, 3) rows (t, theta, phi)
    matrix: np.ndarray              # (n, n) symmetric, zero diagonal
    method: str                     # "shooting" | "graph"
    mesh: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        self.matrix = np.asarray(self.matrix, dtype=float)
        n = len(self.points)
        if self.matrix.shape != (n, n):
            raise ValueError("matrix shape does not match the point list")
        if not np.allclose(self.matrix, self.matrix.T, atol=1e-12):
            raise ValueError("distance matrix must be symmetric")
        if np.any(np.abs(np.diag(self.matrix)) > 1e-12):
            raise ValueError("distance matrix needs a zero diagonal")

    def triangle_violation(self) -> float:
        """Worst violation of d(i,k) <= d(i,j) + d(j,k); <= 0 when none."""
        m = self.matrix
        worst = -np.inf
        n = len(m)
        for j in range(n):
            viol = m - (m[:, j][:, None] + m[j][None, :])
            worst = max(worst, float(viol.max()))
        return worst

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            fh.write(f"# method={self.method}\n")
            for k, v in sorted(self.mesh.items()):
                fh.write(f"# mesh.{k}={v}\n")
            writer = csv.writer(fh)
            writer.writerow(["t", "theta", "phi"])
            for row in self.points:
                writer.writerow([repr(float(x)) for x in row])
            writer.writerow([])
            for row in self.matrix:
                writer.writerow([repr(float(x)) for x in row])


def distance_sample(field: AnnulusField, points, method: str = "auto",
                    refinement: int = 1, t_lo: float = 0.0,
                    t_hi: float = None) -> DistanceSample:
    """Pairwise distances over a point set by the requested engine."""
    points = np.asarray(points, dtype=float)
    if method == "auto":
        method = "shooting" if field.eval().rotsym else "graph"
    if method == "shooting":
        strip = strip_for_field(field, t_lo=t_lo, t_hi=t_hi)
        from .shooting import strip_distance_matrix
        mat = strip_distance_matrix(strip, points)
        return DistanceSample(points, mat, "shooting",
                              {"t_lo": t_lo, "t_hi": t_hi or field.times.T})
    params = MeshParams.at_refinement(refinement, t_lo=t_lo, t_hi=t_hi)
    oracle = GraphOracle(field, params=params, points=list(points))
    return DistanceSample(points, oracle.matrix(), "graph",
                          {"n_t": params.n_t, "n_polar": params.n_polar,
                           "n_phi": params.n_phi, "h": oracle.h_mesh,
                           "t_lo": t_lo, "t_hi": t_hi or field.times.T})
