"""Grid-graph shortest-path oracle for annulus distances.

Builds a (t, theta, phi) product mesh with an 8-neighborhood on each leaf,
t-neighbors, t-theta / t-phi diagonals, pole supernodes, and boundary rings,
weights every edge by the midpoint metric, and answers distance queries with
the selected Dijkstra kernel.  First-order convergent upper-bound estimate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ._kernels import dijkstra
from .fields import AnnulusField, FieldEval


@dataclass(frozen=True)
class MeshParams:
    n_t: int = 25
    n_polar: int = 25
    n_phi: int = 48
    t_lo: float = 0.0
    t_hi: Optional[float] = None

    @staticmethod
    def at_refinement(level: int, t_lo: float = 0.0, t_hi: Optional[float] = None
                      ) -> "MeshParams":
        f = 2 ** (level - 1)
        return MeshParams(n_t=24 * f + 1, n_polar=24 * f + 1, n_phi=48 * f,
                          t_lo=t_lo, t_hi=t_hi)


class GraphOracle:
    """One mesh graph over a field (or bare evaluator) plus query points."""

    def __init__(self, field_or_ev, T: Optional[float] = None,
                 params: MeshParams = MeshParams(),
                 points: Sequence = ()):
        if isinstance(field_or_ev, AnnulusField):
            self.ev: FieldEval = field_or_ev.eval()
            T = field_or_ev.times.T
        else:
            self.ev = field_or_ev
            if T is None:
                raise ValueError("bare evaluators need an explicit horizon T")
        self.params = params
        t_hi = T if params.t_hi is None else params.t_hi
        self.t_levels = np.linspace(params.t_lo, t_hi, params.n_t)
        self.theta_rows = np.arange(1, params.n_polar + 1) * np.pi / (params.n_polar + 1)
        self.phi_cols = np.linspace(0.0, 2 * np.pi, params.n_phi, endpoint=False)
        self.points = [np.asarray(p, dtype=float) for p in points]
        self._build()

    # node ids: grid nodes, then 2 poles per level, then query points
    def _nid(self, it, ith, iph):
        P, F = self.params.n_polar, self.params.n_phi
        return it * (P * F) + ith * F + iph

    def _pole(self, it, south):
        P, F = self.params.n_polar, self.params.n_phi
        return self.params.n_t * P * F + 2 * it + int(south)

    def _metric_w(self, tm, thm, phm, dt, dth, dph):
        e = 1.0 / self.ev.h(tm, thm, phm) ** 2
        gtt, gtp, gpp = self.ev.g_components(tm, thm, phm)
        val = e * dt**2 + gtt * dth**2 + 2.0 * gtp * dth * dph + gpp * dph**2
        return np.sqrt(np.maximum(val, 0.0))

    def _metric_w1(self, *args):
        return float(np.asarray(self._metric_w(*args)).reshape(-1)[0])

    def _build(self):
        pr = self.params
        nt, P, F = pr.n_t, pr.n_polar, pr.n_phi
        tl, th, ph = self.t_levels, self.theta_rows, self.phi_cols
        dph = 2 * np.pi / F
        dth = th[1] - th[0] if P > 1 else np.pi / 2
        dt = tl[1] - tl[0] if nt > 1 else 0.0

        IT, ITH, IPH = np.meshgrid(np.arange(nt), np.arange(P), np.arange(F),
                                   indexing="ij")
        IT, ITH, IPH = IT.ravel(), ITH.ravel(), IPH.ravel()
        us, vs, ws = [], [], []

        def add(mask, it2, ith2, iph2, ddt, ddth, ddph):
            it, ith, iph = IT[mask], ITH[mask], IPH[mask]
            jt, jth, jph = it2[mask], ith2[mask], iph2[mask] % F
            tm = 0.5 * (tl[it] + tl[jt])
            thm = 0.5 * (th[ith] + th[jth])
            phm = ph[iph] + 0.5 * ddph
            w = self._metric_w(tm, thm, phm, ddt, ddth, ddph)
            us.append(self._nid(it, ith, iph))
            vs.append(self._nid(jt, jth, jph))
            ws.append(w)

        ones = np.ones_like(IT)
        full = np.ones(IT.shape, dtype=bool)
        # leaf 8-neighborhood (phi step, theta step, two diagonals)
        add(full, IT, ITH, IPH + 1, 0.0, 0.0, dph)
        m = ITH + 1 < P
        add(m, IT, ITH + 1, IPH, 0.0, dth, 0.0)
        add(m, IT, ITH + 1, IPH + 1, 0.0, dth, dph)
        add(m, IT, ITH + 1, IPH - 1 + F * ones, 0.0, dth, -dph)
        # flow-direction neighbors and diagonals
        m = IT + 1 < nt
        add(m, IT + 1, ITH, IPH, dt, 0.0, 0.0)
        add(m & (ITH + 1 < P), IT + 1, ITH + 1, IPH, dt, dth, 0.0)
        add(m & (ITH - 1 >= 0), IT + 1, ITH - 1, IPH, dt, -dth, 0.0)
        add(m, IT + 1, ITH, IPH + 1, dt, 0.0, dph)
        add(m, IT + 1, ITH, IPH - 1 + F * ones, dt, 0.0, -dph)

        # pole supernodes: connect to the adjacent ring and along t
        its = np.repeat(np.arange(nt), F)
        iphs = np.tile(np.arange(F), nt)
        for south, ring, thp in ((False, 0, 0.0), (True, P - 1, np.pi)):
            dthp = th[0] if not south else np.pi - th[-1]
            tm = tl[its]
            thm = 0.5 * (thp + th[ring])
            w = self._metric_w(tm, thm, ph[iphs], 0.0, dthp, 0.0)
            us.append(np.array([self._pole(it, south) for it in its]))
            vs.append(self._nid(its, ring, iphs))
            ws.append(w)
        for south in (False, True):
            it = np.arange(nt - 1)
            tm = 0.5 * (tl[it] + tl[it + 1])
            thp = 1e-6 if not south else np.pi - 1e-6
            w = self._metric_w(tm, thp, 0.0, dt, 0.0, 0.0)
            us.append(np.array([self._pole(i, south) for i in it]))
            vs.append(np.array([self._pole(i + 1, south) for i in it]))
            ws.append(w * np.ones_like(tm))

        u = np.concatenate(us)
        v = np.concatenate(vs)
        w = np.concatenate(ws)
        self.h_mesh = float(w.max())
        self.n_mesh = nt * P * F + 2 * nt

        # query-point rows (directed out of the point; targets use neighbor-min)
        self._pt_nbrs, self._pt_ws = [], []
        pu, pv, pw = [], [], []
        for k, p in enumerate(self.points):
            nbr, wts = self._point_links(p)
            self._pt_nbrs.append(nbr)
            self._pt_ws.append(wts)
            pid = self.n_mesh + k
            pu.append(np.full(len(nbr), pid))
            pv.append(nbr)
            pw.append(wts)
        n = self.n_mesh + len(self.points)
        uu = np.concatenate([u, v] + pu) if pu else np.concatenate([u, v])
        vv = np.concatenate([v, u] + pv) if pv else np.concatenate([v, u])
        ww = np.concatenate([w, w] + pw) if pw else np.concatenate([w, w])
        order = np.argsort(uu, kind="stable")
        uu, self._indices, self._weights = uu[order], vv[order].astype(np.int32), ww[order]
        self._indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(self._indptr, uu + 1, 1)
        self._indptr = np.cumsum(self._indptr)
        self.n_nodes = n

    def _point_links(self, p):
        pr = self.params
        t, theta, phi = p
        phi = np.mod(phi, 2 * np.pi)
        it0 = int(np.clip(np.searchsorted(self.t_levels, t) - 1, 0, pr.n_t - 1))
        ith0 = int(np.clip(np.searchsorted(self.theta_rows, theta) - 1, 0, pr.n_polar - 1))
        iph0 = int(phi / (2 * np.pi / pr.n_phi)) % pr.n_phi
        ids, wts = [], []
        for it in range(max(it0 - 1, 0), min(it0 + 3, pr.n_t)):
            for ith in range(max(ith0 - 1, 0), min(ith0 + 3, pr.n_polar)):
                for diph in range(-1, 3):
                    iph = (iph0 + diph) % pr.n_phi
                    tt, th2, ph2 = (self.t_levels[it], self.theta_rows[ith],
                                    self.phi_cols[iph])
                    dphi = np.mod(ph2 - phi + np.pi, 2 * np.pi) - np.pi
                    w = self._metric_w1(0.5 * (t + tt), 0.5 * (theta + th2),
                                        phi + 0.5 * dphi, tt - t, th2 - theta, dphi)
                    ids.append(self._nid(it, ith, iph))
                    wts.append(w)
        if theta < self.theta_rows[0]:
            for it in range(max(it0 - 1, 0), min(it0 + 3, pr.n_t)):
                w = self._metric_w1(0.5 * (t + self.t_levels[it]), 0.5 * theta,
                                    phi, self.t_levels[it] - t, -theta, 0.0)
                ids.append(self._pole(it, False))
                wts.append(w)
        if theta > self.theta_rows[-1]:
            for it in range(max(it0 - 1, 0), min(it0 + 3, pr.n_t)):
                w = self._metric_w1(0.5 * (t + self.t_levels[it]),
                                    0.5 * (theta + np.pi), phi,
                                    self.t_levels[it] - t, np.pi - theta, 0.0)
                ids.append(self._pole(it, True))
                wts.append(w)
        return np.array(ids, dtype=np.int64), np.array(wts)

    # -- queries ------------------------------------------------------------
    def _from_point(self, k: int) -> np.ndarray:
        return dijkstra(self._indptr, self._indices, self._weights,
                        int(self.n_mesh + k))

    def _direct(self, pf, pt):
        """Single-segment candidate, valid only for cell-scale separations."""
        pr = self.params
        dt_c = self.t_levels[1] - self.t_levels[0] if pr.n_t > 1 else np.inf
        dth_c = np.pi / (pr.n_polar + 1)
        dph_c = 2 * np.pi / pr.n_phi
        dphi = np.mod(pt[2] - pf[2] + np.pi, 2 * np.pi) - np.pi
        if (abs(pt[0] - pf[0]) > 2 * dt_c or abs(pt[1] - pf[1]) > 2 * dth_c
                or abs(dphi) > 2 * dph_c):
            return np.inf
        return self._metric_w1(0.5 * (pf[0] + pt[0]), 0.5 * (pf[1] + pt[1]),
                               pf[2] + 0.5 * dphi,
                               pt[0] - pf[0], pt[1] - pf[1], dphi)

    def distance(self, k_from: int, k_to: int) -> float:
        if k_from == k_to:
            return 0.0
        dist = self._from_point(k_from)
        via = dist[self._pt_nbrs[k_to]] + self._pt_ws[k_to]
        best = float(via.min())
        return min(best, self._direct(self.points[k_from], self.points[k_to]))

    def matrix(self) -> np.ndarray:
        n = len(self.points)
        mat = np.zeros((n, n))
        for i in range(n):
            dist = self._from_point(i)
            for j in range(i + 1, n):
                via = dist[self._pt_nbrs[j]] + self._pt_ws[j]
                d = min(float(via.min()), self._direct(self.points[i], self.points[j]))
                mat[i, j] = mat[j, i] = d
        return mat
