"""Finite-difference calculus on leaves and along the flow direction.

theta derivatives use 5-point Fornberg weights on the (non-uniform)
Gauss-Legendre nodes, phi derivatives use 4th-order periodic central
stencils, and t derivatives use 4th-order central stencils with 2nd-order
one-sided closures at the ends.
"""

from __future__ import annotations

import numpy as np

from .grids import SphereGrid


def fornberg_weights(x0: float, x: np.ndarray, m: int) -> np.ndarray:
    """Weights of the m-th derivative at x0 from nodes x (Fornberg recursion)."""
    n = len(x)
    c = np.zeros((n, m + 1))
    c1 = 1.0
    c4 = x[0] - x0
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2 = 1.0
        c5 = c4
        c4 = x[i] - x0
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, m]


class LeafCalc:
    """Derivative operators bound to one SphereGrid (stencils precomputed).

    theta stencils are centered everywhere: samples are extended across the
    poles by the smooth-continuation rule f(-theta, phi) = s f(theta, phi+pi),
    where the parity s is +1 for scalars and the diagonal metric components
    and -1 for the off-diagonal one.
    """

    STENCIL = 5  # 4th-order accuracy on smooth fields
    GHOST = 2

    def __init__(self, sphere: SphereGrid):
        if sphere.n_phi % 2:
            raise ValueError("pole continuation needs an even phi count")
        self.sphere = sphere
        n = sphere.n_theta
        th = sphere.theta_nodes
        ext = np.concatenate([[-th[1], -th[0]], th,
                              [2 * np.pi - th[-1], 2 * np.pi - th[-2]]])
        rows = np.zeros((n, self.STENCIL))
        for i in range(n):
            rows[i] = fornberg_weights(th[i], ext[i:i + self.STENCIL], 1)
        self._th_w = rows

    def _extend(self, values: np.ndarray, parity: int) -> np.ndarray:
        shift = self.sphere.n_phi // 2
        top = parity * np.roll(values[[1, 0]], shift, axis=1)
        bot = parity * np.roll(values[[-1, -2]], shift, axis=1)
        return np.concatenate([top, values, bot], axis=0)

    def d_theta(self, values: np.ndarray, parity: int = 1) -> np.ndarray:
        """d/dtheta of (n_theta, n_phi) samples, 4th-order centered."""
        ext = self._extend(values, parity)
        n = self.sphere.n_theta
        windows = np.stack([ext[i:i + self.STENCIL] for i in range(n)])
        return np.einsum("is,isp->ip", self._th_w, windows)

    def d_phi(self, values: np.ndarray) -> np.ndarray:
        """d/dphi of samples, 4th-order periodic central stencil."""
        h = 2.0 * np.pi / self.sphere.n_phi
        vp1 = np.roll(values, -1, axis=1)
        vm1 = np.roll(values, 1, axis=1)
        vp2 = np.roll(values, -2, axis=1)
        vm2 = np.roll(values, 2, axis=1)
        return (8.0 * (vp1 - vm1) - (vp2 - vm2)) / (12.0 * h)

    def grad_squared(self, values: np.ndarray, g: np.ndarray) -> np.ndarray:
        """|grad f|^2 w.r.t. a leaf metric g of shape (..., 2, 2)."""
        ft = self.d_theta(values)
        fp = self.d_phi(values)
        ginv = invert_2x2(g)
        return (ginv[..., 0, 0] * ft * ft
                + 2.0 * ginv[..., 0, 1] * ft * fp
                + ginv[..., 1, 1] * fp * fp)

    def metric_derivatives(self, g: np.ndarray):
        """(d_theta g, d_phi g) applied componentwise."""
        dth = np.empty_like(g)
        dph = np.empty_like(g)
        for a in range(2):
            for b in range(2):
                parity = -1 if a != b else 1
                dth[..., a, b] = self.d_theta(g[..., a, b], parity=parity)
                dph[..., a, b] = self.d_phi(g[..., a, b])
        return dth, dph

    def christoffel(self, g: np.ndarray) -> np.ndarray:
        """Leaf Christoffel symbols Gamma^k_ij, shape (n_theta, n_phi, 2, 2, 2)."""
        dth, dph = self.metric_derivatives(g)
        dg = np.stack([dth, dph], axis=2)  # (..., l, a, b) = d_l g_ab
        ginv = invert_2x2(g)
        # Gamma^k_ij = 1/2 g^{kl} (d_i g_lj + d_j g_li - d_l g_ij)
        term = (np.moveaxis(dg, (2, 3, 4), (3, 2, 4))       # d_i g_lj
                + np.moveaxis(dg, (2, 3, 4), (4, 2, 3))     # d_j g_li
                - np.moveaxis(dg, (2, 3, 4), (2, 3, 4)))    # d_l g_ij
        return 0.5 * np.einsum("...kl,...lij->...kij", ginv, term)

    def gauss_curvature(self, g: np.ndarray) -> np.ndarray:
        """Gauss curvature of a leaf metric by the Brioschi formula."""
        E = g[..., 0, 0]
        F = g[..., 0, 1]
        G = g[..., 1, 1]
        Et, Ep = self.d_theta(E), self.d_phi(E)
        Ft, Fp = self.d_theta(F, parity=-1), self.d_phi(F)
        Gt, Gp = self.d_theta(G), self.d_phi(G)
        Epp = self.d_phi(Ep)
        Ftp = self.d_phi(Ft)
        Gtt = self.d_theta(Gt, parity=-1)   # a theta-derivative flips parity

        m1 = np.empty(E.shape + (3, 3))
        m1[..., 0, 0] = -0.5 * Epp + Ftp - 0.5 * Gtt
        m1[..., 0, 1] = 0.5 * Et
        m1[..., 0, 2] = Ft - 0.5 * Ep
        m1[..., 1, 0] = Fp - 0.5 * Gt
        m1[..., 1, 1] = E
        m1[..., 1, 2] = F
        m1[..., 2, 0] = 0.5 * Gp
        m1[..., 2, 1] = F
        m1[..., 2, 2] = G

        m2 = np.zeros_like(m1)
        m2[..., 0, 1] = 0.5 * Ep
        m2[..., 0, 2] = 0.5 * Gt
        m2[..., 1, 0] = 0.5 * Ep
        m2[..., 1, 1] = E
        m2[..., 1, 2] = F
        m2[..., 2, 0] = 0.5 * Gt
        m2[..., 2, 1] = F
        m2[..., 2, 2] = G

        den = (E * G - F * F) ** 2
        return (np.linalg.det(m1) - np.linalg.det(m2)) / den


def invert_2x2(g: np.ndarray) -> np.ndarray:
    det = g[..., 0, 0] * g[..., 1, 1] - g[..., 0, 1] * g[..., 1, 0]
    inv = np.empty_like(g)
    inv[..., 0, 0] = g[..., 1, 1]
    inv[..., 1, 1] = g[..., 0, 0]
    inv[..., 0, 1] = -g[..., 0, 1]
    inv[..., 1, 0] = -g[..., 1, 0]
    return inv / det[..., None, None]


def det_2x2(g: np.ndarray) -> np.ndarray:
    return g[..., 0, 0] * g[..., 1, 1] - g[..., 0, 1] * g[..., 1, 0]


def principal_curvatures(g: np.ndarray, A: np.ndarray):
    """Eigenvalues of g^{-1} A (shape operator), sorted lam1 <= lam2."""
    det_g = det_2x2(g)
    tr = (g[..., 1, 1] * A[..., 0, 0] - 2.0 * g[..., 0, 1] * A[..., 0, 1]
          + g[..., 0, 0] * A[..., 1, 1]) / det_g
    det_s = det_2x2(A) / det_g
    disc = np.sqrt(np.maximum(tr * tr - 4.0 * det_s, 0.0))
    return 0.5 * (tr - disc), 0.5 * (tr + disc)


def d_dt(values: np.ndarray, dt: float, axis: int = 0) -> np.ndarray:
    """Flow-time derivative: 4th-order central interior, 2nd-order one-sided ends."""
    v = np.moveaxis(values, axis, 0)
    n = v.shape[0]
    if n < 5:
        raise ValueError("need at least 5 time nodes for the interior stencil")
    out = np.empty_like(v, dtype=float)
    out[2:-2] = (8.0 * (v[3:-1] - v[1:-3]) - (v[4:] - v[:-4])) / (12.0 * dt)
    for i in (0, 1):
        out[i] = (-3.0 * v[i] + 4.0 * v[i + 1] - v[i + 2]) / (2.0 * dt)
    for i in (n - 2, n - 1):
        out[i] = (3.0 * v[i] - 4.0 * v[i - 1] + v[i - 2]) / (2.0 * dt)
    return np.moveaxis(out, 0, axis)
