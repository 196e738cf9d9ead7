"""Christoffel symbols of the foliation metric ghat = H^-2 dt^2 + g.

In flow coordinates the nonzero symbols are

    G^0_00 = -dH/dt / H          G^0_i0 = -d_i H / H       G^0_ij = -H A_ij
    G^k_i0 = g^{kp} A_pi / H     G^k_00 = g^{kp} d_p H / H^3

plus the intrinsic leaf symbols of g.  dH derivatives are finite differences:
4th order in the interior, 2nd-order one-sided at the flow-time ends (nodes
there are flagged).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import AnnulusField
from .leafops import LeafCalc, d_dt, invert_2x2


@dataclass
class ChristoffelAt:
    """All symbol families of ghat at one node, (theta, phi, t) index order."""

    G000: float
    G0i0: np.ndarray        # (2,)
    G0ij: np.ndarray        # (2, 2), symmetric
    Gki0: np.ndarray        # (2, 2), [k, i]
    Gk00: np.ndarray        # (2,)
    Gkij: np.ndarray        # (2, 2, 2), symmetric in (i, j)
    boundary_flagged: bool = False


class ChristoffelField:
    """Per-leaf batched Christoffel symbols of one field."""

    # one-sided t-stencils are 2nd order: flag the two nodes at each end
    T_BOUNDARY_PAD = 2

    def __init__(self, field: AnnulusField):
        self.field = field
        self.calc = LeafCalc(field.sphere)
        H = field.H_full()
        self.dH_dt = d_dt(np.asarray(H), field.times.dt, axis=0)
        self._leaf_cache = {}

    def leaf(self, t_index: int):
        """Symbol arrays on one leaf: dict of (n_theta, n_phi, ...) arrays."""
        if t_index in self._leaf_cache:
            return self._leaf_cache[t_index]
        f = self.field
        H = f.H_leaf(t_index)
        g = f.g_leaf(t_index)
        A = f.A_leaf(t_index)
        ginv = invert_2x2(g)
        dH_th = self.calc.d_theta(H)
        dH_ph = self.calc.d_phi(H)
        diH = np.stack([dH_th, dH_ph], axis=-1)             # (nt, np, i)
        out = {
            "G000": -self.dH_dt[t_index] / H,
            "G0i0": -diH / H[..., None],
            "G0ij": -H[..., None, None] * A,
            "Gki0": np.einsum("...kp,...pi->...ki", ginv, A) / H[..., None, None],
            "Gk00": np.einsum("...kp,...p->...k", ginv, diH) / (H**3)[..., None],
            "Gkij": self.calc.christoffel(g),
        }
        self._leaf_cache[t_index] = out
        return out

    def at(self, node) -> ChristoffelAt:
        it, ith, iph = node
        leaf = self.leaf(it)
        flagged = (it < self.T_BOUNDARY_PAD
                   or it >= self.field.times.n_t - self.T_BOUNDARY_PAD)
        return ChristoffelAt(
            G000=float(leaf["G000"][ith, iph]),
            G0i0=leaf["G0i0"][ith, iph].copy(),
            G0ij=leaf["G0ij"][ith, iph].copy(),
            Gki0=leaf["Gki0"][ith, iph].copy(),
            Gk00=leaf["Gk00"][ith, iph].copy(),
            Gkij=leaf["Gkij"][ith, iph].copy(),
            boundary_flagged=bool(flagged),
        )


def christoffel_at(field: AnnulusField, node) -> ChristoffelAt:
    """Symbols of ghat at one (t, theta, phi) grid node."""
    return ChristoffelField(field).at(node)
