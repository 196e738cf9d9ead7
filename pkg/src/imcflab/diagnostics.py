"""Mass-to-geometry diagnostics: leaf integral ledgers, the weak Ricci
integral identity, maximum-principle envelopes, and curvature pinching."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import simpson

from .fields import AnnulusField, integrate_leaf, leaf_area
from .leafops import LeafCalc, principal_curvatures
from .rotsym import RotSymProfile

SIXTEEN_PI = 16.0 * np.pi


@dataclass
class CurvatureFields:
    """Ambient curvature samples on the grid: R, Rc(nu, nu), leaf K, and the
    tangent sectional curvature K12 = R/2 - Rc(nu, nu)."""

    R: np.ndarray          # (n_t, n_theta, n_phi) or (n_t,) for rotsym
    Rc_nn: np.ndarray
    K: np.ndarray
    rotsym: bool = False

    def R_leaf(self, field, i):
        return self._leaf(self.R, field, i)

    def Rc_leaf(self, field, i):
        return self._leaf(self.Rc_nn, field, i)

    def K_leaf(self, field, i):
        return self._leaf(self.K, field, i)

    def K12_leaf(self, field, i):
        return 0.5 * self.R_leaf(field, i) - self.Rc_leaf(field, i)

    def _leaf(self, arr, field, i):
        if self.rotsym:
            return np.broadcast_to(arr[i], field.shape[1:])
        return arr[i]


def curvature_from_profile(p: RotSymProfile, s_of_t, t_nodes) -> CurvatureFields:
    """Closed-form curvature of a rotationally symmetric metric on t nodes."""
    s = s_of_t(np.asarray(t_nodes, dtype=float))
    f, fp, fpp = p.at(s)
    R = 2.0 * (1.0 - fp**2) / f**2 - 4.0 * fpp / f
    Rc = -2.0 * fpp / f
    K = 1.0 / f**2
    return CurvatureFields(R=R, Rc_nn=Rc, K=K, rotsym=True)


def flat_curvature(field: AnnulusField) -> CurvatureFields:
    n_t = field.times.n_t
    K = np.exp(-field.times.t_nodes) / field.r0**2
    z = np.zeros(n_t)
    return CurvatureFields(R=z, Rc_nn=z.copy(), K=K, rotsym=True)


@dataclass
class GoToZeroReport:
    """Per-leaf integral ledger with the round-limit targets."""

    t_nodes: np.ndarray
    values: dict            # name -> (n_t,) array
    targets: dict           # name -> float

    QUANTITIES = ("grad_H", "shear", "R", "Rc_nn", "K12", "H2", "A2",
                  "lam_product", "chi")

    def gaps(self) -> dict:
        return {k: np.abs(self.values[k] - self.targets[k]) for k in self.values}

    def max_gaps(self) -> dict:
        return {k: float(v.max()) for k, v in self.gaps().items()}

    def write_csv(self, path):
        import csv
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t_index", "quantity", "value", "target", "gap"])
            for name in self.QUANTITIES:
                vals = self.values[name]
                tgt = self.targets[name]
                for i, v in enumerate(vals):
                    w.writerow([i, name, repr(float(v)), repr(float(tgt)),
                                repr(float(abs(v - tgt)))])


def gotozero_report(field: AnnulusField, curv: CurvatureFields,
                    t_indices=None) -> GoToZeroReport:
    """Leaf integrals whose round-limit targets witness the mass-to-geometry
    chain: gradient and shear deficits, curvature integrals, H^2 / |A|^2 /
    lambda1 lambda2 ledgers and the Euler characteristic."""
    times = field.times
    idx = np.arange(times.n_t) if t_indices is None else np.asarray(t_indices)
    calc = LeafCalc(field.sphere)
    names = GoToZeroReport.QUANTITIES
    vals = {k: np.zeros(len(idx)) for k in names}
    for row, i in enumerate(idx):
        H = field.H_leaf(i)
        g = field.g_leaf(i)
        A = field.A_leaf(i)
        lam1, lam2 = principal_curvatures(g, A)
        if field.rotsym:
            grad_term = np.zeros_like(H)
        else:
            grad_term = calc.grad_squared(H, g) / H**2
        vals["grad_H"][row] = integrate_leaf(field, i, grad_term)
        vals["shear"][row] = integrate_leaf(field, i, (lam1 - lam2) ** 2)
        vals["R"][row] = integrate_leaf(field, i, curv.R_leaf(field, i))
        vals["Rc_nn"][row] = integrate_leaf(field, i, curv.Rc_leaf(field, i))
        vals["K12"][row] = integrate_leaf(field, i, curv.K12_leaf(field, i))
        vals["H2"][row] = integrate_leaf(field, i, H**2)
        vals["A2"][row] = integrate_leaf(field, i, lam1**2 + lam2**2)
        vals["lam_product"][row] = integrate_leaf(field, i, lam1 * lam2)
        vals["chi"][row] = integrate_leaf(field, i, curv.K_leaf(field, i)) / (2 * np.pi)
    targets = {"grad_H": 0.0, "shear": 0.0, "R": 0.0, "Rc_nn": 0.0, "K12": 0.0,
               "H2": SIXTEEN_PI, "A2": 8 * np.pi, "lam_product": 4 * np.pi,
               "chi": 2.0}
    return GoToZeroReport(t_nodes=times.t_nodes[idx], values=vals, targets=targets)


def gauss_equation_residual(field: AnnulusField, curv: CurvatureFields) -> float:
    """max |K - (lam1 lam2 + K12)| over the grid; small for consistent input."""
    worst = 0.0
    for i in range(field.times.n_t):
        lam1, lam2 = principal_curvatures(field.g_leaf(i), field.A_leaf(i))
        res = np.abs(curv.K_leaf(field, i) - lam1 * lam2 - curv.K12_leaf(field, i))
        worst = max(worst, float(res.max()))
    return worst


def weak_ricci_identity_residual(field: AnnulusField, curv: CurvatureFields,
                                 phi, window) -> float:
    """Residual of the integrated flow identity for Rc(nu, nu).

    With phi compactly supported in t inside the window (a, b), leaf
    gradients and the flow evolution of H give

        int int 2 phi Rc dmu dt = int_a phi H^2 dmu - int_b phi H^2 dmu
          + int int [ d_t phi H^2 - 2 phi |grad H|^2/H^2
                      - 2 <grad phi, grad H>/H + phi (H^2 - 2|A|^2) ] dmu dt.

    Both sides are quadratures; the residual |LHS - RHS| converges at the
    time-quadrature order for smooth inputs.
    """
    a, b = window
    times = field.times
    ia, ib = times.index_of(a), times.index_of(b)
    if ib - ia < 4:
        raise ValueError("window must span at least five time nodes")
    th, ph_grid = field.sphere.mesh()
    t_a, t_b = times.t_nodes[ia], times.t_nodes[ib]
    if (np.max(np.abs(phi.value(t_a, th, ph_grid))) > 1e-12
            or np.max(np.abs(phi.value(t_b, th, ph_grid))) > 1e-12):
        raise ValueError("test function support must stay inside the window")
    calc = LeafCalc(field.sphere)

    lhs_leaf = np.zeros(ib - ia + 1)
    rhs_leaf = np.zeros(ib - ia + 1)
    for row, i in enumerate(range(ia, ib + 1)):
        t = times.t_nodes[i]
        H = field.H_leaf(i)
        g = field.g_leaf(i)
        A = field.A_leaf(i)
        lam1, lam2 = principal_curvatures(g, A)
        pv = phi.value(t, th, ph_grid)
        lhs_leaf[row] = integrate_leaf(field, i, 2.0 * pv * curv.Rc_leaf(field, i))
        if field.rotsym:
            grad_sq = np.zeros_like(H)
            cross = np.zeros_like(H)
        else:
            grad_sq = calc.grad_squared(H, g)
            from .leafops import invert_2x2
            ginv = invert_2x2(g)
            pt_, pp_ = phi.d_theta(t, th, ph_grid), phi.d_phi(t, th, ph_grid)
            ht_, hp_ = calc.d_theta(H), calc.d_phi(H)
            cross = (ginv[..., 0, 0] * pt_ * ht_
                     + ginv[..., 0, 1] * (pt_ * hp_ + pp_ * ht_)
                     + ginv[..., 1, 1] * pp_ * hp_)
        integrand = (phi.d_t(t, th, ph_grid) * H**2
                     - 2.0 * pv * grad_sq / H**2
                     - 2.0 * cross / H
                     + pv * (H**2 - 2.0 * (lam1**2 + lam2**2)))
        rhs_leaf[row] = integrate_leaf(field, i, integrand)
    tt = times.t_nodes[ia:ib + 1]
    lhs = simpson(lhs_leaf, x=tt)
    boundary = (integrate_leaf(field, ia, phi.value(t_a, th, ph_grid)
                               * field.H_leaf(ia) ** 2)
                - integrate_leaf(field, ib, phi.value(t_b, th, ph_grid)
                                 * field.H_leaf(ib) ** 2))
    rhs = boundary + simpson(rhs_leaf, x=tt)
    return float(abs(lhs - rhs))


@dataclass
class MaxPrincipleReport:
    bound: np.ndarray           # per-t envelope
    min_slack: float
    worst_node: tuple
    hypothesis_ok: Optional[bool]


def max_principle_bound(field: AnnulusField, C: float, n: int = 2,
                        curv: Optional[CurvatureFields] = None) -> MaxPrincipleReport:
    """Envelope H <= sqrt(C0 e^{-2t/n} + C n) with C0 = (max H|_0)^2 - C n."""
    times = field.times
    H0_max = float(np.max(field.H_leaf(0)))
    C0 = H0_max**2 - C * n
    bound = np.sqrt(np.maximum(C0 * np.exp(-2.0 * times.t_nodes / n) + C * n, 0.0))
    min_slack, worst = np.inf, None
    for i in range(times.n_t):
        slack = bound[i] - field.H_leaf(i)
        k = np.unravel_index(np.argmin(slack), slack.shape)
        if slack[k] < min_slack:
            min_slack, worst = float(slack[k]), (i, *map(int, k))
    hyp = None
    if curv is not None:
        hyp = True
        for i in range(times.n_t):
            if np.min(curv.Rc_leaf(field, i)) < -C - 1e-10:
                hyp = False
                break
    return MaxPrincipleReport(bound=bound, min_slack=min_slack,
                              worst_node=worst, hypothesis_ok=hyp)


@dataclass
class FloorCheckReport:
    hyp_H0_ok: bool
    hyp_ricci_ok: Optional[bool]
    C3_min: float
    passed: Optional[bool]
    witness: Optional[tuple]


def h_inverse_floor_check(field_j: AnnulusField, j: float, C1: float, C2: float,
                          C3: Optional[float] = None,
                          curv: Optional[CurvatureFields] = None) -> FloorCheckReport:
    """Node-wise floor 1/H^2 >= (r0^2/4) e^t - C3/j, smallest admissible C3.

    The hypotheses H(x,0)^2 <= 4/r0^2 + C1/j and Rc(nu,nu) >= -C2/j are
    verified first; on failure no floor check is claimed.
    """
    times = field_j.times
    r0 = field_j.r0
    hyp1 = bool(np.max(field_j.H_leaf(0) ** 2) <= 4.0 / r0**2 + C1 / j + 1e-12)
    hyp2 = None
    if curv is not None:
        hyp2 = all(np.min(curv.Rc_leaf(field_j, i)) >= -C2 / j - 1e-12
                   for i in range(times.n_t))
    if not hyp1 or hyp2 is False:
        return FloorCheckReport(hyp1, hyp2, np.nan, None, None)

    C3_min = 0.0
    witness = None
    passed = None if C3 is None else True
    for i in range(times.n_t):
        deficit = ((r0**2 / 4.0) * np.exp(times.t_nodes[i])
                   - 1.0 / field_j.H_leaf(i) ** 2)
        need = j * deficit
        k = np.unravel_index(np.argmax(need), need.shape)
        if need[k] > C3_min:
            C3_min = float(need[k])
        if C3 is not None and need[k] > C3 + 1e-12:
            passed = False
            if witness is None:
                witness = (i, *map(int, k))
    return FloorCheckReport(hyp1, hyp2, C3_min, passed, witness)


def pinching_quantity(field: AnnulusField, t_index: int, lam: float,
                      K: Optional[np.ndarray] = None) -> float:
    """Normalized squared curvature pinching (1/|Sigma|) int 16 |K - lam|^2 dmu."""
    if K is None:
        if field.rotsym:
            K = np.full(field.shape[1:], np.exp(-field.times.t_nodes[t_index])
                        / field.r0**2)
        else:
            K = LeafCalc(field.sphere).gauss_curvature(field.g_leaf(t_index))
    area = leaf_area(field, t_index)
    return integrate_leaf(field, t_index, 16.0 * (K - lam) ** 2) / area
