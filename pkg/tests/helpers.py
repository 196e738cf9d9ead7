"""Shared analytic fixtures for the tests: perturbed fields with closed-form
derivatives and a manufactured normal-Ricci field that satisfies the flow
identity pointwise (so residuals isolate quadrature error)."""

import numpy as np

from imcflab.diagnostics import CurvatureFields
from imcflab.fields import perturbed_delta


def h_perturbation(eps, a=1.0, b=1.0, c=1.0):
    """Smooth factor 1 + eps sin(a t) sin(theta)^b-ish with exact gradients."""

    def f(t, th, ph):
        return 1.0 + eps * np.sin(a * np.asarray(t)) * np.sin(th) * np.cos(c * ph)

    def df(t, th, ph):
        t = np.asarray(t, dtype=float)
        return (eps * a * np.cos(a * t) * np.sin(th) * np.cos(c * ph),
                eps * np.sin(a * t) * np.cos(th) * np.cos(c * ph),
                -eps * c * np.sin(a * t) * np.sin(th) * np.sin(c * ph))

    return f, df


def perturbed_field(r0, sphere, times, eps, a=1.0, c=1.0):
    f, df = h_perturbation(eps, a=a, c=c)
    return perturbed_delta(r0, sphere, times, h_factor=f, dh_factor=df,
                           label=f"perturbed(eps={eps})")


def manufactured_ricci_field(r0, sphere, times, eps):
    """Flat-leaf field with 1/H = W0(t)(1 + eps beta(t) cos theta) and the
    normal Ricci curvature defined by the flow evolution of H, so the weak
    integral identity holds exactly in the continuum."""
    T = times.T
    beta = lambda t: np.sin(np.pi * np.asarray(t) / T)
    dbeta = lambda t: (np.pi / T) * np.cos(np.pi * np.asarray(t) / T)

    def hf(t, th, ph):
        return 1.0 / (1.0 + eps * beta(t) * np.cos(th))

    def dhf(t, th, ph):
        den = (1.0 + eps * beta(t) * np.cos(th)) ** 2
        zero = np.zeros(np.broadcast(np.asarray(t), np.asarray(th)).shape)
        return (-eps * dbeta(t) * np.cos(th) / den,
                eps * beta(t) * np.sin(th) / den, zero)

    field = perturbed_delta(r0, sphere, times, h_factor=hf, dh_factor=dhf,
                            label="manufactured")

    def rc(t, th):
        W0 = (r0 / 2.0) * np.exp(0.5 * t)
        u = 1.0 + eps * beta(t) * np.cos(th)
        W = W0 * u
        Wt = 0.5 * W0 * u + W0 * eps * dbeta(t) * np.cos(th)
        lapW = W0 * eps * beta(t) * (-2.0 * np.cos(th)) / (r0**2 * np.exp(t))
        return Wt / W**3 - lapW / W - 0.5 / W**2

    th, _ = sphere.mesh()
    Rc = np.stack([rc(t, th) for t in times.t_nodes])
    curv = CurvatureFields(R=np.zeros_like(Rc), Rc_nn=Rc,
                           K=np.ones_like(Rc), rotsym=False)
    return field, curv


def embedded_leaf_metric(sphere, eps):
    """Induced metric of the embedded surface r = 1 + eps sin th cos th cos ph."""
    th, ph = sphere.mesh()
    st, ct, cp, sp = np.sin(th), np.cos(th), np.cos(ph), np.sin(ph)
    r = 1.0 + eps * st * ct * cp
    rt = eps * np.cos(2.0 * th) * cp
    rp = -eps * st * ct * sp
    g = np.zeros(th.shape + (2, 2))
    g[..., 0, 0] = rt**2 + r**2
    g[..., 0, 1] = g[..., 1, 0] = rt * rp
    g[..., 1, 1] = rp**2 + r**2 * st**2
    return g
