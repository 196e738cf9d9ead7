"""Smoothstep windows and compactly supported test bumps with exact gradients."""

from __future__ import annotations

import numpy as np


def smoothstep5(x):
    """Quintic smoothstep: 0 below 0, 1 above 1, C^2 at both ends."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    return x**3 * (10.0 - 15.0 * x + 6.0 * x**2)


def smoothstep5_d(x):
    x = np.asarray(x, dtype=float)
    inside = (x > 0.0) & (x < 1.0)
    xc = np.clip(x, 0.0, 1.0)
    return np.where(inside, 30.0 * xc**2 * (1.0 - xc) ** 2, 0.0)


def smoothstep7(x):
    """Septic smoothstep, C^3 at both ends."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    return x**4 * (35.0 - 84.0 * x + 70.0 * x**2 - 20.0 * x**3)


def smoothstep7_d(x):
    x = np.asarray(x, dtype=float)
    inside = (x > 0.0) & (x < 1.0)
    xc = np.clip(x, 0.0, 1.0)
    return np.where(inside, 140.0 * xc**3 * (1.0 - xc) ** 3, 0.0)


def _exp_bump(u):
    u = np.asarray(u, dtype=float)
    inside = (u > 0.0) & (u < 1.0)
    v = np.where(inside, u * (1.0 - u), 1.0)
    with np.errstate(over="ignore"):
        return np.where(inside, np.exp(4.0 - 1.0 / v), 0.0)


def _exp_bump_d(u):
    u = np.asarray(u, dtype=float)
    inside = (u > 0.0) & (u < 1.0)
    v = np.where(inside, u * (1.0 - u), 1.0)
    return np.where(inside, _exp_bump(u) * (1.0 - 2.0 * u) / v**2, 0.0)


def bump_window(u, order=5):
    """Bump on [0, 1]: rises 0 -> 1 -> 0, identically 0 outside.

    ``order`` 5 or 7 selects a smoothstep product (C^2 / C^3 overall);
    ``order`` "exp" is the infinitely smooth exponential bump, the right
    choice when a quadrature study must not feel the window regularity.
    """
    u = np.asarray(u, dtype=float)
    if order == "exp":
        return _exp_bump(u)
    step = smoothstep7 if order == 7 else smoothstep5
    return step(2.0 * u) * step(2.0 - 2.0 * u)


def bump_window_d(u, order=5):
    u = np.asarray(u, dtype=float)
    if order == "exp":
        return _exp_bump_d(u)
    step = smoothstep7 if order == 7 else smoothstep5
    step_d = smoothstep7_d if order == 7 else smoothstep5_d
    return (2.0 * step_d(2.0 * u) * step(2.0 - 2.0 * u)
            - 2.0 * step(2.0 * u) * step_d(2.0 - 2.0 * u))


class TensorBump:
    """phi(t, theta) = bump((t-a)/(b-a)) * (c0 + c1 cos theta): compact support
    in t strictly inside (a, b), smooth on the sphere, with exact gradients."""

    def __init__(self, a: float, b: float, c0: float = 1.0, c1: float = 0.5,
                 order="exp"):
        if not a < b:
            raise ValueError("need a < b")
        self.a, self.b = a, b
        self.c0, self.c1 = c0, c1
        self.order = order

    def value(self, t, theta, phi=None):
        u = (np.asarray(t, dtype=float) - self.a) / (self.b - self.a)
        return bump_window(u, self.order) * (self.c0 + self.c1 * np.cos(theta))

    def d_t(self, t, theta, phi=None):
        u = (np.asarray(t, dtype=float) - self.a) / (self.b - self.a)
        return (bump_window_d(u, self.order) / (self.b - self.a)
                * (self.c0 + self.c1 * np.cos(theta)))

    def d_theta(self, t, theta, phi=None):
        u = (np.asarray(t, dtype=float) - self.a) / (self.b - self.a)
        return -bump_window(u, self.order) * self.c1 * np.sin(theta)

    def d_phi(self, t, theta, phi=None):
        return np.zeros(np.broadcast(np.asarray(t), np.asarray(theta)).shape)
