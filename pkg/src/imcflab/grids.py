"""Quadrature grids on the parameterization space S^2 x [0, T].

The sphere is sampled at Gauss-Legendre nodes in cos(theta) crossed with a
uniform periodic phi grid, so smooth leaf integrals converge spectrally and
no samples sit on the coordinate poles.  Flow time is sampled uniformly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEFAULT_N_THETA = 64
DEFAULT_N_PHI = 128
DEFAULT_N_T = 256


@dataclass(frozen=True)
class SphereGrid:
    """Gauss-Legendre x uniform-phi quadrature grid on the unit sphere.

    ``theta_weights`` are the Gauss-Legendre weights in x = cos(theta); the
    integral of f over the sphere with measure sin(theta) dtheta dphi is
    ``sum_ij w_i * (2 pi / n_phi) * f(theta_i, phi_j)``.
    """

    n_theta: int = DEFAULT_N_THETA
    n_phi: int = DEFAULT_N_PHI
    theta_nodes: np.ndarray = field(init=False, repr=False)
    theta_weights: np.ndarray = field(init=False, repr=False)
    phi_nodes: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.n_theta < 4 or self.n_phi < 4:
            raise ValueError("sphere grid needs at least 4 nodes per direction")
        x, w = np.polynomial.legendre.leggauss(self.n_theta)
        theta = np.arccos(x[::-1])          # strictly increasing in (0, pi)
        object.__setattr__(self, "theta_nodes", theta)
        object.__setattr__(self, "theta_weights", w[::-1].copy())
        object.__setattr__(
            self, "phi_nodes", np.linspace(0.0, 2.0 * np.pi, self.n_phi, endpoint=False)
        )

    @property
    def phi_weight(self) -> float:
        return 2.0 * np.pi / self.n_phi

    @property
    def sin_theta(self) -> np.ndarray:
        return np.sin(self.theta_nodes)

    def node_weights(self) -> np.ndarray:
        """(n_theta, n_phi) weights for the measure sin(theta) dtheta dphi."""
        return self.theta_weights[:, None] * np.full(self.n_phi, self.phi_weight)

    def integrate_sigma(self, values: np.ndarray) -> float:
        """Integrate samples against the round measure d(sigma)."""
        values = np.asarray(values, dtype=float)
        if values.shape != (self.n_theta, self.n_phi):
            raise ValueError(
                f"expected shape {(self.n_theta, self.n_phi)}, got {values.shape}"
            )
        return float(np.sum(values * self.node_weights()))

    def mesh(self):
        """Broadcastable (theta, phi) arrays of shape (n_theta, n_phi)."""
        return np.meshgrid(self.theta_nodes, self.phi_nodes, indexing="ij")


@dataclass(frozen=True)
class TimeGrid:
    """Uniform samples of the flow-time interval [0, T]."""

    T: float = 1.0
    n_t: int = DEFAULT_N_T
    t_nodes: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.T <= 0:
            raise ValueError("flow horizon T must be positive")
        if self.n_t < 3:
            raise ValueError("time grid needs at least 3 nodes")
        object.__setattr__(self, "t_nodes", np.linspace(0.0, self.T, self.n_t))

    @property
    def dt(self) -> float:
        return self.T / (self.n_t - 1)

    def index_of(self, t: float) -> int:
        """Nearest grid index to t (t snapped into [0, T])."""
        return int(round(np.clip(t, 0.0, self.T) / self.dt))


def fibonacci_sphere(n: int) -> np.ndarray:
    """n deterministic, well-spread (theta, phi) points on the sphere."""
    k = np.arange(n)
    theta = np.arccos(1.0 - 2.0 * (k + 0.5) / n)
    golden = (1.0 + np.sqrt(5.0)) / 2.0
    phi = np.mod(2.0 * np.pi * k / golden, 2.0 * np.pi)
    return np.column_stack([theta, phi])


def sample_points(times: TimeGrid, n_sphere: int, n_levels: int,
                  t_lo: float = None, t_hi: float = None) -> np.ndarray:
    """Deterministic (t, theta, phi) sample set: Fibonacci sphere x t levels."""
    lo = 0.0 if t_lo is None else t_lo
    hi = times.T if t_hi is None else t_hi
    levels = np.linspace(lo, hi, n_levels)
    sph = fibonacci_sphere(n_sphere)
    pts = []
    for i, t in enumerate(levels):
        # rotate the ladder between levels so columns do not align
        block = sph[i % n_sphere:].tolist() + sph[: i % n_sphere].tolist()
        for theta, phi in block:
            pts.append((t, theta, phi))
    return np.array(pts)
