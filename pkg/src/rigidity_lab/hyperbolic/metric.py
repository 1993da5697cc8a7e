"""Perturbations ``g = b + e`` of the hyperbolic metric and their covariant derivatives.

Tensor arrays carry sample points on the leading axis; derivative arrays put the differentiation
index first, e.g. ``de[n, k, i, j] = d_k e_ij`` at point ``n``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from rigidity_lab.errors import InvalidInput
from rigidity_lab.hyperbolic.geometry import ORIGIN, distance_to_origin, hyperbolic_distance

FD_STEP = 1e-3
# 4th-order central first derivative: (f(-2) - 8 f(-1) + 8 f(1) - f(2)) / 12h
_FD4 = ((-2.0, 1.0 / 12), (-1.0, -8.0 / 12), (1.0, 8.0 / 12), (2.0, -1.0 / 12))

TensorField = Callable[[np.ndarray], np.ndarray]


def smooth_step(t: np.ndarray) -> np.ndarray:
    """C-infinity transition from 0 (t <= 0) to 1 (t >= 1)."""
    t = np.asarray(t, dtype=float)

    def f(u):
        out = np.zeros_like(u)
        pos = u > 0
        out[pos] = np.exp(-1.0 / u[pos])
        return out

    a, b = f(t), f(1.0 - t)
    return a / (a + b)


def fd_derivative(field: TensorField, x: np.ndarray, h: float = FD_STEP) -> np.ndarray:
    """``d_k T`` for every coordinate ``k`` by 4th-order central differences with step ``h x^1``."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    step = h * x[:, 0]
    out = None
    for k in range(3):
        acc = None
        for c, w in _FD4:
            y = x.copy()
            y[:, k] += c * step
            term = w * field(y)
            acc = term if acc is None else acc + term
        acc = acc / step.reshape((-1,) + (1,) * (acc.ndim - 1))
        if out is None:
            out = np.empty((len(x), 3) + acc.shape[1:])
        out[:, k] = acc
    return out


def background_christoffel(x: np.ndarray) -> np.ndarray:
    """``Gam[n, l, k, i]`` of ``b = e^{2 phi} delta`` with ``phi = -log x^1``."""
    x = np.atleast_2d(x)
    w = np.zeros_like(x)
    w[:, 0] = -1.0 / x[:, 0]
    I = np.eye(3)
    return (np.einsum("lk,ni->nlki", I, w) + np.einsum("li,nk->nlki", I, w)
            - np.einsum("ki,nl->nlki", I, w))


def covariant_derivative(T: np.ndarray, dT: np.ndarray, x: np.ndarray) -> np.ndarray:
    """``(bar-nabla T)[n, k, i1..ir]`` for a covariant tensor ``T[n, i1..ir]`` with ``dT[n, k, i1..ir]``."""
    Gam = background_christoffel(x)
    r = T.ndim - 1
    out = dT.copy()
    letters = "abcdefgh"[:r]
    for slot in range(r):
        src = letters[:slot] + "l" + letters[slot + 1:]
        # subtract Gam^l_{k i_slot} T_{.. l ..}
        out -= np.einsum(f"nlk{letters[slot]},n{src}->nk{letters}", Gam, T)
    return out


def b_norm(T: np.ndarray, x: np.ndarray) -> np.ndarray:
    """``|T|_b`` of a covariant tensor: each lowered index carries a factor ``x^1``."""
    r = T.ndim - 1
    flat = T.reshape(len(T), -1)
    return np.sqrt(np.sum(flat * flat, axis=1)) * x[:, 0] ** r


@dataclass(frozen=True)
class PerturbedMetric:
    """``g = b + e`` with ``e`` given in chart components and its decay rate ``tau``."""

    e: TensorField
    tau: float
    name: str = "custom"
    fd_step: float = FD_STEP

    def __post_init__(self):
        if not self.tau > 1.5:
            raise InvalidInput(f"decay rate tau={self.tau!r} must exceed 3/2")

    def components(self, x) -> np.ndarray:
        return self.e(np.atleast_2d(np.asarray(x, dtype=float)))

    def epsilon_coords(self, x) -> np.ndarray:
        """``eps_ij = (x^1)^2 e_ij``."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return x[:, 0, None, None] ** 2 * self.e(x)

    def derivative(self, x) -> np.ndarray:
        return fd_derivative(self.e, x, self.fd_step)

    def metric(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.eye(3) / x[:, 0, None, None] ** 2 + self.e(x)

    def covariant(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return covariant_derivative(self.e(x), self.derivative(x), x)

    def second_covariant(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))

        def first(y):
            return covariant_derivative(self.e(y), fd_derivative(self.e, y, self.fd_step), y)

        return covariant_derivative(first(x), fd_derivative(first, x, self.fd_step), x)

    def scaled(self, factor: float) -> "PerturbedMetric":
        e = self.e
        return PerturbedMetric(lambda x: factor * e(x), self.tau, f"{factor:g}*{self.name}", self.fd_step)

    def __add__(self, other: "PerturbedMetric") -> "PerturbedMetric":
        e1, e2 = self.e, other.e
        return PerturbedMetric(lambda x: e1(x) + e2(x), min(self.tau, other.tau),
                               f"{self.name}+{other.name}", self.fd_step)


# ---------------------------------------------------------------- test fields

DEFAULT_S = np.array([[1.0, 0.3, -0.2], [0.3, 0.5, 0.1], [-0.2, 0.1, -0.7]])
ALT_S = np.array([[-0.4, 0.0, 0.6], [0.0, 0.9, -0.3], [0.6, -0.3, 0.2]])


def zero_field() -> PerturbedMetric:
    return PerturbedMetric(lambda x: np.zeros((len(x), 3, 3)), tau=3.0, name="zero")


def decaying_field(amplitude: float = 0.1, tau: float = 2.0, S=DEFAULT_S, cutoff=(0.5, 1.0)) -> PerturbedMetric:
    """``e = amplitude chi(r) e^{-tau r} S / (x^1)^2`` with ``chi`` vanishing for ``r < cutoff[0]``."""
    S = np.asarray(S, dtype=float)
    if not np.allclose(S, S.T):
        raise InvalidInput("S must be symmetric")
    r0, r1 = cutoff

    def e(x):
        r = distance_to_origin(x)
        chi = smooth_step((r - r0) / (r1 - r0))
        return (amplitude * chi * np.exp(-tau * r) / x[:, 0] ** 2)[:, None, None] * S

    return PerturbedMetric(e, tau, name=f"decay(amp={amplitude:g},tau={tau:g})")


def bump_field(amplitude: float = 0.1, center=ORIGIN, radius: float = 1.0, S=DEFAULT_S) -> PerturbedMetric:
    """Compactly supported ``e`` inside the geodesic ball ``B(center, radius)``."""
    S = np.asarray(S, dtype=float)
    c = np.asarray(center, dtype=float)

    def e(x):
        d = hyperbolic_distance(x, c[None, :])
        u = np.clip(d / radius, 0.0, 1.0)
        w = np.zeros_like(u)
        inside = u < 1.0
        w[inside] = np.exp(1.0 - 1.0 / (1.0 - u[inside] ** 2))
        return (amplitude * w / x[:, 0] ** 2)[:, None, None] * S

    return PerturbedMetric(e, tau=10.0, name=f"bump(amp={amplitude:g},R={radius:g})")


PRESETS = {
    "zero": lambda amplitude, tau: zero_field(),
    "decay": lambda amplitude, tau: decaying_field(amplitude, tau),
    "decay-alt": lambda amplitude, tau: decaying_field(amplitude, tau, S=ALT_S),
    "bump": lambda amplitude, tau: bump_field(amplitude),
}


@dataclass(frozen=True)
class DecayAudit:
    radii: np.ndarray
    norms: np.ndarray        # |e|_b + |bar-nabla e|_b + |bar-nabla^2 e|_b along the ray
    scaled: np.ndarray       # norms * e^{tau r}

    @property
    def bounded(self) -> bool:
        return bool(np.max(self.scaled) <= 10.0 * max(np.min(self.scaled), 1e-300))


def decay_audit(metric: PerturbedMetric, direction=(0.3, 0.5, 0.8), radii=None) -> DecayAudit:
    """Sample the decay hypothesis at 10 points along a geodesic ray from ``o``.

    Points at distance ``r`` along the geodesic starting at ``o`` with unit initial velocity ``v``
    are ``(cosh r - v^1 sinh r)^{-1} (1, v^2 sinh r, v^3 sinh r)``.
    """
    v = np.asarray(direction, dtype=float)
    v = v / np.linalg.norm(v)
    radii = np.linspace(2.0, 6.5, 10) if radii is None else np.asarray(radii, dtype=float)
    den = np.cosh(radii) - v[0] * np.sinh(radii)
    x = np.stack([1.0 / den, v[1] * np.sinh(radii) / den, v[2] * np.sinh(radii) / den], axis=1)
    total = (b_norm(metric.components(x), x) + b_norm(metric.covariant(x), x)
             + b_norm(metric.second_covariant(x), x))
    return DecayAudit(radii, total, total * np.exp(metric.tau * radii))
