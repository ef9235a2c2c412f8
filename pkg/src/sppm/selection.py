"""Robust selection among candidate points and gradients.

sts keeps the indices whose m-th-nearest-neighbor radius (m = floor(2n/3)+1,
self included) is at most the m-th smallest such radius; at least m > 2n/3
indices always survive, and when a majority clusters within eps of some
hidden point, every survivor lands within 3*eps of it.  rge applies sts
to n batch-mean gradients.  The dh metric compares candidates through a
linearized regularizer gap; it is a pseudo-metric (it can vanish between
distinct points), which is all the selection argument needs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ValidationError
from .problems import CompositeProblem, sample_gradient_batch
from .rng import RngStream

_ROW_BLOCK = 64  # bounds the (block, n, d) difference tensor


@dataclass(frozen=True)
class EuclideanMetric:
    tag: str = "euclidean"

    def eval(self, x: np.ndarray, y: np.ndarray) -> float:
        return float(np.linalg.norm(np.asarray(x, float) - np.asarray(y, float)))

    def pairwise(self, points: np.ndarray) -> np.ndarray:
        P = np.asarray(points, dtype=float)
        n = P.shape[0]
        out = np.empty((n, n))
        for lo in range(0, n, _ROW_BLOCK):
            hi = min(lo + _ROW_BLOCK, n)
            diff = P[lo:hi, None, :] - P[None, :, :]
            out[lo:hi] = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        np.fill_diagonal(out, 0.0)
        return out


@dataclass(frozen=True)
class DhParams:
    """Inputs of the linearized-gap metric: regularizer h, robust
    gradient estimate s_bar at the anchor w_tilde, prox center z_bar,
    prox stepsize lam."""

    h: object
    s_bar: np.ndarray
    w_tilde: np.ndarray
    z_bar: np.ndarray
    lam: float

    def shifted_vector(self) -> np.ndarray:
        v = np.asarray(self.s_bar, float) + (
            np.asarray(self.w_tilde, float) - np.asarray(self.z_bar, float)
        ) / self.lam
        if not np.all(np.isfinite(v)):
            raise ValidationError("dh shift vector is not finite")
        return v


@dataclass(frozen=True)
class DhMetric:
    """d(x, y) = |h(x) - h(y) + <v, x - y>|, a pseudo-metric on dom h."""

    h: object
    v: np.ndarray
    tag: str = "dh"

    def _potential(self, x: np.ndarray) -> float:
        hx = self.h.value(x)
        if hx == np.inf:
            raise DomainError("dh metric evaluated outside dom h")
        return hx + float(np.dot(self.v, x))

    def eval(self, x: np.ndarray, y: np.ndarray) -> float:
        return abs(self._potential(np.asarray(x, float)) - self._potential(np.asarray(y, float)))

    def pairwise(self, points: np.ndarray) -> np.ndarray:
        P = np.asarray(points, dtype=float)
        pots = P @ self.v
        for j in range(P.shape[0]):
            hj = self.h.value(P[j])
            if hj == np.inf:
                raise DomainError("dh metric evaluated outside dom h")
            pots[j] += hj
        out = np.abs(pots[:, None] - pots[None, :])
        np.fill_diagonal(out, 0.0)
        return out


def make_dh(params: DhParams) -> DhMetric:
    """Metric closure for one booster pass; built once, reused n^2 times."""
    return DhMetric(h=params.h, v=params.shifted_vector())


def sts(points, metric) -> np.ndarray:
    """Second-tertile selection: ascending indices of the admissible set.

    rho_j is the m-th smallest of the n distances from point j (self
    distance 0 included), m = floor(2n/3) + 1; admissible means
    rho_j <= (m-th smallest rho).  Ties at the threshold stay in, so
    the result always has more than 2n/3 members.
    """
    P = np.asarray(points, dtype=float)
    if P.ndim == 1:
        P = P[:, None]
    n = P.shape[0]
    if n < 1:
        raise ValidationError("sts needs at least one point")
    m = (2 * n) // 3 + 1
    dist = metric.pairwise(P)
    rho = np.partition(dist, m - 1, axis=1)[:, m - 1]
    rho_bar = np.partition(rho, m - 1)[m - 1]
    return np.flatnonzero(rho <= rho_bar)


def rge(
    problem: CompositeProblem,
    noise,
    x: np.ndarray,
    n: int,
    q: int,
    stream: RngStream,
) -> np.ndarray:
    """Robust gradient estimate at x from n batch means of q samples.

    Runs sts on the means under the Euclidean metric and returns the
    mean with the smallest admissible index; consumes exactly n*q
    samples, batch j drawing on substream ("rge-batch", j).
    """
    if n < 1 or q < 1:
        raise ValidationError(f"rge needs n >= 1 and q >= 1, got n={n}, q={q}")
    means = np.empty((n, problem.dim))
    for j in range(n):
        batch = sample_gradient_batch(problem, noise, x, q, stream.child("rge-batch", j))
        means[j] = batch.mean(axis=0)
    admissible = sts(means, EuclideanMetric())
    return np.array(means[admissible[0]])


def bregman_dh(h, x: np.ndarray, z_hat: np.ndarray, g: np.ndarray) -> float:
    """h(x) - h(z_hat) + <g, x - z_hat> for a caller-supplied shifted
    gradient g at z_hat; nonnegative when z_hat is the exact prox point
    and g its exact shifted gradient (then -g is a subgradient of h)."""
    x = np.asarray(x, float)
    z_hat = np.asarray(z_hat, float)
    hx = h.value(x)
    hz = h.value(z_hat)
    if hx == np.inf or hz == np.inf:
        raise DomainError("bregman_dh evaluated outside dom h")
    return hx - hz + float(np.dot(np.asarray(g, float), x - z_hat))
