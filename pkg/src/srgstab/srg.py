"""Scaled relative graphs of complex square matrices.

A graph point is (gain, angle) = (||Au||, angle between u and Au) for a
unit vector u; the set is symmetric about the real axis, so points are
stored with angles in [0, pi] and stand for both signs. The maximum angle
over the sphere is found by multi-start projected gradient descent on the
cosine objective, seeded from the best of a dense random sample, and is
therefore a certified lower bound on the true maximum.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._sphere import sample_unit
from .errors import DimensionTooLarge

# Rows whose output norm falls below KERNEL_RTOL * ||A|| follow the
# zero-output convention: gain 0, angle 0.
KERNEL_RTOL = 1e-30


def _check_matrix(A) -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
        raise ValueError("A must be a non-empty square matrix")
    if not np.all(np.isfinite(A)):
        raise ValueError("A must contain only finite values")
    return A


def sigma_max(A) -> float:
    """Largest singular value (the per-frequency gain)."""
    return float(np.linalg.svd(_check_matrix(A), compute_uv=False)[0])


def _gain_angle(A: np.ndarray, U: np.ndarray):
    """Per-row gain r = ||Au|| and angle arccos(Re<Au,u>/r), with the
    zero-output convention r = 0 -> angle 0."""
    Y = U @ A.T
    r = np.linalg.norm(Y, axis=1)
    cosv = np.ones_like(r)
    nz = r > 0.0
    cosv[nz] = np.clip(
        np.real(np.einsum("ij,ij->i", np.conj(Y[nz]), U[nz])) / r[nz], -1.0, 1.0
    )
    alpha = np.arccos(cosv)
    alpha[~nz] = 0.0
    return r, alpha


@dataclass(frozen=True)
class SrgPoint:
    """One graph point with the unit input that generates it.

    The pair (r, alpha) stands for both r e^{+j alpha} and r e^{-j alpha}.
    """

    r: float
    alpha: float
    witness: np.ndarray


def srg_point(A, u) -> SrgPoint:
    """Graph point generated by one input vector (normalized if needed)."""
    A = _check_matrix(A)
    u = np.asarray(u, dtype=complex).reshape(A.shape[0])
    nu = np.linalg.norm(u)
    if nu == 0.0:
        raise ValueError("witness must be nonzero")
    u = u / nu
    r, alpha = _gain_angle(A, u[None, :])
    return SrgPoint(r=float(r[0]), alpha=float(alpha[0]), witness=u)


@dataclass(frozen=True)
class SrgSample:
    """Point cloud approximating the graph at one matrix, with witnesses.

    Upper-half storage: every alpha is in [0, pi]; exports mirror the
    points across the real axis.
    """

    r: np.ndarray
    alpha: np.ndarray
    witnesses: np.ndarray
    matrix_norm: float
    seed: int
    n_samples: int
    refined: bool = False

    @property
    def max_gain(self) -> float:
        return float(np.max(self.r))

    @property
    def max_angle(self) -> float:
        return float(np.max(self.alpha))

    def point(self, index: int) -> SrgPoint:
        return SrgPoint(
            r=float(self.r[index]),
            alpha=float(self.alpha[index]),
            witness=self.witnesses[index],
        )

    def complex_points(self, both_signs: bool = True) -> np.ndarray:
        """Cloud as complex numbers; mirrored rows are appended when
        ``both_signs`` (points on the real axis are not duplicated)."""
        z = self.r * np.exp(1j * self.alpha)
        if not both_signs:
            return z
        off_axis = self.alpha > 0.0
        return np.concatenate([z, np.conj(z[off_axis])])


def srg_sample(A, n_samples: int = 20_000, seed: int = 0) -> SrgSample:
    """Sample the graph of A with uniformly drawn unit inputs.

    Deterministic given ``seed``. Requires ``n_samples >= 100``.
    """
    A = _check_matrix(A)
    if n_samples < 100:
        raise ValueError("n_samples must be >= 100")
    rng = np.random.default_rng(seed)
    U = sample_unit(rng, n_samples, A.shape[0])
    r, alpha = _gain_angle(A, U)
    return SrgSample(
        r=r,
        alpha=alpha,
        witnesses=U,
        matrix_norm=sigma_max(A),
        seed=int(seed),
        n_samples=int(n_samples),
    )


@dataclass(frozen=True)
class AlphaMaxConfig:
    """Budget for the maximum-angle search."""

    presamples: int = 10_000
    starts: int = 64
    max_iters: int = 500
    tol: float = 1e-10
    seed: int = 0


@dataclass(frozen=True)
class AlphaMaxResult:
    alpha: float
    witness: np.ndarray
    cos_value: float
    presample_alpha: float

    def __float__(self):
        return self.alpha


def _canonical_phase(u: np.ndarray) -> np.ndarray:
    """Rotate a unit vector so its largest component is real positive."""
    k = int(np.argmax(np.abs(u)))
    pivot = u[k]
    if pivot == 0.0:
        return u
    return u * (np.conj(pivot) / abs(pivot))


def alpha_max(A, cfg: Optional[AlphaMaxConfig] = None) -> AlphaMaxResult:
    """Maximum input/output angle over the unit sphere, with witness.

    Minimizes cos(angle) = Re<Au, u> / ||Au|| by projected gradient descent
    with per-start backtracking steps, starting from the best rows of a
    dense random sample. Descent only improves on the sampling stage, so
    the result is a lower bound on the true maximum angle. Returns angle 0
    for the zero matrix (zero-output convention).
    """
    A = _check_matrix(A)
    if cfg is None:
        cfg = AlphaMaxConfig()
    n = A.shape[0]
    scale = sigma_max(A)
    if scale == 0.0:
        e1 = np.zeros(n, dtype=complex)
        e1[0] = 1.0
        return AlphaMaxResult(alpha=0.0, witness=e1, cos_value=1.0, presample_alpha=0.0)

    M = (A + np.conj(A).T) / 2.0
    Acr = np.conj(A)
    floor = KERNEL_RTOL * scale

    def objective(U):
        Y = U @ A.T
        q = np.linalg.norm(Y, axis=1)
        ok = q > floor
        p = np.real(np.einsum("ij,ij->i", np.conj(U), U @ M.T))
        g = np.ones_like(q)
        g[ok] = p[ok] / q[ok]
        return g, p, q, Y, ok

    rng = np.random.default_rng(cfg.seed)
    pool = sample_unit(rng, max(cfg.presamples, cfg.starts), n)
    g_pool, _, _, _, _ = objective(pool)
    order = np.argsort(g_pool, kind="stable")
    presample_cos = float(g_pool[order[0]])
    U = pool[order[: cfg.starts]].copy()

    g, p, q, Y, ok = objective(U)
    step = np.full(U.shape[0], 0.25)
    for _ in range(cfg.max_iters):
        grad = np.zeros_like(U)
        MU = U @ M.T
        NU = Y @ Acr
        grad[ok] = 2.0 * MU[ok] / q[ok, None] - (p[ok] / q[ok] ** 3)[:, None] * NU[ok]
        radial = np.real(np.einsum("ij,ij->i", np.conj(U), grad))
        grad -= radial[:, None] * U
        V = U - step[:, None] * grad
        V /= np.linalg.norm(V, axis=1)[:, None]
        gV, pV, qV, YV, okV = objective(V)
        improved = gV < g
        U[improved] = V[improved]
        g[improved] = gV[improved]
        p[improved] = pV[improved]
        q[improved] = qV[improved]
        Y[improved] = YV[improved]
        ok[improved] = okV[improved]
        step[improved] *= 1.25
        step[~improved] *= 0.5
        if np.all(step < 1e-14):
            break

    best = int(np.argmin(g))
    ties = np.flatnonzero(g == g[best])
    if ties.size > 1:
        # Deterministic regardless of start ordering: lexicographically
        # smallest canonical witness wins among exact ties.
        keys = [_canonical_phase(U[t]).tobytes() for t in ties]
        best = int(ties[keys.index(min(keys))])
    # Descent started at the best presample, so g[best] <= presample_cos;
    # keep the tighter value defensively.
    cos_best = float(min(g[best], presample_cos))
    alpha = float(np.arccos(np.clip(cos_best, -1.0, 1.0)))
    witness = _canonical_phase(U[best])
    presample_alpha = float(np.arccos(np.clip(presample_cos, -1.0, 1.0)))
    return AlphaMaxResult(
        alpha=alpha, witness=witness, cos_value=cos_best, presample_alpha=presample_alpha
    )


def alpha_max_oracle(A, n_dense: int = 100_000, seed: int = 0) -> float:
    """Brute-force estimate of the maximum angle by dense sphere sampling.

    Restricted to n <= 4 (cost guard) and n_dense >= 1e5; used to validate
    the optimizer, never by the certificates themselves.
    """
    A = _check_matrix(A)
    if A.shape[0] > 4:
        raise DimensionTooLarge("dense oracle is restricted to n <= 4")
    if n_dense < 100_000:
        raise ValueError("n_dense must be >= 100000")
    rng = np.random.default_rng(seed)
    best = 0.0
    remaining = int(n_dense)
    while remaining > 0:
        chunk = min(remaining, 200_000)
        U = sample_unit(rng, chunk, A.shape[0])
        _, alpha = _gain_angle(A, U)
        best = max(best, float(np.max(alpha)))
        remaining -= chunk
    return best


@dataclass(frozen=True)
class ArcSet:
    """Union of origin-centered arcs {r e^{j b} : |b| <= alpha}.

    Closing a point cloud under the right-arc operation sweeps every point
    toward the real axis; the extreme gain and extreme angle of the cloud
    are unchanged by construction.
    """

    arcs: np.ndarray  # rows (r, alpha_max)

    def sigma_max(self) -> float:
        return float(np.max(self.arcs[:, 0]))

    def alpha_max(self) -> float:
        return float(np.max(self.arcs[:, 1]))

    def covers(self, r: float, alpha: float, rtol: float = 1e-12) -> bool:
        tol = rtol * max(1.0, self.sigma_max())
        match = np.abs(self.arcs[:, 0] - r) <= tol
        return bool(np.any(self.arcs[match, 1] >= abs(alpha) - 1e-15))


def right_arc_closure(S: SrgSample) -> ArcSet:
    """Arc set generated by sweeping each sampled point to the real axis."""
    return ArcSet(arcs=np.column_stack([S.r, np.abs(S.alpha)]))


@dataclass(frozen=True)
class TauRayResult:
    """Distance from (-1, 0) to the tau-scaled cloud, tau in (0, 1]."""

    distance: float
    membership: bool
    witness_index: int


def tau_ray_distance(S: SrgSample, tol_member: float = 1e-6) -> TauRayResult:
    """inf over sampled points z and tau in (0, 1] of |tau z - (-1)|.

    Per point this is the exact distance from -1 to the segment {tau z};
    mirrored points give the same distance, so upper-half storage suffices.
    The infimum as tau -> 0 (value 1) applies when the segment points away
    from -1. Membership uses the declared absolute band ``tol_member``;
    the raw distance is always reported.
    """
    r = S.r
    re = r * np.cos(S.alpha)
    dist = np.ones_like(r)
    pos = r > 0.0
    t_star = np.zeros_like(r)
    t_star[pos] = -re[pos] / (r[pos] ** 2)
    interior = pos & (t_star > 0.0) & (t_star < 1.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        sin2 = 1.0 - (re / np.where(pos, r, 1.0)) ** 2
    dist[interior] = np.sqrt(np.maximum(sin2[interior], 0.0))
    endpoint = pos & (t_star >= 1.0)
    im = r * np.sin(S.alpha)
    dist[endpoint] = np.hypot(re[endpoint] + 1.0, im[endpoint])
    k = int(np.argmin(dist))
    d = float(dist[k])
    return TauRayResult(distance=d, membership=bool(d <= tol_member), witness_index=k)
