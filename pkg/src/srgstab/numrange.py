"""Numerical range (field of values) of complex square matrices.

The boundary is traced with the rotation method: for each direction theta,
the largest eigenvalue of the Hermitian part of e^{-j theta} A is the
support value of W(A) in that direction and the corresponding eigenvector
maps to the boundary point v* A v. Whether the origin lies inside, on, or
outside W(A) is decided from the support minimum, which is refined locally
so the answer is not biased by the direction grid.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
import scipy.linalg
import scipy.optimize

from ._sphere import sample_unit
from .errors import EigFailure, NotDefined, NotSectorial, NumericalBreakdown

# Band around the origin (relative to ||A||) that counts as "0 on the boundary".
ZERO_BAND_RTOL = 1e-9
# Angular tolerance separating a half-plane sector (opening pi) from a narrower one.
OPENING_TOL = 1e-6
# Boundary points closer than this (relative) are merged.
DEDUP_RTOL = 1e-10


class Sectoriality(str, Enum):
    SECTORIAL = "sectorial"
    QUASI_SECTORIAL = "quasi-sectorial"
    SEMI_SECTORIAL = "semi-sectorial"
    NON_SECTORIAL = "non-sectorial"


@dataclass(frozen=True)
class NumericalRange:
    """Boundary polyline of W(A) plus origin/sector classification data.

    ``origin_depth`` is the signed distance from 0 to the boundary of W(A):
    positive inside, negative outside. ``support`` holds the support values
    h(theta) on the direction grid ``thetas``; together they give a robust
    membership test for arbitrary points (see :meth:`support_margin`).
    """

    boundary: np.ndarray
    classification: Sectoriality
    contains_zero: bool
    support_max: Optional[float]
    support_min: Optional[float]
    opening: float
    origin_depth: float
    scale: float
    thetas: np.ndarray
    support: np.ndarray

    def support_margin(self, z) -> np.ndarray:
        """min over directions of h(theta) - Re(z e^{-j theta}).

        Positive for points inside W(A) (their depth), negative for points
        outside (minus their separation). Vectorized over ``z``.
        """
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        proj = np.outer(z.real, np.cos(self.thetas)) + np.outer(z.imag, np.sin(self.thetas))
        return np.min(self.support[None, :] - proj, axis=1)


def _support_curve(A: np.ndarray, thetas: np.ndarray):
    """Support values of W(A) and the boundary points attaining them."""
    phase = np.exp(-1j * thetas)
    rotated = phase[:, None, None] * A[None, :, :]
    herm = (rotated + np.conj(np.transpose(rotated, (0, 2, 1)))) / 2.0
    try:
        w, v = np.linalg.eigh(herm)
    except np.linalg.LinAlgError as exc:
        raise EigFailure("eigendecomposition of the rotated Hermitian parts failed") from exc
    support = w[:, -1]
    vecs = v[:, :, -1]
    pts = np.einsum("ki,ij,kj->k", np.conj(vecs), A, vecs)
    return support.astype(float), pts


def _support_at(A: np.ndarray, theta: float) -> float:
    herm = (np.exp(-1j * theta) * A + np.conj(np.exp(-1j * theta) * A).T) / 2.0
    return float(np.linalg.eigvalsh(herm)[-1])


def _refined_support_min(A: np.ndarray, thetas: np.ndarray, support: np.ndarray) -> float:
    """Minimum of the support function over all directions, not just the grid."""
    k = int(np.argmin(support))
    step = 2.0 * math.pi / thetas.size
    lo, hi = thetas[k] - step, thetas[k] + step
    res = scipy.optimize.minimize_scalar(
        lambda t: _support_at(A, t), bounds=(lo, hi), method="bounded",
        options={"xatol": 1e-12},
    )
    return float(min(support[k], res.fun))


def _order_boundary(pts: np.ndarray, scale: float) -> np.ndarray:
    """Deduplicate and order boundary points counterclockwise about their mean."""
    tol = DEDUP_RTOL * max(scale, np.finfo(float).tiny)
    center = pts.mean()
    order = np.argsort(np.angle(pts - center), kind="stable")
    ordered = pts[order]
    kept = [ordered[0]]
    for p in ordered[1:]:
        if abs(p - kept[-1]) > tol:
            kept.append(p)
    if len(kept) > 1 and abs(kept[0] - kept[-1]) <= tol:
        kept.pop()
    return np.asarray(kept, dtype=complex)


def _argument_arc(pts: np.ndarray):
    """Smallest argument interval (s_min, s_max) containing all points.

    Found via the largest circular gap between sorted arguments; the result
    is unwrapped so s_max >= s_min and canonicalized to s_min in (-pi, pi].
    """
    args = np.sort(np.angle(pts))
    if args.size == 1:
        a = float(args[0])
        return a, a
    gaps = np.diff(args)
    wrap = args[0] + 2.0 * math.pi - args[-1]
    all_gaps = np.append(gaps, wrap)
    k = int(np.argmax(all_gaps))
    if k == args.size - 1:
        s_min, s_max = float(args[0]), float(args[-1])
    else:
        s_min = float(args[k + 1])
        s_max = float(args[k]) + 2.0 * math.pi
    if s_min > math.pi:
        s_min -= 2.0 * math.pi
        s_max -= 2.0 * math.pi
    return s_min, s_max


def _classify(origin_depth: float, opening: float, scale: float) -> Sectoriality:
    band = ZERO_BAND_RTOL * max(scale, np.finfo(float).tiny)
    if origin_depth < -band:
        return Sectoriality.SECTORIAL
    if origin_depth <= band:
        if opening >= math.pi - OPENING_TOL:
            return Sectoriality.SEMI_SECTORIAL
        return Sectoriality.QUASI_SECTORIAL
    return Sectoriality.NON_SECTORIAL


def numrange_boundary(A, n_angles: int = 360) -> NumericalRange:
    """Compute the boundary of W(A) and classify it against the origin.

    Parameters
    ----------
    A : array_like
        Complex square matrix, n >= 1.
    n_angles : int
        Number of support directions (>= 8). More directions sharpen both
        the polyline and the supporting angles.
    """
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
        raise ValueError("A must be a non-empty square matrix")
    if not np.all(np.isfinite(A)):
        raise ValueError("A must contain only finite values")
    if n_angles < 8:
        raise ValueError("n_angles must be >= 8")
    scale = float(np.linalg.norm(A, 2))
    thetas = np.linspace(0.0, 2.0 * math.pi, n_angles, endpoint=False)
    support, raw_pts = _support_curve(A, thetas)
    boundary = _order_boundary(raw_pts, scale)
    origin_depth = _refined_support_min(A, thetas, support)
    band = ZERO_BAND_RTOL * max(scale, np.finfo(float).tiny)
    nonzero = boundary[np.abs(boundary) > band]
    if nonzero.size:
        s_min, s_max = _argument_arc(nonzero)
    else:
        s_min = s_max = 0.0
    opening = s_max - s_min
    classification = _classify(origin_depth, opening, scale)
    non_sectorial = classification is Sectoriality.NON_SECTORIAL
    return NumericalRange(
        boundary=boundary,
        classification=classification,
        contains_zero=classification is not Sectoriality.SECTORIAL,
        support_max=None if non_sectorial else s_max,
        support_min=None if non_sectorial else s_min,
        opening=opening,
        origin_depth=origin_depth,
        scale=scale,
        thetas=thetas,
        support=support,
    )


def classify(R: NumericalRange) -> Sectoriality:
    """Sectoriality of a computed numerical range.

    Sectorial: 0 strictly outside W(A). Quasi-sectorial: 0 on the boundary
    with sector opening below pi. Semi-sectorial: 0 on the boundary with
    opening pi. Non-sectorial: 0 strictly interior. "On the boundary" uses
    the band 1e-9 * ||A||.
    """
    return _classify(R.origin_depth, R.opening, R.scale)


def supporting_angles(R: NumericalRange) -> tuple[float, float]:
    """Extreme argument angles (support_max, support_min) of W(A) about 0.

    Undefined when 0 is interior to W(A).
    """
    if R.classification is Sectoriality.NON_SECTORIAL:
        raise NotDefined("supporting angles are undefined for a non-sectorial range")
    return float(R.support_max), float(R.support_min)


@dataclass(frozen=True)
class SectorialPhases:
    """Phases of a sectorial matrix, descending, with the rotation used."""

    phases: np.ndarray
    rotation: float

    @property
    def max_phase(self) -> float:
        return float(self.phases[0])

    @property
    def min_phase(self) -> float:
        return float(self.phases[-1])


def sectorial_phases(A, n_angles: int = 360) -> SectorialPhases:
    """Numerical-range phases of a sectorial matrix.

    The matrix is rotated by the mid supporting angle phi so its Hermitian
    part H becomes positive definite, and the phases are
    phi + arctan(eig(H^{-1/2} S H^{-1/2})) with S the skew part. For normal
    sectorial matrices this reproduces the eigenvalue arguments.

    Raises :class:`NotSectorial` unless the matrix classifies as sectorial,
    and :class:`NumericalBreakdown` if H is not positive definite within
    1e-12 * ||A||.
    """
    A = np.asarray(A, dtype=complex)
    if A.shape == (1, 1):
        a = A[0, 0]
        if a == 0:
            raise NotSectorial("W(A) = {0} for the scalar zero")
        phi = float(np.angle(a))
        return SectorialPhases(phases=np.array([phi]), rotation=phi)
    R = numrange_boundary(A, n_angles=n_angles)
    if R.classification is not Sectoriality.SECTORIAL:
        raise NotSectorial(f"matrix classifies as {R.classification.value}")
    phi = (R.support_max + R.support_min) / 2.0
    B = np.exp(-1j * phi) * A
    Hm = (B + np.conj(B).T) / 2.0
    Sm = (B - np.conj(B).T) / (2.0j)
    wmin = float(np.linalg.eigvalsh(Hm)[0])
    if wmin <= 1e-12 * R.scale:
        raise NumericalBreakdown(
            f"rotated Hermitian part is not positive definite (min eig {wmin:.3e})"
        )
    lam = scipy.linalg.eigh(Sm, Hm, eigvals_only=True)
    phases = np.sort(phi + np.arctan(np.asarray(lam, dtype=float)))[::-1]
    return SectorialPhases(phases=phases, rotation=phi)


def contains_zero_sampled(A, n_samples: int = 10_000, seed: int = 0,
                          rtol: float = 5e-3) -> bool:
    """Sampling oracle: does 0 lie in the convex hull of sampled x* A x?

    Independent of the rotation method; membership is resolved up to a
    sampling band of ``rtol * ||A||`` because the hull of finitely many
    samples sits strictly inside W(A).
    """
    A = np.asarray(A, dtype=complex)
    if n_samples < 1000:
        raise ValueError("n_samples must be >= 1000")
    scale = float(np.linalg.norm(A, 2))
    rng = np.random.default_rng(seed)
    U = sample_unit(rng, n_samples, A.shape[0])
    pts = np.einsum("ij,ij->i", np.conj(U), U @ A.T)
    re, im = pts.real, pts.imag
    thetas = np.linspace(0.0, 2.0 * math.pi, 720, endpoint=False)
    min_support = math.inf
    for chunk in np.array_split(thetas, 6):
        vals = np.outer(np.cos(chunk), re) + np.outer(np.sin(chunk), im)
        min_support = min(min_support, float(vals.max(axis=1).min()))
    return min_support >= -rtol * max(scale, np.finfo(float).tiny)
