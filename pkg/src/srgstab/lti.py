"""Square MIMO LTI models and the closed-loop eigenvalue oracle.

Models are either grids of real-coefficient rational functions or real
state-space quadruples (A, B, C, D); both evaluate at s = jw and convert
between each other. Frequencies are rad/s and angles radians throughout.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import (
    BadRange,
    IllPosed,
    ImproperEntry,
    ModelFormatError,
    PoleOnAxis,
    Singular,
)

# Hurwitz margin: a pole is "stable" only if its real part is below -TOL_STAB.
TOL_STAB = 1e-9
# Relative vanishing threshold for denominators at s = jw.
POLE_AXIS_RTOL = 1e-12


def _finite_array(x, what: str, dtype=float) -> np.ndarray:
    arr = np.asarray(x, dtype=dtype)
    if arr.size and not np.all(np.isfinite(arr)):
        raise ValueError(f"{what} must contain only finite values")
    return arr


def _trim_leading_zeros(c: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(c != 0.0)
    if nz.size == 0:
        return c[-1:]
    return c[nz[0]:]


@dataclass(frozen=True)
class RationalFunction:
    """Real-coefficient rational function num(s)/den(s).

    Coefficients are stored in descending powers of s. The denominator must
    not be the zero polynomial; leading zeros are stripped on construction.
    """

    num: tuple
    den: tuple

    def __post_init__(self):
        num = _trim_leading_zeros(_finite_array(self.num, "num"))
        den = _finite_array(self.den, "den")
        if not np.any(den != 0.0):
            raise ValueError("den must not be the zero polynomial")
        den = _trim_leading_zeros(den)
        object.__setattr__(self, "num", tuple(float(c) for c in num))
        object.__setattr__(self, "den", tuple(float(c) for c in den))

    @classmethod
    def constant(cls, value: float) -> "RationalFunction":
        return cls((float(value),), (1.0,))

    @property
    def deg_num(self) -> int:
        return len(self.num) - 1

    @property
    def deg_den(self) -> int:
        return len(self.den) - 1

    @property
    def is_proper(self) -> bool:
        # The zero numerator trims to (0.0,), degree 0, so it is always proper.
        if self.num == (0.0,):
            return True
        return self.deg_num <= self.deg_den

    def __call__(self, s: complex) -> complex:
        return complex(np.polyval(self.num, s) / np.polyval(self.den, s))

    def den_magnitude_at(self, omega: float) -> tuple[float, float]:
        """|den(jw)| together with the coefficient-mass scale used for the
        relative pole-on-axis test."""
        val = abs(np.polyval(self.den, 1j * omega))
        scale = float(np.polyval(np.abs(self.den), abs(omega)))
        return float(val), scale

    def limit_at_infinity(self) -> float:
        if self.num == (0.0,):
            return 0.0
        if self.deg_num < self.deg_den:
            return 0.0
        if self.deg_num == self.deg_den:
            return self.num[0] / self.den[0]
        raise ImproperEntry("deg(num) > deg(den); no finite limit at infinity")

    def poles(self) -> np.ndarray:
        if self.deg_den == 0:
            return np.empty(0, dtype=complex)
        return np.roots(self.den)


class TransferMatrix:
    """Square n-by-n LTI model in rational or state-space form.

    Exactly one representation is populated. Use :func:`eval_freq` for
    frequency responses and :func:`rational_to_statespace` to convert.
    """

    def __init__(self, name: str, *, entries=None, A=None, B=None, C=None, D=None):
        self.name = str(name)
        if (entries is None) == (A is None):
            raise ValueError("exactly one of entries / state-space must be given")
        if entries is not None:
            n = len(entries)
            if n == 0 or any(len(row) != n for row in entries):
                raise ValueError("entries must form a square non-empty grid")
            self.entries = [
                [e if isinstance(e, RationalFunction) else RationalFunction(*e) for e in row]
                for row in entries
            ]
            self.A = self.B = self.C = self.D = None
            self._n = n
        else:
            A = _finite_array(A, "A")
            B = _finite_array(B, "B")
            C = _finite_array(C, "C")
            D = _finite_array(D, "D")
            if D.ndim != 2 or D.shape[0] != D.shape[1] or D.shape[0] == 0:
                raise ValueError("D must be square and non-empty")
            n = D.shape[0]
            nx = A.shape[0] if A.size else 0
            A = A.reshape(nx, nx)
            B = B.reshape(nx, n)
            C = C.reshape(n, nx)
            self.entries = None
            self.A, self.B, self.C, self.D = A, B, C, D
            self._n = n

    @classmethod
    def from_rational(cls, entries, name: str = "H") -> "TransferMatrix":
        return cls(name, entries=entries)

    @classmethod
    def from_statespace(cls, A, B, C, D, name: str = "H") -> "TransferMatrix":
        return cls(name, A=A, B=B, C=C, D=D)

    @classmethod
    def static_gain(cls, D, name: str = "H") -> "TransferMatrix":
        D = np.atleast_2d(np.asarray(D, dtype=float))
        n = D.shape[0]
        return cls(name, A=np.zeros((0, 0)), B=np.zeros((0, n)), C=np.zeros((n, 0)), D=D)

    @classmethod
    def identity(cls, n: int, name: str = "I") -> "TransferMatrix":
        return cls.static_gain(np.eye(n), name=name)

    @property
    def n(self) -> int:
        return self._n

    @property
    def is_rational(self) -> bool:
        return self.entries is not None

    @property
    def is_statespace(self) -> bool:
        return self.entries is None

    @property
    def state_dim(self) -> int:
        if self.is_rational:
            return sum(rf.deg_den for row in self.entries for rf in row)
        return self.A.shape[0]

    def __repr__(self):
        kind = "rational" if self.is_rational else "statespace"
        return f"TransferMatrix({self.name!r}, n={self.n}, {kind})"


@dataclass(frozen=True)
class FrequencyGrid:
    """Strictly increasing frequencies in rad/s."""

    points: np.ndarray
    includes_zero: bool
    scale: str

    def __post_init__(self):
        pts = _finite_array(self.points, "grid points")
        if pts.ndim != 1 or pts.size == 0:
            raise BadRange("grid must be a non-empty 1-D array")
        if np.any(pts < 0.0) or np.any(np.diff(pts) <= 0.0):
            raise BadRange("grid points must be non-negative and strictly increasing")
        if self.includes_zero and pts[0] != 0.0:
            raise BadRange("includes_zero grids must start at exactly 0")
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return int(self.points.size)


def make_grid(
    w_min: float,
    w_max: float,
    points_per_decade: int,
    include_zero: bool = False,
) -> FrequencyGrid:
    """Deterministic log-spaced grid with ``points_per_decade`` density.

    Endpoints are hit exactly; ``include_zero`` prepends an exact 0.
    """
    if not (0.0 < w_min < w_max) or not math.isfinite(w_min) or not math.isfinite(w_max):
        raise BadRange(f"need 0 < w_min < w_max, got ({w_min}, {w_max})")
    if points_per_decade < 1:
        raise BadRange("points_per_decade must be >= 1")
    decades = math.log10(w_max / w_min)
    count = max(2, int(round(points_per_decade * decades)) + 1)
    pts = np.geomspace(w_min, w_max, count)
    if include_zero:
        pts = np.concatenate(([0.0], pts))
    return FrequencyGrid(points=pts, includes_zero=include_zero, scale="log")


def eval_freq(H: TransferMatrix, omega: float) -> np.ndarray:
    """Frequency response H(jw) as a complex n-by-n array.

    ``omega`` may be ``math.inf``, in which case the feedthrough limit is
    returned (D for state-space models, leading-coefficient ratios for
    rational ones).

    Raises :class:`PoleOnAxis` when a rational denominator vanishes at jw
    (relative tolerance 1e-12) and :class:`Singular` when (jwI - A) cannot
    be solved reliably.
    """
    omega = float(omega)
    if math.isnan(omega) or omega < 0.0:
        raise ValueError(f"omega must be >= 0, got {omega}")
    if math.isinf(omega):
        return eval_limit(H)
    if H.is_rational:
        out = np.empty((H.n, H.n), dtype=complex)
        s = 1j * omega
        for i, row in enumerate(H.entries):
            for j, rf in enumerate(row):
                val, scale = rf.den_magnitude_at(omega)
                if val <= POLE_AXIS_RTOL * scale:
                    raise PoleOnAxis(
                        f"{H.name}: entry ({i},{j}) denominator vanishes at omega={omega}"
                    )
                out[i, j] = rf(s)
        return out
    if H.A.shape[0] == 0:
        return H.D.astype(complex).copy()
    M = 1j * omega * np.eye(H.A.shape[0]) - H.A
    try:
        X = np.linalg.solve(M, H.B)
    except np.linalg.LinAlgError as exc:
        raise Singular(f"{H.name}: jwI - A is singular at omega={omega}") from exc
    resid = np.linalg.norm(M @ X - H.B)
    bound = 1e-8 * max(1.0, np.linalg.norm(M)) * max(1.0, np.linalg.norm(X))
    if not np.all(np.isfinite(X)) or resid > bound:
        raise Singular(f"{H.name}: jwI - A is numerically singular at omega={omega}")
    return H.C @ X + H.D


def eval_limit(H: TransferMatrix) -> np.ndarray:
    """High-frequency limit of the response (the feedthrough term)."""
    if H.is_statespace:
        return H.D.astype(complex).copy()
    out = np.zeros((H.n, H.n), dtype=complex)
    for i, row in enumerate(H.entries):
        for j, rf in enumerate(row):
            out[i, j] = rf.limit_at_infinity()
    return out


def _siso_realization(rf: RationalFunction):
    """Controllable-canonical (A, B, C, D) for one proper rational entry."""
    den = np.asarray(rf.den)
    num = np.asarray(rf.num)
    den0 = den[0]
    a = den / den0
    k = len(a) - 1
    b = np.zeros(k + 1)
    b[k + 1 - len(num):] = num / den0
    d = b[0]
    if k == 0:
        return None, None, None, d
    A = np.zeros((k, k))
    if k > 1:
        A[:-1, 1:] = np.eye(k - 1)
    A[-1, :] = -a[1:][::-1]
    B = np.zeros((k, 1))
    B[-1, 0] = 1.0
    C = (b[1:] - b[0] * a[1:])[::-1].reshape(1, k)
    return A, B, C, d


def rational_to_statespace(H: TransferMatrix) -> TransferMatrix:
    """Entrywise controllable-canonical realization, aggregated block-diagonally.

    The result is generally non-minimal; hidden modes keep their open-loop
    locations, which is what the conservative stability checks rely on.
    Raises :class:`ImproperEntry` if some entry has deg(num) > deg(den).
    """
    if H.is_statespace:
        return H
    n = H.n
    blocks = []
    total = 0
    D = np.zeros((n, n))
    for i, row in enumerate(H.entries):
        for j, rf in enumerate(row):
            if not rf.is_proper:
                raise ImproperEntry(f"{H.name}: entry ({i},{j}) is improper")
            Ab, Bb, Cb, d = _siso_realization(rf)
            D[i, j] = d
            if Ab is not None:
                blocks.append((i, j, Ab, Bb, Cb, total))
                total += Ab.shape[0]
    A = np.zeros((total, total))
    B = np.zeros((total, n))
    C = np.zeros((n, total))
    for i, j, Ab, Bb, Cb, at in blocks:
        k = Ab.shape[0]
        A[at:at + k, at:at + k] = Ab
        B[at:at + k, j] = Bb[:, 0]
        C[i, at:at + k] = Cb[0, :]
    return TransferMatrix.from_statespace(A, B, C, D, name=H.name)


def poles(H: TransferMatrix) -> np.ndarray:
    """All model poles, without attempting pole-zero cancellation.

    Rational models return the union of denominator roots (with
    multiplicity); state-space models return the eigenvalues of A.
    """
    if H.is_rational:
        parts = [rf.poles() for row in H.entries for rf in row]
        if not parts:
            return np.empty(0, dtype=complex)
        return np.concatenate(parts)
    if H.A.shape[0] == 0:
        return np.empty(0, dtype=complex)
    return np.linalg.eigvals(H.A)


@dataclass(frozen=True)
class RhInfVerdict:
    """Result of the properness + Hurwitz membership test."""

    ok: bool
    witness_pole: Optional[complex] = None
    improper_entry: Optional[tuple] = None

    @property
    def reason(self) -> str:
        if self.ok:
            return "all entries proper, all poles in the open left half-plane"
        if self.improper_entry is not None:
            return f"entry {self.improper_entry} is improper"
        return f"pole at {self.witness_pole} is not strictly in the left half-plane"


def is_rh_inf(H: TransferMatrix, tol_stab: float = TOL_STAB) -> RhInfVerdict:
    """Check properness and strict Hurwitz stability of every pole.

    No cancellation is attempted, so a cancellable unstable pole still
    fails. The witness reports the worst offending pole.
    """
    if H.is_rational:
        for i, row in enumerate(H.entries):
            for j, rf in enumerate(row):
                if not rf.is_proper:
                    return RhInfVerdict(ok=False, improper_entry=(i, j))
    p = poles(H)
    if p.size:
        worst = p[np.argmax(p.real)]
        if worst.real >= -tol_stab:
            return RhInfVerdict(ok=False, witness_pole=complex(worst))
    return RhInfVerdict(ok=True)


@dataclass(frozen=True)
class ClosedLoopModel:
    """State-space form of the negative feedback loop of two systems."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    wellposed: bool


def close_loop(H1: TransferMatrix, H2: TransferMatrix) -> ClosedLoopModel:
    """Negative feedback interconnection y = H1 (u - H2 y).

    Both models are converted to state space first. Raises
    :class:`IllPosed` when (I + D1 D2) is not invertible.
    """
    if H1.n != H2.n:
        raise ValueError(f"dimension mismatch: {H1.n} vs {H2.n}")
    S1 = rational_to_statespace(H1)
    S2 = rational_to_statespace(H2)
    n = S1.n
    Ieye = np.eye(n)
    loop = Ieye + S1.D @ S2.D
    if np.linalg.cond(loop) > 1e12:
        raise IllPosed("feedthrough loop (I + D1 D2) is singular")
    M = np.linalg.solve(loop, Ieye)
    nx1, nx2 = S1.A.shape[0], S2.A.shape[0]
    A = np.zeros((nx1 + nx2, nx1 + nx2))
    A[:nx1, :nx1] = S1.A - S1.B @ S2.D @ M @ S1.C
    A[:nx1, nx1:] = -S1.B @ S2.C + S1.B @ S2.D @ M @ S1.D @ S2.C
    A[nx1:, :nx1] = S2.B @ M @ S1.C
    A[nx1:, nx1:] = S2.A - S2.B @ M @ S1.D @ S2.C
    B = np.vstack([S1.B @ (Ieye - S2.D @ M @ S1.D), S2.B @ M @ S1.D])
    C = np.hstack([M @ S1.C, -M @ S1.D @ S2.C])
    D = M @ S1.D
    return ClosedLoopModel(A=A, B=B, C=C, D=D, wellposed=True)


@dataclass(frozen=True)
class StabilityVerdict:
    stable: bool
    spectral_abscissa: float


def oracle_stable(M: ClosedLoopModel, tol_stab: float = TOL_STAB) -> StabilityVerdict:
    """Ground truth: closed-loop eigenvalues strictly in the left half-plane."""
    if not M.wellposed:
        raise IllPosed("cannot assess stability of an ill-posed loop")
    if M.A.shape[0] == 0:
        return StabilityVerdict(stable=True, spectral_abscissa=-math.inf)
    eig = np.linalg.eigvals(M.A)
    abscissa = float(np.max(eig.real))
    return StabilityVerdict(stable=abscissa < -tol_stab, spectral_abscissa=abscissa)


# ---------------------------------------------------------------------------
# Model JSON format
#
# { "name": "H1", "n": 2, "representation": "rational",
#   "entries": [[{"num": [20, 30], "den": [1, 13, 30]}, ...], ...] }
# or "representation": "statespace" with "A", "B", "C", "D" as nested
# row-major lists. Coefficients are descending in s.
# ---------------------------------------------------------------------------


def _require(cond: bool, source: str, path: str, msg: str):
    if not cond:
        raise ModelFormatError(f"{source}: {path}: {msg}")


def _num_list(value, source: str, path: str) -> list:
    _require(isinstance(value, list) and len(value) > 0, source, path, "expected a non-empty list of numbers")
    for k, v in enumerate(value):
        _require(isinstance(v, (int, float)) and not isinstance(v, bool), source, f"{path}[{k}]", "expected a number")
    return [float(v) for v in value]


def model_from_dict(data: dict, source: str = "<dict>") -> TransferMatrix:
    """Build a :class:`TransferMatrix` from the documented JSON schema,
    reporting the offending field on validation failure."""
    _require(isinstance(data, dict), source, "$", "expected a JSON object")
    name = data.get("name", "H")
    _require(isinstance(name, str), source, "name", "expected a string")
    n = data.get("n")
    _require(isinstance(n, int) and n >= 1, source, "n", "expected a positive integer")
    rep = data.get("representation")
    _require(rep in ("rational", "statespace"), source, "representation",
             "expected 'rational' or 'statespace'")
    if rep == "rational":
        entries = data.get("entries")
        _require(isinstance(entries, list) and len(entries) == n, source, "entries",
                 f"expected {n} rows")
        grid = []
        for i, row in enumerate(entries):
            _require(isinstance(row, list) and len(row) == n, source, f"entries[{i}]",
                     f"expected {n} columns")
            out_row = []
            for j, cell in enumerate(row):
                path = f"entries[{i}][{j}]"
                _require(isinstance(cell, dict), source, path, "expected an object with num/den")
                num = _num_list(cell.get("num"), source, f"{path}.num")
                den = _num_list(cell.get("den"), source, f"{path}.den")
                _require(any(c != 0.0 for c in den), source, f"{path}.den",
                         "denominator must not be the zero polynomial")
                out_row.append(RationalFunction(tuple(num), tuple(den)))
            grid.append(out_row)
        return TransferMatrix.from_rational(grid, name=name)
    mats = {}
    for key in ("A", "B", "C", "D"):
        raw = data.get(key)
        _require(isinstance(raw, list), source, key, "expected a nested list")
        try:
            mats[key] = np.array(raw, dtype=float)
        except (TypeError, ValueError):
            raise ModelFormatError(f"{source}: {key}: expected a rectangular numeric array")
    _require(mats["D"].shape == (n, n), source, "D", f"expected shape ({n}, {n})")
    nx = mats["A"].shape[0] if mats["A"].size else 0
    _require(mats["A"].size == 0 or mats["A"].shape == (nx, nx), source, "A", "expected a square array")
    _require(mats["B"].size == 0 and nx == 0 or mats["B"].shape == (nx, n), source, "B",
             f"expected shape ({nx}, {n})")
    _require(mats["C"].size == 0 and nx == 0 or mats["C"].shape == (n, nx), source, "C",
             f"expected shape ({n}, {nx})")
    return TransferMatrix.from_statespace(mats["A"].reshape(nx, nx), mats["B"].reshape(nx, n),
                                          mats["C"].reshape(n, nx), mats["D"], name=name)


def load_model(path) -> TransferMatrix:
    """Load a model JSON file, with line/field diagnostics on failure."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ModelFormatError(f"{path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    return model_from_dict(data, source=str(path))


def model_to_dict(H: TransferMatrix) -> dict:
    """Inverse of :func:`model_from_dict`."""
    if H.is_rational:
        return {
            "name": H.name,
            "n": H.n,
            "representation": "rational",
            "entries": [
                [{"num": list(rf.num), "den": list(rf.den)} for rf in row]
                for row in H.entries
            ],
        }
    return {
        "name": H.name,
        "n": H.n,
        "representation": "statespace",
        "A": H.A.tolist(),
        "B": H.B.tolist(),
        "C": H.C.tolist(),
        "D": H.D.tolist(),
    }
