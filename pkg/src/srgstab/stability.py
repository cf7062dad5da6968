"""Per-frequency stability conditions and grid-certified sweeps.

Five conditions are evaluated at each frequency of a grid plus one
synthetic high-frequency sample (the feedthrough limit, reported as
omega = inf):

* small gain:        sigma_max(H1) * sigma_max(H2) < 1
* graph small phase: alpha_max(H1) + alpha_max(H2) < pi
* classic small phase: both responses sectorial with numerical-range
  phase sums inside (-pi, pi)
* mixed:             small gain or graph small phase at every frequency
* ray separation:    (-1, 0) outside tau * SRG(H1 H2) for tau in (0, 1]

Certificates are grid-certified only: they quantify over the evaluated
samples, and every verdict carries its numeric margins so callers can
impose their own robustness bands. A closed-loop eigenvalue oracle is run
alongside whenever state-space forms are available.
"""
from __future__ import annotations

import math
import os
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import IllPosed, ImproperEntry, SrgStabError
from .lti import (
    FrequencyGrid,
    TransferMatrix,
    close_loop,
    eval_freq,
    is_rh_inf,
    oracle_stable,
    rational_to_statespace,
)
from .numrange import (
    SectorialPhases,
    Sectoriality,
    numrange_boundary,
    sectorial_phases,
)
from .srg import AlphaMaxConfig, alpha_max, srg_sample, tau_ray_distance

_PURPOSE = {"alpha1": 1, "alpha2": 2, "product_srg": 3, "srg1": 4, "srg2": 5}


def derived_seed(seed: int, omega: float, purpose: str) -> int:
    """Deterministic per-(frequency, purpose) seed split.

    Keyed on the bit pattern of omega rather than a grid index, so a
    frequency gets the same stream no matter which grid it appears in.
    """
    bits = struct.unpack("<Q", struct.pack("<d", float(omega)))[0]
    ss = np.random.SeedSequence(entropy=(int(seed), int(bits), _PURPOSE[purpose]))
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class SweepConfig:
    """Per-frequency computation budget and tolerances."""

    samples: int = 20_000
    starts: int = 64
    max_iters: int = 500
    tol: float = 1e-10
    n_angles: int = 360
    seed: int = 0
    tol_member: float = 1e-6
    tol_stab: float = 1e-9
    threads: Optional[int] = None


@dataclass(frozen=True)
class FrequencyVerdict:
    """All per-frequency quantities and condition outcomes.

    ``classic_phase_ok`` is None when either response is not sectorial
    (the classic condition is then inconclusive, not failed).
    """

    omega: float
    sigma1: float
    sigma2: float
    alpha1: float
    alpha2: float
    class1: Sectoriality
    class2: Sectoriality
    nr_phases1: Optional[SectorialPhases]
    nr_phases2: Optional[SectorialPhases]
    small_gain_ok: bool
    srg_phase_ok: bool
    classic_phase_ok: Optional[bool]
    corollary1_ok: bool
    distance_to_minus_one: float

    @property
    def gain_product(self) -> float:
        return self.sigma1 * self.sigma2

    @property
    def phase_sum(self) -> float:
        return self.alpha1 + self.alpha2

    @property
    def gain_margin(self) -> float:
        """How far below 1 the gain product sits (negative when violated)."""
        return 1.0 - self.gain_product

    @property
    def phase_margin(self) -> float:
        """How far below pi the angle sum sits (negative when violated)."""
        return math.pi - self.phase_sum


def _phases_if_sectorial(R_class: Sectoriality, M: np.ndarray, n_angles: int):
    if R_class is not Sectoriality.SECTORIAL:
        return None
    return sectorial_phases(M, n_angles=n_angles)


def verdict_at(
    H1: TransferMatrix,
    H2: TransferMatrix,
    omega: float,
    cfg: Optional[SweepConfig] = None,
) -> FrequencyVerdict:
    """Evaluate every per-frequency condition at one frequency.

    The ray-separation test runs on the sampled graph of the loop product
    H1(jw) H2(jw); sweeping the cloud toward the real axis (the arc
    closure) cannot move it closer to -1, so the sampled test already
    covers the closed set.
    """
    if cfg is None:
        cfg = SweepConfig()
    if H1.n != H2.n:
        raise ValueError(f"dimension mismatch: {H1.n} vs {H2.n}")
    M1 = eval_freq(H1, omega)
    M2 = eval_freq(H2, omega)
    a_cfg = dict(presamples=cfg.samples, starts=cfg.starts,
                 max_iters=cfg.max_iters, tol=cfg.tol)
    r1 = alpha_max(M1, AlphaMaxConfig(seed=derived_seed(cfg.seed, omega, "alpha1"), **a_cfg))
    r2 = alpha_max(M2, AlphaMaxConfig(seed=derived_seed(cfg.seed, omega, "alpha2"), **a_cfg))
    sigma1 = float(np.linalg.svd(M1, compute_uv=False)[0])
    sigma2 = float(np.linalg.svd(M2, compute_uv=False)[0])
    R1 = numrange_boundary(M1, n_angles=cfg.n_angles)
    R2 = numrange_boundary(M2, n_angles=cfg.n_angles)
    ph1 = _phases_if_sectorial(R1.classification, M1, cfg.n_angles)
    ph2 = _phases_if_sectorial(R2.classification, M2, cfg.n_angles)
    if ph1 is not None and ph2 is not None:
        classic_ok = (
            ph1.max_phase + ph2.max_phase < math.pi
            and ph1.min_phase + ph2.min_phase > -math.pi
        )
    else:
        classic_ok = None
    product = M1 @ M2
    cloud = srg_sample(product, n_samples=cfg.samples,
                       seed=derived_seed(cfg.seed, omega, "product_srg"))
    ray = tau_ray_distance(cloud, tol_member=cfg.tol_member)
    return FrequencyVerdict(
        omega=float(omega),
        sigma1=sigma1,
        sigma2=sigma2,
        alpha1=r1.alpha,
        alpha2=r2.alpha,
        class1=R1.classification,
        class2=R2.classification,
        nr_phases1=ph1,
        nr_phases2=ph2,
        small_gain_ok=bool(sigma1 * sigma2 < 1.0),
        srg_phase_ok=bool(r1.alpha + r2.alpha < math.pi),
        classic_phase_ok=classic_ok,
        corollary1_ok=bool(not ray.membership),
        distance_to_minus_one=ray.distance,
    )


@dataclass(frozen=True)
class Certificate:
    """Grid-certified outcome of one condition."""

    name: str
    status: str  # "pass" | "fail" | "inconclusive"
    witness: Optional[float] = None
    detail: str = ""

    @property
    def certified(self) -> bool:
        return self.status == "pass"


@dataclass(frozen=True)
class OracleRecord:
    stable: bool
    spectral_abscissa: float


@dataclass
class SweepReport:
    """Ordered verdicts over a grid plus per-condition certificates."""

    grid: FrequencyGrid
    verdicts: list
    errors: list
    certificates: dict
    omega_alpha: list
    omega_sigma: list
    assumptions_ok: bool
    warnings: list
    oracle: Optional[OracleRecord]
    config: SweepConfig
    h1_name: str = "H1"
    h2_name: str = "H2"

    @property
    def certified_small_gain(self) -> bool:
        return self.certificates["small_gain"].certified

    @property
    def certified_srg_phase(self) -> bool:
        return self.certificates["srg_phase"].certified

    @property
    def certified_classic_phase(self):
        """True when certified, False when failed, None when inconclusive."""
        status = self.certificates["classic_phase"].status
        if status == "inconclusive":
            return None
        return status == "pass"

    @property
    def certified_mixed(self) -> bool:
        return self.certificates["mixed"].certified

    @property
    def certified_corollary1(self) -> bool:
        return self.certificates["corollary1"].certified

    def to_dict(self) -> dict:
        def _omega_key(w: float):
            return "inf" if math.isinf(w) else float(w)

        verdicts = []
        for v in self.verdicts:
            verdicts.append({
                "omega": _omega_key(v.omega),
                "sigma1": float(v.sigma1),
                "sigma2": float(v.sigma2),
                "alpha1": float(v.alpha1),
                "alpha2": float(v.alpha2),
                "gain_product": float(v.gain_product),
                "phase_sum": float(v.phase_sum),
                "gain_margin": float(v.gain_margin),
                "phase_margin": float(v.phase_margin),
                "class1": v.class1.value,
                "class2": v.class2.value,
                "nr_phases1": None if v.nr_phases1 is None else [float(p) for p in v.nr_phases1.phases],
                "nr_phases2": None if v.nr_phases2 is None else [float(p) for p in v.nr_phases2.phases],
                "small_gain_ok": v.small_gain_ok,
                "srg_phase_ok": v.srg_phase_ok,
                "classic_phase_ok": v.classic_phase_ok,
                "corollary1_ok": v.corollary1_ok,
                "distance_to_minus_one": float(v.distance_to_minus_one),
            })
        certs = {}
        for name, c in self.certificates.items():
            certs[name] = {
                "status": c.status,
                "certified": c.certified,
                "witness": None if c.witness is None else _omega_key(c.witness),
                "detail": c.detail,
            }
        return {
            "schema": "srgstab.sweep_report@1",
            "h1": self.h1_name,
            "h2": self.h2_name,
            "config": {
                "samples": self.config.samples,
                "starts": self.config.starts,
                "max_iters": self.config.max_iters,
                "tol": self.config.tol,
                "n_angles": self.config.n_angles,
                "seed": self.config.seed,
                "tol_member": self.config.tol_member,
                "tol_stab": self.config.tol_stab,
            },
            "grid": {
                "points": [float(w) for w in self.grid.points],
                "includes_zero": self.grid.includes_zero,
                "scale": self.grid.scale,
                "synthetic_inf_sample": True,
            },
            "assumptions_ok": self.assumptions_ok,
            "warnings": list(self.warnings),
            "errors": [{"omega": _omega_key(w), "message": m} for w, m in self.errors],
            "omega_alpha": [_omega_key(w) for w in self.omega_alpha],
            "omega_sigma": [_omega_key(w) for w in self.omega_sigma],
            "certificates": certs,
            "oracle": None if self.oracle is None else {
                "stable": self.oracle.stable,
                "spectral_abscissa": float(self.oracle.spectral_abscissa),
            },
            "verdicts": verdicts,
        }

    def csv_rows(self):
        """Rows for the per-frequency table, header first."""
        yield ["omega", "sigma1", "sigma2", "alpha1", "alpha2",
               "sg_ok", "srgph_ok", "classic_ok", "cor1_ok", "dist"]
        for v in self.verdicts:
            yield [
                repr(float(v.omega)),
                repr(float(v.sigma1)),
                repr(float(v.sigma2)),
                repr(float(v.alpha1)),
                repr(float(v.alpha2)),
                "true" if v.small_gain_ok else "false",
                "true" if v.srg_phase_ok else "false",
                "" if v.classic_phase_ok is None else ("true" if v.classic_phase_ok else "false"),
                "true" if v.corollary1_ok else "false",
                repr(float(v.distance_to_minus_one)),
            ]


def _thread_count(cfg: SweepConfig) -> int:
    if cfg.threads is not None:
        return max(1, int(cfg.threads))
    env = os.environ.get("SRGSTAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return min(8, os.cpu_count() or 1)


def _first_witness(verdicts, predicate) -> Optional[float]:
    for v in verdicts:
        if predicate(v):
            return v.omega
    return None


def _bool_certificate(name: str, verdicts, flag) -> Certificate:
    witness = _first_witness(verdicts, lambda v: not flag(v))
    if witness is None:
        return Certificate(name=name, status="pass")
    return Certificate(name=name, status="fail", witness=witness,
                       detail=f"condition violated at omega={witness}")


def _classic_certificate(verdicts) -> Certificate:
    nonsec = _first_witness(
        verdicts,
        lambda v: v.class1 is not Sectoriality.SECTORIAL
        or v.class2 is not Sectoriality.SECTORIAL,
    )
    if nonsec is not None:
        return Certificate(
            name="classic_phase", status="inconclusive", witness=nonsec,
            detail=f"a response is not sectorial at omega={nonsec}; no conclusion",
        )
    violated = _first_witness(verdicts, lambda v: v.classic_phase_ok is False)
    if violated is not None:
        return Certificate(name="classic_phase", status="fail", witness=violated,
                           detail=f"phase-sum condition violated at omega={violated}")
    return Certificate(name="classic_phase", status="pass")


def sweep(
    H1: TransferMatrix,
    H2: TransferMatrix,
    grid: FrequencyGrid,
    cfg: Optional[SweepConfig] = None,
) -> SweepReport:
    """Evaluate all conditions over the grid plus the high-frequency sample.

    Membership of both systems in the stable proper class is checked up
    front; violations downgrade the report to inconclusive-with-warning
    (``assumptions_ok`` False) but the per-frequency aggregation still
    runs. Frequencies that fail to evaluate (a pole on the axis) are
    recorded as errors instead of aborting the sweep.
    """
    if cfg is None:
        cfg = SweepConfig()
    warnings = []
    rh1 = is_rh_inf(H1, tol_stab=cfg.tol_stab)
    rh2 = is_rh_inf(H2, tol_stab=cfg.tol_stab)
    if not rh1.ok:
        warnings.append(f"{H1.name}: {rh1.reason}; certificates assume membership and are inconclusive")
    if not rh2.ok:
        warnings.append(f"{H2.name}: {rh2.reason}; certificates assume membership and are inconclusive")

    omegas = [float(w) for w in grid.points] + [math.inf]

    def run(w):
        try:
            return verdict_at(H1, H2, w, cfg), None
        except SrgStabError as exc:
            return None, (w, f"{type(exc).__name__}: {exc}")

    workers = _thread_count(cfg)
    if workers > 1 and len(omegas) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, omegas))
    else:
        results = [run(w) for w in omegas]

    verdicts = [v for v, err in results if v is not None]
    errors = [err for v, err in results if err is not None]
    for w, msg in errors:
        warnings.append(f"omega={w} skipped: {msg}")

    certificates = {
        "small_gain": _bool_certificate("small_gain", verdicts, lambda v: v.small_gain_ok),
        "srg_phase": _bool_certificate("srg_phase", verdicts, lambda v: v.srg_phase_ok),
        "classic_phase": _classic_certificate(verdicts),
        "mixed": _bool_certificate("mixed", verdicts,
                                   lambda v: v.small_gain_ok or v.srg_phase_ok),
        "corollary1": _bool_certificate("corollary1", verdicts, lambda v: v.corollary1_ok),
    }

    oracle = None
    try:
        loop = close_loop(H1, H2)
        res = oracle_stable(loop, tol_stab=cfg.tol_stab)
        oracle = OracleRecord(stable=res.stable, spectral_abscissa=res.spectral_abscissa)
    except (ImproperEntry, IllPosed) as exc:
        warnings.append(f"closed-loop oracle unavailable: {exc}")

    return SweepReport(
        grid=grid,
        verdicts=verdicts,
        errors=errors,
        certificates=certificates,
        omega_alpha=[v.omega for v in verdicts if v.srg_phase_ok],
        omega_sigma=[v.omega for v in verdicts if v.small_gain_ok],
        assumptions_ok=rh1.ok and rh2.ok and not errors,
        warnings=warnings,
        oracle=oracle,
        config=cfg,
        h1_name=H1.name,
        h2_name=H2.name,
    )


def classic_small_phase(
    H1: TransferMatrix,
    H2: TransferMatrix,
    grid: FrequencyGrid,
    n_angles: int = 360,
) -> Certificate:
    """Classic small-phase certificate on its own (no graph machinery).

    Passes only if both responses are sectorial at every grid frequency
    (and at the high-frequency sample) with both numerical-range phase-sum
    conditions holding; a non-sectorial frequency makes the certificate
    inconclusive with that frequency as witness.
    """
    omegas = [float(w) for w in grid.points] + [math.inf]
    for w in omegas:
        M1 = eval_freq(H1, w)
        M2 = eval_freq(H2, w)
        R1 = numrange_boundary(M1, n_angles=n_angles)
        R2 = numrange_boundary(M2, n_angles=n_angles)
        if (R1.classification is not Sectoriality.SECTORIAL
                or R2.classification is not Sectoriality.SECTORIAL):
            return Certificate(
                name="classic_phase", status="inconclusive", witness=w,
                detail=f"a response is not sectorial at omega={w}; no conclusion",
            )
        ph1 = sectorial_phases(M1, n_angles=n_angles)
        ph2 = sectorial_phases(M2, n_angles=n_angles)
        if not (ph1.max_phase + ph2.max_phase < math.pi
                and ph1.min_phase + ph2.min_phase > -math.pi):
            return Certificate(name="classic_phase", status="fail", witness=w,
                               detail=f"phase-sum condition violated at omega={w}")
    return Certificate(name="classic_phase", status="pass")


def mixed_certificate(report: SweepReport) -> bool:
    """True iff every evaluated frequency satisfies gain or phase."""
    covered = set(report.omega_alpha) | set(report.omega_sigma)
    return all(v.omega in covered for v in report.verdicts)


@dataclass(frozen=True)
class SoundnessRecord:
    """Reconciliation of passing certificates against the eigenvalue oracle."""

    certified: tuple
    oracle: Optional[OracleRecord]
    consistent: bool
    report: SweepReport = field(repr=False, compare=False, default=None)


def soundness_check(
    H1: TransferMatrix,
    H2: TransferMatrix,
    grid: FrequencyGrid,
    cfg: Optional[SweepConfig] = None,
) -> SoundnessRecord:
    """Audit: no certificate may pass while the oracle reports instability.

    Requires state-space forms (directly or by conversion) so the oracle
    is available.
    """
    rational_to_statespace(H1)
    rational_to_statespace(H2)
    report = sweep(H1, H2, grid, cfg)
    certified = tuple(sorted(n for n, c in report.certificates.items() if c.certified))
    if report.oracle is None:
        raise SrgStabError("soundness check needs the closed-loop oracle")
    consistent = (not certified) or report.oracle.stable
    return SoundnessRecord(
        certified=certified,
        oracle=report.oracle,
        consistent=consistent,
        report=report,
    )
