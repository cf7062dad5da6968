"""Command-line front end.

Three subcommands: ``analyze`` runs a full sweep of the stability
conditions over a log grid and writes a JSON report plus a per-frequency
CSV table; ``srg`` dumps sampled graph point clouds and their tau-scaled
projections; ``numrange`` dumps numerical-range boundaries and
classifications. All outputs are byte-deterministic for a fixed
configuration (including the seed).

Exit codes for ``analyze``: 0 when the requested certificates pass, 2 when
any requested certificate fails, 3 when none fail but some are
inconclusive, 1 on input errors.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import SrgStabError
from .lti import TransferMatrix, eval_freq, load_model, make_grid
from .numrange import Sectoriality, numrange_boundary, sectorial_phases
from .srg import AlphaMaxConfig, alpha_max, sigma_max, srg_sample, tau_ray_distance
from .stability import SweepConfig, derived_seed, sweep

CERT_NAMES = ("small_gain", "srg_phase", "classic_phase", "mixed", "corollary1")
_CERT_ALIASES = {
    "small-gain": "small_gain",
    "srg-phase": "srg_phase",
    "classic-phase": "classic_phase",
    "mixed": "mixed",
    "corollary1": "corollary1",
}


@dataclass
class RunConfig:
    """Everything a run depends on; identical configs give identical bytes."""

    h1_path: str
    h2_path: Optional[str] = None
    w_min: float = 1e-2
    w_max: float = 1e3
    points_per_decade: int = 30
    include_zero: bool = False
    seed: int = 0
    samples: int = 20_000
    starts: int = 64
    out_dir: str = "."
    format: str = "json"
    certify: list = field(default_factory=lambda: ["any"])
    omegas: list = field(default_factory=list)
    taus: list = field(default_factory=lambda: [1.0, 0.6, 0.3])
    n_angles: int = 360


def _float_list(text: str):
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _certify_list(text: str):
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        if tok == "any":
            out.append("any")
        elif tok in _CERT_ALIASES:
            out.append(_CERT_ALIASES[tok])
        else:
            raise argparse.ArgumentTypeError(
                f"unknown certificate {tok!r}; choose from any, " + ", ".join(_CERT_ALIASES)
            )
    return out or ["any"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="srg-stab",
        description="Frequency-domain stability certificates for square MIMO LTI loops.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_h2: bool):
        p.add_argument("--h1", required=True, help="model JSON for the forward system")
        if needs_h2:
            p.add_argument("--h2", default=None,
                           help="model JSON for the feedback system (omit for identity)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--samples", type=int, default=20_000,
                       help="sphere samples per frequency (also seeds the angle search)")
        p.add_argument("--out", required=True, help="output directory")

    pa = sub.add_parser("analyze", help="run the stability sweep and write a report")
    common(pa, needs_h2=True)
    pa.add_argument("--wmin", type=float, default=1e-2)
    pa.add_argument("--wmax", type=float, default=1e3)
    pa.add_argument("--ppd", type=int, default=30, help="grid points per decade")
    pa.add_argument("--include-zero", action="store_true")
    pa.add_argument("--starts", type=int, default=64, help="angle-optimizer starts")
    pa.add_argument("--format", choices=("json", "csv"), default="json",
                    help="what the summary printed to stdout references")
    pa.add_argument("--certify", type=_certify_list, default=["any"],
                    help="comma list: any, small-gain, srg-phase, classic-phase, mixed, corollary1")

    ps = sub.add_parser("srg", help="emit sampled graph point clouds")
    common(ps, needs_h2=False)
    ps.add_argument("--omega", type=_float_list, required=True,
                    help="comma list of frequencies in rad/s")
    ps.add_argument("--tau", type=_float_list, default=[1.0, 0.6, 0.3],
                    help="comma list of tau scalings for the projections")
    ps.add_argument("--starts", type=int, default=64)

    pn = sub.add_parser("numrange", help="emit numerical-range boundaries")
    common(pn, needs_h2=False)
    pn.add_argument("--omega", type=_float_list, required=True)
    pn.add_argument("--angles", type=int, default=360, help="boundary directions")

    return parser


def _config_from_args(args) -> RunConfig:
    cfg = RunConfig(h1_path=args.h1, seed=args.seed, samples=args.samples,
                    out_dir=args.out)
    if getattr(args, "h2", None) is not None:
        cfg.h2_path = args.h2
    if hasattr(args, "wmin"):
        cfg.w_min = args.wmin
        cfg.w_max = args.wmax
        cfg.points_per_decade = args.ppd
        cfg.include_zero = args.include_zero
        cfg.format = args.format
        cfg.certify = args.certify
    if hasattr(args, "starts"):
        cfg.starts = args.starts
    if hasattr(args, "omega"):
        cfg.omegas = args.omega
    if hasattr(args, "tau"):
        cfg.taus = args.tau
    if hasattr(args, "angles"):
        cfg.n_angles = args.angles
    return cfg


def _load_systems(cfg: RunConfig):
    h1 = load_model(cfg.h1_path)
    if cfg.h2_path is None:
        h2 = TransferMatrix.identity(h1.n)
    else:
        h2 = load_model(cfg.h2_path)
    return h1, h2


def _write_text(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8", newline="")


def _json_dumps(payload) -> str:
    return json.dumps(payload, indent=2, allow_nan=False) + "\n"


def _csv_text(rows) -> str:
    import io

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def _fmt_omega(w: float) -> str:
    return repr(float(w))


def cmd_analyze(cfg: RunConfig) -> int:
    h1, h2 = _load_systems(cfg)
    grid = make_grid(cfg.w_min, cfg.w_max, cfg.points_per_decade, cfg.include_zero)
    sweep_cfg = SweepConfig(samples=cfg.samples, starts=cfg.starts, seed=cfg.seed)
    report = sweep(h1, h2, grid, sweep_cfg)
    out = Path(cfg.out_dir)
    _write_text(out / "report.json", _json_dumps(report.to_dict()))
    _write_text(out / "verdicts.csv", _csv_text(report.csv_rows()))

    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    for name in CERT_NAMES:
        cert = report.certificates[name]
        suffix = "" if cert.witness is None else f" (witness omega={cert.witness})"
        print(f"{name}: {cert.status}{suffix}")
    if report.oracle is not None:
        print(f"oracle: {'stable' if report.oracle.stable else 'unstable'} "
              f"(spectral abscissa {report.oracle.spectral_abscissa:.6g})")
    print(f"report: {out / 'report.json'}")
    print(f"table: {out / 'verdicts.csv'}")

    statuses = {name: report.certificates[name].status for name in CERT_NAMES}
    requested = cfg.certify
    if "any" in requested:
        if any(s == "pass" for s in statuses.values()):
            return 0
        if any(s == "inconclusive" for s in statuses.values()):
            return 3
        return 2
    wanted = [statuses[name] for name in requested]
    if all(s == "pass" for s in wanted):
        return 0
    if any(s == "fail" for s in wanted):
        return 2
    return 3


def cmd_srg(cfg: RunConfig) -> int:
    h1, _ = _load_systems(cfg)
    out = Path(cfg.out_dir)
    point_rows = [["omega", "re", "im", "r", "alpha"]]
    tau_rows = {t: [["omega", "re", "im"]] for t in cfg.taus}
    summary = []
    for w in cfg.omegas:
        M = eval_freq(h1, w)
        cloud = srg_sample(M, n_samples=cfg.samples,
                           seed=derived_seed(cfg.seed, w, "srg1"))
        angle = alpha_max(M, AlphaMaxConfig(
            presamples=cfg.samples, starts=cfg.starts,
            seed=derived_seed(cfg.seed, w, "alpha1")))
        ray = tau_ray_distance(cloud)
        pts = cloud.complex_points(both_signs=True)
        for z in pts:
            r = abs(z)
            point_rows.append([_fmt_omega(w), repr(float(z.real)), repr(float(z.imag)),
                               repr(float(r)), repr(float(np.angle(z)))])
        for t in cfg.taus:
            scaled = t * pts
            for z in scaled:
                tau_rows[t].append([_fmt_omega(w), repr(float(z.real)), repr(float(z.imag))])
        summary.append({
            "omega": float(w),
            "sigma_max": sigma_max(M),
            "alpha_max": angle.alpha,
            "distance_to_minus_one": ray.distance,
            "membership": ray.membership,
        })
    _write_text(out / "srg_points.csv", _csv_text(point_rows))
    for t in cfg.taus:
        _write_text(out / f"srg_tau_{t!r}.csv", _csv_text(tau_rows[t]))
    _write_text(out / "srg_summary.json", _json_dumps({
        "schema": "srgstab.srg_summary@1",
        "model": h1.name,
        "seed": cfg.seed,
        "samples": cfg.samples,
        "taus": [float(t) for t in cfg.taus],
        "frequencies": summary,
    }))
    print(f"points: {out / 'srg_points.csv'}")
    print(f"summary: {out / 'srg_summary.json'}")
    return 0


def cmd_numrange(cfg: RunConfig) -> int:
    h1, _ = _load_systems(cfg)
    out = Path(cfg.out_dir)
    summary = []
    for w in cfg.omegas:
        M = eval_freq(h1, w)
        R = numrange_boundary(M, n_angles=cfg.n_angles)
        rows = [["re", "im"]]
        for z in R.boundary:
            rows.append([repr(float(z.real)), repr(float(z.imag))])
        _write_text(out / f"numrange_w{_fmt_omega(w)}.csv", _csv_text(rows))
        phases = []
        if R.classification is Sectoriality.SECTORIAL:
            phases = [float(p) for p in sectorial_phases(M, n_angles=cfg.n_angles).phases]
        summary.append({
            "omega": float(w),
            "classification": R.classification.value,
            "support_max": None if R.support_max is None else float(R.support_max),
            "support_min": None if R.support_min is None else float(R.support_min),
            "phases": phases,
        })
    _write_text(out / "numrange_summary.json", _json_dumps({
        "schema": "srgstab.numrange_summary@1",
        "model": h1.name,
        "n_angles": cfg.n_angles,
        "frequencies": summary,
    }))
    print(f"summary: {out / 'numrange_summary.json'}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad flags; map to the input-error code.
        return 1 if exc.code not in (0, None) else 0
    cfg = _config_from_args(args)
    try:
        if args.command == "analyze":
            return cmd_analyze(cfg)
        if args.command == "srg":
            return cmd_srg(cfg)
        if args.command == "numrange":
            return cmd_numrange(cfg)
        raise AssertionError(f"unhandled command {args.command}")
    except SrgStabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
