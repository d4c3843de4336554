"""Command-line front end: ``theory``, ``simulate``, ``recommend``, ``validate``."""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import logging
import math
import sys
from pathlib import Path

from . import __version__, analytics, mc_engine
from .config import ConfigError, CsiModel, SystemConfig, parse_config
from .detectors import complexity

log = logging.getLogger(__name__)

THEORY_COLUMNS = ["gamma0_db", "eps2", "pm", "iep_ml", "iep_gd", "ber_ml", "ber_gd", "asym_ml", "asym_gd"]
SIM_COLUMNS = [
    "gamma0_db", "detector", "ber", "index_ber", "symbol_ber", "ci95", "frames", "bit_errors",
    "eps2", "ber_theory", "asym_theory",
]
MANIFEST_PREFIX = "# manifest: "


class CliError(Exception):
    pass


def snr_grid(start: float, stop: float, step: float) -> list[float]:
    """Inclusive dB grid."""
    if step <= 0:
        raise CliError(f"SNR step must be positive, got {step}")
    if stop < start:
        raise CliError(f"SNR stop {stop} is below start {start}")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 10) for i in range(count)]


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, int):
        return str(value)
    return f"{value:.6e}"


def theory_rows(cfg: SystemConfig, snrs_db) -> list[dict]:
    asym = {det: analytics.asymptote(det, cfg) for det in ("ML", "GD")}
    rows = []
    for snr in snrs_db:
        tp = analytics.theory_point(snr, cfg)
        rows.append({
            "gamma0_db": f"{snr:g}",
            "eps2": tp.eps2,
            "pm": tp.pm,
            "iep_ml": tp.iep_ml,
            "iep_gd": tp.iep_gd,
            "ber_ml": tp.ber_ml,
            "ber_gd": tp.ber_gd,
            "asym_ml": float(asym["ML"].at(tp.gamma0)),
            "asym_gd": float(asym["GD"].at(tp.gamma0)),
        })
    return rows


def simulate_rows(cfg, detector, snrs_db, seed, stop, workers=1) -> list[dict]:
    rows = []
    for point in mc_engine.sweep(cfg, detector, snrs_db, seed, stop, workers):
        for det, est in point.estimates.items():
            rows.append({
                "gamma0_db": f"{point.gamma0_db:g}",
                "detector": det,
                "ber": est.ber,
                "index_ber": est.index_ber,
                "symbol_ber": est.symbol_ber,
                "ci95": est.ci95,
                "frames": est.frames,
                "bit_errors": est.bit_errors,
                "eps2": point.theory.eps2,
                "ber_theory": point.theory.ber_ml if det == "ML" else point.theory.ber_gd,
                "asym_theory": point.asymptote_ml if det == "ML" else point.asymptote_gd,
            })
    return rows


def render_csv(rows, columns, manifest: dict) -> str:
    buf = io.StringIO()
    buf.write(MANIFEST_PREFIX + json.dumps(manifest, sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in columns])
    return buf.getvalue()


def render_json(rows, manifest: dict) -> str:
    return json.dumps({"manifest": manifest, "rows": rows}, indent=2, sort_keys=True) + "\n"


def read_manifest(path) -> dict:
    """Manifest embedded in a CSV/JSON output, or a bare manifest JSON file."""
    text = Path(path).read_text()
    if text.startswith(MANIFEST_PREFIX):
        return json.loads(text.splitlines()[0][len(MANIFEST_PREFIX):])
    data = json.loads(text)
    return data.get("manifest", data)


def _emit(text: str, out, manifest: dict):
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    path = Path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    stamped = dict(manifest, created=_dt.datetime.now(_dt.timezone.utc).isoformat())
    path.with_name(path.name + ".manifest.json").write_text(json.dumps(stamped, indent=2, sort_keys=True) + "\n")


# ------------------------------------------------------------ argument handling

def _config_from_args(args) -> SystemConfig:
    base = {}
    if getattr(args, "config", None):
        base = parse_config(Path(args.config).read_text()).to_dict()
    for key in ("n", "k", "m", "l", "g"):
        value = getattr(args, key, None)
        if value is not None:
            base[key] = value
    if getattr(args, "csi", None):
        base["csi"] = args.csi
    missing = {"n", "k", "m"} - set(base)
    if missing:
        raise CliError(f"missing system parameters: {', '.join('--' + m for m in sorted(missing))}")
    csi = base.get("csi", "perfect")
    return SystemConfig(
        n=int(base["n"]), k=int(base["k"]), m=int(base["m"]), l=int(base.get("l", 1)),
        g=None if base.get("g") is None else int(base["g"]),
        csi=csi if isinstance(csi, CsiModel) else CsiModel.parse(str(csi)),
    )


def _add_system(p):
    p.add_argument("--config", help="key=value or JSON file with n, k, m, l, g, csi")
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--l", type=int)
    p.add_argument("--g", type=int, help="clusters per frame (default 128/N)")
    p.add_argument("--csi", help="perfect | fixed:<v> | mmse")


def _add_grid(p, stop=40.0):
    p.add_argument("--snr-start", type=float, default=0.0)
    p.add_argument("--snr-stop", type=float, default=stop)
    p.add_argument("--snr-step", type=float, default=5.0)


def _add_output(p):
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mciksc", description=__doc__)
    parser.add_argument("--version", action="version", version=f"mciksc {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("theory", help="tabulate closed-form BER curves")
    _add_system(p)
    _add_grid(p)
    _add_output(p)

    p = sub.add_parser("simulate", help="Monte-Carlo BER sweep with theory overlay")
    _add_system(p)
    _add_grid(p, stop=20.0)
    _add_output(p)
    p.add_argument("--detector", choices=("ml", "gd", "both"), default="both")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--min-errors", type=int, default=200)
    p.add_argument("--max-frames", type=float, default=1e7)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--from-manifest", help="rerun exactly what an earlier output recorded")

    p = sub.add_parser("recommend", help="ML or GD for a configuration")
    _add_system(p)
    p.add_argument("--format", choices=("text", "json"), default="text")

    p = sub.add_parser("validate", help="run the acceptance checks")
    p.add_argument("--seed", type=int, default=2024)
    p.add_argument("--only", nargs="*", help="subset of check ids (e.g. A1 A9)")
    return parser


def cmd_theory(args) -> int:
    cfg = _config_from_args(args)
    snrs = snr_grid(args.snr_start, args.snr_stop, args.snr_step)
    rows = theory_rows(cfg, snrs)
    manifest = {"tool": "mciksc", "version": __version__, "command": "theory",
                "config": cfg.to_dict(), "snr_db": snrs}
    text = render_csv(rows, THEORY_COLUMNS, manifest) if args.format == "csv" else render_json(rows, manifest)
    _emit(text, args.out, manifest)
    return 0


def _simulate_manifest(cfg, detector, snrs, seed, stop) -> dict:
    return {
        "tool": "mciksc", "version": __version__, "command": "simulate",
        "config": cfg.to_dict(), "detector": detector, "snr_db": snrs, "seed": seed,
        "min_errors": stop.min_bit_errors, "max_frames": stop.max_frames,
    }


def cmd_simulate(args) -> int:
    if args.from_manifest:
        man = read_manifest(args.from_manifest)
        if man.get("command") != "simulate":
            raise CliError("manifest does not describe a simulate run")
        cfg = parse_config(json.dumps(man["config"]))
        detector, snrs, seed = man["detector"], [float(s) for s in man["snr_db"]], int(man["seed"])
        stop = mc_engine.StopRule(int(man["min_errors"]), int(man["max_frames"]))
    else:
        cfg = _config_from_args(args)
        detector = args.detector
        snrs = snr_grid(args.snr_start, args.snr_stop, args.snr_step)
        seed = args.seed
        stop = mc_engine.StopRule(args.min_errors, int(args.max_frames))
    rows = simulate_rows(cfg, detector, snrs, seed, stop, args.workers)
    manifest = _simulate_manifest(cfg, detector, snrs, seed, stop)
    text = render_csv(rows, SIM_COLUMNS, manifest) if args.format == "csv" else render_json(rows, manifest)
    _emit(text, args.out, manifest)
    return 0


def cmd_recommend(args) -> int:
    cfg = _config_from_args(args)
    rec = analytics.recommend_detector(cfg)
    if args.format == "json":
        payload = {"config": cfg.to_dict(), **rec.to_dict()}
        sys.stdout.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        return 0
    print(f"{cfg}")
    print(f"detector: {rec.detector}")
    print(f"why: {rec.rationale}")
    if rec.gain_db is not None:
        print(f"ML coding gain over GD: {rec.gain_db:.2f} dB at L={cfg.l} (L->inf limit {rec.gain_limit_db:.2f} dB)")
    cost = complexity(cfg)
    print(f"complexity: ML {cost.ml}, GD {cost.gd}")
    return 0


def cmd_validate(args) -> int:
    from . import validation

    results = validation.run_all(seed=args.seed, only=args.only)
    for r in results:
        print(r.line())
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return 1 if failed else 0


COMMANDS = {"theory": cmd_theory, "simulate": cmd_simulate, "recommend": cmd_recommend, "validate": cmd_validate}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (CliError, ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
