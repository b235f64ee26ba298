"""Command-line front end: ``nlhrv {analyze,cohort,surrogate,synth,calibrate}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import NlhrvError, ParameterError
from .glc import calibrate
from .nltest import calibration_seed
from .pipeline import (
    PipelineConfig,
    ingest_series,
    preprocess,
    run_cohort,
    run_subject,
    write_report,
)
from .rng import generator_info
from .series import AnalysisParams
from .surrogates import DEFAULT_MAX_ITER, make_ensemble
from .synth import KINDS, TRANSFORMS, ProcessSpec, generate

log = logging.getLogger("nlhrv")


def _add_analysis_flags(p: argparse.ArgumentParser) -> None:
    d = AnalysisParams()
    g = p.add_argument_group("analysis parameters")
    g.add_argument("--m", type=int, default=d.m, help="embedding dimension (default %(default)s)")
    g.add_argument("--r", type=float, default=d.r, help="NCI tolerance (default %(default)s)")
    g.add_argument("--k", type=int, default=d.k, help="IS neighbours (default %(default)s)")
    g.add_argument("--lmax", type=int, default=d.l_max, help="GLC max lag (default %(default)s)")
    g.add_argument("--ns", type=int, default=d.n_s, help="surrogates (default %(default)s)")
    g.add_argument("--alpha", type=float, default=d.alpha, help="test level (default %(default)s)")
    _add_seed(p)
    _add_preprocessing_flags(p)
    g.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER, help="IAAFT iteration cap")
    g.add_argument("--n-phi", type=int, default=199, help="calibration AR1 coefficients")
    g.add_argument("--reps", type=int, default=25, help="calibration realizations per coefficient")


def _add_seed(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, required=True,
                   help="master seed; all randomness derives from it (required)")


def _add_preprocessing_flags(p: argparse.ArgumentParser) -> None:
    d = PipelineConfig()
    g = p.add_argument_group("preprocessing")
    g.add_argument("--window-start", type=int, default=d.window_start)
    g.add_argument("--window-len", type=int, default=d.window_len)
    g.add_argument("--hp-cutoff", type=float, default=d.hp_cutoff,
                   help="high-pass cutoff, fraction of the sampling rate (default %(default)s)")
    g.add_argument("--min-samples", type=int, default=None,
                   help="minimum usable samples (default: window length)")


def _params(ns: argparse.Namespace) -> AnalysisParams:
    return AnalysisParams(m=ns.m, r=ns.r, k=ns.k, l_max=ns.lmax, n_s=ns.ns,
                          alpha=ns.alpha, seed=ns.seed)


def _config(ns: argparse.Namespace) -> PipelineConfig:
    return PipelineConfig(
        window_start=ns.window_start,
        window_len=ns.window_len,
        hp_cutoff=ns.hp_cutoff,
        min_samples=ns.min_samples,
        max_iter=getattr(ns, "max_iter", DEFAULT_MAX_ITER),
        n_phi=getattr(ns, "n_phi", 199),
        reps=getattr(ns, "reps", 25),
    )


def _emit(text: str, out: str | None) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)


def cmd_analyze(ns) -> int:
    params, config = _params(ns), _config(ns)
    series = ingest_series(ns.input)
    res = run_subject(series, params, config)
    doc = {
        "params": params.to_dict(),
        "config": config.to_dict(),
        "generator": generator_info(),
        "subject": res.to_dict(),
    }
    _emit(json.dumps(doc, indent=1, sort_keys=True) + "\n", ns.out)
    if res.skipped:
        log.warning("skipped: %s", res.skipped)
        return 1
    return 0


def cmd_cohort(ns) -> int:
    report = run_cohort(ns.manifest, _params(ns), _config(ns), jobs=ns.jobs)
    report_path, long_path = write_report(report, ns.out)
    log.info("wrote %s and %s", report_path, long_path)
    return 0


def cmd_surrogate(ns) -> int:
    series = ingest_series(ns.input)
    x = preprocess(series, _config(ns))
    ens = make_ensemble(x, ns.ns, ns.max_iter, ns.seed, original_ref=str(ns.input))
    path = ens.write(ns.out)
    log.info("wrote %d surrogates, manifest %s", len(ens), path)
    return 0


def cmd_synth(ns) -> int:
    spec = ProcessSpec(kind=ns.kind, n=ns.n, seed=ns.seed, phi=ns.phi,
                       transform=ns.transform, a=ns.a, b=ns.b)
    x = generate(spec)
    rr = ns.offset + ns.scale * x
    if np.any(rr <= 0):
        raise ParameterError("offset/scale produce non-positive RR values; raise --offset")
    lines = [f"# synth kind={spec.kind} n={spec.n} seed={spec.seed} phi={spec.phi} "
             f"transform={spec.transform} a={spec.a} b={spec.b} offset={ns.offset} scale={ns.scale}",
             "rr_ms"]
    lines += [repr(float(v)) for v in rr]
    _emit("\n".join(lines) + "\n", ns.out)
    return 0


def cmd_calibrate(ns) -> int:
    series = ingest_series(ns.input)
    x = preprocess(series, _config(ns))
    curve = calibrate(x, n_phi=ns.n_phi, reps=ns.reps, seed=calibration_seed(ns.seed), lags=ns.lmax)
    _emit(curve.to_table(), ns.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nlhrv", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common], help="test one RR file with all three indexes")
    p.add_argument("input", help="RR file (ms, one value per line)")
    p.add_argument("-o", "--out", help="JSON output path (default stdout)")
    _add_analysis_flags(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("cohort", parents=[common], help="run a manifest and write report.json + results.csv")
    p.add_argument("manifest", help="CSV with header subject_id,group,condition,path")
    p.add_argument("-o", "--out", required=True, help="output directory")
    p.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")
    _add_analysis_flags(p)
    p.set_defaults(func=cmd_cohort)

    p = sub.add_parser("surrogate", parents=[common], help="write an IAAFT ensemble of the preprocessed series")
    p.add_argument("input")
    p.add_argument("-o", "--out", required=True, help="output directory")
    p.add_argument("--ns", type=int, default=AnalysisParams().n_s)
    p.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER)
    _add_seed(p)
    _add_preprocessing_flags(p)
    p.set_defaults(func=cmd_surrogate)

    p = sub.add_parser("synth", parents=[common], help="generate a synthetic RR file")
    p.add_argument("--kind", choices=KINDS, required=True)
    p.add_argument("--n", type=int, default=300)
    p.add_argument("--phi", type=float, default=0.0)
    p.add_argument("--transform", choices=tuple(TRANSFORMS), default="cube")
    p.add_argument("--a", type=float, default=0.4)
    p.add_argument("--b", type=float, default=0.4)
    p.add_argument("--offset", type=float, default=800.0, help="mean RR in ms (default %(default)s)")
    p.add_argument("--scale", type=float, default=50.0, help="RR sd in ms (default %(default)s)")
    p.add_argument("-o", "--out", help="output path (default stdout)")
    _add_seed(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("calibrate", parents=[common], help="emit the GLC calibration table for a series' marginal")
    p.add_argument("input")
    p.add_argument("-o", "--out", help="output path (default stdout)")
    p.add_argument("--lmax", type=int, default=AnalysisParams().l_max)
    p.add_argument("--n-phi", type=int, default=199)
    p.add_argument("--reps", type=int, default=25)
    _add_seed(p)
    _add_preprocessing_flags(p)
    p.set_defaults(func=cmd_calibrate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return ns.func(ns)
    except (NlhrvError, OSError) as exc:
        print(f"nlhrv: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
