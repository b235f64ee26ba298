"""Batch pipeline: RR files in, replayable reports out."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .errors import EmptyInputError, NlhrvError, ParameterError, ParseError
from .nltest import MEASURES, NonlinearityResult, detect_all
from .rng import SUBJECT_KEY, derive_seed, generator_info
from .series import AnalysisParams, RawSeries, detrend_highpass, normalize, window
from .stats import (
    chi_square_proportions,
    kruskal_wallis,
    mcnemar,
    pairs,
    rank_sum,
    signed_rank,
)

log = logging.getLogger(__name__)

MANIFEST_HEADER = ("subject_id", "group", "condition", "path")
LONG_HEADER = ("subject", "group", "condition", "measure", "value", "delta", "rejected", "seed")
REPORT_NAME = "report.json"
LONG_NAME = "results.csv"


@dataclass(frozen=True)
class PipelineConfig:
    window_start: int = 0
    window_len: int = 300
    hp_cutoff: float = 0.03
    min_samples: int | None = None
    max_iter: int = 1000
    n_phi: int = 199
    reps: int = 25

    @property
    def required_samples(self) -> int:
        return self.window_len if self.min_samples is None else self.min_samples

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ManifestRow:
    subject_id: str
    group: str
    condition: str
    path: Path


@dataclass
class SubjectResult:
    subject_id: str
    group: str
    condition: str
    seed: int
    results: dict = field(default_factory=dict)
    skipped: str | None = None

    def to_dict(self) -> dict:
        return {
            "subject": self.subject_id,
            "group": self.group,
            "condition": self.condition,
            "seed": self.seed,
            "skipped": self.skipped,
            "results": {m: r.to_dict() for m, r in self.results.items()},
        }


# -- ingestion ---------------------------------------------------------------

def _parse_float(token: str) -> float | None:
    try:
        value = float(token)
    except ValueError:
        return None
    return value


def parse_series(text: str, label: str = "") -> RawSeries:
    """Parse one-value-per-line RR text: '#' comments, one optional header line."""
    values = []
    seen_payload = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        token = line.split(",")[0].strip()
        value = _parse_float(token)
        if value is None:
            if not seen_payload:
                seen_payload = True  # header
                continue
            raise ParseError(f"non-numeric value {line!r}", line=lineno)
        if not math.isfinite(value):
            raise ParseError(f"non-finite value {line!r}", line=lineno)
        if value <= 0:
            raise ParseError(f"RR interval must be positive, got {line!r}", line=lineno)
        seen_payload = True
        values.append(value)
    if not values:
        raise EmptyInputError(f"no RR values in {label or 'input'}")
    return RawSeries(np.array(values), label)


def ingest_series(path) -> RawSeries:
    path = Path(path)
    return parse_series(path.read_text(), label=path.stem)


def read_manifest(path) -> list[ManifestRow]:
    path = Path(path)
    base = path.parent
    with open(path, newline="") as fh:
        reader = csv.reader(row for row in fh if row.strip() and not row.lstrip().startswith("#"))
        header = next(reader, None)
        if header is None:
            raise EmptyInputError(f"manifest {path} is empty")
        if tuple(h.strip() for h in header) != MANIFEST_HEADER:
            raise ParseError(f"manifest header must be {','.join(MANIFEST_HEADER)}", line=1)
        rows = []
        for lineno, rec in enumerate(reader, start=2):
            if len(rec) != 4:
                raise ParseError(f"expected 4 fields, got {len(rec)}", line=lineno)
            sid, group, cond, file_path = (f.strip() for f in rec)
            if not (sid and group and cond and file_path):
                raise ParseError("empty field", line=lineno)
            p = Path(file_path)
            rows.append(ManifestRow(sid, group, cond, p if p.is_absolute() else base / p))
    if not rows:
        raise EmptyInputError(f"manifest {path} lists no subjects")
    keys = [(r.subject_id, r.condition) for r in rows]
    dupes = sorted({k for k in keys if keys.count(k) > 1})
    if dupes:
        raise ParameterError(f"duplicate (subject, condition) rows: {dupes}")
    missing = [str(r.path) for r in rows if not r.path.is_file()]
    if missing:
        raise ParameterError(f"manifest references missing files: {missing}")
    return rows


# -- per-subject pipeline ----------------------------------------------------

def preprocess(series, config: PipelineConfig) -> np.ndarray:
    """window -> high-pass detrend -> normalize."""
    x = np.asarray(getattr(series, "values", series), dtype=float)
    seg = window(x, config.window_start, config.window_len)
    return normalize(detrend_highpass(seg, config.hp_cutoff))


def run_subject(series: RawSeries, params: AnalysisParams, config: PipelineConfig | None = None,
                *, subject_id: str = "", group: str = "", condition: str = "") -> SubjectResult:
    config = config or PipelineConfig()
    out = SubjectResult(subject_id or series.label, group, condition, int(params.seed))
    usable = len(series) - config.window_start
    if usable < config.required_samples or usable < config.window_len:
        out.skipped = (
            f"insufficient data: {max(usable, 0)} usable samples, need "
            f"{max(config.required_samples, config.window_len)}"
        )
        return out
    try:
        x = preprocess(series, config)
        out.results = detect_all(
            x, params, MEASURES, max_iter=config.max_iter, n_phi=config.n_phi, reps=config.reps
        )
    except NlhrvError as exc:
        out.skipped = f"{type(exc).__name__}: {exc}"
        out.results = {}
    return out


def _run_row(args):
    row, params, config = args
    series = ingest_series(row.path)
    return run_subject(series, params, config, subject_id=row.subject_id,
                       group=row.group, condition=row.condition)


def subject_seed(master_seed: int, subject_id: str, subjects: list[str]) -> int:
    """Per-subject seed keyed by the subject's first-appearance index."""
    return derive_seed(master_seed, SUBJECT_KEY, subjects.index(subject_id))


# -- cohort ------------------------------------------------------------------

def _ordered_unique(items):
    return list(dict.fromkeys(items))


def _pct(values, q):
    return float(np.percentile(np.asarray(values, dtype=float), q))


def summarize(subjects: list[SubjectResult]) -> list[dict]:
    groups = _ordered_unique(s.group for s in subjects)
    conditions = _ordered_unique(s.condition for s in subjects)
    cells = []
    for g in groups:
        for c in conditions:
            for m in MEASURES:
                recs = [s.results[m] for s in subjects
                        if s.group == g and s.condition == c and m in s.results]
                if not recs:
                    continue
                vals = [r.ni_original for r in recs]
                deltas = [r.delta_ni for r in recs]
                n_rej = sum(r.rejected for r in recs)
                cells.append({
                    "group": g, "condition": c, "measure": m, "n": len(recs),
                    "value_median": float(np.median(vals)),
                    "value_p5": _pct(vals, 5), "value_p50": _pct(vals, 50), "value_p95": _pct(vals, 95),
                    "delta_median": float(np.median(deltas)),
                    "delta_p5": _pct(deltas, 5), "delta_p50": _pct(deltas, 50),
                    "delta_p95": _pct(deltas, 95),
                    "n_rejected": n_rej,
                    "rejection_pct": 100.0 * n_rej / len(recs),
                })
    return cells


def _record(test, outcome_fn, **labels) -> dict:
    rec = {"test": test, **labels}
    try:
        rec.update(outcome_fn().to_dict())
        rec["skipped"] = None
    except NlhrvError as exc:
        rec["skipped"] = str(exc)
    return rec


def cohort_tests(subjects: list[SubjectResult]) -> list[dict]:
    """Group and condition comparisons on index values, deltas and rejection flags."""
    ok = [s for s in subjects if s.results]
    groups = _ordered_unique(s.group for s in ok)
    conditions = _ordered_unique(s.condition for s in ok)
    quantities = {"value": lambda r: r.ni_original, "delta": lambda r: r.delta_ni}
    by_key = {(s.subject_id, s.condition): s for s in ok}
    out = []
    for m in MEASURES:
        for qname, get in quantities.items():
            for c in conditions:
                samples = {g: [get(s.results[m]) for s in ok if s.group == g and s.condition == c]
                           for g in groups}
                present = [g for g in groups if samples[g]]
                if len(present) >= 2:
                    out.append(_record("kruskal_wallis",
                                       lambda: kruskal_wallis([samples[g] for g in present]),
                                       measure=m, quantity=qname, condition=c, groups=present))
                for g1, g2 in pairs(present):
                    out.append(_record("rank_sum", lambda: rank_sum(samples[g1], samples[g2]),
                                       measure=m, quantity=qname, condition=c, groups=[g1, g2]))
            for g in groups:
                for c1, c2 in pairs(conditions):
                    subs = _ordered_unique(s.subject_id for s in ok if s.group == g)
                    paired = [(by_key[(sid, c1)], by_key[(sid, c2)]) for sid in subs
                              if (sid, c1) in by_key and (sid, c2) in by_key]
                    a = [get(p[0].results[m]) for p in paired]
                    b = [get(p[1].results[m]) for p in paired]
                    out.append(_record("signed_rank", lambda: signed_rank(a, b), measure=m,
                                       quantity=qname, group=g, conditions=[c1, c2]))
        for c in conditions:
            flags = {g: [s.results[m].rejected for s in ok if s.group == g and s.condition == c]
                     for g in groups}
            for g1, g2 in pairs([g for g in groups if flags[g]]):
                f1, f2 = flags[g1], flags[g2]
                out.append(_record(
                    "chi_square_proportions",
                    lambda: chi_square_proportions(sum(f1), len(f1), sum(f2), len(f2)),
                    measure=m, quantity="rejected", condition=c, groups=[g1, g2]))
        for g in groups:
            for c1, c2 in pairs(conditions):
                subs = _ordered_unique(s.subject_id for s in ok if s.group == g)
                paired = [(by_key[(sid, c1)].results[m].rejected, by_key[(sid, c2)].results[m].rejected)
                          for sid in subs if (sid, c1) in by_key and (sid, c2) in by_key]
                b = sum(1 for x, y in paired if x and not y)
                c_ = sum(1 for x, y in paired if y and not x)
                out.append(_record("mcnemar", lambda: mcnemar(b, c_), measure=m,
                                   quantity="rejected", group=g, conditions=[c1, c2]))
    return out


def run_cohort(manifest, params: AnalysisParams, config: PipelineConfig | None = None,
               jobs: int = 1) -> dict:
    """Analyze every manifest row and assemble the cohort report dictionary."""
    config = config or PipelineConfig()
    rows = read_manifest(manifest) if not isinstance(manifest, list) else manifest
    if not rows:
        raise EmptyInputError("empty manifest")
    subjects = _ordered_unique(r.subject_id for r in rows)
    tasks = [(r, replace(params, seed=subject_seed(params.seed, r.subject_id, subjects)), config)
             for r in rows]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_row, tasks))
    else:
        results = [_run_row(t) for t in tasks]
    for r in results:
        if r.skipped:
            log.warning("subject %s (%s) skipped: %s", r.subject_id, r.condition, r.skipped)
    conds = _ordered_unique(r.condition for r in rows)
    for sid in subjects:
        have = {r.condition for r in results if r.subject_id == sid and r.results}
        if have and len(have) < len(conds):
            log.warning("subject %s lacks conditions %s; excluded from paired tests",
                        sid, sorted(set(conds) - have))
    return {
        "software": {"package": "nlhrv", "version": __version__},
        "generator": generator_info(),
        "params": params.to_dict(),
        "config": config.to_dict(),
        "subjects": [r.to_dict() for r in results],
        "summary": summarize(results),
        "tests": cohort_tests(results),
    }


def long_rows(report: dict) -> list[tuple]:
    rows = []
    for s in report["subjects"]:
        for m in MEASURES:
            r = s["results"].get(m)
            if r is None:
                continue
            rows.append((s["subject"], s["group"], s["condition"], m, repr(r["ni_original"]),
                         repr(r["delta_ni"]), str(r["rejected"]).lower(), s["seed"]))
    return rows


def write_report(report: dict, out_dir) -> tuple[Path, Path]:
    """Write ``report.json`` (structured) and ``results.csv`` (long format)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    report_path = out_dir / REPORT_NAME
    report_path.write_text(json.dumps(report, indent=1, sort_keys=True, allow_nan=False) + "\n")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(LONG_HEADER)
    writer.writerows(long_rows(report))
    long_path = out_dir / LONG_NAME
    long_path.write_text(buf.getvalue())
    return report_path, long_path


def result_from_record(record: dict) -> NonlinearityResult:
    return NonlinearityResult.from_dict(record)
