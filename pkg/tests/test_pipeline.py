import csv
import json
import logging

import numpy as np
import pytest

from nlhrv.errors import EmptyInputError, ParameterError, ParseError
from nlhrv.nltest import MEASURES, decide
from nlhrv.pipeline import (
    LONG_HEADER,
    PipelineConfig,
    ingest_series,
    parse_series,
    read_manifest,
    run_cohort,
    run_subject,
    write_report,
)
from nlhrv.series import AnalysisParams, RawSeries
from nlhrv.synth import ProcessSpec, generate

FAST = PipelineConfig(n_phi=50, reps=10, max_iter=200)
PARAMS = AnalysisParams(n_s=20, seed=3)


def rr(kind="ar1", seed=0, n=320, **kw):
    return RawSeries(800 + 50 * generate(ProcessSpec(kind, n, seed, **kw)), f"{kind}{seed}")


def write_rr(path, series):
    path.write_text("rr_ms\n" + "\n".join(repr(float(v)) for v in series.values) + "\n")
    return path


# -- ingestion ---------------------------------------------------------------

def test_parse_examples(tmp_path):
    p = tmp_path / "subj.txt"
    p.write_text("800\n810\n795\n")
    s = ingest_series(p)
    np.testing.assert_array_equal(s.values, [800, 810, 795])
    assert s.label == "subj"
    np.testing.assert_array_equal(parse_series("rr_ms\n800\n").values, [800])
    np.testing.assert_array_equal(parse_series("# rec 1\n\n800\n# gap\n801\n").values, [800, 801])


def test_parse_errors(tmp_path):
    with pytest.raises(ParseError, match="line 2"):
        parse_series("800\nabc\n")
    with pytest.raises(ParseError) as info:
        parse_series("rr\n800\n900\n-5\n")
    assert info.value.line == 4
    with pytest.raises(ParseError, match="line 3"):
        parse_series("rr\n800\nnan\n")
    p = tmp_path / "empty.txt"
    p.write_text("")
    with pytest.raises(EmptyInputError):
        ingest_series(p)
    with pytest.raises(EmptyInputError):
        parse_series("# only comments\nrr_ms\n")


def test_manifest_parsing(tmp_path):
    write_rr(tmp_path / "a.txt", rr())
    (tmp_path / "m.csv").write_text("subject_id,group,condition,path\ns1,Young,rest,a.txt\ns1,Young,tilt,a.txt\n")
    rows = read_manifest(tmp_path / "m.csv")
    assert [(r.subject_id, r.condition) for r in rows] == [("s1", "rest"), ("s1", "tilt")]
    assert rows[0].path == tmp_path / "a.txt"


@pytest.mark.parametrize("body, err", [
    ("subject_id,group,condition,path\n", EmptyInputError),
    ("", EmptyInputError),
    ("id,group,condition,path\ns1,A,rest,a.txt\n", ParseError),
    ("subject_id,group,condition,path\ns1,A,rest\n", ParseError),
    ("subject_id,group,condition,path\ns1,A,rest,a.txt\ns1,B,rest,a.txt\n", ParameterError),
    ("subject_id,group,condition,path\ns1,A,rest,missing.txt\n", ParameterError),
])
def test_manifest_errors(tmp_path, body, err):
    write_rr(tmp_path / "a.txt", rr())
    (tmp_path / "m.csv").write_text(body)
    with pytest.raises(err):
        read_manifest(tmp_path / "m.csv")


# -- subject -----------------------------------------------------------------

def test_run_subject_three_records_and_replay():
    s = rr(seed=4, phi=0.5)
    a = run_subject(s, PARAMS, FAST)
    b = run_subject(s, PARAMS, FAST)
    assert a.skipped is None and set(a.results) == set(MEASURES)
    assert a.to_dict() == b.to_dict()


def test_run_subject_skips_short_series():
    out = run_subject(rr(n=100), PARAMS, PipelineConfig(window_len=100, min_samples=300))
    assert out.results == {} and out.skipped.startswith("insufficient data")
    out = run_subject(rr(n=100), PARAMS, FAST)
    assert out.skipped.startswith("insufficient data")


def test_run_subject_window_offset():
    s = rr(n=400)
    cfg = PipelineConfig(window_start=50, n_phi=50, reps=10)
    assert run_subject(s, PARAMS, cfg).skipped is None
    short = PipelineConfig(window_start=150, n_phi=50, reps=10)
    assert run_subject(s, PARAMS, short).skipped.startswith("insufficient data")


# -- cohort ------------------------------------------------------------------

@pytest.fixture
def small_cohort(tmp_path):
    lines = ["subject_id,group,condition,path"]
    for g, kinds in (("A", ("ar1", "ar1")), ("B", ("ar1", "bilinear"))):
        for i in range(5):
            for cond, kind in zip(("rest", "tilt"), kinds):
                sid = f"{g}{i}"
                extra = {"phi": 0.5} if kind == "ar1" else {}
                write_rr(tmp_path / f"{sid}_{cond}.txt", rr(kind, 10 * i + len(g + cond), **extra))
                lines.append(f"{sid},{g},{cond},{sid}_{cond}.txt")
    (tmp_path / "m.csv").write_text("\n".join(lines) + "\n")
    return tmp_path / "m.csv"


def test_run_cohort_report_structure(small_cohort, tmp_path):
    report = run_cohort(small_cohort, PARAMS, FAST)
    assert [s["subject"] for s in report["subjects"]][:2] == ["A0", "A0"]
    assert report["params"]["seed"] == 3 and report["generator"]["bit_generator"] == "PCG64"
    # seeds: one per subject, shared across its conditions
    seeds = {(s["subject"], s["condition"]): s["seed"] for s in report["subjects"]}
    assert seeds[("A0", "rest")] == seeds[("A0", "tilt")] != seeds[("A1", "rest")]
    names = {t["test"] for t in report["tests"]}
    assert names == {"kruskal_wallis", "rank_sum", "signed_rank", "chi_square_proportions", "mcnemar"}
    for t in report["tests"]:
        assert t["skipped"] is not None or 0 <= t["p_value"] <= 1

    # summary percentages are recomputable from the raw records
    for cell in report["summary"]:
        flags = [s["results"][cell["measure"]]["rejected"] for s in report["subjects"]
                 if s["group"] == cell["group"] and s["condition"] == cell["condition"]]
        assert cell["rejection_pct"] == pytest.approx(100 * sum(flags) / len(flags))
        assert cell["value_p5"] <= cell["value_p50"] <= cell["value_p95"]

    # every stored flag replays from its own record
    for s in report["subjects"]:
        for r in s["results"].values():
            assert decide(r["ni_original"], r["surrogate_values"], r["tail"], r["alpha"])[1] == r["rejected"]

    rpath, lpath = write_report(report, tmp_path / "out")
    rows = list(csv.reader(lpath.open()))
    assert tuple(rows[0]) == LONG_HEADER
    assert len(rows) - 1 == 10 * 2 * 3
    assert json.loads(rpath.read_text())["summary"] == report["summary"]


def test_run_cohort_is_byte_reproducible(small_cohort, tmp_path):
    for name in ("a", "b"):
        write_report(run_cohort(small_cohort, PARAMS, FAST), tmp_path / name)
    for f in ("report.json", "results.csv"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_run_cohort_parallel_matches_serial(small_cohort):
    serial = run_cohort(small_cohort, PARAMS, FAST, jobs=1)
    parallel = run_cohort(small_cohort, PARAMS, FAST, jobs=2)
    assert json.dumps(serial, sort_keys=True) == json.dumps(parallel, sort_keys=True)


def test_missing_condition_excluded_from_paired_tests(small_cohort, caplog):
    text = small_cohort.read_text().splitlines()
    small_cohort.write_text("\n".join(l for l in text if not l.startswith("A0,A,tilt")) + "\n")
    with caplog.at_level(logging.WARNING):
        report = run_cohort(small_cohort, PARAMS, FAST)
    assert "A0 lacks conditions" in caplog.text
    sr = [t for t in report["tests"] if t["test"] == "signed_rank" and t["group"] == "A"]
    assert all(t["skipped"] or t["n"][0] == 4 for t in sr)


def test_empty_manifest(tmp_path):
    (tmp_path / "m.csv").write_text("subject_id,group,condition,path\n")
    with pytest.raises(EmptyInputError):
        run_cohort(tmp_path / "m.csv", PARAMS, FAST)
