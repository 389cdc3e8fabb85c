import math

import numpy as np
import pytest

from okgd import evaluation, synth
from okgd.detector import DetectionResult, DetectorConfig
from okgd.evaluation import RunReport, aggregate, score_run


def result(tau_hat):
    return DetectionResult(detected=tau_hat is not None, tau_hat=tau_hat)


def test_score_run_rules():
    r = score_run(result(500), 500)
    assert r.detected and r.delay == 0
    r = score_run(result(499), 500)
    assert r.false_alarm and r.delay is None
    r = score_run(result(490), 500, tolerance_window=15)
    assert r.detected and r.delay == 0
    r = score_run(result(None), 500)
    assert r.missed
    assert score_run(result(700), None).false_alarm
    with pytest.raises(ValueError):
        score_run(result(1), 1, tolerance_window=-1)


def test_aggregate_examples():
    a = aggregate([RunReport(s, True, False, 5, 500, 505) for s in range(4)])
    assert a.mean_delay == 5 and a.std_delay == 0 and a.precision == 1 and a.n_false_alarms == 0
    a = aggregate([RunReport(0, False, True, None, 500, 10)])
    assert a.precision == 0 and a.n_false_alarms == 1 and math.isnan(a.mean_delay)
    a = aggregate([RunReport(0, True, False, 7, 500, 507)])
    assert math.isnan(a.std_delay)


def test_aggregate_budget_and_sample_std():
    reps = [RunReport(0, True, False, 10, 0, 10), RunReport(1, True, False, 30, 0, 30),
            RunReport(2, True, False, 200, 0, 200), RunReport(3, False, False, None, 0, None)]
    a = aggregate(reps, delay_budget=150)
    assert a.precision == 0.5
    assert a.std_delay == pytest.approx(np.std([10, 30, 200], ddof=1))
    b = aggregate(reversed(reps), delay_budget=150)
    assert (a.mean_delay, a.std_delay, a.precision) == (b.mean_delay, b.std_delay, b.precision)


def test_variant_config():
    base = DetectorConfig()
    assert evaluation.variant_config(base, "okgd") is base
    assert evaluation.variant_config(base, "okgd-nograph").lam == 0.0
    with pytest.raises(ValueError):
        evaluation.variant_config(base, "nougat")


def factory(seed):
    return synth.make_random_location_scenario(3, seed, n_clusters=2, cluster_size=3, tau=150, horizon=260)


def test_run_experiment_threads_match_serial(tmp_path):
    cfg = DetectorConfig(bp=50, n_pre=30, n_post=30)
    serial = evaluation.run_experiment(factory, [0, 1, 2], cfg, evaluation.VARIANTS, workers=1)
    threaded = evaluation.run_experiment(factory, [0, 1, 2], cfg, evaluation.VARIANTS, workers=3)
    assert serial == threaded
    assert [r.seed for r in serial["okgd"]] == [0, 1, 2]
    path = tmp_path / "report.csv"
    evaluation.write_report(path, serial)
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(evaluation.REPORT_HEADER)
    assert len(lines) == 1 + 6 + 1 + 1 + 2
