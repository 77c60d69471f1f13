import pytest

from otto_spin.otto_cycle import FIELD_INCREASE, is_engine, run_cycle
from otto_spin.verify import (
    INVARIANTS,
    check_point,
    find_field_increase_engine,
    oracle_checks,
    run_verify,
    sample_params,
)


def test_sample_box():
    params = sample_params(5000, seed=11)
    assert all(p.J == 0.0 for p in params[::10])
    for p in params:
        assert 0 <= p.J <= 5
        assert 0 < p.B1 <= 10 and 0 < p.B2 <= 10
        assert 0.05 <= p.T2 <= 5 and p.T2 < p.T1 <= 10


def test_sampling_is_seeded():
    assert sample_params(100, 4) == sample_params(100, 4)
    assert sample_params(100, 4) != sample_params(100, 5)


def test_check_point_keys():
    out = check_point(sample_params(1, 0)[0])
    assert set(out) == set(INVARIANTS)


def test_oracle_checks_pass_on_sample():
    params = sample_params(300, seed=2)
    prob_ok, trace_ok = oracle_checks(params)
    assert prob_ok.all() and trace_ok.all()


def test_oracle_checks_empty():
    a, b = oracle_checks([])
    assert a.size == 0 and b.size == 0


def test_run_verify_small():
    report = run_verify(2000, seed=5)
    assert report.ok, report.failures()
    assert sum(t.passed + t.failed + t.skipped for t in report.tallies.values()) == 2000 * len(INVARIANTS)
    assert report.tallies["first_law"].passed == 2000
    assert report.tallies["appendix_audit"].passed > 0
    assert report.tallies["field_increase_counterflow"].passed > 0


def test_run_verify_parallel_matches_sequential():
    seq = run_verify(10_000, seed=9, threads=1)
    par = run_verify(10_000, seed=9, threads=2)
    assert seq.tallies == par.tallies
    assert seq.lines() == par.lines()


def test_run_verify_rejects_empty():
    with pytest.raises(ValueError):
        run_verify(0)


def test_witness_is_field_increase_engine():
    p = find_field_increase_engine(seed=3)
    assert p.case == FIELD_INCREASE and is_engine(run_cycle(p))


def test_report_lines_name_seed():
    lines = run_verify(50, seed=8).lines()
    assert lines[0] == "seed=8 samples=50"
    assert any(line.startswith("PASS field_increase_engine_exists") for line in lines)
