import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from statsmodels.stats.proportion import proportion_confint

from scalarbp.bp4_scalar import DecoderConfig
from scalarbp.code_factory import builtin_code
from scalarbp.outcome import DecodeOutcome
from scalarbp.pauli_core import PauliString, syndrome
from scalarbp.sim_harness import (
    CSV_FIELDS,
    DETECTED_FAILURE,
    FALSE_CONVERGENCE,
    SUCCESS,
    ChannelParams,
    StopRule,
    TrialStats,
    classify,
    run_experiment,
    sample_error,
    wilson_interval,
)

FIVE = builtin_code("five_qubit")


def outcome(estimate, converged=True):
    return DecodeOutcome(PauliString(estimate), converged, 1)


class TestSampleError:
    def test_zero_rate(self):
        for t in range(20):
            assert sample_error(7, ChannelParams(0.0, 1), t).is_identity()

    def test_reproducible_per_trial(self):
        ch = ChannelParams(0.3, 42)
        assert sample_error(50, ch, 5) == sample_error(50, ch, 5)
        assert sample_error(50, ch, 5) != sample_error(50, ch, 6)

    @pytest.mark.parametrize("eps", [0.75, 0.1])
    def test_frequencies_within_3_sigma(self, eps):
        n = 100_000
        codes = sample_error(n, ChannelParams(eps, 9), 0).data
        expected = np.array([1 - eps, eps / 3, eps / 3, eps / 3])
        counts = np.bincount(codes, minlength=4)
        sigma = np.sqrt(n * expected * (1 - expected))
        assert np.all(np.abs(counts - n * expected) <= 3 * sigma)
        nonid = np.count_nonzero(codes)
        assert abs(nonid - n * eps) <= 3 * np.sqrt(n * eps * (1 - eps))


class TestClassify:
    def test_exact(self):
        assert classify(FIVE, "XIIII", outcome("XIIII")) == SUCCESS

    def test_stabilizer_equivalent(self):
        E = PauliString("XIIII")
        assert classify(FIVE, E, outcome(E * FIVE.row(0))) == SUCCESS

    def test_logical(self):
        E = PauliString("XIIII")
        assert classify(FIVE, E, outcome(E * PauliString("ZZZZZ"))) == FALSE_CONVERGENCE

    def test_not_converged(self):
        assert classify(FIVE, "XIIII", outcome("XIIII", converged=False)) == DETECTED_FAILURE

    @settings(max_examples=50)
    @given(st.text("IXYZ", min_size=5, max_size=5), st.text("IXYZ", min_size=5, max_size=5))
    def test_never_success_on_wrong_syndrome(self, e, ehat):
        if not np.array_equal(syndrome(FIVE, e), syndrome(FIVE, ehat)):
            assert classify(FIVE, e, outcome(ehat)) != SUCCESS


class TestWilson:
    def test_reference_point(self):
        ci = wilson_interval(100, 10_000)
        assert ci.low == pytest.approx(0.0082293, abs=5e-7)
        assert ci.high == pytest.approx(0.0121470, abs=5e-7)

    @settings(max_examples=60)
    @given(st.integers(1, 10_000), st.data())
    def test_matches_statsmodels(self, n, data):
        k = data.draw(st.integers(0, n))
        lo, hi = proportion_confint(k, n, alpha=0.05, method="wilson")
        ci = wilson_interval(k, n)
        assert ci.low == pytest.approx(lo, abs=1e-12)
        assert ci.high == pytest.approx(hi, abs=1e-12)
        assert ci.low <= k / n <= ci.high


class TestRunExperiment:
    cfg = DecoderConfig(schedule="parallel", max_iter=12)

    def test_zero_noise_runs_to_max_trials(self):
        res = run_experiment(FIVE, ChannelParams(0.0, 1), self.cfg, StopRule(5, 300))
        assert res.stats.trials == 300 and res.stats.logical_errors == 0
        assert res.stats.rate == 0.0 and res.hit_max_trials

    def test_stops_at_min_errors(self):
        res = run_experiment(FIVE, ChannelParams(0.2, 1), self.cfg, StopRule(10, 10_000))
        s = res.stats
        assert s.logical_errors == 10
        assert s.logical_errors == s.detected_failures + s.false_converged
        assert not res.hit_max_trials
        assert res.ci.low <= s.rate <= res.ci.high

    def test_deterministic_across_threads_and_batches(self):
        ch = ChannelParams(0.15, 5)
        stop = StopRule(25, 5000)
        base = run_experiment(FIVE, ch, self.cfg, stop)
        for threads, batch in [(1, 7), (3, 256), (4, 13)]:
            other = run_experiment(FIVE, ch, self.cfg, stop, threads=threads, batch=batch)
            assert other.stats == base.stats
            assert other.csv_row() == base.csv_row()

    def test_vector_decoder_agrees_on_five_qubit(self):
        ch = ChannelParams(0.1, 2)
        stop = StopRule(1000, 200)
        a = run_experiment(FIVE, ch, self.cfg, stop, decoder="bp4")
        b = run_experiment(FIVE, ch, self.cfg, stop, decoder="bp4_vector")
        assert a.stats == b.stats

    def test_csv_row_columns(self):
        res = run_experiment(FIVE, ChannelParams(0.1, 1), self.cfg, StopRule(3, 100))
        assert tuple(res.csv_row()) == CSV_FIELDS

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            run_experiment(FIVE, ChannelParams(0.1), self.cfg, decoder="bp2")
        with pytest.raises(ValueError):
            StopRule(0, 10)
        with pytest.raises(ValueError):
            ChannelParams(1.0)


def test_trial_stats_invariant():
    s = TrialStats()
    for kind in [SUCCESS, DETECTED_FAILURE, FALSE_CONVERGENCE, SUCCESS]:
        s.add(kind, 3)
    assert (s.trials, s.logical_errors, s.detected_failures, s.false_converged) == (4, 2, 1, 1)
    assert s.mean_iterations == 3.0
