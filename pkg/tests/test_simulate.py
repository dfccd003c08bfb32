import math
from fractions import Fraction

import numpy as np
import pytest

import oracles
from bell_lab.exact import correlation_set
from bell_lab.reduction import reduce_model
from bell_lab.simulate import (
    U_SCALE,
    TrialLedger,
    _thresholds,
    empirical_chsh,
    no_signalling_report,
    outcome_distribution,
    quantum_reference,
    simulate_trials,
    verify_no_signalling,
)

F = Fraction
OPTIMAL_ANGLES = (0.0, math.pi / 2, math.pi / 4, 3 * math.pi / 4)


class TestThresholds:
    def test_exact_halving(self):
        k = _thresholds((F(0), F(1, 2), F(1)))
        assert k.tolist() == [U_SCALE // 2, U_SCALE]

    def test_floor_of_irreducible(self):
        k = _thresholds((F(0), F(1, 3), F(1)))
        assert k.tolist() == [(1 << 53) // 3, U_SCALE]


class TestSimulateTrials:
    def test_singleton_constant(self, singleton):
        ledger = simulate_trials(singleton, 10, seed=42)
        assert ledger.n == 10
        assert set(ledger.a.tolist()) == {1}
        assert set(ledger.b.tolist()) == {1}

    def test_counts_consistent_with_records(self, noisy):
        ledger = simulate_trials(noisy, 500, seed=9)
        counts = ledger.context_counts()
        assert sum(sum(c.values()) for c in counts.values()) == 500
        first = counts[("x", "y")]
        mask = (ledger.alice_settings == 0) & (ledger.bob_settings == 0)
        assert sum(first.values()) == int(mask.sum())
        assert first[(1, 1)] == int(((ledger.a == 1) & (ledger.b == 1) & mask).sum())

    def test_reproducible(self, noisy):
        first = simulate_trials(noisy, 1000, seed=5)
        second = simulate_trials(noisy, 1000, seed=5)
        for name in ("alice_settings", "bob_settings", "a", "b"):
            assert np.array_equal(getattr(first, name), getattr(second, name))
        assert not np.array_equal(first.a, simulate_trials(noisy, 1000, seed=6).a)

    def test_draw_order_contract(self, noisy):
        # Five 53-bit columns per trial: Alice setting, Bob setting,
        # source pair, U1, U2.  Recompute trial 0 by hand from the stream.
        seed = 77
        ledger = simulate_trials(noisy, 1, seed=seed)
        draws = np.random.default_rng(seed).integers(0, U_SCALE, size=(1, 5), dtype=np.int64)
        a_set = int(draws[0, 0] >= U_SCALE // 2)
        b_set = int(draws[0, 1] >= U_SCALE // 2)
        assert ledger.alice_settings[0] == a_set
        assert ledger.bob_settings[0] == b_set

        reduced = reduce_model(noisy)
        u1 = F(int(draws[0, 3]), U_SCALE)
        pair = reduced.alice_map.locate(u1)
        source_k = _thresholds(
            (F(0), F(1, 2), F(1, 2), F(1, 2), F(1))
        )
        src = int(np.searchsorted(source_k, draws[0, 2], side="left"))
        l1 = src // 2
        label = noisy.alice_labels[a_set]
        expected_a = noisy.alice[label].table.values[l1][pair[a_set]]
        assert ledger.a[0] == expected_a

    def test_perfect_pair_deterministic_given_source(self, perfect):
        ledger = simulate_trials(perfect, 10**5, seed=1)
        emp = empirical_chsh(ledger)
        by_ctx = dict(zip(emp.contexts, emp.correlations))
        assert by_ctx[("x", "y")] == 1.0
        assert by_ctx[("x", "y'")] == -1.0

    def test_noisy_within_binomial_bound(self, noisy):
        ledger = simulate_trials(noisy, 10**6, seed=1)
        emp = empirical_chsh(ledger)
        exact = dict(
            zip(emp.contexts, correlation_set(noisy).as_tuple())
        )
        for ctx, n_ctx, e_hat in zip(
            emp.contexts, emp.n_per_context, emp.correlations
        ):
            assert abs(e_hat - float(exact[ctx])) <= 3 / math.sqrt(n_ctx)

    def test_needs_at_least_one_trial(self, singleton):
        with pytest.raises(ValueError):
            simulate_trials(singleton, 0, seed=1)


class TestSettingBias:
    def test_rejects_bad_bias(self, singleton):
        with pytest.raises(ValueError, match="positive"):
            simulate_trials(singleton, 10, bias=(F(1), F(0), F(1, 2), F(1, 2)))
        with pytest.raises(ValueError, match="sum to 1"):
            simulate_trials(singleton, 10, bias=(F(1, 2), F(1, 3), F(1, 2), F(1, 2)))
        with pytest.raises(ValueError, match="floats"):
            simulate_trials(singleton, 10, bias=(0.5, 0.5, 0.5, 0.5))
        with pytest.raises(ValueError, match="4 probabilities"):
            simulate_trials(singleton, 10, bias=(F(1, 2), F(1, 2)))

    def test_bias_shifts_setting_frequencies(self, noisy):
        bias = (F(1, 8), F(7, 8), F(1, 2), F(1, 2))
        ledger = simulate_trials(noisy, 20000, bias=bias, seed=2)
        share = float((ledger.alice_settings == 0).mean())
        assert abs(share - 1 / 8) < 0.02


class TestEmpiricalChsh:
    def test_singleton_exact(self, singleton):
        emp = empirical_chsh(simulate_trials(singleton, 400, seed=0))
        assert emp.correlations == (1.0, 1.0, 1.0, 1.0)
        assert emp.standard_errors == (0.0, 0.0, 0.0, 0.0)
        assert emp.s_max == 2.0
        assert emp.sum_standard_error == 0.0

    def test_empty_context_rejected(self, singleton):
        ledger = simulate_trials(singleton, 1, seed=0)
        with pytest.raises(ValueError, match="no trials"):
            empirical_chsh(ledger)

    def test_matches_counts(self, noisy):
        ledger = simulate_trials(noisy, 5000, seed=4)
        emp = empirical_chsh(ledger)
        counts = ledger.context_counts()
        for ctx, e_hat, n_ctx in zip(emp.contexts, emp.correlations, emp.n_per_context):
            cell = counts[ctx]
            agree = cell[(1, 1)] + cell[(-1, -1)]
            disagree = cell[(1, -1)] + cell[(-1, 1)]
            assert n_ctx == agree + disagree
            assert e_hat == (agree - disagree) / n_ctx


class TestQuantumReference:
    def test_equal_angles_anticorrelate(self):
        ledger = quantum_reference((0.0, 0.0, 0.0, 0.0), 10000, seed=8)
        emp = empirical_chsh(ledger)
        assert emp.correlations == (-1.0, -1.0, -1.0, -1.0)
        assert emp.s_max == 2.0

    def test_optimal_angles_violate(self):
        emp = empirical_chsh(quantum_reference(OPTIMAL_ANGLES, 10**5, seed=3))
        assert abs(emp.s_max - 2 * math.sqrt(2)) < 0.05
        assert (emp.s_max - 2) / emp.sum_standard_error > 5

    def test_reproducible(self):
        first = quantum_reference(OPTIMAL_ANGLES, 2000, seed=12)
        second = quantum_reference(OPTIMAL_ANGLES, 2000, seed=12)
        assert np.array_equal(first.a, second.a)
        assert np.array_equal(first.b, second.b)

    def test_single_trial_cannot_fill_contexts(self):
        ledger = quantum_reference(OPTIMAL_ANGLES, 1, seed=1)
        assert ledger.n == 1
        with pytest.raises(ValueError, match="no trials"):
            empirical_chsh(ledger)


class TestNoSignallingEmpirical:
    def test_singleton_all_zero(self, singleton):
        report = no_signalling_report(simulate_trials(singleton, 400, seed=0))
        assert len(report.rows) == 8
        for row in report.rows:
            assert row.difference == 0.0
            assert row.z == 0.0
            assert 0.0 <= row.frequencies[0] <= 1.0
        assert report.max_abs_z == 0.0

    def test_model_runs_stay_small(self, noisy):
        report = no_signalling_report(simulate_trials(noisy, 10**5, seed=6))
        assert report.max_abs_z < 4.0

    def test_adversarial_ledger_flagged(self):
        # Hand-built records where Alice's outcome tracks Bob's setting.
        n = 2000
        rng = np.random.default_rng(0)
        b_set = rng.integers(0, 2, size=n).astype(np.int8)
        a_set = rng.integers(0, 2, size=n).astype(np.int8)
        a = np.where(b_set == 0, 1, -1).astype(np.int8)
        ledger = TrialLedger(
            seed=0,
            alice_labels=("x", "x'"),
            bob_labels=("y", "y'"),
            alice_settings=a_set,
            bob_settings=b_set,
            a=a,
            b=np.ones(n, dtype=np.int8),
        )
        report = no_signalling_report(ledger)
        alice_rows = [r for r in report.rows if r.side == "alice"]
        assert max(abs(r.z) for r in alice_rows) > 10


class TestNoSignallingExact:
    def test_outcome_distribution_matches_oracle(self, small_campaign):
        for model in small_campaign[:25]:
            for side, labels, remotes in (
                ("alice", model.alice_labels, model.bob_labels),
                ("bob", model.bob_labels, model.alice_labels),
            ):
                for setting in labels:
                    for remote in remotes:
                        p_plus, p_minus = outcome_distribution(
                            model, side, setting, remote
                        )
                        assert p_plus + p_minus == 1
                        mean = oracles.product_mean(model, [(side, setting)])
                        assert p_plus - p_minus == mean

    def test_presets_exactly_no_signalling(
        self, singleton, singleton_flip, perfect, noisy, random7
    ):
        for model in (singleton, singleton_flip, perfect, noisy, random7):
            report = verify_no_signalling(model)
            assert report.equal
            assert len(report.rows) == 4

    def test_campaign_exactly_no_signalling(self, small_campaign):
        for model in small_campaign:
            assert verify_no_signalling(model).equal


class TestLedgerCsv:
    def test_header_and_signs(self, tmp_path, singleton):
        path = tmp_path / "ledger.csv"
        simulate_trials(singleton, 10, seed=42).to_csv(path)
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "trial,alice_setting,bob_setting,a,b"
        assert len(lines) == 11
        assert all(line.endswith("+1,+1") for line in lines[1:])

    def test_byte_identical_reruns(self, tmp_path, noisy):
        first = tmp_path / "a.csv"
        second = tmp_path / "b.csv"
        simulate_trials(noisy, 300, seed=5).to_csv(first)
        simulate_trials(noisy, 300, seed=5).to_csv(second)
        assert first.read_bytes() == second.read_bytes()
