import json
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from bell_lab.chsh import (
    CHSH_PATTERNS,
    BoundViolationError,
    certify_lhv_bound,
    chsh_from_correlations,
)
from bell_lab.exact import CorrelationSet, correlation_set
from bell_lab.models import model_hash
from tests_support import alter_local


def flip_all_alice_tables(model):
    out = model
    for label in model.alice_labels:
        values = tuple(
            tuple(-v for v in row) for row in model.alice[label].table.values
        )
        out = alter_local(out, "alice", label, table=values)
    return out


rational_in_unit = st.fractions(min_value=-1, max_value=1).map(
    lambda f: Fraction(f).limit_denominator(997)
)


class TestPatterns:
    def test_exactly_eight_odd_negation_patterns(self):
        assert len(CHSH_PATTERNS) == 8
        assert len(set(CHSH_PATTERNS)) == 8
        for pattern in CHSH_PATTERNS:
            assert set(pattern) <= {-1, 1}
            assert pattern.count(-1) % 2 == 1

    def test_one_negated_plus_negations(self):
        single = [p for p in CHSH_PATTERNS if p.count(-1) == 1]
        triple = [p for p in CHSH_PATTERNS if p.count(-1) == 3]
        assert len(single) == len(triple) == 4
        negated = {tuple(-s for s in p) for p in single}
        assert negated == set(triple)


class TestReport:
    def test_all_ones(self):
        report = chsh_from_correlations(CorrelationSet(*(Fraction(1),) * 4))
        assert report.s_max == 2
        assert report.bound_satisfied
        assert sorted(report.sums) == [-2, -2, -2, -2, 2, 2, 2, 2]

    def test_perfect_pair(self):
        report = chsh_from_correlations(
            CorrelationSet(Fraction(1), Fraction(-1), Fraction(0), Fraction(0))
        )
        assert Fraction(2) in report.sums
        assert report.s_max == 2
        assert report.bound_satisfied

    def test_non_lhv_input_flagged(self):
        seven = Fraction(7, 10)
        report = chsh_from_correlations(CorrelationSet(seven, -seven, seven, seven))
        assert report.s_max == Fraction(14, 5)
        assert not report.bound_satisfied

    @pytest.mark.parametrize("bad", [Fraction(3, 2), Fraction(-2)])
    def test_out_of_range_rejected(self, bad):
        with pytest.raises(ValueError, match="outside"):
            chsh_from_correlations(CorrelationSet(bad, Fraction(0), Fraction(0), Fraction(0)))

    @given(rational_in_unit, rational_in_unit, rational_in_unit, rational_in_unit)
    def test_sums_match_oracle(self, c1, c2, c3, c4):
        report = chsh_from_correlations(CorrelationSet(c1, c2, c3, c4))
        assert sorted(report.sums) == oracles.chsh_sums((c1, c2, c3, c4))
        assert report.s_max == oracles.s_max((c1, c2, c3, c4))


class TestCertificate:
    def test_singleton(self, singleton):
        cert = certify_lhv_bound(singleton)
        assert cert.report.s_max == 2
        assert cert.report.bound_satisfied
        assert cert.model_sha256 == model_hash(singleton)

    def test_perfect(self, perfect):
        cert = certify_lhv_bound(perfect)
        assert cert.report.s_max == 2
        assert cert.correlations.as_tuple() == (1, -1, 0, 0)

    def test_to_dict_serializable(self, noisy):
        doc = certify_lhv_bound(noisy).to_dict()
        text = json.dumps(doc, sort_keys=True)
        assert json.dumps(certify_lhv_bound(noisy).to_dict(), sort_keys=True) == text
        assert doc["s_max"] == "1"
        assert doc["bound_satisfied"] is True

    def test_campaign_always_satisfied(self, small_campaign):
        for model in small_campaign:
            assert certify_lhv_bound(model).report.bound_satisfied

    def test_violation_raises_loudly(self, noisy, monkeypatch):
        import bell_lab.chsh as chsh_module

        fake = CorrelationSet(Fraction(1), Fraction(-1), Fraction(1), Fraction(1))
        monkeypatch.setattr(chsh_module, "correlation_set", lambda model: fake)
        with pytest.raises(BoundViolationError, match="s_max"):
            certify_lhv_bound(noisy)


class TestSymmetries:
    def test_alice_sign_flip_preserves_s_max(self, small_campaign):
        for model in small_campaign[:25]:
            flipped = flip_all_alice_tables(model)
            before = chsh_from_correlations(correlation_set(model)).s_max
            after = chsh_from_correlations(correlation_set(flipped)).s_max
            assert before == after

    def test_alice_setting_swap_preserves_s_max(self, small_campaign):
        from dataclasses import replace

        for model in small_campaign[:25]:
            a0, a1 = model.alice_labels
            swapped = replace(
                model, alice={a0: model.alice[a1], a1: model.alice[a0]}
            )
            # The stored side/setting tags still name the original settings;
            # rebuild them so the swapped model validates.
            swapped = alter_local(
                swapped, "alice", a0, table=model.alice[a1].table.values
            )
            swapped = alter_local(
                swapped, "alice", a1, table=model.alice[a0].table.values
            )
            before = chsh_from_correlations(correlation_set(model))
            after = chsh_from_correlations(correlation_set(swapped))
            assert before.s_max == after.s_max
            assert sorted(before.sums) == sorted(after.sums)
