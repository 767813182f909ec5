"""Belief arithmetic: closed forms, Bayes updates, cutoffs, boundaries."""

import math
from fractions import Fraction

import numpy as np
import pytest

from cascade_market.beliefs import (
    Belief,
    BoundsVariant,
    Decision,
    DegenerateThresholdError,
    Firm,
    HerdOutcome,
    Review,
    action_likelihoods,
    bayes_update_action,
    bayes_update_review,
    cascade_bounds,
    consumer_decision,
    eta_from_llr,
    eta_star,
    flat_regions,
    flat_side,
    immediate_herd,
    llr_from_eta,
    net_surplus,
    never_search_bound,
    posterior_down,
    posterior_up,
)
from cascade_market.params import ModelParams


def params(**kw) -> ModelParams:
    return ModelParams(**kw)


class TestBeliefRepresentation:
    def test_round_trip_within_one_ulp(self):
        rng = np.random.default_rng(11)
        etas = np.concatenate(
            [
                rng.uniform(1e-12, 1 - 1e-12, 20_000),
                10 ** rng.uniform(-12, -0.4, 10_000),
                1.0 - 10 ** rng.uniform(-12, -0.4, 10_000),
            ]
        )
        for eta in etas:
            back = Belief.from_eta(eta).eta()
            assert abs(back - eta) <= math.ulp(1.0)

    def test_endpoints_clamp_to_infinite_llr(self):
        assert Belief.from_eta(0.0).llr == -np.inf
        assert Belief.from_eta(1.0).llr == np.inf
        assert Belief.from_eta(0.0).eta() == 0.0
        assert Belief.from_eta(1.0).eta() == 1.0

    def test_eta_in_unit_interval(self):
        for llr in np.linspace(-60, 60, 1001):
            assert 0.0 <= eta_from_llr(llr) <= 1.0


class TestPosteriors:
    def test_symmetric_prior_gives_precision(self):
        assert posterior_up(0.5, 0.8) == pytest.approx(0.8, abs=1e-12)
        assert posterior_down(0.5, 0.8) == pytest.approx(0.2, abs=1e-12)

    def test_absorbing_endpoints(self):
        assert posterior_up(1.0, 0.8) == 1.0
        assert posterior_down(0.0, 0.8) == 0.0

    def test_hand_value(self):
        # 0.55*0.3 / (0.55*0.3 + 0.45*0.7) = 11/32, by rational arithmetic
        expected = float(Fraction(11, 32))
        assert posterior_up(0.3, 0.55) == pytest.approx(expected, abs=1e-12)

    def test_label_symmetry_identity(self):
        rng = np.random.default_rng(3)
        for _ in range(500):
            eta = rng.uniform(0.001, 0.999)
            q = rng.uniform(0.51, 0.99)
            assert posterior_down(eta, q) == pytest.approx(
                1.0 - posterior_up(1.0 - eta, q), abs=1e-12
            )

    def test_monotone_in_eta_and_q(self):
        etas = np.linspace(0.01, 0.99, 50)
        up = posterior_up(etas, 0.7)
        assert np.all(np.diff(up) > 0)
        qs = np.linspace(0.55, 0.95, 30)
        vals = [posterior_up(0.4, q) for q in qs]
        assert np.all(np.diff(vals) > 0)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            posterior_up(0.5, 0.5)
        with pytest.raises(ValueError):
            posterior_up(0.5, 1.0)
        with pytest.raises(ValueError):
            posterior_up(-0.1, 0.8)
        with pytest.raises(ValueError):
            posterior_down(1.1, 0.8)


class TestCutoffs:
    def test_eta_star_values(self):
        assert eta_star(0.0, 0.0, 1.0) == 0.5
        assert eta_star(0.0, 0.2, 1.0) == pytest.approx(0.4, abs=1e-15)
        assert eta_star(0.1, 0.2, 1.0) == pytest.approx(0.45, abs=1e-15)

    def test_eta_star_unclamped(self):
        assert eta_star(0.0, 1.5, 1.0) < 0.0
        assert eta_star(2.0, 0.0, 1.0) > 1.0
        with pytest.raises(ValueError):
            eta_star(0.0, 0.1, 0.0)

    def test_cutoff_monotonicity_grid(self):
        diffs = np.linspace(-0.5, 0.5, 20)
        kappas = np.linspace(0.0, 0.5, 20)
        for k in kappas:
            vals = [eta_star(d, k, 1.0) for d in diffs]
            assert np.all(np.diff(vals) > 0)
        for d in diffs:
            vals = [eta_star(d, k, 1.0) for k in kappas]
            assert np.all(np.diff(vals) < 0)

    def test_net_surplus(self):
        assert net_surplus(0.5, 0.0, 1.0) == 0.0
        assert net_surplus(1.0, 0.0, 1.0) == 1.0
        assert net_surplus(0.3, -0.1, 1.0) == pytest.approx(-0.3, abs=1e-15)

    def test_never_search_bound(self):
        assert never_search_bound(0.0, 1.0) == 1.0
        assert never_search_bound(0.2, 1.0) == pytest.approx(1.2, abs=1e-15)


class TestCascadeBounds:
    def test_classic_limits_at_zero_cost(self):
        p = params(q=0.8, kappa=0.0)
        for variant in BoundsVariant:
            b = cascade_bounds(p, variant)
            assert b.eta_bar == pytest.approx(0.8, abs=1e-12)
            assert b.eta_under == pytest.approx(0.2, abs=1e-12)

    def test_single_threshold_hand_value(self):
        b = cascade_bounds(params(q=0.55, kappa=0.2), BoundsVariant.SINGLE_THRESHOLD)
        assert b.eta_bar == pytest.approx(0.22 / 0.49, abs=1e-12)
        assert b.eta_bar < 0.5  # low-information regime herds at the symmetric prior

    def test_visit_symmetric_hand_values(self):
        b = cascade_bounds(params(q=0.8, kappa=0.05), BoundsVariant.VISIT_SYMMETRIC)
        assert b.eta_bar == pytest.approx(float(Fraction(76, 97)), abs=1e-12)
        assert b.eta_under == pytest.approx(float(Fraction(21, 97)), abs=1e-12)
        assert b.eta_under == pytest.approx(1.0 - b.eta_bar, abs=1e-12)

    def test_degenerate_thresholds(self):
        with pytest.raises(DegenerateThresholdError):
            cascade_bounds(params(q=0.8, kappa=1.5))
        err = None
        try:
            cascade_bounds(params(q=0.8, kappa=0.1, p_a=1.0, p_b=0.0))
        except DegenerateThresholdError as e:
            err = e
        assert err is not None and err.boundary == "eta_under"

    def test_q_comparative_statics(self):
        for variant in BoundsVariant:
            bars, unders = [], []
            for q in np.arange(0.55, 0.951, 0.05):
                b = cascade_bounds(params(q=float(q), kappa=0.1), variant)
                bars.append(b.eta_bar)
                unders.append(b.eta_under)
            assert np.all(np.diff(bars) > 0)
            assert np.all(np.diff(unders) < 0)

    def test_kappa_comparative_statics_visit_symmetric(self):
        bars, unders = [], []
        for k in np.arange(0.0, 0.301, 0.05):
            b = cascade_bounds(params(q=0.8, kappa=float(k)), BoundsVariant.VISIT_SYMMETRIC)
            bars.append(b.eta_bar)
            unders.append(b.eta_under)
        assert np.all(np.diff(bars) < 0)
        assert np.all(np.diff(unders) > 0)

    def test_label_symmetry(self):
        # dyadic prices keep the mirrored arithmetic exact
        p = params(q=0.8, kappa=0.125, p_a=0.25, p_b=0.5)
        b = cascade_bounds(p, BoundsVariant.VISIT_SYMMETRIC)
        bm = cascade_bounds(p.mirrored(), BoundsVariant.VISIT_SYMMETRIC)
        assert bm.eta_bar == pytest.approx(1.0 - b.eta_under, abs=1e-12)
        assert bm.eta_under == pytest.approx(1.0 - b.eta_bar, abs=1e-12)


class TestImmediateHerd:
    def test_interior_baseline(self):
        p = params(q=0.8, kappa=0.05)
        assert immediate_herd(p, cascade_bounds(p)) is HerdOutcome.NONE

    def test_low_information_regime_herds_up(self):
        p = params(q=0.55, kappa=0.2)
        b = cascade_bounds(p, BoundsVariant.SINGLE_THRESHOLD)
        assert immediate_herd(p, b) is HerdOutcome.HERD_UP

    def test_extreme_prior(self):
        p = params(q=0.8, kappa=0.05, eta0=0.99)
        assert immediate_herd(p, cascade_bounds(p)) is HerdOutcome.HERD_UP

    def test_overlap_resolved_by_margin(self):
        p = params(q=0.55, kappa=0.2, eta0=0.54)
        b = cascade_bounds(p, BoundsVariant.VISIT_SYMMETRIC)
        assert b.eta_under > b.eta_bar  # overlapping bands in this regime
        assert immediate_herd(p, b) is HerdOutcome.HERD_UP
        p2 = params(q=0.55, kappa=0.2, eta0=0.46)
        assert immediate_herd(p2, b) is HerdOutcome.HERD_DOWN


class TestActionLikelihoods:
    def test_signal_following_at_symmetric_prior(self):
        lik = action_likelihoods(0.5, params(q=0.8, kappa=0.05))
        assert lik.act_a_given_a_high == pytest.approx(0.8, abs=1e-12)
        assert lik.act_a_given_b_high == pytest.approx(0.2, abs=1e-12)
        assert lik.search_given_a_high == pytest.approx(0.5, abs=1e-12)
        assert lik.search_given_b_high == pytest.approx(0.5, abs=1e-12)

    def test_uninformative_inside_up_region(self):
        p = params(q=0.8, kappa=0.05)
        lik = action_likelihoods(0.9, p)
        assert lik.act_a_given_a_high == lik.act_a_given_b_high == 1.0
        assert lik.is_flat(p.q)

    def test_probabilities_normalized(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            p = params(q=rng.uniform(0.55, 0.95), kappa=rng.uniform(0, 0.4))
            lik = action_likelihoods(rng.uniform(0.01, 0.99), p)
            for v in (
                lik.act_a_given_a_high,
                lik.act_a_given_b_high,
                lik.search_given_a_high,
                lik.search_given_b_high,
            ):
                assert 0.0 <= v <= 1.0

    def test_label_symmetry(self):
        p = params(q=0.8, kappa=0.125, p_a=0.25, p_b=0.5, first_visit_prob=0.25)
        for eta in (0.25, 0.5, 0.75):
            lik = action_likelihoods(eta, p)
            mir = action_likelihoods(1.0 - eta, p.mirrored())
            assert mir.act_a_given_a_high == pytest.approx(
                1.0 - lik.act_a_given_b_high, abs=1e-12
            )
            assert mir.search_given_a_high == pytest.approx(lik.search_given_b_high, abs=1e-12)


class TestBayesUpdates:
    def test_martingale_over_random_states(self):
        rng = np.random.default_rng(17)
        for _ in range(1000):
            p = params(
                q=rng.uniform(0.55, 0.95),
                kappa=rng.uniform(0.0, 0.3),
                p_a=rng.uniform(0.0, 0.6),
                p_b=rng.uniform(0.0, 0.6),
                first_visit_prob=rng.uniform(0.0, 1.0),
            )
            eta = rng.uniform(0.02, 0.98)
            lik = action_likelihoods(eta, p)
            p_a_act = eta * lik.act_a_given_a_high + (1 - eta) * lik.act_a_given_b_high
            expected = 0.0
            if p_a_act > 0:
                expected += p_a_act * bayes_update_action(eta, Firm.A, p)
            if p_a_act < 1:
                expected += (1 - p_a_act) * bayes_update_action(eta, Firm.B, p)
            assert abs(expected - eta) <= 1e-12

    def test_uninformative_region_fixes_belief(self):
        p = params(q=0.8, kappa=0.05)
        for eta in (0.9, 0.95):
            assert flat_side(eta, p) is not None
            assert bayes_update_action(eta, Firm.A, p) == eta
        assert bayes_update_action(0.05, Firm.B, p) == 0.05
        # the never-occurring action signals a logic bug instead of updating
        from cascade_market.beliefs import UnreachableActionError

        with pytest.raises(UnreachableActionError):
            bayes_update_action(0.9, Firm.B, p)
        # split lock-in: both actions occur and neither moves the belief
        pl = params(q=0.55, kappa=0.2)
        assert bayes_update_action(0.5, Firm.A, pl) == 0.5
        assert bayes_update_action(0.5, Firm.B, pl) == 0.5

    def test_hand_value(self):
        assert bayes_update_action(0.5, Firm.A, params(q=0.8, kappa=0.05)) == pytest.approx(
            0.8, abs=1e-12
        )

    def test_review_updates(self):
        p = params(q=0.8, kappa=0.05, review_mu=0.5, review_r=0.8)
        assert bayes_update_review(0.5, Firm.A, Review.PLUS, p) == pytest.approx(0.8, abs=1e-12)
        # a plus and a minus for the same product cancel (LLR additivity)
        eta = 0.37
        up = bayes_update_review(eta, Firm.A, Review.PLUS, p)
        back = bayes_update_review(up, Firm.A, Review.MINUS, p)
        assert back == pytest.approx(eta, abs=1e-12)
        p7 = params(q=0.8, kappa=0.05, review_mu=0.5, review_r=0.7)
        # 0.3*0.7 / (0.3*0.7 + 0.7*0.3) = 1/2 by rational arithmetic
        assert bayes_update_review(0.3, Firm.A, Review.PLUS, p7) == pytest.approx(0.5, abs=1e-12)
        # review about B favoring B lowers the belief in A
        assert bayes_update_review(0.5, Firm.B, Review.PLUS, p7) == pytest.approx(0.3, abs=1e-12)

    def test_review_requires_channel(self):
        with pytest.raises(ValueError):
            bayes_update_review(0.5, Firm.A, Review.PLUS, params(review_mu=0.0))


class TestConsumerDecision:
    def test_clear_cases(self):
        p = params(q=0.8, kappa=0.1)
        d = consumer_decision(0.9, Firm.A, p)
        assert d.decision is Decision.BUY_HERE and not d.searched and d.action is Firm.A
        d = consumer_decision(0.1, Firm.A, p)
        assert d.decision is Decision.SEARCH_THEN_BUY_B and d.searched and d.action is Firm.B
        d = consumer_decision(0.9, Firm.B, p)
        assert d.decision is Decision.SEARCH_THEN_BUY_A and d.searched

    def test_indifference_is_fair_coin(self):
        p = params(q=0.8, kappa=0.0)
        rng = np.random.default_rng(23)
        stays = sum(
            consumer_decision(0.5, Firm.A, p, rng=rng).decision is Decision.BUY_HERE
            for _ in range(4000)
        )
        assert 1800 < stays < 2200

    def test_never_search(self):
        p = params(q=0.8, kappa=1.5)
        bound_a = never_search_bound(p.p_a - p.p_b, p.delta_gap)
        assert p.kappa >= bound_a
        rng = np.random.default_rng(2)
        for x in np.linspace(0.0, 1.0, 10_000):
            assert not consumer_decision(float(x), Firm.A, p, rng=rng).searched
            assert not consumer_decision(float(x), Firm.B, p, rng=rng).searched

    def test_subsidized_cutoff_moves(self):
        p = params(q=0.8, kappa=0.2)
        x = 0.45  # between the subsidized and unsubsidized cutoffs
        assert not consumer_decision(x, Firm.A, p).searched
        assert consumer_decision(x, Firm.A, p, kappa_eff=0.0).searched


class TestFlatRegions:
    def test_matches_pointwise_flatness(self):
        p = params(q=0.8, kappa=0.05)
        r = flat_regions(p)
        assert r.lockin is None
        for eta in np.linspace(0.005, 0.995, 199):
            expected = eta < r.down_hi or eta > r.up_lo
            assert (flat_side(float(eta), p) is not None) == expected

    def test_lockin_regime(self):
        p = params(q=0.55, kappa=0.2)
        r = flat_regions(p)
        assert r.lockin is not None
        lo, hi = r.lockin
        assert lo < 0.5 < hi
        assert flat_side(0.5, p) is Firm.A  # split demand, tie classified upward
