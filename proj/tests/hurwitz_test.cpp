#include <gtest/gtest.h>

#include "relsv/hurwitz.hpp"

using namespace relsv;

namespace {

std::vector<OrderedPartition> all_partitions_upto(long max_d)
{
    std::vector<OrderedPartition> out;
    for (int d = 1; d <= max_d; ++d) {
        for (const auto& p : partitions(d)) {
            out.emplace_back(p.begin(), p.end());
        }
    }
    return out;
}

} // namespace

TEST(DisconnectedBracket, Examples)
{
    EXPECT_EQ(disconnected_bracket({3}, 2, 1), ExactScalar(1));
    for (long d = 1; d <= 6; ++d) {
        OrderedPartition ones(static_cast<std::size_t>(d), 1);
        EXPECT_EQ(ExactScalar(automorphism_count(ones)) * disconnected_bracket(ones, 1, 0), ExactScalar(1));
    }
    // S_2 by hand: pbar_2 = +-2 on (2) and (1,1), dim = chi = 1, z = 2:
    // (1/2)(1/2)(4 + 4) = 2.
    EXPECT_EQ(disconnected_bracket({1, 1}, 1, 2), ExactScalar(2));
}

TEST(BruteForce, Examples)
{
    EXPECT_EQ(brute_force_r1({2}, 1), ExactScalar(1, 2));
    EXPECT_EQ(brute_force_r1({1, 1}, 2), ExactScalar(1));
    EXPECT_EQ(brute_force_r1({3}, 2), ExactScalar(1));
    EXPECT_EQ(brute_force_r1({2}, 3), ExactScalar(1, 2));
    EXPECT_EQ(brute_force_r1({1}, 0), ExactScalar(1));
    EXPECT_EQ(brute_force_r1({1, 1}, 0), ExactScalar(0)); // disconnected
}

TEST(BruteForce, BoundsEnforced)
{
    EXPECT_THROW(brute_force_r1({8}, 1), resource_error);
    EXPECT_THROW(brute_force_r1({2}, 7), resource_error);
}

TEST(BruteForce, WorkerCountDoesNotChangeResult)
{
    EXPECT_EQ(brute_force_r1({2, 2}, 4, 1), brute_force_r1({2, 2}, 4, 3));
    EXPECT_EQ(brute_force_r1({3, 1}, 4, 1), brute_force_r1({3, 1}, 4, 4));
}

TEST(Connected, FullyRamifiedAtGenusZero)
{
    // one part: every block must contain it, so only slot-only blocks split off,
    // and those are absent when r is odd.
    for (long r : {1L, 3L}) {
        for (long d = 1; d <= 7; ++d) {
            auto v = validate(0, r, {d});
            if (auto* p = std::get_if<SpinProfile>(&v)) {
                ExactScalar disc = ExactScalar(automorphism_count(p->mu)) * disconnected_bracket(p->mu, r, p->m);
                EXPECT_EQ(connected_bracket(p->mu, r, p->m), disc) << r << " " << d;
            }
        }
    }
    EXPECT_EQ(connected_bracket({1}, 1, 0), ExactScalar(1));
}

TEST(Connected, ReassemblyReproducesDisconnected)
{
    const std::vector<std::tuple<OrderedPartition, long, long>> cases{
        {{1, 1}, 1, 4}, {{2, 1, 1}, 1, 3}, {{1, 2}, 2, 3}, {{3, 1, 2}, 2, 2}, {{1, 1, 1}, 3, 2}, {{2, 2}, 4, 2}};
    for (const auto& [mu, r, m] : cases) {
        ConnectedBrackets cb(mu, r, m);
        for (unsigned S = 0; S <= cb.full(); ++S) {
            for (long k = 0; k <= m; ++k) {
                EXPECT_EQ(cb.reassemble(S, k), cb.disconnected(S, k)) << mu_string(mu) << " r=" << r << " S=" << S;
            }
        }
    }
}

TEST(Connected, PruningForbiddenGeneraChangesNothing)
{
    const std::vector<std::tuple<OrderedPartition, long, long>> cases{
        {{1, 1}, 1, 4}, {{2, 1, 1}, 1, 4}, {{1, 3}, 2, 3}, {{2, 1, 1}, 2, 3}, {{1, 1, 1}, 3, 3}, {{3, 2}, 4, 2}};
    for (const auto& [mu, r, m] : cases) {
        ConnectedBrackets pruned(mu, r, m, true), full(mu, r, m, false);
        for (unsigned S = 0; S <= pruned.full(); ++S) {
            for (long k = 0; k <= m; ++k) {
                EXPECT_EQ(pruned.connected(S, k), full.connected(S, k)) << mu_string(mu) << " r=" << r;
            }
        }
    }
}

TEST(Connected, SlotOnlyBlockIsNonzeroForEvenR)
{
    ConnectedBrackets cb({1}, 2, 1);
    EXPECT_EQ(cb.connected(0, 1), shifted_power_sum({}, 3));
    EXPECT_EQ(shifted_power_sum({}, 3), ExactScalar(7, 960));
}

TEST(Calibrate, RankOneGivesClassicalNormalization)
{
    const auto cal = calibrate(1);
    EXPECT_EQ(cal.alpha, ExactScalar(1, 2));
    EXPECT_EQ(cal.beta, ExactScalar(1));
    EXPECT_EQ(cal.aut_mode, AutMode::ordered);
    const auto all = calibrate(1, AnchorSet::all);
    EXPECT_EQ(all.alpha, cal.alpha);
    EXPECT_EQ(all.beta, cal.beta);
}

TEST(Calibrate, UnstablePairsFixAlphaOneOverRPlusOne)
{
    for (long r = 1; r <= 4; ++r) {
        const auto cal = calibrate(r, AnchorSet::only_02);
        EXPECT_EQ(cal.alpha, ExactScalar(1, r + 1)) << r;
        EXPECT_EQ(cal.beta, ExactScalar(1)) << r;
        EXPECT_EQ(cal.aut_mode, AutMode::ordered) << r;
    }
}

// Using the one-part closed forms as anchors needs beta = 1/r for r >= 2,
// which then misses the two-part closed forms.
TEST(Calibrate, AllAnchorsInconsistentForRAtLeastTwo)
{
    for (long r = 2; r <= 4; ++r) {
        EXPECT_THROW(calibrate(r, AnchorSet::all), calibration_error) << r;
        const auto one_part = calibrate(r, AnchorSet::only_01);
        EXPECT_EQ(one_part.alpha, ExactScalar(1, r + 1));
        EXPECT_EQ(one_part.beta, ExactScalar(1, r));
    }
}

TEST(Calibrate, AnchorSets)
{
    EXPECT_EQ(anchors_01(2).back().mu, OrderedPartition({9}));
    EXPECT_EQ(anchors_01(3).back().mu, OrderedPartition({10}));
    auto a3 = anchors_02(3);
    ASSERT_EQ(a3.size(), 4u);
    EXPECT_EQ(a3.back().mu, OrderedPartition({3, 3}));
    EXPECT_THROW(parse_anchor_set("none"), std::invalid_argument);
}

TEST(Evaluate, Examples)
{
    EXPECT_EQ(evaluate({0, 1, {2}}), ExactScalar(1, 2));
    EXPECT_EQ(evaluate({1, 1, {2}}), ExactScalar(1, 2));
    EXPECT_EQ(evaluate({0, 2, {2}}), ExactScalar(0)); // empty space
    EXPECT_EQ(evaluate({0, 2, {3, 5}}), ExactScalar(225));
}

// One-part case: the oracle gives mu^{m-2}, the closed form mu^{m-2}/r.
TEST(Evaluate, OnePartGenusZeroIsRTimesClosedForm)
{
    for (long r = 1; r <= 4; ++r) {
        for (long mu1 = 1; mu1 <= 12; ++mu1) {
            auto v = validate(0, r, {mu1});
            if (auto* p = std::get_if<SpinProfile>(&v)) {
                EXPECT_EQ(evaluate({0, r, {mu1}}), ExactScalar(r) * special_case_value(*p)) << r << " " << mu1;
                EXPECT_EQ(evaluate({0, r, {mu1}}), pow(ExactScalar(mu1), p->m - 2));
            }
        }
    }
    EXPECT_EQ(evaluate({0, 2, {3}}), ExactScalar(1, 3));
}

TEST(Evaluate, TwoPartHeldOutMatchesClosedForm)
{
    for (long r = 1; r <= 4; ++r) {
        const auto& cal = calibration_for(r);
        int held_out = 0;
        for (const auto& p : pairs_02(r, 12)) {
            for (const auto& mu : {p.mu, OrderedPartition{p.mu[1], p.mu[0]}}) {
                auto q = make_profile(0, r, mu);
                if (is_anchor(cal, q)) {
                    continue;
                }
                ++held_out;
                EXPECT_EQ(evaluate({0, r, mu}, cal), special_case_value(q)) << r << mu_string(mu);
            }
        }
        EXPECT_GE(held_out, 5);
    }
}

TEST(Evaluate, RankOneMatchesBruteForce)
{
    const auto& cal = calibration_for(1);
    int checked = 0;
    for (const auto& mu : all_partitions_upto(5)) {
        const long d = std::accumulate(mu.begin(), mu.end(), 0L);
        const long l = static_cast<long>(mu.size());
        for (long m = 0; m <= 4; ++m) {
            const long two_g = m + 2 - l - d;
            if (two_g < 0 || two_g % 2) {
                EXPECT_EQ(brute_force_r1(mu, m), ExactScalar(0));
                continue;
            }
            ++checked;
            EXPECT_EQ(evaluate({two_g / 2, 1, mu}, cal), brute_force_r1(mu, m)) << mu_string(mu) << " m=" << m;
        }
    }
    EXPECT_GT(checked, 10);
}

TEST(Evaluate, DisconnectedQuery)
{
    // r=1 has no slot-only blocks (pbar_2 of the empty partition is 0), and the
    // only other split of (1,1) needs a degree-1 cover with a branch point.
    EXPECT_EQ(evaluate({0, 1, {1, 1}, false}), ExactScalar(1));
    EXPECT_EQ(evaluate({0, 1, {1, 1}, true}), ExactScalar(1));
    EXPECT_EQ(evaluate({0, 1, {1, 1}, false}), ExactScalar(1, 4) * ExactScalar(2) * disconnected_bracket({1, 1}, 1, 2));
}
