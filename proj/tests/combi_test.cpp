#include <random>

#include <gtest/gtest.h>

#include "relsv/combi.hpp"

using namespace relsv;

TEST(Validate, Examples)
{
    auto p = make_profile(0, 2, {3});
    EXPECT_EQ(p.m, 1);
    EXPECT_EQ(p.a, std::vector<long>({0}));
    EXPECT_EQ(p.regime, Regime::unstable_01);

    auto e = validate(0, 2, {2});
    ASSERT_TRUE(std::holds_alternative<EmptySpace>(e));
    EXPECT_EQ(std::get<EmptySpace>(e).residue, 1);

    auto e2 = validate(0, 3, {4, 6});
    ASSERT_TRUE(std::holds_alternative<EmptySpace>(e2));
    EXPECT_EQ(std::get<EmptySpace>(e2).residue, 1);

    auto q = make_profile(1, 3, {4, 6});
    EXPECT_EQ(q.m, 4);
    EXPECT_EQ(q.a, std::vector<long>({1, 2}));
    EXPECT_EQ(q.regime, Regime::general);
}

TEST(Validate, RegimesAndBadInput)
{
    EXPECT_EQ(make_profile(0, 1, {1, 1}).regime, Regime::unstable_02);
    EXPECT_EQ(make_profile(0, 1, {1, 1, 1}).regime, Regime::general);
    EXPECT_EQ(make_profile(1, 1, {1}).regime, Regime::general);
    EXPECT_THROW(validate(0, 0, {3}), std::invalid_argument);
    EXPECT_THROW(validate(-1, 1, {3}), std::invalid_argument);
    EXPECT_THROW(validate(0, 1, {}), std::invalid_argument);
    EXPECT_THROW(validate(0, 1, {0, 2}), std::invalid_argument);
}

TEST(Remainder, Examples)
{
    EXPECT_EQ(relsv::remainder(7, 3), 1);
    EXPECT_EQ(relsv::remainder(6, 3), 0);
    EXPECT_EQ(relsv::remainder(2, 5), 2);
}

TEST(SpinBundleDegree, Examples)
{
    EXPECT_EQ(spin_bundle_degree(make_profile(0, 2, {3, 5})), -1);
    EXPECT_EQ(spin_bundle_degree(make_profile(1, 3, {2})), 0);
    auto p = make_profile(1, 1, {2});
    EXPECT_EQ(p.m, 3);
    EXPECT_EQ(spin_bundle_degree(p), 0);
}

TEST(SpinBundleDegree, CorruptedProfileIsDetected)
{
    auto p = make_profile(0, 2, {3, 5});
    p.m += 1;
    EXPECT_THROW(spin_bundle_degree(p), consistency_error);
}

TEST(EdgeRootDegree, Examples)
{
    EXPECT_EQ(edge_root_degree(3, 2), 1);
    EXPECT_EQ(edge_root_degree(6, 3), 2);
    EXPECT_EQ(edge_root_degree(1, 5), 0);
}

TEST(FixedLocusLabels, Examples)
{
    auto m2 = fixed_locus_labels(make_profile(0, 1, {1, 1})); // m = 2
    ASSERT_EQ(m2.size(), 3u);
    EXPECT_TRUE(m2[0].simple);
    EXPECT_FALSE(m2[1].simple);
    EXPECT_FALSE(m2[2].simple);
    EXPECT_EQ(fixed_locus_labels(make_profile(0, 1, {1})).size(), 1u); // m = 0
    EXPECT_EQ(fixed_locus_labels(make_profile(0, 2, {3})).size(), 2u); // m = 1
}

TEST(PushforwardDegree, Examples)
{
    EXPECT_EQ(pushforward_degree(make_profile(0, 2, {3})), ExactScalar(1, 3));
    EXPECT_EQ(pushforward_degree(make_profile(0, 2, {3, 5})), ExactScalar(1, 15));
    EXPECT_EQ(pushforward_degree(make_profile(0, 1, {1, 1})), ExactScalar(1));
}

TEST(FlagDivisibleCount, Examples)
{
    EXPECT_EQ(flag_divisible_count({3, 4}, 2), 1);
    EXPECT_EQ(flag_divisible_count(make_profile(2, 1, {3, 1, 4})), 3);
    EXPECT_EQ(flag_divisible_count({3, 4}, 5), 0);
    EXPECT_EQ(flag_divisible_count(make_profile(0, 2, {3, 4, 2})), 2);
}

TEST(ProfileJson, Shape)
{
    auto j = to_json(make_profile(1, 3, {4, 6}));
    EXPECT_EQ(j["m"], 4);
    EXPECT_EQ(j["a"], nlohmann::json::array({1, 2}));
    EXPECT_EQ(j["regime"], "general");
}

TEST(ProfileGrid, OnlyValidProfilesInOrder)
{
    auto grid = profile_grid(2, 3, 4, 8);
    EXPECT_FALSE(grid.empty());
    for (const auto& p : grid) {
        EXPECT_TRUE(std::holds_alternative<SpinProfile>(validate(p.g, p.r, p.mu)));
    }
    EXPECT_TRUE(profile_grid(2, 3, 4, 0).empty());
    EXPECT_TRUE(profile_grid(2, 0, 4, 8).empty());
}

// 1000 random valid profiles: the two degree formulas agree, and the
// normalized-root form of the orbifold degree identity holds.
TEST(DegreeIdentity, RandomProfiles)
{
    std::mt19937 rng(12345);
    std::uniform_int_distribution<long> G(0, 4), R(1, 6), L(1, 5), part(1, 30);
    int checked = 0;
    while (checked < 1000) {
        const long g = G(rng), r = R(rng), l = L(rng);
        OrderedPartition mu;
        for (long i = 0; i < l; ++i) {
            mu.push_back(part(rng));
        }
        auto v = validate(g, r, mu);
        auto* p = std::get_if<SpinProfile>(&v);
        if (!p) {
            continue;
        }
        ++checked;
        long sum_a = 0, sum_floor = 0, twisted = 2 * g - 2;
        for (std::size_t i = 0; i < mu.size(); ++i) {
            const long ai = p->a[i];
            ASSERT_GE(ai, 0);
            ASSERT_LT(ai, r);
            ASSERT_EQ(mu[i] % r == 0, ai == r - 1);
            ASSERT_EQ(mu[i], (mu[i] / r) * r + (r - 1 - ai));
            sum_a += ai;
            sum_floor += mu[i] / r;
            twisted += 1 + mu[i] % r - r;
        }
        ASSERT_EQ(r * (p->m - l - sum_floor), 2 * g - 2 - sum_a);
        ASSERT_EQ(spin_bundle_degree(*p), p->m - l - sum_floor);
        ASSERT_EQ(r * normalized_root_degree(*p), twisted + r * flag_divisible_count(*p));
        if (r == 1) {
            ASSERT_EQ(p->m, 2 * g - 2 + l + p->size());
            ASSERT_EQ(sum_a, 0);
        }
    }
}
