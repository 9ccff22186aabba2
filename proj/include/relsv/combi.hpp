#pragma once

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "relsv/error.hpp"
#include "relsv/ratcore/scalar.hpp"

namespace relsv {

/// Labeled parts mu_1..mu_l; order matters.
using OrderedPartition = std::vector<long>;

enum class Regime { unstable_01, unstable_02, general };

inline std::string regime_name(Regime r)
{
    switch (r) {
    case Regime::unstable_01: return "01";
    case Regime::unstable_02: return "02";
    case Regime::general: return "general";
    }
    return "?";
}

struct SpinProfile {
    long g = 0;
    long r = 1;
    OrderedPartition mu;
    long m = 0;
    std::vector<long> a; // reverse remainders r-1-<mu_i/r>
    Regime regime = Regime::general;

    long l() const noexcept { return static_cast<long>(mu.size()); }
    long size() const
    {
        long d = 0;
        for (long x : mu) {
            d += x;
        }
        return d;
    }
    /// 3g-3+l, the dimension of the r-spin moduli.
    long dimension() const noexcept { return 3 * g - 3 + l(); }

    friend bool operator==(const SpinProfile&, const SpinProfile&) = default;
};

/// r does not divide 2g-2+l+|mu|: the moduli space is empty.
struct EmptySpace {
    long g = 0;
    long r = 1;
    OrderedPartition mu;
    long residue = 0; // (2g-2+l+|mu|) mod r
};

using ValidationResult = std::variant<SpinProfile, EmptySpace>;

/// <a/r>
inline long remainder(long a, long r)
{
    if (a < 0 || r < 1) {
        throw std::invalid_argument("remainder: need a >= 0 and r >= 1");
    }
    return a % r;
}

inline long floor_div(long a, long r) { return (a - remainder(a, r)) / r; }

inline void check_profile_arguments(long g, long r, const OrderedPartition& mu)
{
    if (g < 0) {
        throw std::invalid_argument("genus must be >= 0");
    }
    if (r < 1) {
        throw std::invalid_argument("r must be >= 1");
    }
    if (mu.empty()) {
        throw std::invalid_argument("mu must have at least one part");
    }
    for (long x : mu) {
        if (x < 1) {
            throw std::invalid_argument("parts of mu must be >= 1");
        }
    }
}

/// Throws std::invalid_argument on malformed input; a failed divisibility is
/// an EmptySpace result, not an error.
inline ValidationResult validate(long g, long r, const OrderedPartition& mu)
{
    check_profile_arguments(g, r, mu);
    const long l = static_cast<long>(mu.size());
    long total = 2 * g - 2 + l;
    for (long x : mu) {
        total += x;
    }
    // total >= 1 always: |mu| >= l >= 1
    if (total % r != 0) {
        return EmptySpace{g, r, mu, total % r};
    }
    SpinProfile p;
    p.g = g;
    p.r = r;
    p.mu = mu;
    p.m = total / r;
    for (long x : mu) {
        p.a.push_back(r - 1 - remainder(x, r));
    }
    if (g == 0 && l == 1) {
        p.regime = Regime::unstable_01;
    } else if (g == 0 && l == 2) {
        p.regime = Regime::unstable_02;
    } else {
        p.regime = Regime::general;
    }
    return p;
}

/// validate() for callers that require a non-empty space.
inline SpinProfile make_profile(long g, long r, const OrderedPartition& mu)
{
    auto v = validate(g, r, mu);
    if (auto* e = std::get_if<EmptySpace>(&v)) {
        throw structural_error("profile is empty: 2g-2+l+|mu| = " + std::to_string(e->residue) + " mod " +
                               std::to_string(r));
    }
    return std::get<SpinProfile>(v);
}

inline long floor_sum(const SpinProfile& p)
{
    long s = 0;
    for (long x : p.mu) {
        s += floor_div(x, p.r);
    }
    return s;
}

/// Degree of the root L on the contracted component: m - l - sum floor(mu_i/r),
/// checked against (2g-2-sum a_i)/r.
inline long spin_bundle_degree(const SpinProfile& p)
{
    const long deg = p.m - p.l() - floor_sum(p);
    long num = 2 * p.g - 2;
    for (long ai : p.a) {
        num -= ai;
    }
    if (num % p.r != 0 || num / p.r != deg) {
        throw consistency_error("spin_bundle_degree: m-l-sum floor = " + std::to_string(deg) +
                                " but (2g-2-sum a)/r = " + std::to_string(num) + "/" + std::to_string(p.r));
    }
    return deg;
}

inline long edge_root_degree(long mu_i, long r) { return floor_div(mu_i, r); }

inline long flag_divisible_count(const OrderedPartition& mu, long r)
{
    return std::count_if(mu.begin(), mu.end(), [&](long x) { return x % r == 0; });
}

inline long flag_divisible_count(const SpinProfile& p) { return flag_divisible_count(p.mu, p.r); }

/// Degree of the root after forgetting the orbifold structure at the
/// marked points: each point with r | mu_i contributes one extra unit.
inline long normalized_root_degree(const SpinProfile& p) { return spin_bundle_degree(p) + flag_divisible_count(p); }

struct FixedLocusLabel {
    long n = 0; // points mapped over infinity
    bool simple = false;

    std::string str(long m) const
    {
        return "h" + std::to_string(n) + " = [" + std::to_string(m - n) + "*(0) + " + std::to_string(n) + "*(inf)]" +
               (simple ? " simple" : "");
    }
};

/// h_0..h_m; only h_0 has no degeneration of the target at infinity.
inline std::vector<FixedLocusLabel> fixed_locus_labels(const SpinProfile& p)
{
    std::vector<FixedLocusLabel> out;
    for (long n = 0; n <= p.m; ++n) {
        out.push_back({n, n == 0});
    }
    return out;
}

/// 1/(mu_1 ... mu_l)
inline ExactScalar pushforward_degree(const SpinProfile& p)
{
    mpz_class prod = 1;
    for (long x : p.mu) {
        prod *= x;
    }
    return ExactScalar(mpz_class(1), prod);
}

/// prod over distinct values of (multiplicity)!
inline mpz_class automorphism_count(const OrderedPartition& mu)
{
    std::map<long, unsigned long> mult;
    for (long x : mu) {
        ++mult[x];
    }
    mpz_class out = 1;
    for (const auto& [v, k] : mult) {
        out *= factorial(k);
    }
    return out;
}

inline nlohmann::json to_json(const SpinProfile& p)
{
    return {{"g", p.g}, {"r", p.r}, {"mu", p.mu}, {"m", p.m}, {"a", p.a}, {"regime", regime_name(p.regime)}};
}

inline nlohmann::json to_json(const EmptySpace& e)
{
    return {{"g", e.g}, {"r", e.r}, {"mu", e.mu}, {"valid", false}, {"residue", e.residue}};
}

inline std::string mu_string(const OrderedPartition& mu)
{
    std::string s = "(";
    for (std::size_t i = 0; i < mu.size(); ++i) {
        s += (i ? "," : "") + std::to_string(mu[i]);
    }
    return s + ")";
}

inline std::string profile_string(const SpinProfile& p)
{
    return "g=" + std::to_string(p.g) + " r=" + std::to_string(p.r) + " mu=" + mu_string(p.mu);
}

/// Every valid profile with g <= max_g, 1 <= l <= max_l, 1 <= r <= max_r and
/// parts in [1, max_part], in (r, g, l, mu lexicographic) order.
inline std::vector<SpinProfile> profile_grid(long max_g, long max_l, long max_r, long max_part, long min_r = 1)
{
    std::vector<SpinProfile> out;
    if (max_part < 1) {
        return out;
    }
    for (long r = std::max(min_r, 1L); r <= max_r; ++r) {
        for (long g = 0; g <= max_g; ++g) {
            for (long l = 1; l <= max_l; ++l) {
                OrderedPartition mu(static_cast<std::size_t>(l), 1);
                while (true) {
                    auto v = validate(g, r, mu);
                    if (auto* p = std::get_if<SpinProfile>(&v)) {
                        out.push_back(*p);
                    }
                    long i = l - 1;
                    while (i >= 0 && mu[static_cast<std::size_t>(i)] == max_part) {
                        mu[static_cast<std::size_t>(i)] = 1;
                        --i;
                    }
                    if (i < 0) {
                        break;
                    }
                    ++mu[static_cast<std::size_t>(i)];
                }
            }
        }
    }
    return out;
}

} // namespace relsv
