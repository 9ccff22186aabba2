#pragma once

#include <algorithm>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include "json.hpp"

#include "relsv/charsym.hpp"
#include "relsv/closed_values.hpp"
#include "relsv/combi.hpp"
#include "relsv/detail/parallel.hpp"
#include "relsv/error.hpp"
#include "relsv/ratcore/scalar.hpp"

namespace relsv {

/// sum_{lambda |- d} (dim/d!) (chi^lambda(mu)/z_mu) pbar_{r+1}(lambda)^m for
/// m = 0..max_m, one entry per m. mu may be empty (d = 0).
inline std::vector<ExactScalar> disconnected_bracket_series(const OrderedPartition& mu, long r, long max_m,
                                                            int bound = default_character_bound)
{
    long d = 0;
    for (long x : mu) {
        d += x;
    }
    auto table = characters(static_cast<int>(d), bound);
    const Partition rho = sorted_partition(mu);
    const ExactScalar norm = ExactScalar(1) / (ExactScalar(factorial(static_cast<unsigned long>(d))) * ExactScalar(z(rho)));
    const std::size_t col = table->index(rho);
    std::vector<ExactScalar> out(static_cast<std::size_t>(max_m + 1), ExactScalar(0));
    const auto& labels = table->labels();
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const long chi = table->value(i, col);
        if (chi == 0) {
            continue;
        }
        const ExactScalar w = ExactScalar(mpz_class(dim(labels[i]) * chi)) * norm;
        const ExactScalar pb = shifted_power_sum(labels[i], static_cast<int>(r + 1));
        ExactScalar power(1);
        for (long k = 0; k <= max_m; ++k) {
            out[static_cast<std::size_t>(k)] += w * power;
            power *= pb;
        }
    }
    return out;
}

inline ExactScalar disconnected_bracket(const OrderedPartition& mu, long r, long m, int bound = default_character_bound)
{
    return disconnected_bracket_series(mu, r, m, bound).back();
}

/// Connected values from labeled disconnected values by the exponential
/// formula. Parts of mu are labeled; the m insertion slots are labeled too.
/// Blocks may consist of insertion slots only.
class ConnectedBrackets {
public:
    ConnectedBrackets(OrderedPartition mu, long r, long max_m, bool prune_forbidden = true,
                      int bound = default_character_bound)
        : mu_(std::move(mu)), r_(r), max_m_(max_m), prune_(prune_forbidden), bound_(bound)
    {
        if (mu_.size() > 20) {
            throw resource_error("ConnectedBrackets: too many parts");
        }
        const std::size_t subsets = std::size_t{1} << mu_.size();
        disc_.resize(subsets);
        conn_.assign(subsets, std::vector<std::optional<ExactScalar>>(static_cast<std::size_t>(max_m_ + 1)));
    }

    /// |Aut mu_S| times the bracket of the sub-partition picked by S.
    const ExactScalar& disconnected(unsigned S, long k)
    {
        auto& series = disc_[S];
        if (series.empty()) {
            const auto sub = subpartition(S);
            series = disconnected_bracket_series(sub, r_, max_m_, bound_);
            const ExactScalar aut(automorphism_count(sub));
            for (auto& v : series) {
                v *= aut;
            }
        }
        return series[static_cast<std::size_t>(k)];
    }

    ExactScalar connected(unsigned S, long k)
    {
        auto& slot = conn_[S][static_cast<std::size_t>(k)];
        if (slot) {
            return *slot;
        }
        ExactScalar total(0);
        if (!forbidden(S, k)) {
            total = disconnected(S, k);
            if (S != 0) {
                // the block containing the lowest part is B = low | U, with j slots
                const unsigned low = S & (~S + 1);
                const unsigned rest = S ^ low;
                unsigned U = rest;
                while (true) {
                    const unsigned B = low | U;
                    for (long j = 0; j <= k; ++j) {
                        if (B == S && j == k) {
                            continue;
                        }
                        const ExactScalar c = connected(B, j);
                        if (c.is_zero()) {
                            continue;
                        }
                        total -= ExactScalar(binomial(static_cast<unsigned long>(k), static_cast<unsigned long>(j))) * c *
                                 disconnected(S ^ B, k - j);
                    }
                    if (U == 0) {
                        break;
                    }
                    U = (U - 1) & rest;
                }
            } else {
                // no parts: the block containing the first slot has j slots
                for (long j = 1; j < k; ++j) {
                    const ExactScalar c = connected(0, j);
                    if (c.is_zero()) {
                        continue;
                    }
                    total -= ExactScalar(binomial(static_cast<unsigned long>(k - 1), static_cast<unsigned long>(j - 1))) *
                             c * disconnected(0, k - j);
                }
            }
        }
        slot = total;
        return total;
    }

    ExactScalar connected_full(long k) { return connected(full(), k); }

    /// Forward exponential formula: sum over set partitions of parts and slots
    /// of products of connected values. Reproduces disconnected(S, k).
    ExactScalar reassemble(unsigned S, long k)
    {
        if (S == 0 && k == 0) {
            return ExactScalar(1);
        }
        ExactScalar total(0);
        if (S != 0) {
            const unsigned low = S & (~S + 1);
            const unsigned rest = S ^ low;
            unsigned U = rest;
            while (true) {
                const unsigned B = low | U;
                for (long j = 0; j <= k; ++j) {
                    total += ExactScalar(binomial(static_cast<unsigned long>(k), static_cast<unsigned long>(j))) *
                             connected(B, j) * reassemble(S ^ B, k - j);
                }
                if (U == 0) {
                    break;
                }
                U = (U - 1) & rest;
            }
        } else {
            for (long j = 1; j <= k; ++j) {
                total += ExactScalar(binomial(static_cast<unsigned long>(k - 1), static_cast<unsigned long>(j - 1))) *
                         connected(0, j) * reassemble(0, k - j);
            }
        }
        return total;
    }

    unsigned full() const { return static_cast<unsigned>((std::size_t{1} << mu_.size()) - 1); }

    OrderedPartition subpartition(unsigned S) const
    {
        OrderedPartition sub;
        for (std::size_t i = 0; i < mu_.size(); ++i) {
            if (S >> i & 1U) {
                sub.push_back(mu_[i]);
            }
        }
        return sub;
    }

    /// Genus forced by r k = 2g - 2 + l_S + |mu_S| is not a non-negative integer.
    bool forbidden_genus(unsigned S, long k) const
    {
        long two_g = r_ * k + 2;
        for (long x : subpartition(S)) {
            two_g -= x + 1;
        }
        return two_g < 0 || two_g % 2 != 0;
    }

private:
    bool forbidden(unsigned S, long k) const { return prune_ && forbidden_genus(S, k); }

    OrderedPartition mu_;
    long r_;
    long max_m_;
    bool prune_;
    int bound_;
    std::vector<std::vector<ExactScalar>> disc_;
    std::vector<std::vector<std::optional<ExactScalar>>> conn_;
};

/// Connected bracket with labeled parts.
inline ExactScalar connected_bracket(const OrderedPartition& mu, long r, long m, int bound = default_character_bound)
{
    ConnectedBrackets cb(mu, r, m, true, bound);
    return cb.connected_full(m);
}

// ---------------------------------------------------------------------------
// Brute force at r = 1

inline constexpr long brute_force_max_degree = 7;
inline constexpr long brute_force_max_m = 6;

/// |Aut mu|/d! * #{(tau_1..tau_m) transpositions : tau_1...tau_m has cycle
/// type mu (so sigma is its inverse), <tau> transitive}.
inline ExactScalar brute_force_r1(const OrderedPartition& mu, long m, unsigned workers = 1)
{
    long d = 0;
    for (long x : mu) {
        d += x;
    }
    if (d > brute_force_max_degree || m > brute_force_max_m) {
        throw resource_error("brute_force_r1: bound exceeded (|mu| <= " + std::to_string(brute_force_max_degree) +
                             ", m <= " + std::to_string(brute_force_max_m) + ")");
    }
    if (m < 0 || mu.empty()) {
        throw std::invalid_argument("brute_force_r1: need m >= 0 and a non-empty mu");
    }
    const Partition target = sorted_partition(mu);
    const int n = static_cast<int>(d);
    std::vector<std::pair<int, int>> transpositions;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            transpositions.emplace_back(i, j);
        }
    }

    auto cycle_type = [n](const std::vector<int>& perm) {
        std::vector<bool> seen(static_cast<std::size_t>(n), false);
        Partition type;
        for (int i = 0; i < n; ++i) {
            if (seen[static_cast<std::size_t>(i)]) {
                continue;
            }
            int len = 0;
            for (int j = i; !seen[static_cast<std::size_t>(j)]; j = perm[static_cast<std::size_t>(j)]) {
                seen[static_cast<std::size_t>(j)] = true;
                ++len;
            }
            type.push_back(len);
        }
        std::sort(type.begin(), type.end(), std::greater<>());
        return type;
    };

    auto find = [](std::vector<int>& parent, int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            x = parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
        }
        return x;
    };

    // count tuples whose first transposition is transpositions[first]
    auto count_from = [&](std::size_t first) -> long {
        long count = 0;
        std::vector<int> perm(static_cast<std::size_t>(n));
        std::iota(perm.begin(), perm.end(), 0);
        std::vector<int> parent(static_cast<std::size_t>(n));
        std::iota(parent.begin(), parent.end(), 0);
        auto rec = [&](auto&& self, long depth, std::vector<int>& p, std::vector<int> par, int comps) -> void {
            if (depth == m) {
                if (comps == 1 && cycle_type(p) == target) {
                    ++count;
                }
                return;
            }
            // remaining transpositions can merge at most m - depth components
            if (comps - 1 > m - depth) {
                return;
            }
            const std::size_t lo = depth == 0 ? first : 0;
            const std::size_t hi = depth == 0 ? first + 1 : transpositions.size();
            for (std::size_t t = lo; t < hi; ++t) {
                const auto [a, b] = transpositions[t];
                std::swap(p[static_cast<std::size_t>(a)], p[static_cast<std::size_t>(b)]);
                auto next = par;
                const int ra = find(next, a), rb = find(next, b);
                int c = comps;
                if (ra != rb) {
                    next[static_cast<std::size_t>(ra)] = rb;
                    --c;
                }
                self(self, depth + 1, p, std::move(next), c);
                std::swap(p[static_cast<std::size_t>(a)], p[static_cast<std::size_t>(b)]);
            }
        };
        rec(rec, 0, perm, parent, n);
        return count;
    };

    long total = 0;
    if (m == 0) {
        total = count_from(0);
    } else {
        auto counts = detail::parallel_map(transpositions.size(), workers, count_from);
        for (long c : counts) {
            total += c;
        }
    }
    return ExactScalar(mpz_class(total) * automorphism_count(mu), factorial(static_cast<unsigned long>(d)));
}

// ---------------------------------------------------------------------------
// Calibration

enum class AutMode { ordered, unordered };

inline std::string aut_mode_name(AutMode a) { return a == AutMode::ordered ? "ordered" : "unordered"; }

/// Which closed-form values pin the normalization.
enum class AnchorSet { all, only_01, only_02 };

inline std::string anchor_set_name(AnchorSet a)
{
    switch (a) {
    case AnchorSet::all: return "all";
    case AnchorSet::only_01: return "01";
    case AnchorSet::only_02: return "02";
    }
    return "?";
}

inline AnchorSet parse_anchor_set(const std::string& s)
{
    if (s == "all") {
        return AnchorSet::all;
    }
    if (s == "01") {
        return AnchorSet::only_01;
    }
    if (s == "02") {
        return AnchorSet::only_02;
    }
    throw std::invalid_argument("unknown anchor set '" + s + "' (expected all, 01 or 02)");
}

/// H = alpha^m beta^l * connected bracket (labeled parts for ordered mode,
/// divided by |Aut mu| for unordered).
struct Calibration {
    long r = 1;
    ExactScalar alpha{1};
    ExactScalar beta{1};
    AutMode aut_mode = AutMode::ordered;
    AnchorSet anchors = AnchorSet::only_02;
    std::vector<SpinProfile> anchor_profiles;
};

struct CalibrationPoint {
    SpinProfile profile;
    ExactScalar raw;    // labeled connected bracket
    ExactScalar target; // closed-form value
};

/// (0,1) profiles: mu_1 in {1, 1 + r floor(9/r)}.
inline std::vector<SpinProfile> anchors_01(long r)
{
    std::vector<SpinProfile> out;
    for (long mu1 : {1L, 1 + r * (9 / r)}) {
        out.push_back(make_profile(0, r, {mu1}));
    }
    return out;
}

/// Valid (0,2) pairs mu_1 <= mu_2 in (mu_1 + mu_2, mu_1) order.
inline std::vector<SpinProfile> pairs_02(long r, long max_sum)
{
    std::vector<SpinProfile> out;
    for (long s = 2; s <= max_sum; ++s) {
        if (s % r != 0) {
            continue;
        }
        for (long a = 1; 2 * a <= s; ++a) {
            out.push_back(make_profile(0, r, {a, s - a}));
        }
    }
    return out;
}

/// First three valid pairs, plus the first pair with equal parts if it is
/// not among them (it separates the ordered and unordered conventions).
inline std::vector<SpinProfile> anchors_02(long r)
{
    auto all = pairs_02(r, 4 * r + 4);
    std::vector<SpinProfile> out(all.begin(), all.begin() + std::min<std::size_t>(3, all.size()));
    auto has_equal = std::any_of(out.begin(), out.end(), [](const SpinProfile& p) { return p.mu[0] == p.mu[1]; });
    if (!has_equal) {
        auto it = std::find_if(all.begin(), all.end(), [](const SpinProfile& p) { return p.mu[0] == p.mu[1]; });
        if (it != all.end()) {
            out.push_back(*it);
        }
    }
    return out;
}

inline std::vector<SpinProfile> anchor_profiles(long r, AnchorSet set)
{
    std::vector<SpinProfile> out;
    if (set != AnchorSet::only_02) {
        auto a = anchors_01(r);
        out.insert(out.end(), a.begin(), a.end());
    }
    if (set != AnchorSet::only_01) {
        auto b = anchors_02(r);
        out.insert(out.end(), b.begin(), b.end());
    }
    return out;
}

inline ExactScalar normalized_value(const Calibration& cal, const SpinProfile& p, const ExactScalar& raw)
{
    ExactScalar v = pow(cal.alpha, p.m) * pow(cal.beta, p.l()) * raw;
    if (cal.aut_mode == AutMode::unordered) {
        v /= ExactScalar(automorphism_count(p.mu));
    }
    return v;
}

namespace detail {

inline std::optional<Calibration> fit_mode(long r, AutMode mode, const std::vector<CalibrationPoint>& pts,
                                           std::string& why)
{
    // ratio_i = target / raw' = alpha^m beta^l
    std::vector<ExactScalar> ratio;
    for (const auto& pt : pts) {
        ExactScalar raw = pt.raw;
        if (mode == AutMode::unordered) {
            raw /= ExactScalar(automorphism_count(pt.profile.mu));
        }
        if (raw.is_zero()) {
            why = "raw bracket vanishes at " + profile_string(pt.profile);
            return std::nullopt;
        }
        ratio.push_back(pt.target / raw);
    }
    std::optional<ExactScalar> alpha;
    for (std::size_t i = 0; i < pts.size() && !alpha; ++i) {
        for (std::size_t j = i + 1; j < pts.size() && !alpha; ++j) {
            const auto& p = pts[i].profile;
            const auto& q = pts[j].profile;
            if (p.l() != q.l() || p.m == q.m) {
                continue;
            }
            ExactScalar x = ratio[i] / ratio[j];
            long e = p.m - q.m;
            if (e < 0) {
                x = ExactScalar(1) / x;
                e = -e;
            }
            alpha = exact_root(x, static_cast<unsigned long>(e));
            if (!alpha) {
                why = "no rational alpha with alpha^" + std::to_string(e) + " = " + x.str();
                return std::nullopt;
            }
        }
    }
    if (!alpha) {
        why = "anchors do not determine alpha (need two points with equal l and different m)";
        return std::nullopt;
    }
    std::optional<ExactScalar> beta;
    for (std::size_t i = 0; i < pts.size() && !beta; ++i) {
        if (pts[i].profile.l() == 1) {
            beta = ratio[i] / pow(*alpha, pts[i].profile.m);
        }
    }
    if (!beta) {
        const auto& p = pts.front().profile;
        beta = exact_root(ratio.front() / pow(*alpha, p.m), static_cast<unsigned long>(p.l()));
        if (!beta) {
            why = "no rational beta at " + profile_string(p);
            return std::nullopt;
        }
    }
    Calibration cal{r, *alpha, *beta, mode, AnchorSet::all, {}};
    std::string mismatches;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto v = normalized_value(cal, pts[i].profile, pts[i].raw);
        if (v != pts[i].target) {
            mismatches += "\n  " + profile_string(pts[i].profile) + ": fitted " + v.str() + ", closed form " +
                          pts[i].target.str() + " (ratio " + (pts[i].target / v).str() + ")";
        }
    }
    if (!mismatches.empty()) {
        why = "alpha=" + alpha->str() + " beta=" + beta->str() + " misses" + mismatches;
        return std::nullopt;
    }
    return cal;
}

} // namespace detail

inline std::vector<CalibrationPoint> calibration_points(long r, AnchorSet set, int bound = default_character_bound)
{
    std::vector<CalibrationPoint> pts;
    for (const auto& p : anchor_profiles(r, set)) {
        pts.push_back({p, connected_bracket(p.mu, r, p.m, bound), special_case_value(p)});
    }
    return pts;
}

/// Solves for (alpha, beta, aut mode) from the closed-form values of the
/// unstable regimes. Throws calibration_error when no single choice fits.
inline Calibration calibrate(long r, AnchorSet set = AnchorSet::only_02, int bound = default_character_bound)
{
    if (r < 1) {
        throw std::invalid_argument("calibrate: r must be >= 1");
    }
    const auto pts = calibration_points(r, set, bound);
    std::string report;
    for (AutMode mode : {AutMode::ordered, AutMode::unordered}) {
        std::string why;
        if (auto cal = detail::fit_mode(r, mode, pts, why)) {
            cal->anchors = set;
            for (const auto& pt : pts) {
                cal->anchor_profiles.push_back(pt.profile);
            }
            return *cal;
        }
        report += "\n" + aut_mode_name(mode) + ": " + why;
    }
    throw calibration_error("calibration failed for r=" + std::to_string(r) + " with anchors " +
                            anchor_set_name(set) + ":" + report);
}

/// calibrate() memoized per (r, anchors).
inline const Calibration& calibration_for(long r, AnchorSet set = AnchorSet::only_02)
{
    static std::mutex mutex;
    static std::map<std::pair<long, AnchorSet>, Calibration> cache;
    {
        std::lock_guard lock(mutex);
        if (auto it = cache.find({r, set}); it != cache.end()) {
            return it->second;
        }
    }
    Calibration cal = calibrate(r, set);
    std::lock_guard lock(mutex);
    return cache.emplace(std::make_pair(r, set), std::move(cal)).first->second;
}

inline bool is_anchor(const Calibration& cal, const SpinProfile& p)
{
    return std::find(cal.anchor_profiles.begin(), cal.anchor_profiles.end(), p) != cal.anchor_profiles.end();
}

struct HurwitzQuery {
    long g = 0;
    long r = 1;
    OrderedPartition mu;
    bool connected = true;
};

/// Calibrated oracle value; zero when the space is empty.
inline ExactScalar evaluate(const HurwitzQuery& q, const Calibration& cal, int bound = default_character_bound)
{
    if (cal.r != q.r) {
        throw structural_error("evaluate: calibration is for r=" + std::to_string(cal.r));
    }
    auto v = validate(q.g, q.r, q.mu);
    const auto* p = std::get_if<SpinProfile>(&v);
    if (!p) {
        return ExactScalar(0);
    }
    ExactScalar raw = q.connected ? connected_bracket(p->mu, p->r, p->m, bound)
                                  : ExactScalar(automorphism_count(p->mu)) * disconnected_bracket(p->mu, p->r, p->m, bound);
    return normalized_value(cal, *p, raw);
}

inline ExactScalar evaluate(const HurwitzQuery& q) { return evaluate(q, calibration_for(q.r)); }

inline nlohmann::json to_json(const Calibration& c)
{
    nlohmann::json anchors = nlohmann::json::array();
    for (const auto& p : c.anchor_profiles) {
        anchors.push_back(p.mu);
    }
    return {{"r", c.r},
            {"alpha", c.alpha.str()},
            {"beta", c.beta.str()},
            {"aut_mode", aut_mode_name(c.aut_mode)},
            {"anchors", anchor_set_name(c.anchors)},
            {"anchor_mu", anchors}};
}

} // namespace relsv
