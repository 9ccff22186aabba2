#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <vector>

#include "relsv/error.hpp"
#include "relsv/ratcore/scalar.hpp"

namespace relsv {

/// Weakly decreasing positive parts.
using Partition = std::vector<int>;

inline int partition_size(const Partition& p)
{
    int d = 0;
    for (int x : p) {
        d += x;
    }
    return d;
}

inline Partition sorted_partition(std::vector<long> parts)
{
    std::sort(parts.begin(), parts.end(), std::greater<>());
    return Partition(parts.begin(), parts.end());
}

/// All partitions of d, largest first part first: (d), (d-1,1), ...
inline std::vector<Partition> partitions(int d)
{
    std::vector<Partition> out;
    Partition cur;
    std::function<void(int, int)> rec = [&](int left, int max_part) {
        if (left == 0) {
            out.push_back(cur);
            return;
        }
        for (int k = std::min(left, max_part); k >= 1; --k) {
            cur.push_back(k);
            rec(left - k, k);
            cur.pop_back();
        }
    };
    if (d >= 0) {
        rec(d, d);
    }
    return out;
}

inline Partition conjugate(const Partition& p)
{
    Partition c;
    if (p.empty()) {
        return c;
    }
    for (int j = 1; j <= p.front(); ++j) {
        int n = 0;
        for (int x : p) {
            n += x >= j;
        }
        c.push_back(n);
    }
    return c;
}

/// Hook length formula.
inline mpz_class dim(const Partition& lambda)
{
    const Partition lc = conjugate(lambda);
    mpz_class hooks = 1;
    for (std::size_t i = 0; i < lambda.size(); ++i) {
        for (int j = 0; j < lambda[i]; ++j) {
            hooks *= (lambda[i] - j - 1) + (lc[static_cast<std::size_t>(j)] - static_cast<int>(i) - 1) + 1;
        }
    }
    return factorial(static_cast<unsigned long>(partition_size(lambda))) / hooks;
}

/// Centralizer order prod_i i^{m_i} m_i!.
inline mpz_class z(const Partition& rho)
{
    std::map<int, unsigned long> mult;
    for (int x : rho) {
        ++mult[x];
    }
    mpz_class out = 1;
    for (const auto& [i, k] : mult) {
        mpz_class ip;
        mpz_ui_pow_ui(ip.get_mpz_t(), static_cast<unsigned long>(i), k);
        out *= ip * factorial(k);
    }
    return out;
}

namespace detail {

/// chi^lambda(rho) by removing border strips of length rho_0, rho_1, ...
/// using beta-numbers. memo is keyed by (remaining shape, parts consumed).
inline long mn_character(const Partition& lambda, const Partition& rho, std::size_t from,
                         std::map<std::pair<Partition, std::size_t>, long>& memo)
{
    if (from == rho.size()) {
        return lambda.empty() ? 1 : 0;
    }
    auto key = std::make_pair(lambda, from);
    if (auto it = memo.find(key); it != memo.end()) {
        return it->second;
    }
    const int k = rho[from];
    const int n = static_cast<int>(lambda.size());
    std::vector<int> beta(lambda.size());
    for (int i = 0; i < n; ++i) {
        beta[static_cast<std::size_t>(i)] = lambda[static_cast<std::size_t>(i)] + (n - 1 - i);
    }
    long total = 0;
    for (int i = 0; i < n; ++i) {
        const int b = beta[static_cast<std::size_t>(i)];
        const int nb = b - k;
        if (nb < 0 || std::find(beta.begin(), beta.end(), nb) != beta.end()) {
            continue;
        }
        int between = 0;
        for (int x : beta) {
            between += (x > nb && x < b);
        }
        std::vector<int> next = beta;
        next[static_cast<std::size_t>(i)] = nb;
        std::sort(next.begin(), next.end(), std::greater<>());
        Partition mu;
        const int len = static_cast<int>(next.size());
        for (int j = 0; j < len; ++j) {
            int part = next[static_cast<std::size_t>(j)] - (len - 1 - j);
            if (part > 0) {
                mu.push_back(part);
            }
        }
        const long sub = mn_character(mu, rho, from + 1, memo);
        total += (between % 2 == 0) ? sub : -sub;
    }
    memo.emplace(std::move(key), total);
    return total;
}

} // namespace detail

/// Integer character table of S_d, rows and columns indexed by partitions().
class CharacterTable {
public:
    explicit CharacterTable(int d) : d_(d), parts_(partitions(d))
    {
        for (std::size_t i = 0; i < parts_.size(); ++i) {
            index_.emplace(parts_[i], i);
        }
        values_.assign(parts_.size(), std::vector<long>(parts_.size(), 0));
        for (std::size_t j = 0; j < parts_.size(); ++j) {
            std::map<std::pair<Partition, std::size_t>, long> memo;
            for (std::size_t i = 0; i < parts_.size(); ++i) {
                values_[i][j] = detail::mn_character(parts_[i], parts_[j], 0, memo);
            }
        }
    }

    int d() const noexcept { return d_; }
    const std::vector<Partition>& labels() const noexcept { return parts_; }

    std::size_t index(const Partition& p) const
    {
        auto it = index_.find(p);
        if (it == index_.end()) {
            throw structural_error("CharacterTable: not a partition of " + std::to_string(d_));
        }
        return it->second;
    }

    long value(const Partition& lambda, const Partition& rho) const { return values_[index(lambda)][index(rho)]; }
    long value(std::size_t i, std::size_t j) const { return values_[i][j]; }

private:
    int d_;
    std::vector<Partition> parts_;
    std::map<Partition, std::size_t> index_;
    std::vector<std::vector<long>> values_;
};

inline constexpr int default_character_bound = 12;

/// Memoized per d. Concurrent first calls may both build; the tables are
/// identical and one wins.
inline std::shared_ptr<const CharacterTable> characters(int d, int bound = default_character_bound)
{
    if (d < 0) {
        throw std::invalid_argument("characters: negative degree");
    }
    if (d > bound) {
        throw resource_error("characters: degree " + std::to_string(d) + " exceeds bound " + std::to_string(bound));
    }
    static std::shared_mutex mutex;
    static std::map<int, std::shared_ptr<const CharacterTable>> cache;
    {
        std::shared_lock lock(mutex);
        if (auto it = cache.find(d); it != cache.end()) {
            return it->second;
        }
    }
    auto built = std::make_shared<const CharacterTable>(d);
    std::unique_lock lock(mutex);
    return cache.emplace(d, std::move(built)).first->second;
}

/// B_n with B_1 = -1/2.
inline ExactScalar bernoulli(int n)
{
    static std::mutex mutex;
    static std::vector<ExactScalar> table{ExactScalar(1)};
    if (n < 0) {
        throw std::invalid_argument("bernoulli: negative index");
    }
    std::lock_guard lock(mutex);
    // sum_{k=0}^{j} C(j+1,k) B_k = 0
    for (int j = static_cast<int>(table.size()); j <= n; ++j) {
        ExactScalar s(0);
        for (int k = 0; k < j; ++k) {
            s += ExactScalar(binomial(static_cast<unsigned long>(j + 1), static_cast<unsigned long>(k))) *
                 table[static_cast<std::size_t>(k)];
        }
        table.push_back(-s / ExactScalar(j + 1));
    }
    return table[static_cast<std::size_t>(n)];
}

/// zeta(-k) = -B_{k+1}/(k+1)
inline ExactScalar zeta_at_negative(int k) { return -bernoulli(k + 1) / ExactScalar(k + 1); }

/// sum_i [(l_i - i + 1/2)^k - (-i + 1/2)^k] + (1 - 2^-k) zeta(-k)
inline ExactScalar shifted_power_sum(const Partition& lambda, int k)
{
    if (k < 1) {
        throw std::invalid_argument("shifted_power_sum: k must be >= 1");
    }
    ExactScalar s(0);
    const ExactScalar half(1, 2);
    for (std::size_t idx = 0; idx < lambda.size(); ++idx) {
        const long i = static_cast<long>(idx) + 1;
        s += pow(ExactScalar(lambda[idx] - i) + half, k) - pow(ExactScalar(-i) + half, k);
    }
    return s + (ExactScalar(1) - pow(ExactScalar(1, 2), k)) * zeta_at_negative(k);
}

} // namespace relsv
