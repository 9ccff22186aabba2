#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "relsv/closed_values.hpp"
#include "relsv/combi.hpp"
#include "relsv/detail/parallel.hpp"
#include "relsv/error.hpp"
#include "relsv/hurwitz.hpp"
#include "relsv/ratcore/graded.hpp"
#include "relsv/ratcore/scalar.hpp"

namespace relsv {

/// Identifies an r-spin moduli space: genus, rank, twist vector a, marked points.
struct TableKey {
    long g = 0;
    long r = 1;
    std::vector<long> a;

    long l() const { return static_cast<long>(a.size()); }
    long dimension() const { return 3 * g - 3 + l(); }

    friend auto operator<=>(const TableKey&, const TableKey&) = default;
    friend bool operator==(const TableKey&, const TableKey&) = default;
};

inline TableKey table_key(const SpinProfile& p) { return {p.g, p.r, p.a}; }

inline std::string key_string(const TableKey& k)
{
    std::ostringstream os;
    os << "g=" << k.g << " r=" << k.r << " a=" << mu_string(k.a);
    return os.str();
}

inline void check_table_key(const TableKey& k)
{
    if (k.g < 0 || k.r < 1 || k.a.empty()) {
        throw std::invalid_argument("table key needs g >= 0, r >= 1, l >= 1: " + key_string(k));
    }
    for (long x : k.a) {
        if (x < 0 || x >= k.r) {
            throw std::invalid_argument("twist entries must lie in 0..r-1: " + key_string(k));
        }
    }
    if (2 * k.g - 2 + k.l() <= 0) {
        throw structural_error("no intersection table for (g,l) = (" + std::to_string(k.g) + "," +
                               std::to_string(k.l()) + "); use the special-case backend");
    }
}

/// psi exponent vector b and Chern degree k of c_k(-R rho_* L).
using TableIndex = std::pair<std::vector<long>, long>;

/// Every (b, k) with |b| + k = 3g-3+l, in map order.
inline std::vector<TableIndex> table_unknowns(long g, long l)
{
    const long D = 3 * g - 3 + l;
    std::vector<TableIndex> out;
    if (D < 0 || l < 1) {
        return out;
    }
    std::vector<long> b(static_cast<std::size_t>(l), 0);
    std::function<void(std::size_t, long)> rec = [&](std::size_t i, long left) {
        if (i == b.size()) {
            out.emplace_back(b, left);
            return;
        }
        for (long e = 0; e <= left; ++e) {
            b[i] = e;
            rec(i + 1, left - e);
        }
        b[i] = 0;
    };
    rec(0, D);
    std::sort(out.begin(), out.end());
    return out;
}

/// Intersection numbers int psi^b c_k(-R rho_* L) over one r-spin moduli space.
struct IntersectionTable {
    TableKey key;
    std::map<TableIndex, ExactScalar> entries;

    bool complete() const
    {
        for (const auto& u : table_unknowns(key.g, key.l())) {
            if (!entries.contains(u)) {
                return false;
            }
        }
        return true;
    }

    const ExactScalar& at(const TableIndex& i) const
    {
        auto it = entries.find(i);
        if (it == entries.end()) {
            throw incomplete_table("table " + key_string(key) + " has no entry for b=" + mu_string(i.first) +
                                   " k=" + std::to_string(i.second));
        }
        return it->second;
    }
};

inline nlohmann::json to_json(const IntersectionTable& t)
{
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& [i, v] : t.entries) {
        entries.push_back({{"b", i.first}, {"k", i.second}, {"value", v.str()}});
    }
    return {{"g", t.key.g}, {"r", t.key.r}, {"a", t.key.a}, {"l", t.key.l()}, {"entries", entries}};
}

inline IntersectionTable table_from_json(const nlohmann::json& j)
{
    IntersectionTable t;
    try {
        t.key = {j.at("g").get<long>(), j.at("r").get<long>(), j.at("a").get<std::vector<long>>()};
        if (j.contains("l") && j.at("l").get<long>() != t.key.l()) {
            throw std::invalid_argument("table: l does not match the length of a");
        }
        check_table_key(t.key);
        const long D = t.key.dimension();
        for (const auto& e : j.at("entries")) {
            auto b = e.at("b").get<std::vector<long>>();
            const long k = e.at("k").get<long>();
            long deg = k;
            for (long x : b) {
                deg += x;
            }
            if (b.size() != t.key.a.size() || k < 0 || deg != D) {
                throw std::invalid_argument("table entry b=" + mu_string(b) + " k=" + std::to_string(k) +
                                            " is not a degree-" + std::to_string(D) + " monomial");
            }
            t.entries[{std::move(b), k}] = ExactScalar::parse(e.at("value").get<std::string>());
        }
    } catch (const nlohmann::json::exception& ex) {
        throw std::invalid_argument(std::string("table: malformed JSON: ") + ex.what());
    }
    return t;
}

inline IntersectionTable load_table(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("cannot read table file " + path.string());
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& ex) {
        throw std::invalid_argument("table file " + path.string() + ": " + ex.what());
    }
    return table_from_json(j);
}

inline void save_table(const IntersectionTable& t, const std::filesystem::path& path)
{
    std::filesystem::create_directories(path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp);
        out << to_json(t).dump(2) << "\n";
        if (!out) {
            throw std::runtime_error("cannot write table file " + tmp);
        }
    }
    std::filesystem::rename(tmp, path);
}

/// prod_i (mu_i/r)^{b_i}
inline ExactScalar psi_weight(const OrderedPartition& mu, long r, const std::vector<long>& b)
{
    ExactScalar w(1);
    for (std::size_t i = 0; i < b.size(); ++i) {
        w *= pow(ExactScalar(mu[i], r), b[i]);
    }
    return w;
}

/// Sum over table entries of value * prod (mu_i/r)^{b_i}.
inline ExactScalar integrand_value(const SpinProfile& p, const IntersectionTable& t)
{
    if (table_key(p) != t.key) {
        throw structural_error("table " + key_string(t.key) + " does not match profile " + profile_string(p));
    }
    ExactScalar out(0);
    for (const auto& u : table_unknowns(p.g, p.l())) {
        out += t.at(u) * psi_weight(p.mu, p.r, u.first);
    }
    return out;
}

/// Integrates a t-free class against the table: the top-degree part must be a
/// combination of psi^b c_k(-R rho_* L).
inline ExactScalar integrate(const GradedClass& x, const IntersectionTable& t)
{
    const long D = t.key.dimension();
    ExactScalar out(0);
    for (const auto& [m, c] : x.terms()) {
        if (degree(m) != D) {
            continue;
        }
        std::vector<long> b(static_cast<std::size_t>(t.key.l()), 0);
        long k = 0;
        for (const auto& s : m) {
            if (s.kind == ClassSymbol::Kind::psi) {
                if (s.index > t.key.l()) {
                    throw structural_error("integrate: " + s.name() + " beyond l=" + std::to_string(t.key.l()));
                }
                ++b[static_cast<std::size_t>(s.index - 1)];
            } else if (s.bundle == Bundle::minus_r_rho_l && k == 0) {
                k = s.index;
            } else {
                throw structural_error("integrate: monomial " + s.name() + " is not in the table basis");
            }
        }
        if (!c.is_monomial() || c.min_exponent() != 0) {
            throw limit_error("integrate: coefficient " + c.str() + " depends on t");
        }
        out += c.coefficient(0) * t.at({b, k});
    }
    return out;
}

// --------------------------------------------------------------------------
// Fitting tables against Hurwitz values

/// Supplies H^r_{g,mu} for a profile.
using HurwitzSource = std::function<ExactScalar(const SpinProfile&)>;

inline HurwitzSource oracle_source(int bound = default_character_bound)
{
    return [bound](const SpinProfile& p) {
        return evaluate(HurwitzQuery{p.g, p.r, p.mu, true}, calibration_for(p.r), bound);
    };
}

/// Profiles with twist vector a: mu_i = base_i + r k_i, base_i the least
/// positive residue, ordered by sum(k) then lexicographically, |mu| <= max_size.
inline std::vector<SpinProfile> sample_profiles(const TableKey& key, long max_size)
{
    check_table_key(key);
    const std::size_t l = key.a.size();
    std::vector<long> base(l);
    long base_sum = 0;
    for (std::size_t i = 0; i < l; ++i) {
        const long res = key.r - 1 - key.a[i];
        base[i] = res == 0 ? key.r : res;
        base_sum += base[i];
    }
    std::vector<SpinProfile> out;
    std::vector<long> k(l, 0);
    std::function<void(std::size_t, long)> rec = [&](std::size_t i, long left) {
        if (i + 1 == l) {
            k[i] = left;
            OrderedPartition mu(l);
            for (std::size_t j = 0; j < l; ++j) {
                mu[j] = base[j] + key.r * k[j];
            }
            auto v = validate(key.g, key.r, mu);
            if (auto* p = std::get_if<SpinProfile>(&v)) {
                out.push_back(*p);
            }
            return;
        }
        for (long e = 0; e <= left; ++e) {
            k[i] = e;
            rec(i + 1, left - e);
        }
    };
    for (long K = 0; base_sum + key.r * K <= max_size; ++K) {
        rec(0, K);
    }
    return out;
}

struct HeldOutCheck {
    SpinProfile profile;
    ExactScalar predicted;
    ExactScalar actual;
    bool agrees() const { return predicted == actual; }
};

struct FitOptions {
    std::size_t max_samples = 64;
    std::size_t held_out = 3;
    int bound = default_character_bound;
    unsigned workers = 1;
};

struct FitReport {
    IntersectionTable table;
    std::vector<SpinProfile> samples;
    std::vector<ExactScalar> values; // H / prefactor per sample
    std::vector<HeldOutCheck> held_out;

    bool held_out_ok() const
    {
        return std::all_of(held_out.begin(), held_out.end(), [](const auto& h) { return h.agrees(); });
    }
};

namespace detail {

/// Row reduction in place; returns pivot columns.
inline std::vector<std::size_t> row_reduce(std::vector<std::vector<ExactScalar>>& A, std::size_t ncols)
{
    std::vector<std::size_t> pivots;
    std::size_t row = 0;
    for (std::size_t col = 0; col < ncols && row < A.size(); ++col) {
        std::size_t sel = row;
        while (sel < A.size() && A[sel][col].is_zero()) {
            ++sel;
        }
        if (sel == A.size()) {
            continue;
        }
        std::swap(A[row], A[sel]);
        const ExactScalar inv = ExactScalar(1) / A[row][col];
        for (auto& x : A[row]) {
            x *= inv;
        }
        for (std::size_t i = 0; i < A.size(); ++i) {
            if (i == row || A[i][col].is_zero()) {
                continue;
            }
            const ExactScalar f = A[i][col];
            for (std::size_t j = col; j < A[i].size(); ++j) {
                A[i][j] -= f * A[row][j];
            }
        }
        pivots.push_back(col);
        ++row;
    }
    return pivots;
}

inline std::size_t matrix_rank(std::vector<std::vector<ExactScalar>> A, std::size_t ncols)
{
    return row_reduce(A, ncols).size();
}

} // namespace detail

/// Solves H/prefactor = sum table[(b,k)] prod (mu_i/r)^{b_i} over the samples.
inline IntersectionTable solve_backend(const TableKey& key, const std::vector<SpinProfile>& samples,
                                       const std::vector<ExactScalar>& values)
{
    check_table_key(key);
    if (samples.size() != values.size()) {
        throw std::invalid_argument("solve_backend: one value per sample is required");
    }
    for (const auto& p : samples) {
        if (table_key(p) != key) {
            throw structural_error("solve_backend: sample " + profile_string(p) + " is not in " + key_string(key));
        }
    }
    const auto unknowns = table_unknowns(key.g, key.l());
    const std::size_t N = unknowns.size();
    std::vector<std::vector<ExactScalar>> A;
    for (std::size_t s = 0; s < samples.size(); ++s) {
        std::vector<ExactScalar> row;
        row.reserve(N + 1);
        for (const auto& u : unknowns) {
            row.push_back(psi_weight(samples[s].mu, key.r, u.first));
        }
        row.push_back(values[s]);
        A.push_back(std::move(row));
    }
    const auto original = A;
    const auto pivots = detail::row_reduce(A, N);
    if (pivots.size() < N) {
        throw rank_deficient("solve_backend: " + key_string(key) + " has rank " + std::to_string(pivots.size()) +
                             " of " + std::to_string(N) + " with " + std::to_string(samples.size()) +
                             " samples; more samples are needed");
    }
    IntersectionTable t{key, {}};
    for (std::size_t i = 0; i < N; ++i) {
        t.entries[unknowns[i]] = A[i][N];
    }
    std::string residuals;
    for (std::size_t s = 0; s < samples.size(); ++s) {
        ExactScalar lhs(0);
        for (std::size_t i = 0; i < N; ++i) {
            lhs += original[s][i] * A[i][N];
        }
        const ExactScalar res = original[s][N] - lhs;
        if (!res.is_zero()) {
            residuals += " " + mu_string(samples[s].mu) + ":" + res.str();
        }
    }
    if (!residuals.empty()) {
        throw inconsistent_system("solve_backend: " + key_string(key) + " residuals" + residuals);
    }
    return t;
}

/// Adds samples in order until the system has full rank, solves it, then
/// predicts the next held-out samples.
inline FitReport fit_table(const TableKey& key, const FitOptions& opt = {}, const HurwitzSource& source = {})
{
    const HurwitzSource src = source ? source : oracle_source(opt.bound);
    const auto candidates = sample_profiles(key, opt.bound);
    if (candidates.empty()) {
        throw rank_deficient("fit: no valid profile with twist " + key_string(key) + " and |mu| <= " +
                             std::to_string(opt.bound));
    }
    const auto unknowns = table_unknowns(key.g, key.l());
    const std::size_t N = unknowns.size();

    std::vector<std::vector<ExactScalar>> rows;
    std::size_t used = 0;
    while (used < candidates.size() && used < opt.max_samples) {
        std::vector<ExactScalar> row;
        for (const auto& u : unknowns) {
            row.push_back(psi_weight(candidates[used].mu, key.r, u.first));
        }
        rows.push_back(std::move(row));
        ++used;
        if (detail::matrix_rank(rows, N) == N) {
            break;
        }
    }
    FitReport rep;
    rep.samples.assign(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(used));
    const std::size_t extra = std::min(opt.held_out, candidates.size() - used);
    const std::size_t total = used + extra;
    auto h = detail::parallel_map(total, opt.workers, [&](std::size_t i) { return src(candidates[i]) / prefactor(candidates[i]); });
    rep.values.assign(h.begin(), h.begin() + static_cast<std::ptrdiff_t>(used));
    rep.table = solve_backend(key, rep.samples, rep.values);
    for (std::size_t i = used; i < total; ++i) {
        const auto& p = candidates[i];
        rep.held_out.push_back({p, prefactor(p) * integrand_value(p, rep.table), prefactor(p) * h[i]});
    }
    return rep;
}

/// Fitted tables keyed by (g, r, a), shared between threads and optionally
/// persisted as JSON files in a directory.
class TableCache {
public:
    explicit TableCache(std::optional<std::filesystem::path> dir = std::nullopt, FitOptions opt = {})
        : dir_(std::move(dir)), opt_(opt)
    {
    }

    /// Directory from RELSV_CACHE_DIR, if set.
    static std::optional<std::filesystem::path> env_directory()
    {
        const char* d = std::getenv("RELSV_CACHE_DIR");
        if (d && *d) {
            return std::filesystem::path(d);
        }
        return std::nullopt;
    }

    static TableCache& global()
    {
        static TableCache cache(env_directory());
        return cache;
    }

    std::optional<std::filesystem::path> file_for(const TableKey& k) const
    {
        if (!dir_) {
            return std::nullopt;
        }
        std::string name = "table_g" + std::to_string(k.g) + "_r" + std::to_string(k.r) + "_a";
        for (std::size_t i = 0; i < k.a.size(); ++i) {
            name += (i ? "-" : "") + std::to_string(k.a[i]);
        }
        return *dir_ / (name + ".json");
    }

    std::shared_ptr<const IntersectionTable> find(const TableKey& k) const
    {
        std::shared_lock lock(mutex_);
        auto it = tables_.find(k);
        return it == tables_.end() ? nullptr : it->second;
    }

    void put(const IntersectionTable& t)
    {
        auto sp = std::make_shared<const IntersectionTable>(t);
        {
            std::unique_lock lock(mutex_);
            tables_[t.key] = sp;
        }
        if (auto f = file_for(t.key)) {
            save_table(t, *f);
        }
    }

    /// Memory, then disk, then a fresh fit whose held-out checks must pass.
    std::shared_ptr<const IntersectionTable> get(const TableKey& k)
    {
        if (auto t = find(k)) {
            return t;
        }
        if (auto f = file_for(k); f && std::filesystem::exists(*f)) {
            auto t = load_table(*f);
            if (t.key != k) {
                throw structural_error("cached table " + f->string() + " holds " + key_string(t.key));
            }
            std::unique_lock lock(mutex_);
            return tables_.try_emplace(k, std::make_shared<const IntersectionTable>(std::move(t))).first->second;
        }
        auto rep = fit_table(k, opt_);
        if (!rep.held_out_ok()) {
            std::string msg = "fit " + key_string(k) + " misses held-out samples:";
            for (const auto& h : rep.held_out) {
                if (!h.agrees()) {
                    msg += " " + mu_string(h.profile.mu) + " predicted " + h.predicted.str() + " actual " + h.actual.str();
                }
            }
            throw inconsistent_system(msg);
        }
        put(rep.table);
        return find(k);
    }

private:
    std::optional<std::filesystem::path> dir_;
    FitOptions opt_;
    mutable std::shared_mutex mutex_;
    std::map<TableKey, std::shared_ptr<const IntersectionTable>> tables_;
};

// --------------------------------------------------------------------------
// Backends and end-to-end evaluation

struct Backend {
    enum class Kind { special_01, special_02, solve, user_table };

    Kind kind = Kind::solve;
    std::shared_ptr<const IntersectionTable> table; // user_table only
    TableCache* cache = nullptr;                    // solve only; null means the global cache

    static Backend special_for(const SpinProfile& p)
    {
        switch (p.regime) {
        case Regime::unstable_01: return {Kind::special_01, nullptr, nullptr};
        case Regime::unstable_02: return {Kind::special_02, nullptr, nullptr};
        case Regime::general: break;
        }
        throw structural_error("special backend: " + profile_string(p) + " is in the general regime");
    }
    static Backend solve(TableCache* c = nullptr) { return {Kind::solve, nullptr, c}; }
    static Backend user(IntersectionTable t)
    {
        return {Kind::user_table, std::make_shared<const IntersectionTable>(std::move(t)), nullptr};
    }
};

inline std::string backend_name(Backend::Kind k)
{
    switch (k) {
    case Backend::Kind::special_01: return "special01";
    case Backend::Kind::special_02: return "special02";
    case Backend::Kind::solve: return "solve";
    case Backend::Kind::user_table: return "table";
    }
    return "?";
}

/// prefactor times the integrand supplied by the backend.
inline ExactScalar evaluate(const SpinProfile& p, const Backend& backend)
{
    const bool special = backend.kind == Backend::Kind::special_01 || backend.kind == Backend::Kind::special_02;
    const Regime wanted = backend.kind == Backend::Kind::special_01 ? Regime::unstable_01 : Regime::unstable_02;
    if (special) {
        if (p.regime != wanted) {
            throw structural_error(backend_name(backend.kind) + " backend does not accept " + profile_string(p));
        }
        return special_case_value(p);
    }
    if (p.regime != Regime::general) {
        throw structural_error(backend_name(backend.kind) + " backend needs the general regime, got " +
                               profile_string(p));
    }
    if (backend.kind == Backend::Kind::user_table) {
        if (!backend.table) {
            throw std::invalid_argument("table backend without a table");
        }
        return prefactor(p) * integrand_value(p, *backend.table);
    }
    TableCache& cache = backend.cache ? *backend.cache : TableCache::global();
    return prefactor(p) * integrand_value(p, *cache.get(table_key(p)));
}

/// Zero on an empty moduli space.
inline ExactScalar evaluate(long g, long r, const OrderedPartition& mu, const Backend& backend)
{
    auto v = validate(g, r, mu);
    const auto* p = std::get_if<SpinProfile>(&v);
    return p ? evaluate(*p, backend) : ExactScalar(0);
}

inline nlohmann::json to_json(const FitReport& rep)
{
    nlohmann::json samples = nlohmann::json::array();
    for (std::size_t i = 0; i < rep.samples.size(); ++i) {
        samples.push_back({{"mu", rep.samples[i].mu}, {"integrand", rep.values[i].str()}});
    }
    nlohmann::json held = nlohmann::json::array();
    for (const auto& h : rep.held_out) {
        held.push_back({{"mu", h.profile.mu},
                        {"predicted", h.predicted.str()},
                        {"actual", h.actual.str()},
                        {"agrees", h.agrees()}});
    }
    return {{"table", to_json(rep.table)}, {"samples", samples}, {"held_out", held}, {"held_out_ok", rep.held_out_ok()}};
}

} // namespace relsv
