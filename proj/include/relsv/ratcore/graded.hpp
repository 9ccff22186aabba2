#pragma once

#include <algorithm>
#include <compare>
#include <functional>
#include <initializer_list>
#include <iterator>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "relsv/error.hpp"
#include "relsv/ratcore/laurent.hpp"
#include "relsv/ratcore/scalar.hpp"

namespace relsv {

/// K-theory classes whose Chern generators may appear.
enum class Bundle {
    minus_r_rho_l, // -R rho_* L
    hodge,         // rho_* omega
    hodge_dual,    // (rho_* omega)^v
};

inline std::string bundle_name(Bundle b)
{
    switch (b) {
    case Bundle::minus_r_rho_l: return "-RrhoL";
    case Bundle::hodge: return "rho*omega";
    case Bundle::hodge_dual: return "(rho*omega)^v";
    }
    return "?";
}

struct ClassSymbol {
    enum class Kind { psi, chern };

    Kind kind = Kind::psi;
    int index = 1; // marked point for psi, Chern degree for chern
    Bundle bundle = Bundle::minus_r_rho_l; // ignored for psi

    static ClassSymbol psi(int i) { return {Kind::psi, i, Bundle::minus_r_rho_l}; }
    static ClassSymbol chern(Bundle b, int k) { return {Kind::chern, k, b}; }

    int degree() const noexcept { return kind == Kind::psi ? 1 : index; }

    std::string name() const
    {
        if (kind == Kind::psi) {
            return "psi" + std::to_string(index);
        }
        return "c" + std::to_string(index) + "(" + bundle_name(bundle) + ")";
    }

    friend auto operator<=>(const ClassSymbol&, const ClassSymbol&) = default;
};

/// Commutative monomial: sorted symbols, repeated for powers. Empty is 1.
/// Each symbol is packed into one byte so short monomials need no heap.
class Monomial {
public:
    class const_iterator {
    public:
        using value_type = ClassSymbol;
        using difference_type = std::ptrdiff_t;
        using iterator_category = std::forward_iterator_tag;
        using reference = ClassSymbol;
        using pointer = void;

        const_iterator() = default;
        explicit const_iterator(std::string::const_iterator it) : it_(it) {}
        ClassSymbol operator*() const { return decode(*it_); }
        const_iterator& operator++()
        {
            ++it_;
            return *this;
        }
        const_iterator operator++(int)
        {
            auto old = *this;
            ++it_;
            return old;
        }
        friend bool operator==(const const_iterator&, const const_iterator&) = default;

    private:
        std::string::const_iterator it_;
    };

    Monomial() = default;
    Monomial(std::initializer_list<ClassSymbol> symbols)
    {
        for (const auto& s : symbols) {
            push_back(s);
        }
        sort();
    }

    /// Appends without re-sorting; GradedClass::add_term sorts.
    void push_back(const ClassSymbol& s) { code_.push_back(encode(s)); }
    void sort() { std::sort(code_.begin(), code_.end()); }

    bool empty() const noexcept { return code_.empty(); }
    std::size_t size() const noexcept { return code_.size(); }
    ClassSymbol front() const { return decode(code_.front()); }
    const_iterator begin() const { return const_iterator(code_.begin()); }
    const_iterator end() const { return const_iterator(code_.end()); }

    int degree() const noexcept
    {
        int d = 0;
        for (char c : code_) {
            const auto u = static_cast<unsigned char>(c);
            d += (u >> 5) == 0 ? 1 : static_cast<int>(u & 31U);
        }
        return d;
    }

    friend Monomial monomial_product(const Monomial& a, const Monomial& b)
    {
        Monomial out;
        out.code_.resize(a.code_.size() + b.code_.size());
        std::merge(a.code_.begin(), a.code_.end(), b.code_.begin(), b.code_.end(), out.code_.begin());
        return out;
    }

    friend bool operator==(const Monomial&, const Monomial&) = default;
    friend auto operator<=>(const Monomial& a, const Monomial& b) { return a.code_ <=> b.code_; }

private:
    static char encode(const ClassSymbol& s)
    {
        if (s.index < 1 || s.index > 31) {
            throw structural_error("Monomial: symbol index " + std::to_string(s.index) + " outside 1..31");
        }
        const unsigned kind = s.kind == ClassSymbol::Kind::psi ? 0U : 1U + static_cast<unsigned>(s.bundle);
        return static_cast<char>((kind << 5) | static_cast<unsigned>(s.index));
    }

    static ClassSymbol decode(char c)
    {
        const auto u = static_cast<unsigned char>(c);
        const int index = static_cast<int>(u & 31U);
        const unsigned kind = u >> 5;
        if (kind == 0) {
            return ClassSymbol::psi(index);
        }
        return ClassSymbol::chern(static_cast<Bundle>(kind - 1), index);
    }

    std::string code_;
};

inline int degree(const Monomial& m) { return m.degree(); }

/// Element of the graded ring Q[t, 1/t][psi_i, c_k(...)] truncated above
/// total class degree D.
class GradedClass {
public:
    using term_map = std::map<Monomial, EquivariantScalar>;

    explicit GradedClass(int truncation = 0) : D_(truncation)
    {
        if (truncation < 0) {
            throw structural_error("GradedClass: negative truncation");
        }
    }

    GradedClass(int truncation, const EquivariantScalar& c) : GradedClass(truncation) { add_term({}, c); }

    static GradedClass symbol(int truncation, const ClassSymbol& s, const EquivariantScalar& c = EquivariantScalar(1L))
    {
        GradedClass x(truncation);
        x.add_term({s}, c);
        return x;
    }

    int truncation() const noexcept { return D_; }
    const term_map& terms() const noexcept { return terms_; }
    bool is_zero() const noexcept { return terms_.empty(); }

    EquivariantScalar coefficient(const Monomial& m) const
    {
        auto it = terms_.find(m);
        return it == terms_.end() ? EquivariantScalar() : it->second;
    }

    /// Coefficient of 1.
    EquivariantScalar constant_term() const { return coefficient({}); }

    /// True when no formal class occurs.
    bool is_scalar() const { return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.empty()); }

    /// Adds c*m, dropping it when deg m > D. m need not be sorted.
    void add_term(Monomial m, const EquivariantScalar& c)
    {
        if (c.is_zero() || degree(m) > D_) {
            return;
        }
        m.sort();
        auto [it, inserted] = terms_.try_emplace(std::move(m), c);
        if (!inserted) {
            it->second += c;
            if (it->second.is_zero()) {
                terms_.erase(it);
            }
        }
    }

    /// Part of class degree exactly k.
    GradedClass degree_part(int k) const
    {
        GradedClass out(D_);
        for (const auto& [m, c] : terms_) {
            if (degree(m) == k) {
                out.terms_.emplace(m, c);
            }
        }
        return out;
    }

    /// Same terms, new cutoff (terms above it dropped).
    GradedClass retruncate(int truncation) const
    {
        GradedClass out(truncation);
        for (const auto& [m, c] : terms_) {
            out.add_term(m, c);
        }
        return out;
    }

    GradedClass& operator+=(const GradedClass& o)
    {
        check_compatible(o);
        for (const auto& [m, c] : o.terms_) {
            add_term(m, c);
        }
        return *this;
    }

    GradedClass& operator-=(const GradedClass& o)
    {
        check_compatible(o);
        for (const auto& [m, c] : o.terms_) {
            add_term(m, -c);
        }
        return *this;
    }

    GradedClass& operator*=(const EquivariantScalar& s)
    {
        if (s.is_zero()) {
            terms_.clear();
            return *this;
        }
        term_map next;
        for (auto& [m, c] : terms_) {
            auto v = c * s;
            if (!v.is_zero()) {
                next.emplace(m, std::move(v));
            }
        }
        terms_ = std::move(next);
        return *this;
    }

    friend GradedClass operator*(const GradedClass& a, const GradedClass& b)
    {
        a.check_compatible(b);
        GradedClass out(a.D_);
        for (const auto& [ma, ca] : a.terms_) {
            const int da = degree(ma);
            for (const auto& [mb, cb] : b.terms_) {
                if (da + degree(mb) > a.D_) {
                    continue;
                }
                out.add_term(monomial_product(ma, mb), ca * cb);
            }
        }
        return out;
    }

    GradedClass& operator*=(const GradedClass& o) { return *this = *this * o; }

    friend GradedClass operator+(GradedClass a, const GradedClass& b) { return a += b; }
    friend GradedClass operator-(GradedClass a, const GradedClass& b) { return a -= b; }
    friend GradedClass operator-(GradedClass a) { return a *= EquivariantScalar(-1L); }
    friend GradedClass operator*(GradedClass a, const EquivariantScalar& s) { return a *= s; }
    friend GradedClass operator*(const EquivariantScalar& s, GradedClass a) { return a *= s; }

    friend bool operator==(const GradedClass&, const GradedClass&) = default;

    std::string str() const
    {
        if (terms_.empty()) {
            return "0";
        }
        std::string out;
        for (const auto& [m, c] : terms_) {
            if (!out.empty()) {
                out += " + ";
            }
            out += "(" + c.str() + ")";
            for (const auto& s : m) {
                out += "*" + s.name();
            }
        }
        return out;
    }

private:
    void check_compatible(const GradedClass& o) const
    {
        if (D_ != o.D_) {
            throw structural_error("GradedClass: truncation mismatch (" + std::to_string(D_) + " vs " +
                                   std::to_string(o.D_) + ")");
        }
    }

    int D_;
    term_map terms_;
};

inline GradedClass add(const GradedClass& a, const GradedClass& b) { return a + b; }
inline GradedClass mul(const GradedClass& a, const GradedClass& b) { return a * b; }

/// Multiplicative inverse. The degree-0 part must be a unit c*t^e.
inline GradedClass inverse(const GradedClass& x)
{
    const int D = x.truncation();
    auto u_inv = x.constant_term().inverse();
    if (!u_inv) {
        throw unsupported_parameter("inverse: constant term " + x.constant_term().str() + " is not a unit");
    }
    // degree by degree: y_0 = 1/u, y_k = -(1/u) sum_{j=1..k} x_j y_{k-j}
    std::vector<GradedClass> xs, ys;
    for (int k = 0; k <= D; ++k) {
        xs.push_back(x.degree_part(k));
    }
    ys.emplace_back(D, *u_inv);
    const EquivariantScalar minus_u_inv = -*u_inv;
    GradedClass out = ys.front();
    for (int k = 1; k <= D; ++k) {
        GradedClass acc(D);
        for (int j = 1; j <= k; ++j) {
            if (!xs[static_cast<std::size_t>(j)].is_zero() && !ys[static_cast<std::size_t>(k - j)].is_zero()) {
                acc += xs[static_cast<std::size_t>(j)] * ys[static_cast<std::size_t>(k - j)];
            }
        }
        acc *= minus_u_inv;
        out += acc;
        ys.push_back(std::move(acc));
    }
    return out;
}

/// c_s(+-E) = sum_k c_k(E) s^k, or its inverse for sign -1.
inline GradedClass chern_polynomial(Bundle tag, int sign, const EquivariantScalar& parameter, int D)
{
    if (!parameter.is_monomial()) {
        throw unsupported_parameter("chern_polynomial: parameter " + parameter.str() + " is not a monomial in t");
    }
    GradedClass c(D, EquivariantScalar(1L));
    EquivariantScalar s_k(1L);
    for (int k = 1; k <= D; ++k) {
        s_k *= parameter;
        c.add_term({ClassSymbol::chern(tag, k)}, s_k);
    }
    return sign >= 0 ? c : inverse(c);
}

/// Ring map determined by its values on symbols. Symbols for which the
/// callback returns nullopt are kept.
inline GradedClass substitute(const GradedClass& x,
                              const std::function<std::optional<GradedClass>(const ClassSymbol&)>& image)
{
    const int D = x.truncation();
    std::map<ClassSymbol, GradedClass> memo;
    auto image_of = [&](const ClassSymbol& s) -> const GradedClass& {
        auto it = memo.find(s);
        if (it == memo.end()) {
            auto v = image(s);
            it = memo.emplace(s, v ? v->retruncate(D) : GradedClass::symbol(D, s)).first;
        }
        return it->second;
    };
    GradedClass out(D);
    for (const auto& [m, c] : x.terms()) {
        GradedClass term(D, c);
        for (const auto& s : m) {
            term *= image_of(s);
            if (term.is_zero()) {
                break;
            }
        }
        out += term;
    }
    return out;
}

/// Normal form modulo c(E) c(E^v) = 1 for E = rho_* omega: dual classes
/// become (-1)^k c_k(E), and each even c_{2n}(E) is rewritten through
/// c_{2n} = -1/2 sum_{i=1}^{2n-1} (-1)^i c_i c_{2n-i} until only odd Hodge
/// classes remain.
inline GradedClass mumford_reduce(const GradedClass& x)
{
    const int D = x.truncation();
    std::map<int, GradedClass> even; // c_{2n}(E) in normal form
    std::function<GradedClass(int)> hodge = [&](int k) -> GradedClass {
        if (k % 2 == 1) {
            return GradedClass::symbol(D, ClassSymbol::chern(Bundle::hodge, k));
        }
        auto it = even.find(k);
        if (it != even.end()) {
            return it->second;
        }
        GradedClass sum(D);
        for (int i = 1; i < k; ++i) {
            GradedClass prod = hodge(i) * hodge(k - i);
            sum += (i % 2 == 0) ? prod : -prod;
        }
        sum *= EquivariantScalar(ExactScalar(-1, 2));
        return even.emplace(k, sum).first->second;
    };
    return substitute(x, [&](const ClassSymbol& s) -> std::optional<GradedClass> {
        if (s.kind != ClassSymbol::Kind::chern || s.bundle == Bundle::minus_r_rho_l) {
            return std::nullopt;
        }
        if (s.bundle == Bundle::hodge) {
            if (s.index % 2 == 1) {
                return std::nullopt;
            }
            return hodge(s.index);
        }
        GradedClass h = hodge(s.index);
        return (s.index % 2 == 0) ? h : -h;
    });
}

/// The t^0 layer. Throws limit_error if any negative power of t occurs.
inline GradedClass nonequivariant_limit(const GradedClass& x)
{
    GradedClass out(x.truncation());
    for (const auto& [m, c] : x.terms()) {
        auto lo = c.min_exponent();
        if (lo && *lo < 0) {
            std::string where = m.empty() ? std::string("1") : m.front().name();
            throw limit_error("nonequivariant_limit: t^" + std::to_string(*lo) + " in coefficient of " + where);
        }
        out.add_term(m, EquivariantScalar(c.coefficient(0)));
    }
    return out;
}

/// One entry per (monomial, t-exponent).
inline nlohmann::json to_json(const GradedClass& x)
{
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& [m, c] : x.terms()) {
        nlohmann::json names = nlohmann::json::array();
        for (const auto& s : m) {
            names.push_back(s.name());
        }
        for (auto it = c.coefficients().rbegin(); it != c.coefficients().rend(); ++it) {
            terms.push_back({{"monomial", names}, {"coeff", {{"t_exp", it->first}, {"value", it->second.str()}}}});
        }
    }
    return {{"truncation", x.truncation()}, {"terms", terms}};
}

} // namespace relsv
