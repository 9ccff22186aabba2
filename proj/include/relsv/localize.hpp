#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "relsv/combi.hpp"
#include "relsv/error.hpp"
#include "relsv/ratcore/graded.hpp"
#include "relsv/ratcore/laurent.hpp"
#include "relsv/ratcore/scalar.hpp"

namespace relsv {

namespace detail {

inline EquivariantScalar tpow(const ExactScalar& c, long e) { return EquivariantScalar::monomial(c, e); }

/// (t/r)^e
inline EquivariantScalar t_over_r(long r, long e) { return tpow(pow(ExactScalar(r), -e), e); }

/// k! t^k / mu^k, the Euler class of the weight-(1/mu) representation on
/// sections of O(k) over the cover component.
inline EquivariantScalar edge_euler(long k, long mu)
{
    return tpow(ExactScalar(factorial(static_cast<unsigned long>(k))) / pow(ExactScalar(mu), k), k);
}

/// mu (mu/r)^{floor} / floor!
inline ExactScalar part_weight(long mu, long r)
{
    const long f = floor_div(mu, r);
    return ExactScalar(mu) * pow(ExactScalar(mu, r), f) / ExactScalar(factorial(static_cast<unsigned long>(f)));
}

/// mu!/mu^{mu+1}
inline ExactScalar cover_weight(long mu)
{
    return ExactScalar(factorial(static_cast<unsigned long>(mu))) / pow(ExactScalar(mu), mu + 1);
}

inline int truncation_of(const SpinProfile& p)
{
    return p.regime == Regime::general ? static_cast<int>(p.dimension()) : 0;
}

} // namespace detail

/// Deliberate corruption used to check that verify_identity can fail.
enum class Mutation { none, base_exponent };

/// Euler class of the moving part of the base. For the general regime the
/// Hodge factor 1/c_{1/t}(-E) is kept as c_{1/t}(E), or written through the
/// dual bundle as 1/c_{1/t}(E^v) when dual_hodge is set.
inline GradedClass contrib_base(const SpinProfile& p, bool dual_hodge = false, Mutation mutation = Mutation::none)
{
    const int D = detail::truncation_of(p);
    const long shift = mutation == Mutation::base_exponent ? 1 : 0;
    switch (p.regime) {
    case Regime::unstable_01: {
        const long mu1 = p.mu[0];
        ExactScalar c = ExactScalar(factorial(static_cast<unsigned long>(mu1))) / pow(ExactScalar(mu1), mu1 - 1);
        return GradedClass(D, detail::tpow(c, mu1 - 1 + shift));
    }
    case Regime::unstable_02: {
        ExactScalar c = ExactScalar(1, p.r) * detail::cover_weight(p.mu[0]) * detail::cover_weight(p.mu[1]) *
                        ExactScalar(p.mu[0] + p.mu[1]);
        return GradedClass(D, detail::tpow(c, p.mu[0] + p.mu[1] + shift));
    }
    case Regime::general: break;
    }
    const EquivariantScalar s = EquivariantScalar::t_power(-1);
    GradedClass hodge_factor = dual_hodge ? inverse(chern_polynomial(Bundle::hodge_dual, +1, s, D))
                                          : inverse(chern_polynomial(Bundle::hodge, -1, s, D));
    GradedClass out = hodge_factor * detail::tpow(pow(ExactScalar(p.r), -p.l()), 1 - p.g + p.size() + shift);
    for (long i = 0; i < p.l(); ++i) {
        const long mu = p.mu[static_cast<std::size_t>(i)];
        GradedClass factor(D, EquivariantScalar(1L));
        factor -= GradedClass::symbol(D, ClassSymbol::psi(static_cast<int>(i + 1)), detail::tpow(ExactScalar(mu), -1));
        out *= factor * EquivariantScalar(detail::cover_weight(mu));
    }
    return out;
}

/// Exponent of t/r in the vertex contribution: m - g + 1 - l - sum floor + #div.
inline long vertex_exponent(const SpinProfile& p)
{
    return p.m - p.g + 1 - p.l() - floor_sum(p) + flag_divisible_count(p);
}

/// c_{r/t}(R rho_* L) (t/r)^{vertex_exponent} / (c_{1/t}(E) t^{g-1+l}).
inline GradedClass contrib_vertex(const SpinProfile& p)
{
    if (p.regime != Regime::general) {
        throw structural_error("contrib_vertex: profile " + profile_string(p) + " has no contracted vertex");
    }
    const int D = detail::truncation_of(p);
    const EquivariantScalar r_over_t = detail::tpow(ExactScalar(p.r), -1);
    GradedClass spin = inverse(chern_polynomial(Bundle::minus_r_rho_l, +1, r_over_t, D));
    GradedClass hodge = inverse(chern_polynomial(Bundle::hodge, +1, EquivariantScalar::t_power(-1), D));
    return spin * hodge * (detail::t_over_r(p.r, vertex_exponent(p)) * EquivariantScalar::t_power(-(p.g - 1 + p.l())));
}

/// Flag-node contributions, all flags together.
inline GradedClass contrib_flag(const SpinProfile& p)
{
    const int D = detail::truncation_of(p);
    switch (p.regime) {
    case Regime::unstable_01:
        throw structural_error("contrib_flag: a (0,1) fixed map has no flag node");
    case Regime::unstable_02:
        return GradedClass(D, p.mu[0] % p.r == 0 ? EquivariantScalar(ExactScalar(1, p.r)) : EquivariantScalar::t_power(-1));
    case Regime::general: break;
    }
    return GradedClass(D, EquivariantScalar::t_power(-p.l()) * detail::t_over_r(p.r, flag_divisible_count(p)));
}

/// Edge contribution of the i-th cover component (i counted from 1). For
/// (0,1) the line bundles are O(floor((mu_1-1)/r)) and O(mu_1-1).
inline GradedClass contrib_edge(const SpinProfile& p, long i)
{
    if (i < 1 || i > p.l()) {
        throw structural_error("contrib_edge: index " + std::to_string(i) + " out of range");
    }
    const int D = detail::truncation_of(p);
    const long mu = p.mu[static_cast<std::size_t>(i - 1)];
    if (p.regime == Regime::unstable_01) {
        const long top = mu - 1;
        return GradedClass(D, detail::edge_euler(floor_div(top, p.r), mu) * *detail::edge_euler(top, mu).inverse());
    }
    return GradedClass(D, detail::edge_euler(edge_root_degree(mu, p.r), mu) * *detail::edge_euler(mu, mu).inverse());
}

/// How the psi-denominator of the closed form is written.
enum class Presentation {
    equivariant, // 1/prod(1 - (mu_i/t) psi_i)
    rescaled,    // 1/prod(1 - (mu_i/r) psi_i)
};

/// Closed form of 1/e(N^vir).
inline GradedClass inverse_euler_closed(const SpinProfile& p, Presentation form = Presentation::equivariant)
{
    const int D = detail::truncation_of(p);
    ExactScalar weight(1);
    for (long x : p.mu) {
        weight *= detail::part_weight(x, p.r);
    }
    switch (p.regime) {
    case Regime::unstable_01:
        return GradedClass(D, detail::t_over_r(p.r, -p.m) *
                                  EquivariantScalar(ExactScalar(1, p.r) * weight / ExactScalar(p.mu[0] * p.mu[0])));
    case Regime::unstable_02:
        return GradedClass(D, detail::t_over_r(p.r, -p.m) * EquivariantScalar(weight / ExactScalar(p.mu[0] + p.mu[1])));
    case Regime::general: break;
    }
    // the tag already names -R rho_* L, so this is c_{r/t}(-R rho_* L)
    GradedClass out = chern_polynomial(Bundle::minus_r_rho_l, +1, detail::tpow(ExactScalar(p.r), -1), D);
    for (long i = 0; i < p.l(); ++i) {
        const long mu = p.mu[static_cast<std::size_t>(i)];
        const EquivariantScalar coeff = form == Presentation::equivariant ? detail::tpow(ExactScalar(mu), -1)
                                                                          : EquivariantScalar(ExactScalar(mu, p.r));
        GradedClass factor(D, EquivariantScalar(1L));
        factor -= GradedClass::symbol(D, ClassSymbol::psi(static_cast<int>(i + 1)), coeff);
        out *= inverse(factor);
    }
    const EquivariantScalar scalar = detail::tpow(pow(ExactScalar(p.r), p.l() + 2 * p.g - 2) * weight, 0) *
                                     detail::t_over_r(p.r, p.dimension() - p.m);
    return out * scalar;
}

/// psi_i -> (r/t) psi_i: turns the rescaled presentation into the equivariant one.
inline GradedClass rescale_psi(const GradedClass& x, long r)
{
    const int D = x.truncation();
    return substitute(x, [&](const ClassSymbol& s) -> std::optional<GradedClass> {
        if (s.kind != ClassSymbol::Kind::psi) {
            return std::nullopt;
        }
        return GradedClass::symbol(D, s, detail::tpow(ExactScalar(r), -1));
    });
}

/// Common value of (t-exponent + class degree) over all terms, if there is one.
inline std::optional<long> homogeneity_weight(const GradedClass& x)
{
    std::optional<long> w;
    for (const auto& [m, c] : x.terms()) {
        for (const auto& [e, v] : c.coefficients()) {
            const long here = e + degree(m);
            if (w && *w != here) {
                return std::nullopt;
            }
            w = here;
        }
    }
    return w;
}

struct ContributionReport {
    SpinProfile profile;
    GradedClass base;
    std::optional<GradedClass> vertex;
    std::optional<GradedClass> flag;
    std::vector<GradedClass> edges;
    GradedClass combined_from_lemmas;
    GradedClass closed_form;
    GradedClass difference; // combined - closed, after reduction
    bool identity_holds = false;
};

/// flag / (base * vertex * prod edge), all contributions present for the regime.
inline GradedClass combine_lemmas(const SpinProfile& p, Mutation mutation = Mutation::none)
{
    GradedClass denom = contrib_base(p, false, mutation);
    if (p.regime == Regime::general) {
        denom *= contrib_vertex(p);
    }
    for (long i = 1; i <= p.l(); ++i) {
        denom *= contrib_edge(p, i);
    }
    GradedClass out = inverse(denom);
    if (p.regime != Regime::unstable_01) {
        out *= contrib_flag(p);
    }
    return out;
}

inline ContributionReport verify_identity(const SpinProfile& p, Mutation mutation = Mutation::none)
{
    ContributionReport rep{p,
                           contrib_base(p, false, mutation),
                           std::nullopt,
                           std::nullopt,
                           {},
                           GradedClass(detail::truncation_of(p)),
                           GradedClass(detail::truncation_of(p)),
                           GradedClass(detail::truncation_of(p)),
                           false};
    if (p.regime == Regime::general) {
        rep.vertex = contrib_vertex(p);
    }
    if (p.regime != Regime::unstable_01) {
        rep.flag = contrib_flag(p);
    }
    for (long i = 1; i <= p.l(); ++i) {
        rep.edges.push_back(contrib_edge(p, i));
    }
    rep.combined_from_lemmas = mumford_reduce(combine_lemmas(p, mutation));
    rep.closed_form = mumford_reduce(inverse_euler_closed(p));
    rep.difference = rep.combined_from_lemmas - rep.closed_form;
    rep.identity_holds = rep.difference.is_zero();
    return rep;
}

/// m! t^m (1/e(N^vir)) / (mu_1...mu_l).
inline GradedClass hurwitz_class(const SpinProfile& p)
{
    const EquivariantScalar factor = detail::tpow(
        ExactScalar(factorial(static_cast<unsigned long>(p.m))) * pushforward_degree(p), p.m);
    return mumford_reduce(inverse_euler_closed(p)) * factor;
}

/// Same assembly, but from the product of lemma contributions.
inline GradedClass hurwitz_class_from_lemmas(const SpinProfile& p)
{
    const EquivariantScalar factor = detail::tpow(
        ExactScalar(factorial(static_cast<unsigned long>(p.m))) * pushforward_degree(p), p.m);
    return mumford_reduce(combine_lemmas(p)) * factor;
}

/// Scalar value of a class with no formal symbols; throws otherwise or if t survives.
inline ExactScalar scalar_value(const GradedClass& x)
{
    if (!x.is_scalar()) {
        throw structural_error("scalar_value: class has formal symbols: " + x.str());
    }
    const EquivariantScalar c = x.constant_term();
    if (c.is_zero()) {
        return ExactScalar(0);
    }
    if (!c.is_monomial() || c.coefficients().begin()->first != 0) {
        throw limit_error("scalar_value: coefficient " + c.str() + " is not constant in t");
    }
    return c.coefficient(0);
}

/// At r = 1 the root is omega itself and -R rho_* L = -E + O, so
/// c_k(-R rho_* L) is the degree-k part of 1/c(E). Returns x with that
/// substitution made and the Mumford normal form taken.
inline GradedClass rank_one_hodge_form(const GradedClass& x)
{
    const int D = x.truncation();
    const GradedClass inv = chern_polynomial(Bundle::hodge, -1, EquivariantScalar(1L), D);
    return mumford_reduce(substitute(x, [&](const ClassSymbol& s) -> std::optional<GradedClass> {
        if (s.kind != ClassSymbol::Kind::chern || s.bundle != Bundle::minus_r_rho_l) {
            return std::nullopt;
        }
        return inv.degree_part(s.index);
    }));
}

inline nlohmann::json to_json(const ContributionReport& rep)
{
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& e : rep.edges) {
        edges.push_back(to_json(e));
    }
    return {{"profile", to_json(rep.profile)},
            {"base", to_json(rep.base)},
            {"vertex", rep.vertex ? to_json(*rep.vertex) : nlohmann::json(nullptr)},
            {"flag", rep.flag ? to_json(*rep.flag) : nlohmann::json(nullptr)},
            {"edges", edges},
            {"combined_from_lemmas", to_json(rep.combined_from_lemmas)},
            {"closed_form", to_json(rep.closed_form)},
            {"difference", to_json(rep.difference)},
            {"identity_holds", rep.identity_holds}};
}

} // namespace relsv
