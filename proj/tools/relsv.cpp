// relsv: command-line front end for the r-spin Hurwitz engine.
//
// Exit codes: 0 success, 1 verification or mathematical failure, 2 usage error.

#include <algorithm>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "relsv/combi.hpp"
#include "relsv/detail/parallel.hpp"
#include "relsv/elsv.hpp"
#include "relsv/hurwitz.hpp"
#include "relsv/localize.hpp"

using namespace relsv;
using nlohmann::json;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_failure = 1;
constexpr int exit_usage = 2;

enum class Format { json, csv, text };

struct Globals {
    std::string format = "json";
    unsigned workers = 1;
    int bound = default_character_bound;
    std::string cache_dir;

    Format fmt() const
    {
        if (format == "csv") {
            return Format::csv;
        }
        return format == "text" ? Format::text : Format::json;
    }
};

struct ProfileArgs {
    long g = 0;
    long r = 1;
    std::vector<long> mu;
};

void add_profile_options(CLI::App* cmd, ProfileArgs& a)
{
    cmd->add_option("--g", a.g, "genus")->required();
    cmd->add_option("--r", a.r, "root order r")->required();
    cmd->add_option("--mu", a.mu, "ordered partition, comma separated")->required()->delimiter(',');
}

std::string join(const std::vector<long>& v, const char* sep)
{
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        s += (i ? sep : "") + std::to_string(v[i]);
    }
    return s;
}

TableCache& cache_for(const Globals& gl)
{
    if (gl.cache_dir.empty()) {
        return TableCache::global();
    }
    static TableCache cache{std::filesystem::path(gl.cache_dir)};
    return cache;
}

/// "special", "solve" or "table:<path>"; special is resolved per profile.
struct BackendChoice {
    std::string spec = "auto";

    Backend resolve(const SpinProfile& p, const Globals& gl) const
    {
        if (spec == "auto") {
            return p.regime == Regime::general ? Backend::solve(&cache_for(gl)) : Backend::special_for(p);
        }
        if (spec == "special") {
            return Backend::special_for(p);
        }
        if (spec == "solve") {
            return Backend::solve(&cache_for(gl));
        }
        if (spec.rfind("table:", 0) == 0) {
            return Backend::user(load_table(spec.substr(6)));
        }
        throw std::invalid_argument("unknown backend '" + spec + "' (special, solve, table:<path>)");
    }
};

std::shared_ptr<const IntersectionTable> table_for(const SpinProfile& p, const Backend& b)
{
    if (b.kind == Backend::Kind::user_table) {
        if (b.table->key != table_key(p)) {
            throw structural_error("table " + key_string(b.table->key) + " does not match " + profile_string(p));
        }
        return b.table;
    }
    if (b.kind == Backend::Kind::solve) {
        return b.cache->get(table_key(p));
    }
    throw structural_error("a special-case backend has no intersection table");
}

// ---------------------------------------------------------------- check

int cmd_check(const ProfileArgs& a)
{
    auto v = validate(a.g, a.r, a.mu);
    json out;
    if (const auto* p = std::get_if<SpinProfile>(&v)) {
        out = to_json(*p);
        out["valid"] = true;
        out["dimension"] = p->dimension();
    } else {
        out = to_json(std::get<EmptySpace>(v));
    }
    std::cout << out.dump(2) << "\n";
    return exit_ok;
}

// ---------------------------------------------------------------- verify

struct GridArgs {
    long max_g = 2;
    long max_l = 3;
    long max_r = 4;
    long min_r = 1;
    long max_part = 8;
    bool inject_mutation = false;
};

struct VerifyRow {
    SpinProfile p;
    bool identity = false;
    bool homogeneous = false;
    bool limit = false;
    bool degree = false;
    std::string note;

    bool pass() const { return identity && homogeneous && limit && degree; }
};

VerifyRow verify_profile(const SpinProfile& p, Mutation mutation)
{
    VerifyRow row;
    row.p = p;
    try {
        row.identity = verify_identity(p, mutation).identity_holds;
        const auto h = hurwitz_class(p);
        const long expected = p.regime == Regime::general ? p.dimension() : 0;
        const auto w = homogeneity_weight(h);
        row.homogeneous = h.is_zero() || (w && *w == expected);
        try {
            nonequivariant_limit(h);
            row.limit = true;
        } catch (const limit_error& e) {
            row.note = e.what();
        }
        long asum = 0;
        for (long x : p.a) {
            asum += x;
        }
        row.degree = p.r * (p.m - p.l() - floor_sum(p)) == 2 * p.g - 2 - asum;
    } catch (const error& e) {
        row.note = e.what();
    }
    return row;
}

json row_json(const VerifyRow& r)
{
    json j = to_json(r.p);
    j["identity"] = r.identity;
    j["homogeneous"] = r.homogeneous;
    j["limit"] = r.limit;
    j["degree_identity"] = r.degree;
    j["pass"] = r.pass();
    if (!r.note.empty()) {
        j["note"] = r.note;
    }
    return j;
}

int cmd_verify(const GridArgs& a, const Globals& gl)
{
    if (a.max_g < 0 || a.max_l < 1 || a.max_r < 1 || a.min_r < 1) {
        throw std::invalid_argument("grid bounds must be positive (max-g may be 0)");
    }
    const auto grid = profile_grid(a.max_g, a.max_l, a.max_r, a.max_part, a.min_r);
    const Mutation mutation = a.inject_mutation ? Mutation::base_exponent : Mutation::none;
    const auto rows = detail::parallel_map(grid.size(), gl.workers, [&](std::size_t i) {
        return verify_profile(grid[i], mutation);
    });

    std::optional<std::size_t> minimal;
    std::size_t failures = 0;
    auto size_key = [&](std::size_t i) {
        const auto& p = rows[i].p;
        return std::make_tuple(p.size(), p.g, p.l(), p.r, p.mu);
    };
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!rows[i].pass()) {
            ++failures;
            if (!minimal || size_key(i) < size_key(*minimal)) {
                minimal = i;
            }
        }
    }

    switch (gl.fmt()) {
    case Format::json: {
        json out;
        out["rows"] = json::array();
        for (const auto& r : rows) {
            out["rows"].push_back(row_json(r));
        }
        out["profiles"] = rows.size();
        out["failures"] = failures;
        out["minimal_failure"] = minimal ? row_json(rows[*minimal]) : json(nullptr);
        std::cout << out.dump(2) << "\n";
        break;
    }
    case Format::csv:
        std::cout << "g,r,l,mu,regime,identity,homogeneous,limit,degree_identity,pass\n";
        for (const auto& r : rows) {
            std::cout << r.p.g << ',' << r.p.r << ',' << r.p.l() << ',' << join(r.p.mu, " ") << ','
                      << regime_name(r.p.regime) << ',' << r.identity << ',' << r.homogeneous << ',' << r.limit << ','
                      << r.degree << ',' << r.pass() << '\n';
        }
        break;
    case Format::text:
        for (const auto& r : rows) {
            std::cout << (r.pass() ? "ok   " : "FAIL ") << profile_string(r.p) << (r.identity ? "" : " identity")
                      << (r.homogeneous ? "" : " homogeneity") << (r.limit ? "" : " limit")
                      << (r.degree ? "" : " degree") << "\n";
        }
        std::cout << rows.size() << " profiles, " << failures << " failures\n";
        break;
    }
    if (minimal) {
        std::cerr << "minimal failing profile: " << profile_string(rows[*minimal].p) << "\n";
        return exit_failure;
    }
    return exit_ok;
}

// ---------------------------------------------------------------- hurwitz

struct HurwitzArgs {
    ProfileArgs profile;
    std::string methods = "oracle";
    BackendChoice backend;
    std::string anchors = "02";
    bool disconnected = false;
};

std::vector<std::string> parse_methods(const std::string& s)
{
    static const std::vector<std::string> known{"oracle", "elsv", "localize", "lemmas", "bruteforce"};
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item == "all") {
            for (const char* m : {"oracle", "elsv", "localize"}) {
                if (std::find(out.begin(), out.end(), m) == out.end()) {
                    out.emplace_back(m);
                }
            }
            continue;
        }
        if (std::find(known.begin(), known.end(), item) == known.end()) {
            throw std::invalid_argument("unknown method '" + item + "'");
        }
        if (std::find(out.begin(), out.end(), item) == out.end()) {
            out.push_back(item);
        }
    }
    if (out.empty()) {
        throw std::invalid_argument("no method given");
    }
    return out;
}

ExactScalar hurwitz_by(const std::string& method, const SpinProfile& p, const HurwitzArgs& a, const Globals& gl)
{
    if (method == "oracle") {
        const auto& cal = calibration_for(p.r, parse_anchor_set(a.anchors));
        return evaluate(HurwitzQuery{p.g, p.r, p.mu, !a.disconnected}, cal, gl.bound);
    }
    if (method == "bruteforce") {
        if (p.r != 1) {
            throw unsupported_parameter("bruteforce counts r = 1 covers only");
        }
        return brute_force_r1(p.mu, p.m, gl.workers);
    }
    if (method == "elsv") {
        return evaluate(p, a.backend.resolve(p, gl));
    }
    const bool lemmas = method == "lemmas";
    const auto cls = lemmas ? hurwitz_class_from_lemmas(p) : hurwitz_class(p);
    if (p.regime != Regime::general) {
        return scalar_value(cls);
    }
    return integrate(nonequivariant_limit(cls), *table_for(p, a.backend.resolve(p, gl)));
}

int cmd_hurwitz(const HurwitzArgs& a, const Globals& gl)
{
    const auto methods = parse_methods(a.methods);
    parse_anchor_set(a.anchors);
    auto v = validate(a.profile.g, a.profile.r, a.profile.mu);
    const auto* p = std::get_if<SpinProfile>(&v);
    std::vector<ExactScalar> values;
    for (const auto& m : methods) {
        values.push_back(p ? hurwitz_by(m, *p, a, gl) : ExactScalar(0));
    }
    const bool agree = std::all_of(values.begin(), values.end(), [&](const auto& x) { return x == values[0]; });

    switch (gl.fmt()) {
    case Format::json: {
        json out;
        out["profile"] = p ? to_json(*p) : to_json(std::get<EmptySpace>(v));
        out["valid"] = p != nullptr;
        out["values"] = json::object();
        for (std::size_t i = 0; i < methods.size(); ++i) {
            out["values"][methods[i]] = values[i].str();
        }
        out["agree"] = agree;
        std::cout << out.dump(2) << "\n";
        break;
    }
    case Format::csv:
        std::cout << "method,value\n";
        for (std::size_t i = 0; i < methods.size(); ++i) {
            std::cout << methods[i] << ',' << values[i].str() << '\n';
        }
        break;
    case Format::text:
        for (std::size_t i = 0; i < methods.size(); ++i) {
            std::cout << methods[i] << ' ' << values[i].str() << '\n';
        }
        std::cout << (agree ? "agree" : "DISAGREE") << '\n';
        break;
    }
    return agree ? exit_ok : exit_failure;
}

// ---------------------------------------------------------------- fit

struct FitArgs {
    long g = 0;
    long l = 1;
    long r = 1;
    std::vector<long> residues;
    std::size_t max_samples = 64;
    std::size_t held_out = 3;
    std::string out;
};

std::string index_name(const TableIndex& i)
{
    std::string s;
    for (std::size_t j = 0; j < i.first.size(); ++j) {
        for (long e = 0; e < i.first[j]; ++e) {
            s += (s.empty() ? "" : " ") + ClassSymbol::psi(static_cast<int>(j + 1)).name();
        }
    }
    if (i.second > 0) {
        s += (s.empty() ? "" : " ") + ClassSymbol::chern(Bundle::minus_r_rho_l, static_cast<int>(i.second)).name();
    }
    return s.empty() ? "1" : s;
}

int cmd_fit(const FitArgs& a, const Globals& gl)
{
    TableKey key{a.g, a.r, a.residues.empty() ? std::vector<long>(static_cast<std::size_t>(std::max(a.l, 0L)), 0)
                                              : a.residues};
    if (key.l() != a.l) {
        throw std::invalid_argument("--residues needs " + std::to_string(a.l) + " entries");
    }
    FitOptions opt;
    opt.max_samples = a.max_samples;
    opt.held_out = a.held_out;
    opt.bound = gl.bound;
    opt.workers = gl.workers;
    const auto rep = fit_table(key, opt);

    if (rep.held_out_ok()) {
        cache_for(gl).put(rep.table);
        if (!a.out.empty()) {
            save_table(rep.table, a.out);
        }
    }
    switch (gl.fmt()) {
    case Format::json: std::cout << to_json(rep).dump(2) << "\n"; break;
    case Format::csv:
        std::cout << "b,k,value\n";
        for (const auto& [i, v] : rep.table.entries) {
            std::cout << join(i.first, " ") << ',' << i.second << ',' << v.str() << '\n';
        }
        break;
    case Format::text:
        std::cout << key_string(key) << ", " << rep.samples.size() << " samples\n";
        for (const auto& [i, v] : rep.table.entries) {
            std::cout << "  " << index_name(i) << ": " << v.str() << '\n';
        }
        for (const auto& h : rep.held_out) {
            std::cout << "  held out " << mu_string(h.profile.mu) << ": " << (h.agrees() ? "ok" : "MISS") << '\n';
        }
        break;
    }
    if (!rep.held_out_ok()) {
        std::cerr << "held-out prediction failed\n";
        return exit_failure;
    }
    return exit_ok;
}

// ---------------------------------------------------------------- localize / elsv

int cmd_localize(const ProfileArgs& a, bool mutate, const Globals& gl)
{
    const auto p = make_profile(a.g, a.r, a.mu);
    const auto rep = verify_identity(p, mutate ? Mutation::base_exponent : Mutation::none);
    if (gl.fmt() == Format::text) {
        std::cout << "profile   " << profile_string(p) << "\n";
        std::cout << "base      " << rep.base.str() << "\n";
        std::cout << "vertex    " << (rep.vertex ? rep.vertex->str() : "-") << "\n";
        std::cout << "flag      " << (rep.flag ? rep.flag->str() : "-") << "\n";
        for (std::size_t i = 0; i < rep.edges.size(); ++i) {
            std::cout << "edge " << i + 1 << "    " << rep.edges[i].str() << "\n";
        }
        std::cout << "lemmas    " << rep.combined_from_lemmas.str() << "\n";
        std::cout << "closed    " << rep.closed_form.str() << "\n";
        std::cout << "identity  " << (rep.identity_holds ? "holds" : "FAILS") << "\n";
    } else {
        std::cout << to_json(rep).dump(2) << "\n";
    }
    return rep.identity_holds ? exit_ok : exit_failure;
}

int cmd_elsv(const ProfileArgs& a, const BackendChoice& backend, const Globals& gl)
{
    auto v = validate(a.g, a.r, a.mu);
    json out;
    if (const auto* p = std::get_if<SpinProfile>(&v)) {
        const auto b = backend.resolve(*p, gl);
        const auto pre = prefactor(*p);
        const auto value = evaluate(*p, b);
        out = {{"profile", to_json(*p)},
               {"backend", backend_name(b.kind)},
               {"prefactor", pre.str()},
               {"integrand", (value / pre).str()},
               {"value", value.str()}};
    } else {
        out = {{"profile", to_json(std::get<EmptySpace>(v))}, {"value", ExactScalar(0).str()}};
    }
    if (gl.fmt() == Format::text) {
        std::cout << out["value"].get<std::string>() << "\n";
    } else {
        std::cout << out.dump(2) << "\n";
    }
    return exit_ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Exact r-spin Hurwitz numbers: localization identities, character oracle, intersection tables"};
    app.set_config("--config", "", "key = value file replacing flags; [section] per subcommand");
    app.require_subcommand(1);
    app.fallthrough();

    Globals gl;
    app.add_option("--format", gl.format, "json, csv or text")->check(CLI::IsMember({"json", "csv", "text"}));
    app.add_option("--workers", gl.workers, "worker threads for grid commands")->check(CLI::PositiveNumber);
    app.add_option("--bound", gl.bound, "largest symmetric group degree for the character oracle")
        ->check(CLI::PositiveNumber);
    app.add_option("--cache-dir", gl.cache_dir, "directory for fitted tables (default $RELSV_CACHE_DIR)");

    ProfileArgs check_args;
    auto* check = app.add_subcommand("check", "validate a profile");
    add_profile_options(check, check_args);

    GridArgs grid;
    auto* verify = app.add_subcommand("verify", "localization identity sweep over a grid");
    verify->add_option("--max-g", grid.max_g);
    verify->add_option("--max-l", grid.max_l);
    verify->add_option("--max-r", grid.max_r);
    verify->add_option("--min-r", grid.min_r);
    verify->add_option("--max-part", grid.max_part);
    verify->add_flag("--inject-mutation", grid.inject_mutation, "perturb one exponent (checker self-test)");

    HurwitzArgs hz;
    auto* hurwitz = app.add_subcommand("hurwitz", "H^r by one or more methods");
    add_profile_options(hurwitz, hz.profile);
    hurwitz->add_option("--method", hz.methods, "oracle,elsv,localize,lemmas,bruteforce or all");
    hurwitz->add_option("--backend", hz.backend.spec, "special, solve or table:<path>");
    hurwitz->add_option("--anchors", hz.anchors, "oracle calibration anchors: 02, 01 or all");
    hurwitz->add_flag("--disconnected", hz.disconnected, "disconnected covers (oracle only)");

    FitArgs fa;
    auto* fit = app.add_subcommand("fit", "fit an intersection table from oracle values");
    fit->add_option("--g", fa.g)->required();
    fit->add_option("--l", fa.l)->required();
    fit->add_option("--r", fa.r)->required();
    fit->add_option("--residues", fa.residues, "twist vector a (default all zero)")->delimiter(',');
    fit->add_option("--max-samples", fa.max_samples)->check(CLI::PositiveNumber);
    fit->add_option("--held-out", fa.held_out);
    fit->add_option("--out", fa.out, "also write the table to this file");

    ProfileArgs loc_args;
    bool loc_mutate = false;
    auto* localize = app.add_subcommand("localize", "contribution report for one profile");
    add_profile_options(localize, loc_args);
    localize->add_flag("--inject-mutation", loc_mutate);

    ProfileArgs elsv_args;
    BackendChoice elsv_backend;
    auto* elsv = app.add_subcommand("elsv", "prefactor times integrand");
    add_profile_options(elsv, elsv_args);
    elsv->add_option("--backend", elsv_backend.spec, "special, solve or table:<path>");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_usage;
    }

    try {
        if (*check) {
            return cmd_check(check_args);
        }
        if (*verify) {
            return cmd_verify(grid, gl);
        }
        if (*hurwitz) {
            return cmd_hurwitz(hz, gl);
        }
        if (*fit) {
            return cmd_fit(fa, gl);
        }
        if (*localize) {
            return cmd_localize(loc_args, loc_mutate, gl);
        }
        if (*elsv) {
            return cmd_elsv(elsv_args, elsv_backend, gl);
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const structural_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const unsupported_parameter& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const resource_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << "\n";
        return exit_failure;
    }
    return exit_usage;
}
