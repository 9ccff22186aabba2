#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include <gtest/gtest.h>

#include "json.hpp"

namespace {

struct Run {
    int code = -1;
    std::string out;
};

Run run(const std::string& args, const std::string& env = "")
{
    const char* bin = std::getenv("RELSV_BIN");
    if (!bin) {
        ADD_FAILURE() << "RELSV_BIN is not set";
        return {};
    }
    const std::string cmd = env + " " + bin + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    Run r;
    char buf[4096];
    std::size_t n = 0;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) {
        r.out.append(buf, n);
    }
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

nlohmann::json run_json(const std::string& args, int expected_code = 0, const std::string& env = "")
{
    const auto r = run(args, env);
    EXPECT_EQ(r.code, expected_code) << args << "\n" << r.out;
    try {
        return nlohmann::json::parse(r.out);
    } catch (const std::exception& e) {
        ADD_FAILURE() << args << ": " << e.what() << "\n" << r.out;
        return {};
    }
}

class TempDir {
public:
    TempDir()
        : path_(std::filesystem::temp_directory_path() /
                ("relsv_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter_++)))
    {
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    const std::filesystem::path& path() const { return path_; }
    std::string env() const { return "RELSV_CACHE_DIR=" + path_.string(); }

private:
    static inline int counter_ = 0;
    std::filesystem::path path_;
};

} // namespace

TEST(CliCheck, Examples)
{
    auto j = run_json("check --g 0 --r 2 --mu 3");
    EXPECT_EQ(j["m"], 1);
    EXPECT_EQ(j["a"], nlohmann::json::array({0}));
    EXPECT_EQ(j["valid"], true);
    auto e = run_json("check --g 0 --r 2 --mu 2");
    EXPECT_EQ(e["valid"], false);
    EXPECT_EQ(run("check --g 0 --r 0 --mu 3").code, 2);
    EXPECT_EQ(run("check --g 0 --r 2 --mu x").code, 2);
    EXPECT_EQ(run("check --g 0 --r 2").code, 2);
    EXPECT_EQ(run("").code, 2);
}

TEST(CliVerify, EmptyGrid)
{
    auto j = run_json("verify --max-part 0");
    EXPECT_EQ(j["profiles"], 0);
    EXPECT_TRUE(j["rows"].empty());
    EXPECT_TRUE(j["minimal_failure"].is_null());
}

TEST(CliVerify, PassingGridAndMutation)
{
    auto j = run_json("verify --max-g 1 --max-l 2 --max-r 1 --max-part 4");
    EXPECT_EQ(j["failures"], 0);
    EXPECT_GT(j["profiles"].get<int>(), 10);
    auto m = run_json("verify --max-g 1 --max-l 2 --max-r 1 --max-part 4 --inject-mutation", 1);
    EXPECT_GT(m["failures"].get<int>(), 0);
    EXPECT_FALSE(m["minimal_failure"].is_null());
}

// One-part genus-zero profiles with r >= 2: the lemma product is r times the
// closed form, so the sweep reports them.
TEST(CliVerify, OnePartSliceFailsForRAtLeastTwo)
{
    auto j = run_json("verify --max-g 0 --max-l 1 --max-r 3 --max-part 6", 1);
    EXPECT_EQ(j["minimal_failure"]["mu"], nlohmann::json::array({1}));
    EXPECT_EQ(j["minimal_failure"]["r"], 2);
    for (const auto& row : j["rows"]) {
        EXPECT_EQ(row["pass"].get<bool>(), row["r"] == 1);
        EXPECT_TRUE(row["limit"].get<bool>());
        EXPECT_TRUE(row["degree_identity"].get<bool>());
    }
}

TEST(CliVerify, OutputIndependentOfWorkers)
{
    for (const char* fmt : {"json", "csv", "text"}) {
        const std::string grid = std::string("--format ") + fmt + " verify --max-g 1 --max-l 3 --max-r 3 --max-part 4";
        const auto a = run("--workers 1 " + grid);
        const auto b = run("--workers 3 " + grid);
        EXPECT_EQ(a.out, b.out) << fmt;
        EXPECT_EQ(a.code, b.code);
    }
    const auto csv = run("--format csv verify --max-g 0 --max-l 2 --max-r 1 --max-part 2");
    EXPECT_EQ(csv.out.substr(0, csv.out.find('\n')), "g,r,l,mu,regime,identity,homogeneous,limit,degree_identity,pass");
}

TEST(CliHurwitz, RankOneGenusOne)
{
    TempDir dir;
    auto j = run_json("hurwitz --g 1 --r 1 --mu 2 --method oracle,elsv", 0, dir.env());
    EXPECT_EQ(j["values"]["oracle"], "1/2");
    EXPECT_EQ(j["values"]["elsv"], "1/2");
    EXPECT_EQ(j["agree"], true);
    auto k = run_json("hurwitz --g 1 --r 1 --mu 2 --method bruteforce,lemmas,localize", 0, dir.env());
    EXPECT_EQ(k["values"]["bruteforce"], "1/2");
}

TEST(CliHurwitz, TwoPartAllMethods)
{
    auto j = run_json("hurwitz --g 0 --r 2 --mu 3,5 --method all");
    EXPECT_EQ(j["values"]["oracle"], "225/1");
    EXPECT_EQ(j["values"]["elsv"], "225/1");
    EXPECT_EQ(j["values"]["localize"], "225/1");
    EXPECT_EQ(j["agree"], true);
}

// elsv and localize give 1/6; the oracle gives r times that on one-part
// genus-zero profiles, which the command reports as a disagreement.
TEST(CliHurwitz, OnePartRankTwoDisagreement)
{
    auto j = run_json("hurwitz --g 0 --r 2 --mu 3 --method all", 1);
    EXPECT_EQ(j["values"]["elsv"], "1/6");
    EXPECT_EQ(j["values"]["localize"], "1/6");
    EXPECT_EQ(j["values"]["oracle"], "1/3");
    EXPECT_EQ(j["agree"], false);
}

TEST(CliHurwitz, InvalidProfileGivesZeroRows)
{
    auto j = run_json("hurwitz --g 0 --r 2 --mu 2 --method all");
    EXPECT_EQ(j["valid"], false);
    for (const auto& [k, v] : j["values"].items()) {
        EXPECT_EQ(v, "0/1") << k;
    }
    EXPECT_EQ(run("hurwitz --g 0 --r 2 --mu 3 --method nope").code, 2);
    EXPECT_EQ(run("hurwitz --g 0 --r 2 --mu 3 --anchors none").code, 2);
    EXPECT_EQ(run("hurwitz --g 0 --r 2 --mu 3 --method bruteforce").code, 2);
    EXPECT_EQ(run("hurwitz --g 0 --r 2 --mu 3 --anchors all").code, 1); // calibration failure
}

TEST(CliFit, Examples)
{
    TempDir dir;
    auto j = run_json("fit --g 0 --l 3 --r 2 --residues 1,1,0", 0, dir.env());
    ASSERT_EQ(j["table"]["entries"].size(), 1u);
    EXPECT_EQ(j["table"]["entries"][0]["value"], "1/2");
    EXPECT_EQ(j["table"]["entries"][0]["k"], 0);
    EXPECT_TRUE(std::filesystem::exists(dir.path() / "table_g0_r2_a1-1-0.json"));

    auto k = run_json("fit --g 1 --l 1 --r 1", 0, dir.env());
    std::map<std::string, std::string> got;
    for (const auto& e : k["table"]["entries"]) {
        got[e["k"].get<int>() == 0 ? "psi" : "c1"] = e["value"];
    }
    EXPECT_EQ(got["psi"], "1/24");
    EXPECT_EQ(got["c1"], "-1/24");
    EXPECT_EQ(k["held_out_ok"], true);
    EXPECT_GE(k["held_out"].size(), 3u);

    EXPECT_EQ(run("fit --g 1 --l 1 --r 1 --max-samples 1", dir.env()).code, 1);
    EXPECT_EQ(run("fit --g 0 --l 3 --r 2 --residues 1,1", dir.env()).code, 2);
    EXPECT_EQ(run("fit --g 0 --l 3 --r 2 --residues 0,0,1", dir.env()).code, 1); // empty residue class
}

TEST(CliElsv, BackendsAndTableFile)
{
    TempDir dir;
    auto s = run_json("elsv --g 0 --r 2 --mu 3,5 --backend special");
    EXPECT_EQ(s["value"], "225/1");
    EXPECT_EQ(s["prefactor"], "1800/1");
    const auto table = dir.path() / "t.json";
    {
        std::ofstream out(table);
        out << R"({"g":1,"r":1,"a":[0],"l":1,"entries":[{"b":[1],"k":0,"value":"1/24"},{"b":[0],"k":1,"value":"-1/24"}]})";
    }
    auto t = run_json("elsv --g 1 --r 1 --mu 2 --backend table:" + table.string());
    EXPECT_EQ(t["value"], "1/2");
    EXPECT_EQ(t["integrand"], "1/24");
    auto solve = run_json("elsv --g 1 --r 1 --mu 4 --backend solve", 0, dir.env());
    EXPECT_EQ(solve["value"], "160/1");
    EXPECT_EQ(run("elsv --g 1 --r 1 --mu 2 --backend special").code, 2);
    EXPECT_EQ(run("elsv --g 1 --r 2 --mu 3 --backend table:" + table.string()).code, 2);
    EXPECT_EQ(run("elsv --g 1 --r 1 --mu 2 --backend table:/nonexistent.json").code, 2);
}

TEST(CliLocalize, ReportFormats)
{
    auto j = run_json("localize --g 1 --r 2 --mu 3,1");
    EXPECT_EQ(j["identity_holds"], true);
    EXPECT_EQ(j["edges"].size(), 2u);
    EXPECT_TRUE(j["closed_form"].contains("terms"));
    const auto text = run("--format text localize --g 1 --r 2 --mu 3,1");
    EXPECT_EQ(text.code, 0);
    EXPECT_NE(text.out.find("identity  holds"), std::string::npos);
    EXPECT_EQ(run("localize --g 1 --r 2 --mu 3,1 --inject-mutation").code, 1);
}

TEST(CliConfig, FileReplacesFlags)
{
    TempDir dir;
    const auto cfg = dir.path() / "run.toml";
    {
        std::ofstream out(cfg);
        out << "format = \"text\"\n[hurwitz]\ng = 0\nr = 2\nmu = [3, 5]\nmethod = \"oracle,elsv\"\n";
    }
    const auto r = run("--config " + cfg.string() + " hurwitz");
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out, "oracle 225/1\nelsv 225/1\nagree\n");
    EXPECT_EQ(run("--config /nonexistent.toml check --g 0 --r 1 --mu 1").code, 2);
}
