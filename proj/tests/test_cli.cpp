#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "plap/cli.hpp"

using namespace plap;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const auto d = fs::temp_directory_path() / ("plapctl_test_" + name);
    fs::remove_all(d);
    return d;
}

std::string usage_message(const std::string& text) {
    try {
        parse_config_text(text);
    } catch (const UsageError& e) {
        return e.what();
    }
    return "";
}

int run_cli(const std::string& args) {
    const int st = std::system((std::string(PLAPCTL_PATH) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

}  // namespace

TEST(Config, MinimalFillsDefaults) {
    const auto c = parse_config_text(R"({"p": 4, "N": 3})");
    EXPECT_EQ(c.grid.n_theta, 128);
    EXPECT_EQ(c.grid.n_y, 256);
    EXPECT_FALSE(c.grid.y_max.has_value());
    EXPECT_EQ(c.M, 1.0);
    EXPECT_EQ(c.psi.kind, PsiKind::constant);
    EXPECT_EQ(c.nodes(), 512u);
    EXPECT_EQ(parse_config_text(R"({"p": 6, "N": 3})").nodes(), 1024u);
    const auto j = to_json(c);
    for (const char* k : {"p", "N", "branch", "grid", "beta", "M", "psi", "tolerances", "output_dir"})
        EXPECT_TRUE(j.contains(k)) << k;
}

TEST(Config, RejectionsNameTheField) {
    EXPECT_NE(usage_message(R"({"p": 1.5, "N": 3})").find("'p'"), std::string::npos);
    EXPECT_NE(usage_message(R"({"p": 2, "N": 3})").find("'p'"), std::string::npos);
    EXPECT_NE(usage_message(R"({"p": 4, "N": 0})").find("'N'"), std::string::npos);
    EXPECT_NE(usage_message(R"({"p": 4, "N": 2.5})").find("'N'"), std::string::npos);
    EXPECT_NE(usage_message(R"({"p": 4})").find("'N'"), std::string::npos);
    EXPECT_NE(usage_message(R"({"p": 4, "N": 3, "grid": {"n_theta": 16}})").find("grid.n_theta"), std::string::npos);
    EXPECT_NE(usage_message(R"({"p": 4, "N": 3, "grid": {"nth": 128}})").find("grid.nth"), std::string::npos);
    EXPECT_NE(usage_message(R"({"p": 4, "N": 3, "colour": 1})").find("colour"), std::string::npos);
    EXPECT_NE(usage_message(R"({"p": 4, "N": 3, "psi": {"kind": "square"}})").find("psi.kind"), std::string::npos);
    EXPECT_NE(usage_message(R"({"p": 4, "N": 3, "beta": 10})").find("beta"), std::string::npos);
    EXPECT_NE(usage_message(R"({"p": "four", "N": 3})").find("'p'"), std::string::npos);
    EXPECT_NE(usage_message(R"({"p": 4, "N": 3)").find("malformed"), std::string::npos);
}

TEST(Config, RoundTrip) {
    const std::string text = R"({"p": 5, "N": 2, "grid": {"n_theta": 96, "y_max": 9.5}, "beta": 0.1,
        "psi": {"kind": "custom-samples", "params": {"samples": [1, 2, 1, 0.5]}},
        "tolerances": {"neumann": 0.03}, "profile_nodes": 768, "output_dir": "x"})";
    const auto c = parse_config_text(text);
    EXPECT_EQ(*c.grid.y_max, 9.5);
    EXPECT_EQ(c.psi.samples.size(), 4u);
    const auto j = to_json(c);
    EXPECT_EQ(to_json(parse_config_text(j.dump())), j);
    const auto cos = parse_config_text(R"({"p": 4, "N": 3, "psi": {"kind": "cosine", "params": {"mode": 2}}})");
    EXPECT_EQ(to_json(parse_config_text(to_json(cos).dump())), to_json(cos));
}

TEST(Config, PsiFunctions) {
    const auto pp = make_params(4.0, 3);
    PsiSpec s;
    EXPECT_EQ(psi_function(s, pp)(0.7), 1.0);
    s.kind = PsiKind::cosine;
    s.amplitude = 0.25;
    EXPECT_NEAR(psi_function(s, pp)(0.0), 1.25, 1e-15);
    EXPECT_NEAR(psi_function(s, pp)(pp.period() / 2), 0.75, 1e-15);
    s.kind = PsiKind::custom_samples;
    s.samples = {1.0, 2.0, 3.0, 2.0};
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(psi_function(s, pp)(i * pp.period() / 4), s.samples[i], 1e-13);
}

TEST(Pipeline, UnknownCommandIsUsageError) {
    auto c = parse_config_text(R"({"p": 4, "N": 3})");
    c.output_dir = scratch("unknown").string();
    std::ostringstream log;
    Pipeline pl(c, 1, log);
    EXPECT_THROW(pl.run("frobnicate"), UsageError);
}

TEST(Pipeline, VerifyPassesAndIsDeterministic) {
    auto c = parse_config_text(R"({"p": 4, "N": 3})");
    std::string reports[2];
    for (int s = 0; s < 2; ++s) {
        const auto dir = scratch("verify" + std::to_string(s));
        c.output_dir = "shared";
        std::ostringstream log;
        const auto cwd = fs::current_path();
        fs::create_directories(dir);
        fs::current_path(dir);
        Pipeline pl(c, 7, log);
        EXPECT_EQ(pl.run("verify"), 0) << log.str();
        fs::current_path(cwd);
        reports[s] = slurp(dir / "shared" / "report.json");
    }
    EXPECT_EQ(reports[0], reports[1]);
    const auto j = json::parse(reports[0]);
    EXPECT_TRUE(j["pass"].get<bool>());
    std::set<std::string> names;
    for (const auto& r : j["checks"]) {
        names.insert(r["name"].get<std::string>());
        EXPECT_TRUE(r["pass"].get<bool>()) << r.dump();
        ASSERT_FALSE(r["metrics"].empty()) << r["name"];
        bool numeric = false;
        for (const auto& [k, v] : r["metrics"].items()) numeric = numeric || v.is_number();
        EXPECT_TRUE(numeric) << r["name"];
    }
    for (const char* n : {"exponent_closed_forms", "det_identity", "sign_chain"}) EXPECT_TRUE(names.count(n)) << n;
}

TEST(Pipeline, ProfileAndCoeffsWriteCsv) {
    auto c = parse_config_text(R"({"p": 4, "N": 3})");
    const auto dir = scratch("csv");
    c.output_dir = dir.string();
    std::ostringstream log;
    Pipeline pl(c, 3, log);
    EXPECT_EQ(pl.run("profile"), 0);
    std::ifstream prof(dir / "profile.csv");
    std::string line;
    std::getline(prof, line);
    EXPECT_EQ(line, "theta,a,a_theta");
    int rows = 0;
    while (std::getline(prof, line)) ++rows;
    EXPECT_EQ(rows, 512);
    Pipeline pc(c, 3, log);
    EXPECT_EQ(pc.run("coeffs"), 0);
    std::ifstream co(dir / "coeffs.csv");
    std::getline(co, line);
    EXPECT_EQ(line.rfind("theta,q,tau", 0), 0u);
}

TEST(Cli, ExitCodes) {
    const auto dir = scratch("exit");
    fs::create_directories(dir);
    EXPECT_EQ(run_cli("frobnicate"), 2);
    EXPECT_EQ(run_cli(""), 2);
    EXPECT_EQ(run_cli("verify --seed notanumber"), 2);
    std::ofstream(dir / "bad.json") << R"({"p": 1.5, "N": 3})";
    EXPECT_EQ(run_cli("verify --config " + (dir / "bad.json").string()), 2);
    std::ofstream(dir / "broken.json") << "{";
    EXPECT_EQ(run_cli("verify --config " + (dir / "broken.json").string()), 2);
    EXPECT_EQ(run_cli("profile --out " + (dir / "ok").string()), 0);
    EXPECT_TRUE(fs::exists(dir / "ok" / "report.json"));
}
