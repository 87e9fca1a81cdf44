#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "kahler/cli.hpp"

using namespace kahler;
using namespace kahler::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("kahler_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

fs::path write_json(const fs::path& dir, const std::string& text) {
    const fs::path f = dir / "scenario.json";
    std::ofstream(f) << text;
    return f;
}

std::string slurp(const fs::path& f) {
    std::ifstream is(f);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::vector<json> manifest_lines(const fs::path& f) {
    std::vector<json> out;
    std::ifstream is(f);
    std::string line;
    while (std::getline(is, line)) out.push_back(json::parse(line));
    return out;
}

int run(const fs::path& file, const fs::path& out, std::optional<std::uint64_t> seed = std::nullopt) {
    std::ostringstream log;
    RunOptions o;
    o.out = out;
    o.seed = seed;
    return run_scenarios(file, o, log);
}

}  // namespace

TEST(Params, RecordsDefaultsAndRejectsUnknownKeys) {
    Params p(json{{"N", 32}, {"typo", 1}}, "s");
    EXPECT_EQ(p.get<int>("N", 64), 32);
    EXPECT_DOUBLE_EQ(p.get<double>("T", 0.5), 0.5);
    EXPECT_EQ(p.resolved().at("T"), 0.5);
    EXPECT_THROW(p.finish(), ParseError);
    Params q(json{{"N", "many"}}, "s");
    EXPECT_THROW(q.get<int>("N", 1), ParseError);
}

TEST(Scenarios, ParsesListsAndRejectsMalformedHeaders) {
    EXPECT_TRUE(parse_scenarios(json::parse(R"({"scenarios": []})")).empty());
    EXPECT_EQ(parse_scenarios(json::parse(R"({"name": "a", "target": "flow"})")).size(), 1u);
    EXPECT_THROW(parse_scenarios(json::parse(R"({"name": "a", "target": "nope"})")), ParseError);
    EXPECT_THROW(parse_scenarios(json::parse(R"({"target": "flow"})")), ParseError);
    EXPECT_THROW(parse_scenarios(json::parse(R"({"scenarios": [{"name": "a", "target": "flow"}, {"name": "a", "target": "maxprin"}]})")),
                 ParseError);
}

TEST(Run, EmptyScenarioListGivesEmptyManifest) {
    const fs::path dir = scratch("empty");
    EXPECT_EQ(run(write_json(dir, R"({"scenarios": []})"), dir / "out"), kOk);
    ASSERT_TRUE(fs::exists(dir / "out" / "manifest.jsonl"));
    EXPECT_EQ(fs::file_size(dir / "out" / "manifest.jsonl"), 0u);
}

TEST(Run, ConfigurationErrorsExitTwoBeforeAnythingRuns) {
    const fs::path dir = scratch("parse");
    EXPECT_EQ(run(write_json(dir, "{ not json"), dir / "a"), kParseFailure);
    EXPECT_EQ(run(write_json(dir, R"({"name": "x", "target": "flow", "Nn": 32})"), dir / "b"), kParseFailure);
    EXPECT_EQ(run(write_json(dir, R"({"name": "x", "target": "flow", "N": 7})"), dir / "c"), kParseFailure);
    EXPECT_EQ(run(write_json(dir, R"({"name": "x", "target": "flow", "model": "fubini-study", "T": 0.6})"), dir / "d"), kParseFailure);
    EXPECT_EQ(run(write_json(dir, R"({"name": "x", "target": "harnack-sweep", "mode": "sideways"})"), dir / "e"), kParseFailure);
    // the second scenario is invalid, so the first never runs
    EXPECT_EQ(run(write_json(dir, R"({"scenarios": [{"name": "ok", "target": "harnack-sweep", "mode": "closed-form"},
                                                    {"name": "bad", "target": "maxprin", "cases": [{"label": "c", "kappa": 3}]}]})"),
                  dir / "f"),
              kParseFailure);
    EXPECT_FALSE(fs::exists(dir / "f"));
}

TEST(Run, NumericFailureExitsThreeWithDiagnostic) {
    const fs::path dir = scratch("numeric");
    const auto f = write_json(dir, R"({"name": "far", "target": "harnack-sweep", "mode": "closed-form", "points": [1e200, 0]})");
    EXPECT_EQ(run(f, dir / "out"), kNumericFailure);
    const auto lines = manifest_lines(dir / "out" / "manifest.jsonl");
    ASSERT_EQ(lines.size(), 2u);
    EXPECT_EQ(lines[1].at("id"), "numeric_failure");
    EXPECT_FALSE(lines[1].at("pass").get<bool>());
}

TEST(Run, ManifestCarriesResolvedParametersAndConventions) {
    const fs::path dir = scratch("header");
    const auto f = write_json(dir, R"({"name": "cf", "target": "harnack-sweep", "mode": "closed-form"})");
    EXPECT_EQ(run(f, dir / "out"), kOk);
    const auto lines = manifest_lines(dir / "out" / "manifest.jsonl");
    ASSERT_GE(lines.size(), 3u);
    EXPECT_EQ(lines[0].at("type"), "scenario");
    EXPECT_EQ(lines[0].at("version"), kToolVersion);
    EXPECT_TRUE(lines[0].at("conventions").contains("laplacian"));
    EXPECT_DOUBLE_EQ(lines[0].at("parameters").at("t").get<double>(), 0.1);
    EXPECT_DOUBLE_EQ(lines[0].at("parameters").at("expected").get<double>(), 31.25);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        EXPECT_EQ(lines[i].at("type"), "verdict");
        for (const char* k : {"id", "pass", "value", "tolerance"}) EXPECT_TRUE(lines[i].contains(k)) << k;
    }
}

TEST(Run, SameSeedGivesByteIdenticalManifest) {
    const fs::path dir = scratch("determinism");
    const auto f = write_json(dir, R"({"name": "eq", "target": "harnack-sweep", "mode": "equality", "samples": 50, "seed": 5})");
    EXPECT_EQ(run(f, dir / "a"), kVerdictFailed);  // the Psi gradient inequality is red on this jet family
    EXPECT_EQ(run(f, dir / "b"), kVerdictFailed);
    EXPECT_EQ(slurp(dir / "a" / "manifest.jsonl"), slurp(dir / "b" / "manifest.jsonl"));
    EXPECT_EQ(slurp(dir / "a" / "eq" / "harnack.csv"), slurp(dir / "b" / "eq" / "harnack.csv"));
    run(f, dir / "c", 6);
    EXPECT_NE(slurp(dir / "a" / "eq" / "harnack.csv"), slurp(dir / "c" / "eq" / "harnack.csv"));
    EXPECT_EQ(manifest_lines(dir / "c" / "manifest.jsonl")[0].at("parameters").at("seed"), 6);
}

TEST(Plots, MissingManifestExitsFour) {
    const fs::path dir = scratch("plots_missing");
    std::ostringstream log;
    EXPECT_EQ(emit_plot_data(dir, log), kMissingArtifacts);
}

TEST(Plots, ZeroSamplesGiveAnEmptyTable) {
    const fs::path dir = scratch("plots_empty");
    const auto f = write_json(dir, R"({"name": "eq", "target": "harnack-sweep", "mode": "equality", "samples": 0})");
    run(f, dir / "out");
    std::ostringstream log;
    EXPECT_EQ(emit_plot_data(dir / "out", log), kOk);
    EXPECT_EQ(slurp(dir / "out" / "plot_data.csv"), "series,x,y\n");
}

TEST(Plots, CigarConvergenceSlopeAndMonotoneCurvature) {
    const fs::path dir = scratch("plots_cigar");
    const auto f = write_json(dir, R"({"name": "cig", "target": "flow", "model": "cigar", "N": 64, "T": 0.2, "convergence": [32, 64],
                                       "metric_tol": 0.05})");
    EXPECT_EQ(run(f, dir / "out"), kOk);
    std::ostringstream log;
    ASSERT_EQ(emit_plot_data(dir / "out", log), kOk);
    std::map<std::string, std::vector<std::pair<double, double>>> series;
    std::ifstream is(dir / "out" / "plot_data.csv");
    std::string line;
    std::getline(is, line);
    while (std::getline(is, line)) {
        const auto a = line.find(','), b = line.rfind(',');
        series[line.substr(0, a)].emplace_back(std::stod(line.substr(a + 1, b - a - 1)), std::stod(line.substr(b + 1)));
    }
    const auto& conv = series.at("cig/metric_error");
    ASSERT_EQ(conv.size(), 2u);
    const double slope = std::log(conv[0].second / conv[1].second) / std::log(conv[0].first / conv[1].first);
    EXPECT_NEAR(slope, 2.0, 0.3);
    // sup |Rm| = 1 at the origin for all t; the cell-centred nodes miss the origin by dx / sqrt 2,
    // so the sampled series is constant up to dx^2
    const auto& rm = series.at("cig/monitors_N64/sup_Rm");
    const double dx = 8.0 / 64;
    ASSERT_GE(rm.size(), 3u);
    for (std::size_t i = 0; i < rm.size(); ++i) {
        EXPECT_NEAR(rm[i].second, 1.0, dx * dx);
        if (i > 0) EXPECT_LE(rm[i].second, rm[i - 1].second + dx * dx);
    }
}

TEST(List, BundledScenariosParse) {
    std::ostringstream out, log;
    EXPECT_EQ(list_scenarios(KAHLER_SCENARIO_DIR, out, log), kOk) << log.str();
    for (const char* name : {"cigar-flow", "cp1-flow", "cigar-harnack", "cp1-harnack", "equality-heatkernel", "closed-form-z", "identities",
                             "maxprin", "integrals-heatkernel"})
        EXPECT_NE(out.str().find(name), std::string::npos) << name;
    std::ostringstream none;
    EXPECT_EQ(list_scenarios("/nonexistent/dir", none, log), kMissingArtifacts);
}

TEST(List, BundledScenariosValidate) {
    // every bundled file passes the validation pass; runs are exercised by the acceptance binary
    for (const auto& e : fs::directory_iterator(KAHLER_SCENARIO_DIR)) {
        if (e.path().extension() != ".json") continue;
        for (auto& s : load_scenarios(e.path())) {
            Params p = scenario_params(s);
            Context ctx{s, "/nonexistent", nullptr, nullptr, true};
            EXPECT_NO_THROW(run_target(s.target, ctx, p)) << s.name;
            EXPECT_NO_THROW(p.finish()) << s.name;
        }
    }
}
