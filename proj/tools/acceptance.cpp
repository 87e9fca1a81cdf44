// Runs the bundled scenarios and prints one pass/fail line per acceptance criterion.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "kahler/cli.hpp"

#ifndef KAHLER_SCENARIO_DIR
#define KAHLER_SCENARIO_DIR "scenarios"
#endif

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Row {
    std::string scenario, id;
    bool pass = false;
    json value, tolerance;
    long samples = -1;
};

struct Run {
    int exit_code = 0;
    std::vector<Row> rows;
    std::map<std::string, double> seconds;
};

Run run_one(const std::string& stem, const fs::path& out_root) {
    Run r;
    kahler::cli::RunOptions o;
    o.out = out_root / stem;
    std::ostringstream log;
    r.exit_code = kahler::cli::run_scenarios(fs::path(KAHLER_SCENARIO_DIR) / (stem + ".json"), o, log);
    std::ifstream ms(o.out / "manifest.jsonl");
    std::string line;
    while (std::getline(ms, line)) {
        const json j = json::parse(line);
        if (j.at("type") != "verdict") continue;
        r.rows.push_back({j.at("scenario"), j.at("id"), j.at("pass"), j.at("value"), j.at("tolerance"), j.value("samples", -1L)});
    }
    std::ifstream ts(o.out / "timing.csv");
    std::getline(ts, line);
    while (std::getline(ts, line)) {
        const auto comma = line.rfind(',');
        if (comma != std::string::npos) r.seconds[line.substr(0, comma)] = std::stod(line.substr(comma + 1));
    }
    return r;
}

std::string show(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

struct Check {
    bool pass = true;
    int matched = 0;
    std::string note;
};

/// All rows whose id starts with `prefix` (or equals it, with `exact`) must pass; at least `min_rows` of them.
Check rows_pass(const std::vector<const Run*>& runs, const std::string& prefix, int min_rows = 1, long min_samples = -1, bool exact = false) {
    Check c;
    std::string first_fail;
    for (const Run* run : runs)
        for (const Row& row : run->rows) {
            if (exact ? row.id != prefix : row.id.rfind(prefix, 0) != 0) continue;
            ++c.matched;
            const bool ok = row.pass && (min_samples < 0 || row.samples >= min_samples);
            if (!ok && first_fail.empty())
                first_fail = row.scenario + "/" + row.id + " value " + show(row.value) + " tolerance " + show(row.tolerance) +
                             (row.samples >= 0 ? " samples " + std::to_string(row.samples) : "");
            c.pass = c.pass && ok;
        }
    if (c.matched < min_rows) {
        c.pass = false;
        c.note = prefix + ": " + std::to_string(c.matched) + " rows, need " + std::to_string(min_rows);
    } else {
        c.note = prefix + ": " + std::to_string(c.matched) + " rows" + (first_fail.empty() ? " pass" : ", first failure " + first_fail);
    }
    return c;
}

Check runtime(const Run& run, const std::string& label, double limit) {
    Check c;
    const auto it = run.seconds.find(label);
    c.matched = it != run.seconds.end();
    c.pass = c.matched && it->second <= limit;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s %.1f s (limit %.0f s)", label.c_str(), c.matched ? it->second : -1.0, limit);
    c.note = buf;
    return c;
}

void report(int n, const std::string& title, const std::vector<Check>& checks, int& failures) {
    bool ok = true;
    std::string notes;
    for (const auto& c : checks) {
        ok = ok && c.pass;
        notes += (notes.empty() ? "" : "; ") + c.note;
    }
    if (!ok) ++failures;
    std::cout << "criterion " << n << " " << (ok ? "PASS" : "FAIL") << "  " << title << "  [" << notes << "]\n";
}

}  // namespace

int main(int argc, char** argv) {
    const fs::path out_root = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_runs");
    const std::vector<std::string> stems{"cigar-flow",    "cp1-flow",      "cigar-tensor", "equality-heatkernel", "closed-form-z",
                                         "cigar-harnack", "cp1-harnack",   "identities",   "maxprin",             "integrals-heatkernel"};
    std::map<std::string, Run> runs;
    for (const auto& s : stems) {
        runs[s] = run_one(s, out_root);
        std::cerr << s << ": exit " << runs[s].exit_code << "\n";
    }
    auto R = [&](std::initializer_list<const char*> names) {
        std::vector<const Run*> v;
        for (const char* n : names) v.push_back(&runs.at(n));
        return v;
    };
    std::vector<const Run*> all;
    for (const auto& s : stems) all.push_back(&runs.at(s));

    int failures = 0;
    report(1, "cigar exact-flow regression, N = 256, error <= 1e-3, ratio 4 +- 25%",
           {rows_pass(R({"cigar-flow"}), "metric_error"), rows_pass(R({"cigar-flow"}), "metric_convergence"),
            runtime(runs.at("cigar-flow"), "scenario:cigar-flow", 120.0)},
           failures);
    report(2, "CP1 exact-flow regression, error <= 1e-3", {rows_pass(R({"cp1-flow"}), "metric_error")}, failures);
    report(3, "Harnack equality case |Z(V*)| <= 1e-8", {rows_pass(R({"equality-heatkernel"}), "Z_equality", 1, 200)}, failures);
    report(4, "closed-form Z = 31.25 +- 1e-6 and the trace form",
           {rows_pass(R({"closed-form-z"}), "Z_closed_form"), rows_pass(R({"closed-form-z"}), "cao_trace")}, failures);
    report(5, "Z >= -1e-6 (1 + Phi^1/2) on cigar and CP1 runs",
           {rows_pass(R({"cigar-harnack"}), "Z_nonneg", 1, 500), rows_pass(R({"cp1-harnack"}), "Z_nonneg", 1, 500),
            runtime(runs.at("cigar-harnack"), "scenario:cigar-harnack", 180.0), runtime(runs.at("cp1-harnack"), "scenario:cp1-harnack", 180.0)},
           failures);
    report(6, "nonnegativity preserved on every flow run with PSD initial h", {rows_pass(all, "eig_floor", 5)}, failures);
    report(7, "identity suite, 13 identities x 4 models x 32 samples",
           {rows_pass(R({"identities"}), "identity:", 52, 32), runtime(runs.at("identities"), "scenario:identities", 120.0)}, failures);
    report(8, "norm inequalities for grad Phi and grad Psi, slack <= 1e-10",
           {rows_pass(all, "norm_ineq_phi", 3, -1, true), rows_pass(all, "norm_ineq_psi", 3, -1, true)}, failures);
    report(9, "Y1 >= -1e-8 and Y2 >= -1e-10 where htilde >= 0", {rows_pass(all, "Y1_nonneg", 3), rows_pass(all, "Y2_nonneg", 3)}, failures);
    report(10, "(d/dt - Delta)(t^2 Zhat) >= -tol_fd at 20 cigar samples", {rows_pass(R({"cigar-harnack"}), "evolution_ineq", 1, 20)}, failures);
    report(11, "maximum principle cases and barriers for C in {0, 1, 2} on flat and cigar",
           {rows_pass(R({"maxprin"}), "maxprin:", 5), rows_pass(R({"maxprin"}), "barrier:", 6)}, failures);
    report(12, "weighted integrals stable from radius 4 to 6 within 1e-4",
           {rows_pass(R({"integrals-heatkernel"}), "integral_stability:", 3)}, failures);
    std::cout << (12 - failures) << "/12 criteria pass\n";
    return failures == 0 ? 0 : 1;
}
