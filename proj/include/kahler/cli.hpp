#pragma once

/**
 * @file cli.hpp
 * @brief Scenario files, verdict manifests and the runners behind the
 * kahlerlab command line.
 *
 * A scenario file is JSON: either one scenario object or {"scenarios": [...]}.
 * Every parameter has a default; the resolved values are written into the
 * manifest so each reported number can be traced to its inputs.
 */

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "kahler/errors.hpp"
#include "kahler/flow.hpp"
#include "kahler/harnack.hpp"
#include "kahler/identities.hpp"
#include "kahler/maxprin.hpp"
#include "kahler/models.hpp"

namespace kahler::cli {

using json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "0.1.0";

/// Process exit codes.
enum ExitCode : int { kOk = 0, kVerdictFailed = 1, kParseFailure = 2, kNumericFailure = 3, kMissingArtifacts = 4 };

struct Verdict {
    std::string id;
    bool pass = false;
    double value = 0.0;
    double tolerance = 0.0;
    std::string detail;
    long samples = -1;
};

/// Reads parameters with defaults, records what was resolved, and rejects unknown keys.
class Params {
  public:
    explicit Params(json in, std::string where) : in_(std::move(in)), where_(std::move(where)) {
        if (!in_.is_object()) throw ParseError(where_ + ": expected an object");
    }

    template <class T>
    T get(const std::string& key, const T& fallback) {
        used_.insert(key);
        T v = fallback;
        if (in_.contains(key)) {
            try {
                v = in_.at(key).get<T>();
            } catch (const nlohmann::json::exception& e) {
                throw ParseError(where_ + "." + key + ": " + e.what());
            }
        }
        resolved_[key] = v;
        return v;
    }

    template <class T>
    T required(const std::string& key) {
        if (!in_.contains(key)) throw ParseError(where_ + ": missing '" + key + "'");
        return get<T>(key, T{});
    }

    bool has(const std::string& key) const { return in_.contains(key); }

    Params child(const std::string& key) {
        used_.insert(key);
        return Params(in_.contains(key) ? in_.at(key) : json::object(), where_ + "." + key);
    }

    void adopt(const std::string& key, const Params& p) { resolved_[key] = p.resolved_; }
    void record(const std::string& key, json v) { resolved_[key] = std::move(v); }

    void finish() const {
        for (auto it = in_.begin(); it != in_.end(); ++it)
            if (!used_.count(it.key())) throw ParseError(where_ + ": unknown key '" + it.key() + "'");
    }

    const json& resolved() const { return resolved_; }

  private:
    json in_;
    std::string where_;
    std::set<std::string> used_;
    json resolved_ = json::object();
};

inline void require(bool ok, const std::string& what) {
    if (!ok) throw ParseError("invalid parameter: " + what);
}

/// Appends one JSON object per line, flushed as each verdict lands.
class Manifest {
  public:
    Manifest() = default;
    explicit Manifest(const std::filesystem::path& file) : os_(file, std::ios::trunc) {
        if (!os_) throw std::runtime_error("cannot open manifest " + file.string());
    }

    void header(const std::string& scenario, const std::string& target, const json& params) {
        json j;
        j["type"] = "scenario";
        j["scenario"] = scenario;
        j["target"] = target;
        j["tool"] = "kahlerlab";
        j["version"] = kToolVersion;
        j["conventions"] = {{"laplacian", "complex: g^{a bbar} d_a d_bbar on functions"},
                            {"curvature_sign", "fubini-study has positive bisectional curvature; the flow shrinks CP1"},
                            {"flow", "d/dt g = -Ric"}};
        j["parameters"] = params;
        write(j);
    }

    void verdict(const std::string& scenario, const Verdict& v) {
        json j;
        j["type"] = "verdict";
        j["scenario"] = scenario;
        j["id"] = v.id;
        j["pass"] = v.pass;
        j["value"] = finite_or_string(v.value);
        j["tolerance"] = finite_or_string(v.tolerance);
        if (v.samples >= 0) j["samples"] = v.samples;
        if (!v.detail.empty()) j["detail"] = v.detail;
        write(j);
        verdicts_.push_back(v);
    }

    const std::vector<Verdict>& verdicts() const { return verdicts_; }

  private:
    static json finite_or_string(double x) {
        if (std::isfinite(x)) return x;
        return std::isnan(x) ? json("nan") : json(x > 0 ? "inf" : "-inf");
    }

    void write(const json& j) {
        if (!os_.is_open()) return;
        os_ << j.dump() << "\n";
        os_.flush();
    }

    std::ofstream os_;
    std::vector<Verdict> verdicts_;
};

struct Scenario {
    std::string name;
    std::string target;  // flow | harnack-sweep | identities | maxprin | all
    std::string description;
    std::uint64_t seed = 0;
    json body;           // the raw object, parsed by the target runner
};

inline const std::set<std::string>& known_targets() {
    static const std::set<std::string> t{"flow", "harnack-sweep", "identities", "maxprin", "all"};
    return t;
}

inline Scenario parse_scenario(const json& j) {
    if (!j.is_object()) throw ParseError("scenario must be a JSON object");
    Scenario s;
    try {
        s.name = j.at("name").get<std::string>();
        s.target = j.at("target").get<std::string>();
        s.description = j.value("description", std::string());
        s.seed = j.value("seed", std::uint64_t{0});
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("scenario header: ") + e.what());
    }
    if (s.name.empty() || s.name.find_first_of("/\\ ") != std::string::npos) throw ParseError("scenario name must be a non-empty word");
    if (!known_targets().count(s.target)) throw ParseError("unknown scenario target '" + s.target + "'");
    s.body = j;
    return s;
}

inline std::vector<Scenario> parse_scenarios(const json& j) {
    std::vector<Scenario> out;
    if (j.is_object() && j.contains("scenarios")) {
        if (!j.at("scenarios").is_array()) throw ParseError("'scenarios' must be an array");
        for (const auto& s : j.at("scenarios")) out.push_back(parse_scenario(s));
    } else {
        out.push_back(parse_scenario(j));
    }
    std::set<std::string> names;
    for (const auto& s : out)
        if (!names.insert(s.name).second) throw ParseError("duplicate scenario name '" + s.name + "'");
    return out;
}

inline std::vector<Scenario> load_scenarios(const std::filesystem::path& file) {
    std::ifstream is(file);
    if (!is) throw ParseError("cannot read scenario file " + file.string());
    json j;
    try {
        j = json::parse(is);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(file.string() + ": " + e.what());
    }
    return parse_scenarios(j);
}

/// Seconds spent per labelled run; kept out of the manifest so it stays deterministic.
struct Timing {
    std::vector<std::pair<std::string, double>> entries;
    void add(const std::string& label, double seconds) { entries.emplace_back(label, seconds); }
    double total(const std::string& prefix) const {
        double s = 0.0;
        for (const auto& [k, v] : entries)
            if (k.rfind(prefix, 0) == 0) s += v;
        return s;
    }
};

/// Shared state of one scenario run.
struct Context {
    Scenario scenario;
    std::filesystem::path dir;  // per-scenario artifact directory
    Manifest* manifest = nullptr;
    Timing* timing = nullptr;
    bool validate_only = false;  // parse and range-check parameters, run nothing

    void emit(const Verdict& v) const { manifest->verdict(scenario.name, v); }
    std::ofstream open(const std::string& file) const {
        std::ofstream os(dir / file);
        if (!os) throw std::runtime_error("cannot write " + (dir / file).string());
        os.precision(12);
        return os;
    }
};

inline ModelSpec model_from(Params& p, const std::string& fallback = "cigar", int m_fallback = 1) {
    const std::string name = p.get<std::string>("model", fallback);
    const int m = p.get<int>("m", m_fallback);
    return parse_model(name, m);
}

inline Background parse_background(const std::string& s) {
    if (s == "numerical") return Background::numerical;
    if (s == "exact") return Background::exact;
    throw ParseError("unknown background '" + s + "'");
}

inline Boundary parse_boundary(const std::string& s) {
    if (s == "exact") return Boundary::exact;
    if (s == "frozen") return Boundary::frozen;
    throw ParseError("unknown boundary '" + s + "'");
}

/// Flow parameters shared by the flow and harnack-sweep targets.
inline FlowConfig flow_config_from(Params& p) {
    FlowConfig c;
    c.model = model_from(p);
    const bool fs = c.model.kind == ModelKind::fubini_study;
    c.radius = p.get<double>("radius", fs ? 2.0 : 4.0);
    c.N = p.get<int>("N", 64);
    c.t0 = p.get<double>("t0", 0.0);
    c.T = p.get<double>("T", fs ? 0.4 : 0.5);
    c.kappa = p.get<double>("kappa", 0.2);
    c.background = parse_background(p.get<std::string>("background", "numerical"));
    c.boundary = parse_boundary(p.get<std::string>("boundary", "exact"));
    c.h_init = parse_hinit(p.get<std::string>("h", "none"));
    c.weight_a = p.get<double>("a", 1.0);
    c.monitor_every = p.get<double>("monitor_every", 0.05);
    require(c.radius > 0.0, "radius > 0");
    require(c.N >= 8 && c.N % 2 == 0 && c.N <= 2048, "N even in [8, 2048]");
    require(c.kappa > 0.0 && c.kappa <= 0.25, "kappa in (0, 0.25]");
    require(c.T >= c.t0 && c.t0 >= 0.0, "0 <= t0 <= T");
    require(c.T < time_window(c.model), "T below the model's singular time");
    require(c.monitor_every > 0.0, "monitor_every > 0");
    require(c.model.m == 1, "flow runs need m = 1");
    return c;
}

// ---------------------------------------------------------------------------
// flow target

inline bool psd_initial(HInit h) { return h == HInit::zero || h == HInit::ricci || h == HInit::heat_kernel || h == HInit::random_psd; }

inline std::string n_label(int N) { return "N" + std::to_string(N); }

/// Eigenvalue floor of a run with nonnegative initial h: min >= -1e-6.
inline Verdict eig_floor_verdict(const std::string& id, const std::vector<MonitorRecord>& rs) {
    const NonnegativityVerdict nv = check_nonnegativity_preservation(rs);
    Verdict v{id, nv.min_eig >= -1e-6, nv.min_eig, -1e-6, "run tolerance 1e-6 (1 + sup Phi^1/2) = " + std::to_string(nv.tol)};
    v.samples = static_cast<long>(rs.size());
    return v;
}

inline void run_flow_target(const Context& ctx, Params& p) {
    FlowConfig base = flow_config_from(p);
    std::vector<int> levels = p.get<std::vector<int>>("convergence", {});
    const double metric_tol = p.get<double>("metric_tol", 1e-3);
    const double h_tol = p.get<double>("h_tol", 1e-2);
    Params integrals = p.child("integral_stability");
    const bool want_integrals = p.has("integral_stability");
    const double wide_radius = integrals.get<double>("radius", 6.0);
    const double rel_tol = integrals.get<double>("rel_tol", 1e-4);
    p.adopt("integral_stability", integrals);
    Params evo = p.child("norm_evolution");
    const bool want_evo = p.has("norm_evolution");
    const double evo_t = evo.get<double>("t", base.T - 0.1 * (base.T - base.t0));
    const double evo_d = evo.get<double>("delta", 1e-3);
    const double evo_floor = evo.get<double>("phi_floor", 1e-4);
    const double evo_fd = evo.get<double>("fd_tol", 0.2);
    p.adopt("norm_evolution", evo);
    for (int N : levels) require(N >= 8 && N % 2 == 0, "convergence levels are even N >= 8");
    if (levels.empty()) levels.push_back(base.N);
    if (want_evo) require(evo_t - evo_d > base.t0 && evo_t + evo_d < base.T && base.h_init != HInit::none, "norm_evolution time inside (t0, T) with h");

    const bool exact_metric = base.background == Background::numerical && base.boundary == Boundary::exact;
    FlowState probe = initial_state(base);
    const bool exact_h = base.h_init != HInit::none && base.boundary == Boundary::exact && detail::exact_h_available(probe);
    if (ctx.validate_only) return;

    auto conv = ctx.open("convergence.csv");
    conv << "N,dx,metric_error,h_error\n";
    std::vector<double> merr, herr;
    FlowRun finest;
    for (int N : levels) {
        FlowConfig c = base;
        c.N = N;
        std::vector<double> stops;
        std::vector<FlowState> snaps;
        const bool last = N == levels.back();
        if (last && want_evo) stops = {evo_t - evo_d, evo_t, evo_t + evo_d};
        FlowRun run = run_flow(c, stops, [&](const FlowState& s) {
            for (double x : stops)
                if (std::abs(s.t - x) < 1e-12) snaps.push_back(s);
        });
        ctx.timing->add("flow:" + n_label(N), run.seconds);
        const double me = exact_metric ? metric_error(run.state) : std::numeric_limits<double>::quiet_NaN();
        const double he = exact_h ? h_error(run.state) : std::numeric_limits<double>::quiet_NaN();
        merr.push_back(me);
        herr.push_back(he);
        conv << N << "," << run.state.grid->dx() << "," << me << "," << he << "\n";
        auto mon = ctx.open("monitors_" + n_label(N) + ".csv");
        write_monitor_csv(mon, run.records);
        if (last) {
            if (want_evo) {
                const NormEvolution ne = measure_norm_evolution(snaps.at(0), snaps.at(1), snaps.at(2), evo_floor);
                Verdict a{"norm_evolution_A", ne.C_A <= 8.0 * ne.sup_Rm + evo_fd, ne.C_A, 8.0 * ne.sup_Rm + evo_fd,
                          "measured C in |A| <= C Phi; tolerance 8 sup|Rm| plus the difference-stencil allowance " + std::to_string(evo_fd)};
                a.samples = ne.samples;
                ctx.emit(a);
                Verdict b{"norm_evolution_B", std::isfinite(ne.C_B), ne.C_B, std::numeric_limits<double>::infinity(),
                          "t|B| <= C (Phi + Psi) with the printed Lambda; with (d/dt - Delta) Psi = -2 Lambda + B2 the constant is " +
                              std::to_string(ne.C_B2)};
                b.samples = ne.samples;
                ctx.emit(b);
            }
            finest = std::move(run);
        }
    }
    conv.close();

    const auto& rs = finest.records;
    if (exact_metric) ctx.emit({"metric_error", merr.back() <= metric_tol, merr.back(), metric_tol, "max interior relative error of e^u"});
    if (exact_h) ctx.emit({"h_error", herr.back() <= h_tol, herr.back(), h_tol, "max interior |h - h_exact| / max |h_exact|"});
    if (levels.size() >= 2) {
        const std::size_t n = merr.size();
        const std::vector<double>& e = exact_metric ? merr : herr;
        if (exact_metric || exact_h) {
            const double ratio = e[n - 2] / e[n - 1];
            const double halving = static_cast<double>(levels[n - 1]) / levels[n - 2];
            const double expect = halving * halving;
            ctx.emit({exact_metric ? "metric_convergence" : "h_convergence", std::abs(ratio - expect) <= 0.25 * expect, ratio, 0.25 * expect,
                      "error ratio between the two finest grids; expected " + std::to_string(expect)});
        }
    }
    if (base.background == Background::numerical && base.model.kind != ModelKind::flat) {
        bool mono = true;
        for (const auto& r : rs) mono = mono && r.monotone;
        ctx.emit({"volume_monotone", mono, mono ? 1.0 : 0.0, 1e-10, "e^u(t2) <= e^u(t1) + 1e-10 between records"});
    }
    double eq_min = 1.0, eq_max = 1.0, grad = 0.0;
    for (const auto& r : rs) {
        eq_min = std::min(eq_min, r.equiv_min);
        eq_max = std::max(eq_max, r.equiv_max);
        grad = std::max(grad, r.sup_grad_Rm_sqrt_t);
    }
    ctx.emit({"equivalence", eq_min > 0.0 && eq_max <= 1.0 + 1e-9, eq_min, 0.0,
              "min/max of e^{u(t)}/e^{u(0)} = " + std::to_string(eq_min) + "/" + std::to_string(eq_max)});
    ctx.emit({"grad_Rm_bounded", std::isfinite(grad), grad, std::numeric_limits<double>::infinity(), "sup |nabla Rm| t^1/2"});
    if (psd_initial(base.h_init)) ctx.emit(eig_floor_verdict("eig_floor", rs));

    if (want_integrals) {
        require(base.h_init != HInit::none, "integral_stability needs h");
        FlowConfig wide = base;
        wide.N = levels.back();
        wide.radius = wide_radius;
        // same spacing, so the node sets coincide on the small disk
        const double n_wide = wide.N * wide_radius / base.radius;
        require(std::abs(n_wide - std::round(n_wide)) < 1e-9 && static_cast<int>(std::round(n_wide)) % 2 == 0,
                "integral_stability radius must keep the grid spacing");
        wide.N = static_cast<int>(std::round(n_wide));
        const FlowRun big = run_flow(wide);
        ctx.timing->add("flow:wide", big.seconds);
        auto os = ctx.open("integrals.csv");
        os << "t,Psi_int,Psi_int_wide,Lambda_int,Lambda_int_wide,Psi2_int,Psi2_int_wide\n";
        double worst[3] = {0.0, 0.0, 0.0};
        for (std::size_t i = 0; i < std::min(rs.size(), big.records.size()); ++i) {
            const auto& a = rs[i];
            const auto& b = big.records[i];
            os << a.t << "," << a.Psi_int << "," << b.Psi_int << "," << a.Lambda_int << "," << b.Lambda_int << "," << a.Psi2_int << ","
               << b.Psi2_int << "\n";
            auto rel = [](double x, double y) { return std::abs(x - y) / std::max(std::abs(y), 1e-300); };
            worst[0] = std::max(worst[0], rel(a.Psi_int, b.Psi_int));
            if (a.t > 0.0) {
                worst[1] = std::max(worst[1], rel(a.Lambda_int, b.Lambda_int));
                worst[2] = std::max(worst[2], rel(a.Psi2_int, b.Psi2_int));
            }
        }
        const char* names[3] = {"integral_stability:Psi", "integral_stability:tLambda", "integral_stability:tPsi2"};
        for (int q = 0; q < 3; ++q)
            ctx.emit({names[q], worst[q] <= rel_tol, worst[q], rel_tol,
                      "relative change from radius " + std::to_string(base.radius) + " to " + std::to_string(wide_radius)});
    }
}

// ---------------------------------------------------------------------------
// harnack-sweep target

/// Running extremes of the pointwise checks over every evaluated jet.
struct JetStats {
    long jets = 0;
    double phi_slack = -std::numeric_limits<double>::infinity();   // (|grad Phi|^2 - 2 Phi Psi) / (1 + 2 Phi Psi)
    double psi_slack = -std::numeric_limits<double>::infinity();   // (|grad Psi|^2 - 2 Psi Lambda) / (1 + 2 Psi Lambda)
    double psi_ratio = 0.0;                                        // |grad Psi|^2 / (Psi Lambda)
    double Y1 = std::numeric_limits<double>::infinity();
    double Y2 = std::numeric_limits<double>::infinity();
    long y_samples = 0;

    void add(const HarnackInput& in, const HarnackReport& r) {
        const Norms n = tensor_norms(in.h);
        const GradientNorms g = gradient_norms(in.h);
        phi_slack = std::max(phi_slack, (g.grad_Phi - 2.0 * n.Phi * n.Psi) / (1.0 + 2.0 * n.Phi * n.Psi));
        psi_slack = std::max(psi_slack, (g.grad_Psi - 2.0 * n.Psi * n.Lambda) / (1.0 + 2.0 * n.Psi * n.Lambda));
        // the ratio is only meaningful where Psi and Lambda are above round-off
        if (n.Psi > 1e-12 * (1.0 + n.Phi) && n.Lambda > 1e-12 * (1.0 + n.Phi)) psi_ratio = std::max(psi_ratio, g.grad_Psi / (n.Psi * n.Lambda));
        ++jets;
        // Y terms are asserted at V* where htilde >= 0
        if (r.optimal && r.min_eig_h + r.eps >= 0.0) {
            if (std::isfinite(r.Y1)) Y1 = std::min(Y1, r.Y1);
            if (std::isfinite(r.Y2)) Y2 = std::min(Y2, r.Y2);
            ++y_samples;
        }
    }

    void emit(const Context& ctx) const {
        Verdict a{"norm_ineq_phi", phi_slack <= 1e-10, phi_slack, 1e-10, "max (|grad Phi|^2 - 2 Phi Psi) / (1 + 2 Phi Psi)", jets};
        Verdict b{"norm_ineq_psi", psi_slack <= 1e-10, psi_slack, 1e-10,
                  "max (|grad Psi|^2 - 2 Psi Lambda) / (1 + 2 Psi Lambda); max |grad Psi|^2 / (Psi Lambda) = " + std::to_string(psi_ratio), jets};
        Verdict c{"norm_ineq_psi_const4", psi_ratio <= 4.0 + 1e-9, psi_ratio, 4.0, "max |grad Psi|^2 / (Psi Lambda) against the constant 4", jets};
        ctx.emit(a);
        ctx.emit(b);
        ctx.emit(c);
        if (y_samples > 0) {
            ctx.emit({"Y1_nonneg", Y1 >= -1e-8, Y1, -1e-8, "min Y1 where htilde >= 0", y_samples});
            ctx.emit({"Y2_nonneg", Y2 >= -1e-10, Y2, -1e-10, "min Y2 where htilde >= 0", y_samples});
        }
    }
};

inline TensorJet ricci_jet_at(const ModelSpec& s, const Point& z, double t, int order) {
    Geometry geo(metric_jet(s, z, t, order + 2));
    return curvature(geo).Ric;
}

inline Vec10 vec1(cplx v) {
    Vec10 out;
    out.m = 1;
    out[0] = v;
    return out;
}

/// Random frame-component fields V(z) = a + b z + c zbar.
struct RandomFields {
    std::vector<std::array<cplx, 3>> coef;
    RandomFields(int count, std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> nd;
        for (int j = 0; j < count; ++j) coef.push_back({cplx(nd(rng), nd(rng)), cplx(nd(rng), nd(rng)), cplx(nd(rng), nd(rng))});
    }
    Vec10 at(int j, cplx z) const { return vec1(coef[j][0] + coef[j][1] * z + coef[j][2] * std::conj(z)); }
};

struct HField {
    HInit init = HInit::ricci;
    std::uint64_t seed = 0;
    std::string label;
};

inline HField parse_hfield(const std::string& s) {
    HField f;
    const auto colon = s.find(':');
    f.init = parse_hinit(s.substr(0, colon));
    if (colon != std::string::npos) {
        try {
            f.seed = std::stoull(s.substr(colon + 1));
        } catch (const std::exception&) {
            throw ParseError("bad seed in h field '" + s + "'");
        }
    }
    if (f.init == HInit::none) throw ParseError("harnack fields need an h");
    f.label = s;
    return f;
}

inline void harnack_equality(const Context& ctx, Params& p) {
    const int samples = p.get<int>("samples", 200);
    const double t_lo = p.get<double>("t_min", 0.1), t_hi = p.get<double>("t_max", 2.0);
    const double box = p.get<double>("box", 2.0);
    const double tol = p.get<double>("tol", 1e-8);
    require(samples >= 0 && t_lo > 0.0 && t_hi >= t_lo && box > 0.0, "equality sampling ranges");
    if (ctx.validate_only) return;
    std::mt19937_64 rng(ctx.scenario.seed);
    std::uniform_real_distribution<double> ux(-box, box), ut(t_lo, t_hi);
    auto os = ctx.open("harnack.csv");
    os << "t,x,y,Z\n";
    JetStats st;
    double worst = 0.0;
    for (int k = 0; k < samples; ++k) {
        const double t = ut(rng);
        const cplx z(ux(rng), ux(rng));
        // the kernel is positive everywhere, so no regularization
        const HarnackInput in = make_harnack_input(metric_jet(ModelSpec::flat(1), {z}, t, 4), heat_kernel_jet(1, {z}, t, 4), t, 0.0);
        const HarnackReport r = evaluate_Z(in);
        st.add(in, r);
        worst = std::max(worst, std::abs(r.Z));
        os << t << "," << z.real() << "," << z.imag() << "," << r.Z << "\n";
    }
    ctx.emit({"Z_equality", worst <= tol, worst, tol, "max |Z(V*)| for h = heat kernel x g on flat C", samples});
    st.emit(ctx);
}

inline void harnack_closed_form(const Context& ctx, Params& p) {
    const double t = p.get<double>("t", 0.1);
    const double expect = p.get<double>("expected", 31.25);
    const double tol = p.get<double>("tol", 1e-6);
    const std::vector<double> xs = p.get<std::vector<double>>("points", {0.0, 0.0, 0.7, -0.4});
    require(xs.size() % 2 == 0 && !xs.empty(), "points is a flat list of (x, y) pairs");
    const ModelSpec fs = ModelSpec::fubini_study(1);
    require(t > 0.0 && t < time_window(fs), "t inside the fubini-study window");
    if (ctx.validate_only) return;
    double worst = 0.0, worst_cao = 0.0;
    JetStats st;
    for (std::size_t i = 0; i < xs.size(); i += 2) {
        const Point z{cplx(xs[i], xs[i + 1])};
        HarnackInput in = make_harnack_input(metric_jet(fs, z, t, 4), ricci_jet_at(fs, z, t, 2), t);
        in.V = vec1(0.0);
        const HarnackReport r = evaluate_Z(in);
        st.add(in, r);
        worst = std::max(worst, std::abs(r.Z - expect));
        worst_cao = std::max(worst_cao, std::abs(cao_trace_Z(in.bundle, vec1(0.0), t) - expect));
    }
    const long n = static_cast<long>(xs.size() / 2);
    ctx.emit({"Z_closed_form", worst <= tol, worst, tol, "max |Z - " + std::to_string(expect) + "| for h = Ric, V = 0", n});
    ctx.emit({"cao_trace", worst_cao <= tol, worst_cao, tol, "max |trace form - " + std::to_string(expect) + "|", n});
    st.emit(ctx);
}

/// t^2 Zhat(V*) at node k from grid jets.
inline double t2_zhat(const FlowState& s, int k) {
    const HarnackReport r = evaluate_Z(node_harnack_input(s, k));
    return s.t * s.t * r.Zhat;
}

inline void harnack_flow(const Context& ctx, Params& p) {
    FlowConfig base = flow_config_from(p);
    const std::vector<std::string> names = p.get<std::vector<std::string>>("fields", {"ric", "random-psd:1", "random-psd:2", "random-psd:3"});
    const int per_field = p.get<int>("samples_per_field", 500);
    const int n_times = p.get<int>("times", 10);
    const int n_random = p.get<int>("random_vectors", 20);
    const double margin = p.get<double>("sample_margin", 0.25 * base.radius);
    Params evo = p.child("evolution");
    const bool want_evo = p.has("evolution");
    const std::vector<double> evo_times = evo.get<std::vector<double>>("times", {0.1, 0.2, 0.3, 0.4});
    const int evo_nodes = evo.get<int>("nodes_per_time", 5);
    const double evo_delta = evo.get<double>("delta", 1e-3);
    const double evo_radius = evo.get<double>("radius", 0.5 * base.radius);
    p.adopt("evolution", evo);
    require(!names.empty() && per_field >= 0 && n_times >= 1 && n_random >= 0, "harnack sampling sizes");
    require(margin >= 3.0 * 2.0 * base.radius / base.N && margin < base.radius, "sample_margin leaves room for the jet stencil");
    if (want_evo)
        for (double t : evo_times) require(t - evo_delta > base.t0 && t + evo_delta <= base.T, "evolution times inside (t0, T]");

    std::vector<HField> hfields;
    for (const auto& name : names) {
        hfields.push_back(parse_hfield(name));
        FlowConfig c = base;
        c.h_init = hfields.back().init;
        initial_state(c);
    }
    if (ctx.validate_only) return;

    const RandomFields fields(n_random, ctx.scenario.seed ^ 0x9e3779b97f4a7c15ULL);
    auto os = ctx.open("harnack.csv");
    os << "field,t,x,y,Phi,Z_opt,Z_zero,Z_random_min,Y1,Y2\n";
    auto evo_os = ctx.open("evolution.csv");
    evo_os << "t,x,y,lhs,lhs_coarse,tol_fd\n";
    JetStats st;
    double z_worst = std::numeric_limits<double>::infinity();
    long min_samples = std::numeric_limits<long>::max();
    double evo_worst = std::numeric_limits<double>::infinity(), evo_tol_at = 0.0;
    int evo_count = 0;
    for (std::size_t fi = 0; fi < names.size(); ++fi) {
        const HField& hf = hfields[fi];
        FlowConfig c = base;
        c.h_init = hf.init;
        c.seed = hf.seed;
        FlowState probe = initial_state(c);
        if (!detail::exact_h_available(probe)) c.boundary = Boundary::frozen;
        const auto nodes = probe.grid->interior(margin);
        require(!nodes.empty(), "sampling region is empty");
        std::mt19937_64 rng(ctx.scenario.seed * 1000003ULL + fi);
        std::uniform_int_distribution<std::size_t> pick(0, nodes.size() - 1);
        const int per_time = (per_field + n_times - 1) / n_times;
        std::vector<double> times;
        for (int j = 1; j <= n_times; ++j) times.push_back(c.t0 + (c.T - c.t0) * j / n_times);

        // evolution-inequality stencils on the first field
        const bool evo_here = want_evo && fi == 0;
        std::vector<double> stops = times;
        std::vector<int> evo_k;
        if (evo_here) {
            const auto inner = probe.grid->interior(evo_radius);
            require(!inner.empty(), "evolution radius is too small");
            std::uniform_int_distribution<std::size_t> pe(0, inner.size() - 1);
            for (std::size_t q = 0; q < evo_times.size() * evo_nodes; ++q) evo_k.push_back(inner[pe(rng)]);
            for (double t : evo_times) {
                stops.push_back(t - evo_delta);
                stops.push_back(t + evo_delta);
                if (std::find(times.begin(), times.end(), t) == times.end()) stops.push_back(t);
            }
        }
        // values of t^2 Zhat on the stencils, keyed by (time index, stop)
        const int n = probe.grid->n();
        std::map<std::pair<int, int>, std::vector<double>> evo_vals;
        std::vector<double> evo_E(evo_k.size());
        long taken = 0;
        std::vector<MonitorRecord> recs;
        const FlowRun run = run_flow(c, stops, [&](const FlowState& s) {
            if (evo_here) {
                for (std::size_t ti = 0; ti < evo_times.size(); ++ti)
                    for (int side = -1; side <= 1; ++side) {
                        if (std::abs(s.t - (evo_times[ti] + side * evo_delta)) > 1e-12) continue;
                        for (int q = 0; q < evo_nodes; ++q) {
                            const std::size_t idx = ti * evo_nodes + q;
                            const int k = evo_k[idx];
                            std::vector<double> v{t2_zhat(s, k)};
                            if (side == 0) {
                                for (int w : {1, 2})
                                    for (int off : {-w, w, -w * n, w * n}) v.push_back(t2_zhat(s, k + off));
                                evo_E[idx] = s.E[k];
                            }
                            evo_vals[{static_cast<int>(idx), side}] = v;
                        }
                    }
            }
            if (std::find_if(times.begin(), times.end(), [&](double x) { return std::abs(x - s.t) < 1e-12; }) == times.end()) return;
            for (int q = 0; q < per_time && taken < per_field; ++q, ++taken) {
                const int k = nodes[pick(rng)];
                const cplx z = s.grid->z(k);
                const HarnackInput in = node_harnack_input(s, k);
                const HarnackReport r = evaluate_Z(in);
                st.add(in, r);
                const double scale = 1.0 + std::sqrt(tensor_norms(in.h).Phi);
                HarnackInput v0 = in;
                v0.V = vec1(0.0);
                const double z0 = evaluate_Z(v0).Z;
                double zr = std::numeric_limits<double>::infinity();
                for (int j = 0; j < n_random; ++j) {
                    HarnackInput vj = in;
                    vj.V = fields.at(j, z);
                    zr = std::min(zr, evaluate_Z(vj).Z);
                }
                z_worst = std::min({z_worst, r.Z / scale, z0 / scale, zr / scale});
                os << hf.label << "," << s.t << "," << z.real() << "," << z.imag() << "," << tensor_norms(in.h).Phi << "," << r.Z << "," << z0
                   << "," << zr << "," << r.Y1 << "," << r.Y2 << "\n";
            }
        });
        ctx.timing->add("harnack:" + hf.label, run.seconds);
        min_samples = std::min(min_samples, taken);
        ctx.emit(eig_floor_verdict("eig_floor:" + hf.label, run.records));
        auto mon = ctx.open("monitors_" + std::to_string(fi) + ".csv");
        write_monitor_csv(mon, run.records);

        if (evo_here) {
            const double dx = probe.grid->dx();
            for (std::size_t idx = 0; idx < evo_k.size(); ++idx) {
                const auto& lo = evo_vals.at({static_cast<int>(idx), -1});
                const auto& mid = evo_vals.at({static_cast<int>(idx), 0});
                const auto& hi = evo_vals.at({static_cast<int>(idx), 1});
                const double dt = (hi[0] - lo[0]) / (2.0 * evo_delta);
                double lhs[2];
                for (int w : {1, 2}) {
                    const double* nb = mid.data() + 1 + 4 * (w - 1);
                    const double lap = 0.25 * (nb[0] + nb[1] + nb[2] + nb[3] - 4.0 * mid[0]) / (w * w * dx * dx);
                    lhs[w - 1] = dt - evo_E[idx] * lap;
                }
                const double tol = std::abs(lhs[0] - lhs[1]);
                const cplx z = probe.grid->z(evo_k[idx]);
                evo_os << evo_times[idx / evo_nodes] << "," << z.real() << "," << z.imag() << "," << lhs[0] << "," << lhs[1] << "," << tol << "\n";
                if (lhs[0] + tol < evo_worst + evo_tol_at) {
                    evo_worst = lhs[0];
                    evo_tol_at = tol;
                }
                ++evo_count;
            }
        }
    }
    ctx.emit({"Z_nonneg", z_worst >= -1e-6 && min_samples >= per_field, z_worst, -1e-6,
              "min Z / (1 + Phi^1/2) over V*, 0 and the random fields; fewest samples in a field " + std::to_string(min_samples),
              min_samples});
    st.emit(ctx);
    if (want_evo)
        ctx.emit({"evolution_ineq", evo_count > 0 && evo_worst >= -evo_tol_at, evo_worst, -evo_tol_at,
                  "(d/dt - Delta)(t^2 Zhat) at V*; tolerance from the dx vs 2 dx stencil difference at the worst sample", evo_count});
}

inline void run_harnack_target(const Context& ctx, Params& p) {
    const std::string mode = p.get<std::string>("mode", "flow");
    if (mode == "flow") return harnack_flow(ctx, p);
    if (mode == "equality") return harnack_equality(ctx, p);
    if (mode == "closed-form") return harnack_closed_form(ctx, p);
    throw ParseError("unknown harnack mode '" + mode + "'");
}

// ---------------------------------------------------------------------------
// identities target

/// "flat", "flat:2", "fubini-study:1", "cigar".
inline ModelSpec parse_model_tag(const std::string& tag) {
    const auto colon = tag.find(':');
    int m = 1;
    if (colon != std::string::npos) {
        try {
            m = std::stoi(tag.substr(colon + 1));
        } catch (const std::exception&) {
            throw ParseError("bad dimension in model '" + tag + "'");
        }
    }
    return parse_model(tag.substr(0, colon), m);
}

inline Backend parse_backend(const std::string& s) {
    if (s == "analytic") return Backend::analytic;
    if (s == "fd" || s == "finite-difference") return Backend::finite_difference;
    throw ParseError("unknown backend '" + s + "'");
}

inline void run_identities_target(const Context& ctx, Params& p) {
    std::vector<std::string> all;
    for (IdentityId id : kAllIdentities) all.push_back(identity_name(id));
    const auto id_names = p.get<std::vector<std::string>>("ids", all);
    const auto models = p.get<std::vector<std::string>>("models", {"flat:2", "cigar", "fubini-study:1", "fubini-study:2"});
    SweepOptions o;
    o.samples = p.get<int>("samples", 32);
    o.backend = parse_backend(p.get<std::string>("backend", "analytic"));
    o.source = parse_hsource(p.get<std::string>("source", "random-polynomial"));
    o.dx = p.get<double>("dx", 0.05);
    o.eps = p.get<double>("eps", 0.05);
    o.h_degree = p.get<int>("h_degree", 4);
    require(o.samples >= 0 && o.dx > 0.0 && o.eps >= 0.0 && o.h_degree >= 0, "identity sweep options");
    std::vector<IdentityId> ids;
    for (const auto& n : id_names) ids.push_back(parse_identity(n));
    std::vector<ModelSpec> specs;
    for (const auto& m : models) specs.push_back(parse_model_tag(m));
    if (ctx.validate_only) return;

    auto os = ctx.open("identities.csv");
    os << "model,identity,samples,max_residual,min_slope,max_slope,failures\n";
    for (std::size_t i = 0; i < specs.size(); ++i) {
        o.model = specs[i];
        o.seed = ctx.scenario.seed * 7919ULL + i;
        const auto t0 = std::chrono::steady_clock::now();
        const auto rows = sweep(ids, o);
        ctx.timing->add("identities:" + models[i], std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        for (const auto& r : rows) {
            os << models[i] << "," << identity_name(r.id) << "," << r.samples << "," << r.max_residual << "," << r.min_slope << "," << r.max_slope
               << "," << r.failures << "\n";
            const bool fd = o.backend == Backend::finite_difference;
            ctx.emit({"identity:" + identity_name(r.id) + ":" + models[i], r.pass() && r.samples == o.samples, fd ? r.min_slope : r.max_residual,
                      fd ? 1.5 : kIdentityTol,
                      fd ? "refinement slope range [" + std::to_string(r.min_slope) + ", " + std::to_string(r.max_slope) + "]"
                         : "max relative residual",
                      r.samples});
        }
    }
}

// ---------------------------------------------------------------------------
// maxprin target

inline void run_maxprin_target(const Context& ctx, Params& p) {
    const json default_cases = json::array({
        {{"label", "flat-zero"}, {"model", "flat"}, {"profile", "zero"}},
        {{"label", "flat-gaussian"}, {"model", "flat"}, {"profile", "neg-gaussian"}, {"exact", true}},
        {{"label", "flat-subsolution"}, {"model", "flat"}, {"profile", "neg-gaussian"}, {"rho", 1.0}},
        {{"label", "cigar-cosine"}, {"model", "cigar"}, {"profile", "clipped-cosine"}},
        {{"label", "cp1-cosine"}, {"model", "fubini-study"}, {"profile", "clipped-cosine"}, {"radius", 2.0}, {"T", 0.4}},
    });
    const json cases = p.get<json>("cases", default_cases);
    require(cases.is_array(), "cases must be an array");
    std::vector<std::pair<std::string, HeatTestCase>> parsed;
    json resolved_cases = json::array();
    std::set<std::string> labels;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        Params cp(cases[i], "cases[" + std::to_string(i) + "]");
        const std::string label = cp.required<std::string>("label");
        require(labels.insert(label).second, "duplicate case label " + label);
        HeatTestCase c;
        c.model = model_from(cp, "flat");
        c.radius = cp.get<double>("radius", 4.0);
        c.N = cp.get<int>("N", 64);
        c.T = cp.get<double>("T", 0.5);
        c.profile = parse_initial_profile(cp.get<std::string>("profile", "neg-gaussian"));
        c.rho = cp.get<double>("rho", 0.0);
        c.a = cp.get<double>("a", 1.0);
        c.kappa = cp.get<double>("kappa", 0.2);
        if (cp.get<bool>("exact", false)) {
            require(c.model.kind == ModelKind::flat && c.profile == InitialProfile::negative_gaussian && c.rho == 0.0,
                    "the exact solution is the flat negative gaussian");
            c.exact = negative_gaussian_solution;
        }
        require(c.radius > 0.0 && c.N >= 8 && c.N % 2 == 0 && c.rho >= 0.0 && c.a > 0.0, "heat test case " + label);
        require(c.kappa > 0.0 && c.kappa <= 0.25 && c.T > 0.0 && c.T < time_window(c.model), "time range and step factor of " + label);
        cp.finish();
        resolved_cases.push_back(cp.resolved());
        parsed.emplace_back(label, c);
    }
    p.record("cases", resolved_cases);
    Params bp = p.child("barrier");
    const auto b_models = bp.get<std::vector<std::string>>("models", {"flat", "cigar"});
    const auto Cs = bp.get<std::vector<double>>("C", {0.0, 1.0, 2.0});
    const double bT = bp.get<double>("T", 0.5);
    const double alpha = bp.get<double>("alpha", 1.0);
    const double bR = bp.get<double>("radius", 4.0);
    const int bN = bp.get<int>("N", 64);
    require(bT > 0.0 && alpha > 0.0 && bR > 0.0 && bN >= 8, "barrier options");
    std::vector<ModelSpec> b_specs;
    for (const auto& mt : b_models) b_specs.push_back(parse_model_tag(mt));
    p.adopt("barrier", bp);
    if (ctx.validate_only) return;

    auto os = ctx.open("maxprin.csv");
    os << "label,sup_f,sup_abs_f0,tol,growth_integral,max_error,steps\n";
    for (const auto& [label, c] : parsed) {
        const auto t0 = std::chrono::steady_clock::now();
        const MaxPrincipleVerdict v = run_max_principle(c);
        ctx.timing->add("maxprin:" + label, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        os << label << "," << v.sup_f << "," << v.sup_abs_f0 << "," << v.tol << "," << v.growth_integral << "," << v.max_error << "," << v.steps
           << "\n";
        ctx.emit({"maxprin:" + label, v.pass, v.sup_f, v.tol, "sup f against 1e-10 (1 + sup|f0|)", v.steps});
    }
    auto bs = ctx.open("barrier.csv");
    bs << "model,C,found,A,margin,a_lower,b_upper,sandwich,tried\n";
    for (std::size_t mi = 0; mi < b_models.size(); ++mi) {
        const std::string& mt = b_models[mi];
        const ModelSpec& ms = b_specs[mi];
        for (double C : Cs) {
            const BarrierResult b = build_and_check_barrier(ms, C, bT, alpha, bR, bN);
            bs << mt << "," << C << "," << b.found << "," << b.A << "," << b.margin << "," << b.a_lower << "," << b.b_upper << "," << b.sandwich << ","
               << b.tried << "\n";
            std::ostringstream id;
            id << "barrier:" << mt << ":C" << C;
            ctx.emit({id.str(), b.found && b.margin >= 0.0 && b.sandwich, b.margin, 0.0,
                      b.found ? "A = " + std::to_string(b.A) : b.diagnostic, b.tried});
        }
    }
}

// ---------------------------------------------------------------------------
// dispatch

inline void run_target(const std::string& target, const Context& ctx, Params& p);

/// Runs each entry of "parts" as its own target in a subdirectory.
inline void run_all_target(const Context& ctx, Params& p) {
    const json parts = p.required<json>("parts");
    require(parts.is_array() && !parts.empty(), "parts must be a non-empty array");
    std::set<std::string> names;
    json resolved = json::array();
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (!parts[i].is_object()) throw ParseError("parts[" + std::to_string(i) + "] must be an object");
        json body = parts[i];
        const std::string target = body.value("target", std::string());
        const std::string name = body.value("name", target + std::to_string(i));
        if (target == "all" || !known_targets().count(target)) throw ParseError("parts[" + std::to_string(i) + "]: bad target '" + target + "'");
        require(names.insert(name).second, "duplicate part name " + name);
        body.erase("target");
        body.erase("name");
        Context sub = ctx;
        sub.dir = ctx.dir / name;
        Params pp(body, ctx.scenario.name + "." + name);
        if (!ctx.validate_only) std::filesystem::create_directories(sub.dir);
        run_target(target, sub, pp);
        pp.finish();
        json r = pp.resolved();
        r["name"] = name;
        r["target"] = target;
        resolved.push_back(std::move(r));
    }
    p.record("parts", resolved);
}

inline void run_target(const std::string& target, const Context& ctx, Params& p) {
    if (target == "flow") return run_flow_target(ctx, p);
    if (target == "harnack-sweep") return run_harnack_target(ctx, p);
    if (target == "identities") return run_identities_target(ctx, p);
    if (target == "maxprin") return run_maxprin_target(ctx, p);
    if (target == "all") return run_all_target(ctx, p);
    throw ParseError("unknown target '" + target + "'");
}

// ---------------------------------------------------------------------------
// commands

inline Params scenario_params(const Scenario& s) {
    json body = s.body;
    for (const char* k : {"name", "target", "description", "seed"}) body.erase(k);
    return Params(body, s.name);
}

struct RunOptions {
    std::optional<std::uint64_t> seed;  // overrides every scenario's seed
    std::filesystem::path out;
};

/// Executes a scenario file; writes manifest.jsonl, timing.csv and one directory per scenario.
inline int run_scenarios(const std::filesystem::path& file, const RunOptions& o, std::ostream& log) {
    std::vector<Scenario> scenarios;
    std::vector<json> resolved;
    try {
        scenarios = load_scenarios(file);
        for (auto& s : scenarios) {
            if (o.seed) s.seed = *o.seed;
            Params p = scenario_params(s);
            Context ctx{s, o.out / s.name, nullptr, nullptr, true};
            run_target(s.target, ctx, p);
            p.finish();
            json r = p.resolved();
            r["seed"] = s.seed;
            resolved.push_back(std::move(r));
        }
    } catch (const ParseError& e) {
        log << "parse error: " << e.what() << "\n";
        return kParseFailure;
    } catch (const std::logic_error& e) {  // ArgumentError, DomainError, OutOfDomainError raised by range checks
        log << "invalid scenario: " << e.what() << "\n";
        return kParseFailure;
    }

    std::filesystem::create_directories(o.out);
    Manifest manifest(o.out / "manifest.jsonl");
    Timing timing;
    int code = kOk;
    for (std::size_t i = 0; i < scenarios.size() && code != kNumericFailure; ++i) {
        const Scenario& s = scenarios[i];
        manifest.header(s.name, s.target, resolved[i]);
        Context ctx{s, o.out / s.name, &manifest, &timing, false};
        std::filesystem::create_directories(ctx.dir);
        Params p = scenario_params(s);
        const auto t0 = std::chrono::steady_clock::now();
        try {
            run_target(s.target, ctx, p);
        } catch (const ParseError& e) {
            log << s.name << ": parse error: " << e.what() << "\n";
            return kParseFailure;
        } catch (const std::exception& e) {
            log << s.name << ": numeric failure: " << e.what() << "\n";
            ctx.emit({"numeric_failure", false, std::numeric_limits<double>::quiet_NaN(), 0.0, e.what()});
            code = kNumericFailure;
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        timing.add("scenario:" + s.name, secs);
        log << s.name << " (" << s.target << ") finished in " << secs << " s\n";
    }
    std::ofstream ts(o.out / "timing.csv");
    ts << "label,seconds\n";
    for (const auto& [k, v] : timing.entries) ts << k << "," << v << "\n";

    long failed = 0;
    for (const auto& v : manifest.verdicts()) {
        if (!v.pass) {
            ++failed;
            log << "FAIL " << v.id << " value " << v.value << " tolerance " << v.tolerance << "\n";
        }
    }
    log << manifest.verdicts().size() << " verdicts, " << failed << " failed\n";
    if (code != kOk) return code;
    return failed ? kVerdictFailed : kOk;
}

namespace detail {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    int col(const std::string& name) const {
        const auto it = std::find(header.begin(), header.end(), name);
        return it == header.end() ? -1 : static_cast<int>(it - header.begin());
    }
};

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

inline Table read_table(const std::filesystem::path& f) {
    std::ifstream is(f);
    Table t;
    std::string line;
    if (std::getline(is, line)) t.header = split_csv(line);
    while (std::getline(is, line))
        if (!line.empty()) t.rows.push_back(split_csv(line));
    return t;
}

inline double cell(const std::vector<std::string>& row, int c) {
    if (c < 0 || c >= static_cast<int>(row.size())) return std::numeric_limits<double>::quiet_NaN();
    try {
        return std::stod(row[c]);
    } catch (const std::exception&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

}  // namespace detail

/// Long-format (series, x, y) table from a finished run directory.
inline int emit_plot_data(const std::filesystem::path& run_dir, std::ostream& log) {
    namespace fs = std::filesystem;
    if (!fs::is_regular_file(run_dir / "manifest.jsonl")) {
        log << "missing artifacts: no manifest.jsonl in " << run_dir.string() << "\n";
        return kMissingArtifacts;
    }
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(run_dir))
        if (e.is_regular_file() && e.path().extension() == ".csv" && e.path().filename() != "plot_data.csv") files.push_back(e.path());
    std::sort(files.begin(), files.end());

    std::ofstream os(run_dir / "plot_data.csv");
    os.precision(12);
    os << "series,x,y\n";
    long points = 0;
    auto put = [&](const std::string& series, double x, double y) {
        if (!std::isfinite(x) || !std::isfinite(y)) return;
        os << series << "," << x << "," << y << "\n";
        ++points;
    };
    for (const auto& f : files) {
        const std::string name = f.filename().string();
        const std::string base = fs::relative(f.parent_path(), run_dir).generic_string();
        const detail::Table t = detail::read_table(f);
        if (name == "harnack.csv") {
            // Z versus t: the minimum over the samples at each time
            int zc = t.col("Z_opt");
            if (zc < 0) zc = t.col("Z");
            std::map<double, double> zmin;
            for (const auto& r : t.rows) {
                const double tt = detail::cell(r, t.col("t")), z = detail::cell(r, zc);
                if (!zmin.count(tt)) zmin[tt] = z;
                zmin[tt] = std::min(zmin[tt], z);
            }
            for (const auto& [tt, z] : zmin) put(base + "/Z_min", tt, z);
        } else if (name.rfind("monitors", 0) == 0) {
            const std::string stem = base + "/" + f.stem().string();
            for (const auto& r : t.rows) {
                const double tt = detail::cell(r, t.col("t"));
                put(stem + "/min_eig_h", tt, detail::cell(r, t.col("min_eig_h")));
                put(stem + "/sup_Rm", tt, detail::cell(r, t.col("sup_Rm")));
            }
        } else if (name == "convergence.csv") {
            for (const auto& r : t.rows) {
                const double dx = detail::cell(r, t.col("dx"));
                put(base + "/metric_error", dx, detail::cell(r, t.col("metric_error")));
                put(base + "/h_error", dx, detail::cell(r, t.col("h_error")));
            }
        }
    }
    log << points << " points from " << files.size() << " tables\n";
    return kOk;
}

/// One line per bundled scenario: file, name, target, description.
inline int list_scenarios(const std::filesystem::path& dir, std::ostream& out, std::ostream& log) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) {
        log << "scenario directory not found: " << dir.string() << "\n";
        return kMissingArtifacts;
    }
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    int code = kOk;
    for (const auto& f : files) {
        try {
            const auto ss = load_scenarios(f);
            if (ss.empty()) out << f.filename().string() << "\t(empty)\n";
            for (const auto& s : ss) out << f.filename().string() << "\t" << s.name << "\t" << s.target << "\t" << s.description << "\n";
        } catch (const ParseError& e) {
            log << e.what() << "\n";
            code = kParseFailure;
        }
    }
    return code;
}

}  // namespace kahler::cli
