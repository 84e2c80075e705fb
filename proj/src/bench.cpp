#include "qaefem/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <numbers>
#include <set>

#include "qaefem/densela.hpp"

namespace qaefem {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// %.17g round-trips every finite double; NaN/inf get fixed spellings so the
// files stay byte-stable across libc versions.
std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

using Row = std::vector<std::string>;

void write_csv(const fs::path& path, const Row& header, const std::vector<Row>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open " + path.string() + " for writing");
    auto line = [&out](const Row& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out << ',';
            out << fields[i];
        }
        out << '\n';
    };
    line(header);
    for (const Row& r : rows) line(r);
}

void write_timing(const fs::path& dir, double wall_ms) {
    nlohmann::json j;
    j["wall_ms"] = wall_ms;
    std::ofstream out(dir / "timing.json", std::ios::binary);
    out << j.dump(2) << '\n';
}

const Row kSummaryHeader = {"experiment", "N",         "p",
                            "k0",         "D",         "sigma_eta",
                            "seed",       "converged", "final_residual",
                            "D_star",     "sigma_star", "wall_ms"};

// wall_ms stays empty in the CSV (it lives in timing.json) so that re-runs
// with the same seed are byte-identical.
Row summary_row(const ExperimentConfig& cfg, const std::string& experiment, int d,
                double sigma, std::uint64_t seed, bool converged, double final_res) {
    return {experiment,
            std::to_string(cfg.elements),
            std::to_string(cfg.order),
            fmt(cfg.k0),
            std::to_string(d),
            fmt(sigma),
            std::to_string(seed),
            converged ? "1" : "0",
            fmt(final_res),
            "",
            "",
            ""};
}

void write_trace(const fs::path& path, const SolveTrace& trace) {
    static const Row header = {"iter",     "lambda",    "rel_residual",
                               "eig_disc", "mode_disc", "box_width"};
    std::vector<Row> rows;
    rows.reserve(trace.entries.size());
    for (std::size_t i = 0; i < trace.entries.size(); ++i) {
        const TraceEntry& e = trace.entries[i];
        rows.push_back({std::to_string(i), fmt(e.lambda), fmt(e.rel_residual),
                        fmt(e.eig_disc), fmt(e.mode_disc), fmt(e.box_width)});
    }
    write_csv(path, header, rows);
}

std::unique_ptr<Sampler> make_sampler(const ExperimentConfig& cfg, double sigma) {
    std::shared_ptr<const Sampler> base;
    if (cfg.solver == "exhaustive") {
        base = std::make_shared<ExhaustiveSampler>();
    } else {
        base = std::make_shared<SaSampler>(cfg.sa);
    }
    return std::make_unique<IceSampler>(std::move(base), IceConfig{sigma});
}

AqaeConfig make_aqae(const ExperimentConfig& cfg, std::size_t n_dof, int d,
                     std::pair<double, double> bracket) {
    AqaeConfig a;
    a.n_delta = cfg.n_delta;
    a.ratio = cfg.ratio;
    a.box.phi_min = Vector(n_dof, -cfg.box_half_width);
    a.box.phi_max = Vector(n_dof, cfg.box_half_width);
    a.box.bits = d;
    // Solver boxes use the symmetric grid: it never contains the box center
    // or the zero vector, either of which can freeze the box recursion (the
    // center is self-reinforcing, the zero vector wins any sub-level solve).
    a.box.weighting = BitWeighting::normalized;
    a.qae.lambda_min = bracket.first;
    a.qae.lambda_max = bracket.second;
    a.qae.n_lambda = cfg.n_lambda;
    return a;
}

bool within(double final_res, double threshold) {
    return std::isfinite(final_res) && final_res <= threshold;
}

// Orders of magnitude separating the first and last relative residual.  The
// first is 1 by construction, so this is -log10 of the final one; a NaN
// sentinel (zero-vector iterate) counts as no progress at all.
double residual_drop(double final_res) {
    if (std::isnan(final_res)) return 0.0;
    double d = -std::log10(final_res);
    if (!std::isfinite(d)) return 320.0;  // residual underflowed to exactly 0
    return d;
}

void require(bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
}

double json_number(const nlohmann::json& j, const char* key) {
    require(j.at(key).is_number(), std::string(key) + " must be a number");
    return j.at(key).get<double>();
}

int json_int(const nlohmann::json& j, const char* key) {
    require(j.at(key).is_number_integer(), std::string(key) + " must be an integer");
    return j.at(key).get<int>();
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    require(j.is_object(), "experiment config must be a JSON object");
    static const std::set<std::string> allowed = {
        "problem",   "N",           "p",         "k0",        "k0_pi",
        "n_modes",   "D",           "D_range",   "solver",    "sa",
        "sigma_eta", "sigma_range", "n_delta",   "n_lambda",  "ratio",
        "box_half_width", "threshold", "repeats", "seed",     "material",
        "source",    "output_dir"};
    for (const auto& item : j.items()) {
        require(allowed.count(item.key()) != 0,
                "unknown config key '" + item.key() + "'");
    }

    ExperimentConfig cfg;
    try {
        if (j.contains("problem")) cfg.problem = j.at("problem").get<std::string>();
        if (j.contains("N")) cfg.elements = json_int(j, "N");
        if (j.contains("p")) cfg.order = json_int(j, "p");

        require(!(j.contains("k0") && j.contains("k0_pi")),
                "give k0 either raw ('k0') or in units of pi ('k0_pi'), not both");
        if (j.contains("k0")) cfg.k0 = json_number(j, "k0");
        if (j.contains("k0_pi")) cfg.k0 = json_number(j, "k0_pi") * std::numbers::pi;

        if (j.contains("n_modes")) {
            require(cfg.problem == "homogeneous",
                    "n_modes only applies to the homogeneous problem");
            cfg.n_modes = json_int(j, "n_modes");
        }

        require(j.contains("D") != j.contains("D_range"),
                "exactly one of 'D' and 'D_range' is required");
        if (j.contains("D")) cfg.bits = json_int(j, "D");
        if (j.contains("D_range")) {
            const auto& r = j.at("D_range");
            require(r.is_array() && r.size() == 2, "D_range must be [lo, hi]");
            cfg.bits_range = DRange{r.at(0).get<int>(), r.at(1).get<int>()};
        }

        if (j.contains("solver")) cfg.solver = j.at("solver").get<std::string>();
        if (j.contains("sa")) {
            const auto& s = j.at("sa");
            require(s.is_object(), "'sa' must be an object");
            static const std::set<std::string> sa_keys = {"numreads", "sweeps",
                                                          "beta_min", "beta_max"};
            for (const auto& item : s.items())
                require(sa_keys.count(item.key()) != 0,
                        "unknown sa key '" + item.key() + "'");
            if (s.contains("numreads")) cfg.sa.numreads = json_int(s, "numreads");
            if (s.contains("sweeps")) cfg.sa.sweeps = json_int(s, "sweeps");
            if (s.contains("beta_min")) cfg.sa.beta_min = json_number(s, "beta_min");
            if (s.contains("beta_max")) cfg.sa.beta_max = json_number(s, "beta_max");
        }

        require(!(j.contains("sigma_eta") && j.contains("sigma_range")),
                "give either 'sigma_eta' or 'sigma_range', not both");
        if (j.contains("sigma_eta")) cfg.sigma_eta = json_number(j, "sigma_eta");
        if (j.contains("sigma_range")) {
            const auto& r = j.at("sigma_range");
            require(r.is_array() && !r.empty(), "sigma_range must be a non-empty array");
            for (const auto& v : r) cfg.sigma_range.push_back(v.get<double>());
        }

        if (j.contains("n_delta")) cfg.n_delta = json_int(j, "n_delta");
        if (j.contains("n_lambda")) cfg.n_lambda = json_int(j, "n_lambda");
        if (j.contains("ratio")) cfg.ratio = json_number(j, "ratio");
        if (j.contains("box_half_width"))
            cfg.box_half_width = json_number(j, "box_half_width");
        if (j.contains("threshold")) cfg.threshold = json_number(j, "threshold");
        if (j.contains("repeats")) cfg.repeats = json_int(j, "repeats");
        if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("material")) cfg.material = j.at("material").get<std::string>();
        if (j.contains("source")) cfg.source = j.at("source").get<std::string>();
        if (j.contains("output_dir"))
            cfg.output_dir = j.at("output_dir").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }

    cfg.validate();
    return cfg;
}

void ExperimentConfig::validate() const {
    require(problem == "homogeneous" || problem == "nonhomogeneous",
            "problem must be 'homogeneous' or 'nonhomogeneous'");
    require(elements >= 1, "N must be >= 1");
    require(order >= 1 && order <= 16, "p must be in 1..16");
    require(k0 >= 0.0, "k0 must be >= 0");
    require(n_modes >= 0, "n_modes must be >= 0");
    require((bits > 0) != bits_range.has_value(),
            "exactly one of D and D_range is required");
    if (bits_range) {
        require(bits_range->lo >= 1 && bits_range->lo <= bits_range->hi &&
                    bits_range->hi <= 24,
                "D_range must satisfy 1 <= lo <= hi <= 24");
    } else {
        require(bits >= 1 && bits <= 24, "D must be in 1..24");
    }
    require(solver == "exhaustive" || solver == "simulated_annealing",
            "solver must be 'exhaustive' or 'simulated_annealing'");
    if (solver == "exhaustive") {
        require(static_cast<long>(elements) * order * max_bits() <= 26,
                "exhaustive solver rejected: N*p*D exceeds 26 bits");
    }
    sa.validate();
    require(sigma_eta >= 0.0, "sigma_eta must be >= 0");
    for (std::size_t i = 0; i < sigma_range.size(); ++i) {
        require(sigma_range[i] >= 0.0, "sigma_range values must be >= 0");
        require(i == 0 || sigma_range[i] > sigma_range[i - 1],
                "sigma_range must be strictly ascending");
    }
    require(n_delta >= 1, "n_delta must be >= 1");
    require(n_lambda >= 1, "n_lambda must be >= 1");
    require(ratio > 0.0 && ratio < 1.0, "ratio must lie in (0, 1)");
    require(box_half_width > 0.0, "box_half_width must be > 0");
    require(threshold > 0.0, "threshold must be > 0");
    require(repeats >= 1, "repeats must be >= 1");
    require(material == "vacuum_sio2" || material == "uniform",
            "material must be 'vacuum_sio2' or 'uniform'");
    require(source == "sin2pi" || source == "zero",
            "source must be 'sin2pi' or 'zero'");
}

Material ExperimentConfig::make_material() const {
    return material == "uniform" ? Material::uniform_unit() : Material::vacuum_sio2();
}

FeProblem ExperimentConfig::assemble_problem() const {
    SourceFn src = default_source;
    if (source == "zero") src = [](double) { return 0.0; };
    return assemble(elements, order, k0, make_material(), src);
}

RunSummary run_homogeneous(const ExperimentConfig& cfg) {
    cfg.validate();
    require(cfg.problem == "homogeneous",
            "run_homogeneous requires problem=homogeneous");
    require(cfg.bits > 0, "the homogeneous study uses a single D, not a range");
    auto t0 = Clock::now();
    fs::create_directories(cfg.output_dir);

    FeProblem prob = cfg.assemble_problem();
    Gevp gevp = homogeneous_gevp(prob);
    AqaeConfig acfg =
        make_aqae(cfg, prob.n_dof, cfg.bits, homogeneous_bracket(gevp));
    auto sampler = make_sampler(cfg, cfg.sigma_eta);

    std::vector<ModeResult> modes =
        solve_modes(gevp, cfg.n_modes, acfg, *sampler, cfg.seed);

    std::vector<Row> summary;
    Row ref_header = {"mode", "lambda"};
    for (std::size_t i = 0; i < prob.n_dof; ++i)
        ref_header.push_back("phi_" + std::to_string(i));
    std::vector<Row> references;

    RunSummary out;
    out.threshold = cfg.threshold;
    out.converged = true;
    out.final_residual = 0.0;
    for (int n = 0; n < cfg.n_modes; ++n) {
        const SolveTrace& trace = modes[n].trace;
        write_trace(fs::path(cfg.output_dir) / ("trace_mode" + std::to_string(n) + ".csv"),
                    trace);
        double final_res = trace.final_entry().rel_residual;
        bool ok = within(final_res, cfg.threshold);
        out.converged = out.converged && ok;
        if (std::isnan(final_res) || std::isnan(out.final_residual))
            out.final_residual = std::numeric_limits<double>::quiet_NaN();
        else
            out.final_residual = std::max(out.final_residual, final_res);
        summary.push_back(summary_row(cfg, "homogeneous/mode" + std::to_string(n),
                                      cfg.bits, cfg.sigma_eta, cfg.seed, ok,
                                      final_res));
        Row ref = {std::to_string(n), fmt(trace.reference.value)};
        for (double v : trace.reference.vector) ref.push_back(fmt(v));
        references.push_back(std::move(ref));
    }

    write_csv(fs::path(cfg.output_dir) / "references.csv", ref_header, references);
    write_csv(fs::path(cfg.output_dir) / "summary.csv", kSummaryHeader, summary);
    out.wall_ms = elapsed_ms(t0);
    write_timing(cfg.output_dir, out.wall_ms);
    return out;
}

RunSummary run_nonhomogeneous(const ExperimentConfig& cfg) {
    cfg.validate();
    require(cfg.problem == "nonhomogeneous",
            "run_nonhomogeneous requires problem=nonhomogeneous");
    auto t0 = Clock::now();
    fs::create_directories(cfg.output_dir);

    FeProblem prob = cfg.assemble_problem();
    NormalGevp ng = normal_gevp(prob);
    auto bracket = normal_bracket(ng.gevp.m, ng.b);
    auto sampler = make_sampler(cfg, cfg.sigma_eta);

    int d_lo = cfg.bits_range ? cfg.bits_range->lo : cfg.bits;
    int d_hi = cfg.bits_range ? cfg.bits_range->hi : cfg.bits;
    int majority = cfg.repeats / 2 + 1;

    std::vector<Row> summary;
    RunSummary out;
    out.threshold = cfg.threshold;
    out.final_residual = std::numeric_limits<double>::quiet_NaN();

    for (int d = d_lo; d <= d_hi && out.d_star == 0; ++d) {
        AqaeConfig acfg = make_aqae(cfg, prob.n_dof, d, bracket);
        int conv = 0, fail = 0;
        const TraceEntry* witness = nullptr;
        TraceEntry witness_entry{};
        double best_final = std::numeric_limits<double>::quiet_NaN();
        for (int rep = 0; rep < cfg.repeats; ++rep) {
            std::uint64_t seed_r = mix_seed(cfg.seed, static_cast<std::uint64_t>(d),
                                            static_cast<std::uint64_t>(rep));
            SolveTrace trace = aqae_solve(ng.gevp, acfg, *sampler, seed_r);
            write_trace(fs::path(cfg.output_dir) /
                            ("trace_D" + std::to_string(d) + "_rep" +
                             std::to_string(rep) + ".csv"),
                        trace);
            double final_res = trace.final_entry().rel_residual;
            bool ok = within(final_res, cfg.threshold);
            if (ok) {
                ++conv;
                if (!witness) {
                    witness_entry = trace.final_entry();
                    witness = &witness_entry;
                }
            } else {
                ++fail;
            }
            if (std::isnan(best_final) ||
                (std::isfinite(final_res) && final_res < best_final))
                best_final = final_res;
            summary.push_back(summary_row(
                cfg,
                "nonhomogeneous/D" + std::to_string(d) + "/rep" + std::to_string(rep),
                d, cfg.sigma_eta, seed_r, ok, final_res));
            // Stop once the majority verdict for this D cannot change.
            if (conv >= majority || fail > cfg.repeats - majority) break;
        }
        out.final_residual = best_final;
        if (conv >= majority) {
            out.d_star = d;
            out.converged = true;
            out.final_residual = witness_entry.rel_residual;
            Vector recovered =
                recover_solution(witness_entry.lambda, witness_entry.phi, ng.b);
            Vector direct = solve_spd(ng.gevp.m, ng.b);
            std::vector<Row> rec;
            for (std::size_t i = 0; i < direct.size(); ++i)
                rec.push_back({fmt(prob.dof_x[i]), fmt(recovered[i]), fmt(direct[i])});
            write_csv(fs::path(cfg.output_dir) / "recovery.csv",
                      {"x", "phi_recovered", "phi_direct"}, rec);
        }
    }

    if (out.d_star > 0)
        for (Row& r : summary) r[9] = std::to_string(out.d_star);
    write_csv(fs::path(cfg.output_dir) / "summary.csv", kSummaryHeader, summary);
    out.wall_ms = elapsed_ms(t0);
    write_timing(cfg.output_dir, out.wall_ms);
    return out;
}

RunSummary run_ice_sweep(const ExperimentConfig& cfg) {
    cfg.validate();
    require(!cfg.sigma_range.empty(), "ICE sweep requires sigma_range");
    require(cfg.repeats >= 3, "ICE sweep requires repeats >= 3");
    require(cfg.bits > 0, "ICE sweep uses a single D, not a range");
    auto t0 = Clock::now();
    fs::create_directories(cfg.output_dir);

    FeProblem prob = cfg.assemble_problem();
    Gevp gevp;
    std::pair<double, double> bracket;
    if (cfg.problem == "homogeneous") {
        gevp = homogeneous_gevp(prob);
        bracket = homogeneous_bracket(gevp);
    } else {
        NormalGevp ng = normal_gevp(prob);
        gevp = ng.gevp;
        bracket = normal_bracket(ng.gevp.m, ng.b);
    }
    AqaeConfig acfg = make_aqae(cfg, prob.n_dof, cfg.bits, bracket);

    std::vector<Row> summary;
    std::vector<Row> stats;
    RunSummary out;
    out.threshold = cfg.threshold;
    out.final_residual = std::numeric_limits<double>::quiet_NaN();

    for (std::size_t si = 0; si < cfg.sigma_range.size(); ++si) {
        double sigma = cfg.sigma_range[si];
        auto sampler = make_sampler(cfg, sigma);
        double sum = 0.0, sum_sq = 0.0;
        double worst_baseline = 0.0;
        for (int rep = 0; rep < cfg.repeats; ++rep) {
            std::uint64_t seed_r = mix_seed(cfg.seed, static_cast<std::uint64_t>(si),
                                            static_cast<std::uint64_t>(rep));
            SolveTrace trace = aqae_solve(gevp, acfg, *sampler, seed_r);
            write_trace(fs::path(cfg.output_dir) /
                            ("trace_s" + std::to_string(si) + "_rep" +
                             std::to_string(rep) + ".csv"),
                        trace);
            double final_res = trace.final_entry().rel_residual;
            double drop = residual_drop(final_res);
            sum += drop;
            sum_sq += drop * drop;
            if (si == 0) {
                if (std::isnan(final_res) || std::isnan(worst_baseline))
                    worst_baseline = std::numeric_limits<double>::quiet_NaN();
                else
                    worst_baseline = std::max(worst_baseline, final_res);
            }
            summary.push_back(summary_row(
                cfg, "ice/s" + std::to_string(si) + "/rep" + std::to_string(rep),
                cfg.bits, sigma, seed_r, within(final_res, cfg.threshold), final_res));
        }
        double mean = sum / cfg.repeats;
        double var = (sum_sq - cfg.repeats * mean * mean) / (cfg.repeats - 1);
        double std_dev = std::sqrt(std::max(0.0, var));
        stats.push_back({fmt(sigma), fmt(mean), fmt(std_dev)});
        if (si == 0) {
            out.converged = mean >= 1.0;
            out.final_residual = worst_baseline;
        }
        if (out.sigma_star < 0.0 && mean < 1.0) out.sigma_star = sigma;
    }

    if (out.sigma_star >= 0.0)
        for (Row& r : summary) r[10] = fmt(out.sigma_star);
    write_csv(fs::path(cfg.output_dir) / "summary.csv", kSummaryHeader, summary);
    write_csv(fs::path(cfg.output_dir) / "ice_stats.csv",
              {"sigma_eta", "mean_drop", "std_drop"}, stats);
    out.wall_ms = elapsed_ms(t0);
    write_timing(cfg.output_dir, out.wall_ms);
    return out;
}

std::vector<CondCell> default_condition_cells() {
    const double pi = std::numbers::pi;
    return {{10, 1, 0.0}, {10, 1, pi}, {10, 1, 2 * pi},
            {2, 5, 0.0},  {2, 5, pi},  {2, 5, 2 * pi}};
}

std::vector<CondRow> run_condition_table(const std::vector<CondCell>& cells,
                                         const std::string& output_dir) {
    fs::create_directories(output_dir);
    std::vector<CondRow> rows;
    std::vector<Row> csv;
    for (const CondCell& cell : cells) {
        FeProblem prob = assemble(cell.elements, cell.order, cell.k0);
        double cond = condition_number(normal_equations(prob).a);
        rows.push_back({cell, cond});
        csv.push_back({std::to_string(cell.elements), std::to_string(cell.order),
                       fmt(cell.k0), fmt(cond)});
    }
    write_csv(fs::path(output_dir) / "cond_table.csv", {"N", "p", "k0", "cond"}, csv);
    return rows;
}

}  // namespace qaefem
