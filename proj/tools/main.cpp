// Command-line workbench: one subcommand per experiment family, one JSON
// document per experiment.  Exit codes: 0 success, 2 config error, 3
// numerical failure.
#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "qaefem/bench.hpp"

using namespace qaefem;

namespace {

nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    try {
        nlohmann::json j;
        in >> j;
        return j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("invalid JSON in " + path + ": " + e.what());
    }
}

void report(const RunSummary& s, const std::string& artifacts) {
    std::cout << "converged=" << (s.converged ? "yes" : "no")
              << " final_residual=" << s.final_residual
              << " threshold=" << s.threshold;
    if (s.d_star > 0) std::cout << " D_star=" << s.d_star;
    if (s.sigma_star >= 0.0) std::cout << " sigma_star=" << s.sigma_star;
    std::cout << " wall_ms=" << s.wall_ms << " artifacts=" << artifacts << '\n';
}

struct Common {
    CLI::App* cmd = nullptr;
    CLI::Option* seed_opt = nullptr;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Annealing-eigensolver workbench for 1D Helmholtz FEM studies"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_override;
    std::uint64_t seed_override = 0;

    auto add_common = [&](const char* name, const char* desc, bool need_config) {
        CLI::App* sub = app.add_subcommand(name, desc);
        CLI::Option* c =
            sub->add_option("--config", config_path, "experiment JSON document");
        if (need_config) c->required();
        sub->add_option("--out", out_override,
                        "artifact directory (overrides config output_dir)");
        CLI::Option* s = sub->add_option("--seed", seed_override,
                                         "master seed (overrides config seed)");
        return Common{sub, s};
    };

    Common homog = add_common("homogeneous",
                              "source-free eigenmode study with deflation", true);
    Common helm = add_common(
        "helmholtz", "driven Helmholtz solve scanned over bit depths", true);
    Common ice =
        add_common("ice-sweep", "noise-threshold sweep over sigma_eta", true);
    Common cond = add_common(
        "cond-table",
        "condition numbers of the six reference (N, p, k0) cells; the optional "
        "config may set output_dir and nothing else",
        false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;  // --help exits clean, bad usage is a config error
    }

    try {
        if (cond.cmd->parsed()) {
            std::string dir = out_override.empty() ? "out" : out_override;
            if (!config_path.empty()) {
                nlohmann::json j = load_json(config_path);
                if (!j.is_object())
                    throw ConfigError("cond-table config must be a JSON object");
                for (const auto& item : j.items()) {
                    if (item.key() != "output_dir")
                        throw ConfigError("unknown cond-table config key '" +
                                          item.key() + "'");
                }
                if (out_override.empty() && j.contains("output_dir"))
                    dir = j.at("output_dir").get<std::string>();
            }
            auto rows = run_condition_table(default_condition_cells(), dir);
            for (const auto& r : rows)
                std::cout << "N=" << r.cell.elements << " p=" << r.cell.order
                          << " k0=" << r.cell.k0 << " cond=" << r.cond << '\n';
            std::cout << "artifacts=" << dir << '\n';
            return 0;
        }

        ExperimentConfig cfg = ExperimentConfig::from_json(load_json(config_path));
        if (!out_override.empty()) cfg.output_dir = out_override;
        Common* chosen = homog.cmd->parsed()  ? &homog
                         : helm.cmd->parsed() ? &helm
                                              : &ice;
        if (chosen->seed_opt->count() > 0) cfg.seed = seed_override;

        RunSummary sum;
        if (chosen == &homog) {
            sum = run_homogeneous(cfg);
        } else if (chosen == &helm) {
            sum = run_nonhomogeneous(cfg);
        } else {
            sum = run_ice_sweep(cfg);
        }
        report(sum, cfg.output_dir);
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    }
}
