#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qkgeo/cli_config.hpp"
#include "qkgeo/tensorlab.hpp"

namespace {

using qkgeo::cli::ConfigError;
using qkgeo::cli::RunConfig;

struct RawArgs {
    std::vector<std::string> targets, checks, tols;
    std::string config_path, out_path, format, sweep;
    unsigned seed = 0;
    int samples = 0;
    bool seed_set = false, samples_set = false;
};

void add_common_flags(CLI::App* cmd, RawArgs& raw) {
    cmd->add_option("--config", raw.config_path, "key=value configuration file");
    cmd->add_option("--target", raw.targets, "model identifier (repeatable)");
    cmd->add_option("--checks", raw.checks, "check names, or 'all' (repeatable)");
    cmd->add_option("--tol", raw.tols, "tolerance override check=value (repeatable)");
    cmd->add_option("--samples", raw.samples, "sample points per check");
    cmd->add_option("--seed", raw.seed, "sample plan seed");
    cmd->add_option("--out", raw.out_path, "output file path");
    cmd->add_option("--format", raw.format, "output format: text | json");
    cmd->add_option("--sweep", raw.sweep, "sweep spec quantity:param:lo:hi:steps");
}

RunConfig resolve_config(const CLI::App* cmd, const RawArgs& raw) {
    RunConfig cfg;
    if (cmd->count("--config")) qkgeo::cli::load_config_file(raw.config_path, cfg);
    // command-line flags override file values
    if (cmd->count("--target")) cfg.targets = raw.targets;
    if (cmd->count("--checks")) cfg.checks = raw.checks;
    if (cmd->count("--tol")) {
        cfg.tol_overrides.clear();
        for (const auto& item : raw.tols) qkgeo::cli::parse_tol_item(item, cfg.tol_overrides);
    }
    if (cmd->count("--samples")) cfg.samples = raw.samples;
    if (cmd->count("--seed")) cfg.seed = raw.seed;
    if (cmd->count("--out")) cfg.out_path = raw.out_path;
    if (cmd->count("--format")) cfg.format = raw.format;
    if (cmd->count("--sweep")) cfg.sweep = qkgeo::cli::parse_sweep(raw.sweep);
    qkgeo::cli::apply_env_seed(cfg);
    if (cfg.format != "text" && cfg.format != "json")
        throw ConfigError("format must be 'text' or 'json', got: " + cfg.format);
    if (cfg.samples < 0) throw ConfigError("samples must be non-negative");
    return cfg;
}

int cmd_verify(const RunConfig& cfg) {
    std::vector<std::string> targets =
        cfg.targets.empty() ? std::vector<std::string>{"gabc:0,1,1,-1"} : cfg.targets;
    const bool all =
        cfg.checks.empty() || (cfg.checks.size() == 1 && cfg.checks[0] == "all");
    std::vector<qkgeo::verify::CheckSpec> specs;
    for (const std::string& target : targets) {
        if (all) {
            for (auto s : qkgeo::verify::default_suite(target)) specs.push_back(std::move(s));
        } else {
            for (const std::string& name : cfg.checks) {
                qkgeo::verify::CheckSpec s;
                s.name = name;
                s.target = target;
                // validate the names up front so bad input exits 2, not 1
                qkgeo::verify::default_tolerance(name);
                qkgeo::verify::parse_target(target);
                specs.push_back(std::move(s));
            }
        }
    }
    for (auto& s : specs) {
        s.seed = cfg.seed;
        if (cfg.samples > 0) s.sample_count = cfg.samples;
        auto it = cfg.tol_overrides.find(s.name);
        if (it != cfg.tol_overrides.end()) s.tolerance = it->second;
    }
    std::vector<qkgeo::verify::Report> reports = qkgeo::verify::run_suite(specs);
    std::cout << qkgeo::cli::summarize(reports);
    bool ok = true;
    for (const auto& r : reports) ok = ok && r.verdict;
    std::cout << (ok ? "all checks passed" : "CHECK FAILURES PRESENT") << " (" << reports.size()
              << " checks)\n";
    if (!cfg.out_path.empty()) {
        std::ofstream out(cfg.out_path);
        if (!out) throw ConfigError("cannot open output file: " + cfg.out_path);
        if (cfg.format == "json")
            out << qkgeo::cli::reports_to_json(cfg, reports).dump(2) << "\n";
        else
            out << qkgeo::cli::summarize(reports);
    }
    return ok ? 0 : 1;
}

int cmd_sweep(const RunConfig& cfg) {
    if (!cfg.sweep) throw ConfigError("sweep requires a --sweep spec");
    const qkgeo::cli::SweepSpec& sw = *cfg.sweep;
    if (sw.quantity != "curvnorm" && sw.quantity != "trR2")
        throw ConfigError("unknown sweep quantity: " + sw.quantity + " (use curvnorm)");
    if (sw.param != "rho") throw ConfigError("unknown sweep parameter: " + sw.param + " (use rho)");
    std::string target = cfg.targets.empty() ? "gabc:0,1,1,-1" : cfg.targets[0];
    qkgeo::verify::ModelRef ref = qkgeo::verify::parse_target(target);
    if (ref.kind != qkgeo::verify::ModelRef::Kind::gabc || ref.perturbed || ref.noflip)
        throw ConfigError("sweep targets must be pure gabc models, got: " + target);
    qkgeo::MetricField g = qkgeo::gabc_metric(ref.params);

    std::ostringstream csv;
    csv.setf(std::ios::scientific);
    csv.precision(12);
    csv << "param,value,quantity,formula,numeric,abs_diff\n";
    bool flagged = false;
    for (int i = 0; i < sw.steps; ++i) {
        const double rho =
            sw.steps == 1 ? sw.lo : sw.lo + (sw.hi - sw.lo) * double(i) / double(sw.steps - 1);
        qkgeo::Point p = {rho, 0.0, 0.0, 0.0};
        if (!g.chart().contains(p)) {
            csv << sw.param << "," << rho << "," << sw.quantity << ",nan,nan,nan\n";
            std::cerr << "sweep: rho=" << rho << " outside the admissible domain\n";
            flagged = true;
            continue;
        }
        const double formula = qkgeo::curvature_norm_formula(ref.params, rho);
        const double numeric = qkgeo::tl::curvature_norm(g, p);
        csv << sw.param << "," << rho << "," << sw.quantity << "," << formula << "," << numeric
            << "," << std::fabs(numeric - formula) << "\n";
    }
    if (cfg.out_path.empty()) {
        std::cout << csv.str();
    } else {
        std::ofstream out(cfg.out_path);
        if (!out) throw ConfigError("cannot open output file: " + cfg.out_path);
        out << csv.str();
    }
    return flagged ? 1 : 0;
}

int cmd_list() {
    std::cout << "checks:\n";
    for (const auto& n : qkgeo::verify::check_names()) std::cout << "  " << n << "\n";
    std::cout << "models:\n";
    for (const auto& n : qkgeo::verify::model_patterns()) std::cout << "  " << n << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"coordinate-chart verification suite for quaternionic Kahler geometry"};
    app.require_subcommand(1);
    RawArgs raw_verify, raw_sweep;
    CLI::App* verify_cmd = app.add_subcommand("verify", "run named checks against model targets");
    add_common_flags(verify_cmd, raw_verify);
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "formula-vs-numeric CSV sweep");
    add_common_flags(sweep_cmd, raw_sweep);
    CLI::App* list_cmd = app.add_subcommand("list", "print registered checks and models");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (list_cmd->parsed()) return cmd_list();
        if (verify_cmd->parsed()) return cmd_verify(resolve_config(verify_cmd, raw_verify));
        return cmd_sweep(resolve_config(sweep_cmd, raw_sweep));
    } catch (const qkgeo::verify::RegistryError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
