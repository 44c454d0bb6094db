#pragma once

#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qkgeo/verify.hpp"

namespace qkgeo {
namespace cli {

struct SweepSpec {
    std::string quantity;  // currently "curvnorm" (tr R^2 vs the closed formula)
    std::string param;     // currently "rho"
    double lo = 0.0, hi = 0.0;
    int steps = 0;
};

struct RunConfig {
    std::vector<std::string> targets;            // empty -> default target
    std::vector<std::string> checks;             // empty or {"all"} -> full suite
    std::map<std::string, double> tol_overrides;
    unsigned seed = 42;
    int samples = 0;  // 0 -> per-check default
    std::string out_path;
    std::string format = "text";
    std::optional<SweepSpec> sweep;
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

inline std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == sep) {
            if (!trim(cur).empty()) out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    if (!trim(cur).empty()) out.push_back(trim(cur));
    return out;
}

inline double parse_double(const std::string& s, const std::string& what) {
    try {
        size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw ConfigError("trailing characters in " + what + ": " + s);
        return v;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        throw ConfigError("cannot parse " + what + ": " + s);
    }
}

inline SweepSpec parse_sweep(const std::string& s) {
    auto parts = split_list(s, ':');
    if (parts.size() != 5)
        throw ConfigError("sweep spec must be quantity:param:lo:hi:steps, got: " + s);
    SweepSpec sw;
    sw.quantity = parts[0];
    sw.param = parts[1];
    sw.lo = parse_double(parts[2], "sweep lower bound");
    sw.hi = parse_double(parts[3], "sweep upper bound");
    try {
        size_t pos = 0;
        sw.steps = std::stoi(parts[4], &pos);
        if (pos != parts[4].size() || sw.steps < 0) throw ConfigError("bad sweep step count");
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        throw ConfigError("cannot parse sweep step count: " + parts[4]);
    }
    return sw;
}

inline void parse_tol_item(const std::string& item, std::map<std::string, double>& out) {
    size_t eq = item.find('=');
    if (eq == std::string::npos)
        throw ConfigError("tolerance override must be check=value, got: " + item);
    std::string name = trim(item.substr(0, eq));
    double v = parse_double(trim(item.substr(eq + 1)), "tolerance for " + name);
    if (v <= 0) throw ConfigError("tolerance must be positive: " + item);
    out[name] = v;
}

/// Documented key=value configuration file: one `key = value` pair per line,
/// '#' starts a comment. Keys: target, checks, tol, seed, samples, out,
/// format, sweep. List values are comma-separated, except targets, which are
/// separated by ';' because model identifiers themselves contain commas.
inline void load_config_file(const std::string& path, RunConfig& cfg) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key == "target")
            cfg.targets = split_list(val, ';');
        else if (key == "checks")
            cfg.checks = split_list(val, ',');
        else if (key == "tol")
            for (const auto& item : split_list(val, ',')) parse_tol_item(item, cfg.tol_overrides);
        else if (key == "seed")
            cfg.seed = unsigned(parse_double(val, "seed"));
        else if (key == "samples")
            cfg.samples = int(parse_double(val, "samples"));
        else if (key == "out")
            cfg.out_path = val;
        else if (key == "format")
            cfg.format = val;
        else if (key == "sweep")
            cfg.sweep = parse_sweep(val);
        else
            throw ConfigError(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
}

/// QKGEO_SEED overrides both the config file and the command line.
inline void apply_env_seed(RunConfig& cfg) {
    if (const char* env = std::getenv("QKGEO_SEED")) {
        std::string s = trim(env);
        if (!s.empty()) cfg.seed = unsigned(parse_double(s, "QKGEO_SEED"));
    }
}

inline nlohmann::json config_to_json(const RunConfig& cfg) {
    nlohmann::json j;
    j["targets"] = cfg.targets;
    j["checks"] = cfg.checks;
    j["seed"] = cfg.seed;
    j["samples"] = cfg.samples;
    j["format"] = cfg.format;
    return j;
}

inline nlohmann::json reports_to_json(const RunConfig& cfg,
                                      const std::vector<verify::Report>& reports) {
    nlohmann::json doc;
    doc["version"] = "1";
    doc["config"] = config_to_json(cfg);
    doc["reports"] = nlohmann::json::array();
    for (const verify::Report& r : reports) {
        nlohmann::json jr;
        jr["name"] = r.check.name;
        jr["target"] = r.check.target;
        jr["verdict"] = r.verdict ? "pass" : "fail";
        jr["max_abs"] = r.residual.max_abs;
        jr["mean_abs"] = r.residual.mean_abs;
        jr["argmax_point"] = r.residual.argmax_point;
        doc["reports"].push_back(std::move(jr));
    }
    return doc;
}

inline std::string summary_line(const std::string& name, const std::string& target,
                                const std::string& verdict, double max_abs, double mean_abs) {
    std::ostringstream os;
    os.setf(std::ios::scientific);
    os.precision(6);
    os << verdict << "  " << name << "  " << target << "  max=" << max_abs
       << "  mean=" << mean_abs;
    return os.str();
}

inline std::string summarize(const std::vector<verify::Report>& reports) {
    std::ostringstream os;
    for (const verify::Report& r : reports)
        os << summary_line(r.check.name, r.check.target, r.verdict ? "pass" : "fail",
                           r.residual.max_abs, r.residual.mean_abs)
           << "\n";
    return os.str();
}

/// Re-summarize a serialized report document; matches summarize() exactly.
inline std::string summarize_json(const nlohmann::json& doc) {
    std::ostringstream os;
    for (const auto& jr : doc.at("reports"))
        os << summary_line(jr.at("name").get<std::string>(), jr.at("target").get<std::string>(),
                           jr.at("verdict").get<std::string>(), jr.at("max_abs").get<double>(),
                           jr.at("mean_abs").get<double>())
           << "\n";
    return os.str();
}

}  // namespace cli
}  // namespace qkgeo
