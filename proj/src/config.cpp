#include "apstag/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "apstag/errors.hpp"
#include "apstag/field_io.hpp"

namespace apstag {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

[[noreturn]] void bad(const std::string& where, std::string_view key, std::string_view value, const char* expect) {
    throw ConfigError(where + ": " + std::string(key) + " = '" + std::string(value) + "': expected " + expect);
}

double to_double(std::string_view key, std::string_view v, const std::string& where) {
    v = trim(v);
    double out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (v.empty() || res.ec != std::errc{} || res.ptr != v.data() + v.size()) bad(where, key, v, "a number");
    return out;
}

int to_int(std::string_view key, std::string_view v, const std::string& where) {
    v = trim(v);
    int out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (v.empty() || res.ec != std::errc{} || res.ptr != v.data() + v.size()) bad(where, key, v, "an integer");
    return out;
}

template <typename T, typename Conv>
std::vector<T> to_list(std::string_view key, std::string_view v, const std::string& where, Conv conv) {
    std::vector<T> out;
    v = trim(v);
    if (v.empty()) return out;
    while (true) {
        const auto comma = v.find(',');
        out.push_back(conv(key, v.substr(0, comma), where));
        if (comma == std::string_view::npos) break;
        v.remove_prefix(comma + 1);
    }
    return out;
}

template <typename T>
std::string join(const std::vector<T>& xs) {
    std::string out;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        if (k) out += ',';
        if constexpr (std::is_same_v<T, double>) out += format_number(xs[k]);
        else out += std::to_string(xs[k]);
    }
    return out;
}

template <typename T>
std::string opt(const std::optional<T>& v) {
    if (!v) return {};
    if constexpr (std::is_same_v<T, double>) return format_number(*v);
    else return std::to_string(*v);
}

}  // namespace

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = {
        "scenario",          "grid.n",
        "epsilon",           "t_final",
        "phi",               "safety",
        "angular.n_points",  "snapshots",
        "output.dir",        "geometry",
        "converge.n_list",   "converge.epsilons",
        "converge.reference_n",
        "stability.epsilons", "stability.h",
        "stability.sigma_s", "stability.sigma_a",
        "stability.phi_rule", "stability.safety",
        "stability.n_theta", "stability.map_theta",
    };
    return keys;
}

void set_config_value(RunConfig& c, std::string_view key, std::string_view raw, const std::string& where) {
    const std::string_view v = trim(raw);
    auto maybe_double = [&]() -> std::optional<double> {
        if (v.empty()) return std::nullopt;
        return to_double(key, v, where);
    };
    auto maybe_int = [&]() -> std::optional<int> {
        if (v.empty()) return std::nullopt;
        return to_int(key, v, where);
    };

    if (key == "scenario") c.scenario = std::string(v);
    else if (key == "grid.n") c.n = maybe_int();
    else if (key == "epsilon") c.epsilon = maybe_double();
    else if (key == "t_final") c.t_final = maybe_double();
    else if (key == "phi") c.phi = maybe_double();
    else if (key == "safety") c.safety = to_double(key, v, where);
    else if (key == "angular.n_points") c.angular_points = to_int(key, v, where);
    else if (key == "snapshots") c.snapshots = to_list<double>(key, v, where, to_double);
    else if (key == "output.dir") c.output_dir = std::string(v);
    else if (key == "geometry") c.geometry = std::string(v);
    else if (key == "converge.n_list") c.converge_n = to_list<int>(key, v, where, to_int);
    else if (key == "converge.epsilons") c.converge_epsilons = to_list<double>(key, v, where, to_double);
    else if (key == "converge.reference_n") c.converge_reference_n = maybe_int();
    else if (key == "stability.epsilons") c.stability_epsilons = to_list<double>(key, v, where, to_double);
    else if (key == "stability.h") c.stability_h = to_list<double>(key, v, where, to_double);
    else if (key == "stability.sigma_s") c.stability_sigma_s = to_list<double>(key, v, where, to_double);
    else if (key == "stability.sigma_a") c.stability_sigma_a = to_list<double>(key, v, where, to_double);
    else if (key == "stability.phi_rule") c.stability_phi_rule = std::string(v);
    else if (key == "stability.safety") c.stability_safety = to_double(key, v, where);
    else if (key == "stability.n_theta") c.stability_n_theta = to_int(key, v, where);
    else if (key == "stability.map_theta") c.stability_map_theta = to_int(key, v, where);
    else throw ConfigError(where + ": unknown key '" + std::string(key) + "'");
}

void apply_config_text(RunConfig& c, std::string_view text, const std::string& source_name) {
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string where = source_name + ":" + std::to_string(lineno);
        std::string_view l(line);
        const auto hash = l.find('#');
        if (hash != std::string_view::npos) l = l.substr(0, hash);
        l = trim(l);
        if (l.empty()) continue;
        const auto eq = l.find('=');
        if (eq == std::string_view::npos) throw ConfigError(where + ": expected 'key = value'");
        const auto key = trim(l.substr(0, eq));
        if (key.empty()) throw ConfigError(where + ": missing key");
        set_config_value(c, key, l.substr(eq + 1), where);
    }
}

RunConfig parse_config(std::string_view text, const std::string& source_name) {
    RunConfig c;
    apply_config_text(c, text, source_name);
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

std::string dump_config(const RunConfig& c) {
    std::ostringstream out;
    out << "scenario = " << c.scenario << '\n'
        << "grid.n = " << opt(c.n) << '\n'
        << "epsilon = " << opt(c.epsilon) << '\n'
        << "t_final = " << opt(c.t_final) << '\n'
        << "phi = " << opt(c.phi) << '\n'
        << "safety = " << format_number(c.safety) << '\n'
        << "angular.n_points = " << c.angular_points << '\n'
        << "snapshots = " << join(c.snapshots) << '\n'
        << "output.dir = " << c.output_dir << '\n'
        << "geometry = " << c.geometry << '\n'
        << "converge.n_list = " << join(c.converge_n) << '\n'
        << "converge.epsilons = " << join(c.converge_epsilons) << '\n'
        << "converge.reference_n = " << opt(c.converge_reference_n) << '\n'
        << "stability.epsilons = " << join(c.stability_epsilons) << '\n'
        << "stability.h = " << join(c.stability_h) << '\n'
        << "stability.sigma_s = " << join(c.stability_sigma_s) << '\n'
        << "stability.sigma_a = " << join(c.stability_sigma_a) << '\n'
        << "stability.phi_rule = " << c.stability_phi_rule << '\n'
        << "stability.safety = " << format_number(c.stability_safety) << '\n'
        << "stability.n_theta = " << c.stability_n_theta << '\n'
        << "stability.map_theta = " << c.stability_map_theta << '\n';
    return out.str();
}

void validate(const RunConfig& c) {
    if (c.n && *c.n < 2) throw ConfigError("grid.n must be at least 2, got " + std::to_string(*c.n));
    if (c.epsilon && !(*c.epsilon > 0)) throw ConfigError("epsilon must be positive");
    if (c.t_final && !(*c.t_final >= 0)) throw ConfigError("t_final must be nonnegative");
    if (c.phi && !(*c.phi >= 0)) throw ConfigError("phi must be nonnegative");
    if (!(c.safety > 0 && c.safety <= 1)) throw ConfigError("safety must lie in (0,1]");
    if (c.angular_points < 1) throw ConfigError("angular.n_points must be at least 1");
    if (!std::is_sorted(c.snapshots.begin(), c.snapshots.end())) throw ConfigError("snapshots must be sorted");
    if (!c.snapshots.empty() && c.snapshots.front() < 0) throw ConfigError("snapshots must be nonnegative");
    if (c.t_final && !c.snapshots.empty() && c.snapshots.back() > *c.t_final) {
        throw ConfigError("snapshots must not exceed t_final");
    }
    for (int n : c.converge_n) {
        if (n < 2) throw ConfigError("converge.n_list entries must be at least 2");
    }
    for (double e : c.converge_epsilons) {
        if (!(e > 0)) throw ConfigError("converge.epsilons entries must be positive");
    }
    if (c.stability_phi_rule != "bound" && c.stability_phi_rule != "inverse_eps2") {
        throw ConfigError("stability.phi_rule must be 'bound' or 'inverse_eps2'");
    }
    if (!(c.stability_safety > 0 && c.stability_safety <= 1)) throw ConfigError("stability.safety must lie in (0,1]");
    if (c.stability_n_theta < 8) throw ConfigError("stability.n_theta must be at least 8");
    if (c.stability_map_theta < 1) throw ConfigError("stability.map_theta must be at least 1");
}

std::string resolve_output_dir(const RunConfig& c) {
    if (!c.output_dir.empty()) return c.output_dir;
    if (const char* env = std::getenv("AP_OUTDIR"); env && *env) return env;
    return ".";
}

}  // namespace apstag
