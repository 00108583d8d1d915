#pragma once

// Flat `key = value` run configuration. Every command-line flag maps to one
// key, so a file and the flags describe the same object; flags are applied
// after the file and win.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace apstag {

struct RunConfig {
    std::string scenario = "gauss";
    std::optional<int> n;                 ///< grid.n, scenario default when unset
    std::optional<double> epsilon;
    std::optional<double> t_final;
    std::optional<double> phi;
    double safety = 0.9;
    int angular_points = 16;
    std::vector<double> snapshots;
    std::string output_dir;               ///< empty: $AP_OUTDIR, then "."
    std::string geometry;                 ///< two_material absorbers, empty: bundled file

    std::vector<int> converge_n;
    std::vector<double> converge_epsilons;
    std::optional<int> converge_reference_n;

    std::vector<double> stability_epsilons;
    std::vector<double> stability_h;
    std::vector<double> stability_sigma_s;
    std::vector<double> stability_sigma_a;
    std::string stability_phi_rule = "bound";   ///< "bound" or "inverse_eps2"
    double stability_safety = 1.0;
    int stability_n_theta = 4096;
    int stability_map_theta = 64;               ///< theta samples written per tuple

    bool operator==(const RunConfig&) const = default;
};

/// Known keys in dump order.
const std::vector<std::string>& config_keys();

/// Sets one key from its textual value. `where` prefixes error messages
/// (e.g. "run.cfg:3" or "--N"). Throws ConfigError.
void set_config_value(RunConfig& c, std::string_view key, std::string_view value, const std::string& where);

/// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
void apply_config_text(RunConfig& c, std::string_view text, const std::string& source_name);
RunConfig parse_config(std::string_view text, const std::string& source_name = "<config>");
RunConfig load_config(const std::string& path);

/// Every key with its effective value (unset optionals as empty values).
std::string dump_config(const RunConfig& c);

/// Range and consistency checks that do not depend on the scenario.
void validate(const RunConfig& c);

/// output_dir, else $AP_OUTDIR, else ".".
std::string resolve_output_dir(const RunConfig& c);

}  // namespace apstag
