#include "apstag/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#include "apstag/config.hpp"
#include "apstag/errors.hpp"
#include "apstag/field_io.hpp"
#include "apstag/harness.hpp"
#include "apstag/scenarios.hpp"
#include "apstag/stability.hpp"

namespace apstag {

namespace {

struct Flag {
    const char* name;
    const char* key;
    const char* help;
};

constexpr Flag kFlags[] = {
    {"--scenario", "scenario", "mms, gauss, variable_scattering, two_material, phi_stability"},
    {"--N", "grid.n", "cells per axis"},
    {"--epsilon", "epsilon", "mean free path"},
    {"--t-final", "t_final", "final time"},
    {"--phi", "phi", "relaxation parameter override"},
    {"--safety", "safety", "CFL safety factor in (0,1]"},
    {"--angular-points", "angular.n_points", "Gauss points per quadrant"},
    {"--snapshots", "snapshots", "comma-separated snapshot times"},
    {"--outdir", "output.dir", "output directory (default $AP_OUTDIR or .)"},
    {"--geometry", "geometry", "absorber file for two_material"},
    {"--N-list", "converge.n_list", "comma-separated grid sizes"},
    {"--epsilons", "converge.epsilons", "comma-separated epsilon values"},
    {"--reference-N", "converge.reference_n", "reference grid when no exact density exists"},
    {"--stab-epsilons", "stability.epsilons", "epsilon values of the sweep"},
    {"--stab-h", "stability.h", "mesh sizes of the sweep"},
    {"--stab-sigma-s", "stability.sigma_s", "scattering values of the sweep"},
    {"--stab-sigma-a", "stability.sigma_a", "absorption values of the sweep"},
    {"--phi-rule", "stability.phi_rule", "bound or inverse_eps2"},
    {"--stab-safety", "stability.safety", "fraction of the step-size bound"},
    {"--n-theta", "stability.n_theta", "modes scanned per tuple"},
    {"--map-theta", "stability.map_theta", "modes written per tuple"},
};

struct Parsed {
    std::string config_file;
    std::map<std::string, std::string> values;
};

void register_flags(CLI::App* sub, Parsed& p) {
    sub->add_option("--config", p.config_file, "key = value configuration file");
    for (const auto& f : kFlags) sub->add_option(f.name, p.values[f.key], f.help);
}

RunConfig effective_config(const Parsed& p, const CLI::App* sub) {
    RunConfig c;
    if (!p.config_file.empty()) c = load_config(p.config_file);
    for (const auto& f : kFlags) {
        if (sub->count(f.name) > 0) set_config_value(c, f.key, p.values.at(f.key), f.name);
    }
    validate(c);
    return c;
}

Scenario make_scenario(const RunConfig& c, std::optional<double> epsilon) {
    Scenario s = scenario_by_name(c.scenario, epsilon ? epsilon : c.epsilon, c.geometry);
    if (c.n) s.n = *c.n;
    if (c.t_final) s.t_final = *c.t_final;
    if (c.phi) s.phi = *c.phi;
    if (!c.snapshots.empty() && c.snapshots.back() > s.t_final) {
        throw ConfigError("snapshots must not exceed t_final = " + format_number(s.t_final));
    }
    return s;
}

std::string diagnostics_csv(const std::vector<StepDiagnostics<double>>& d) {
    std::ostringstream out;
    out << "step,t,dt,mass,max_rho\n";
    for (const auto& r : d) {
        out << r.step << ',' << format_number(r.t) << ',' << format_number(r.dt) << ',' << format_number(r.mass)
            << ',' << format_number(r.max_rho) << '\n';
    }
    return out.str();
}

int cmd_run(const RunConfig& c, std::ostream& out, std::ostream& err) {
    const Scenario s = make_scenario(c, std::nullopt);
    const std::filesystem::path dir = resolve_output_dir(c);
    SimulationOptions opt;
    opt.angular_points = c.angular_points;
    opt.safety = c.safety;
    opt.snapshot_times = c.snapshots;
    std::vector<StepDiagnostics<double>> diag;
    opt.on_step = [&](const StepDiagnostics<double>& d) { diag.push_back(d); };
    GridGeometry<double> g = s.grid();
    opt.on_snapshot = [&](double t, const ParityState<double>&, const RField<double>& rho) {
        write_field(dir, "rho_t" + format_number(t), rho, g);
    };
    try {
        const Simulation sim = simulate(s, opt);
        write_atomic(dir / "diagnostics.csv", diagnostics_csv(diag));
        write_field(dir, "rho_final", sim.result.rho, sim.grid);
        const auto& last = diag.back();
        out << "status=ok scenario=" << s.name << " N=" << sim.grid.nx << " epsilon=" << format_number(s.epsilon)
            << " steps=" << sim.result.steps << " t=" << format_number(last.t) << " dt=" << format_number(sim.result.dt)
            << " phi=" << format_number(sim.result.phi) << " max_rho=" << format_number(last.max_rho)
            << " mass=" << format_number(last.mass) << '\n';
        return exit_ok;
    } catch (const NumericOverflow& e) {
        write_atomic(dir / "diagnostics.csv", diagnostics_csv(diag));
        err << "error=numeric_overflow step=" << e.step() << " t=" << format_number(e.time()) << '\n';
        return exit_unstable;
    }
}

int cmd_converge(const RunConfig& c, std::ostream& out) {
    if (c.converge_n.empty()) throw ConfigError("converge: converge.n_list (--N-list) is empty");
    ConvergenceRequest req;
    req.make = [&](double eps) { return make_scenario(c, eps); };
    req.n_list = c.converge_n;
    req.epsilons = c.converge_epsilons;
    if (req.epsilons.empty()) req.epsilons.push_back(make_scenario(c, std::nullopt).epsilon);
    req.reference_n = c.converge_reference_n;
    req.angular_points = c.angular_points;
    req.safety = c.safety;
    req.on_row = [&](const ConvergenceRow& r) {
        out << "scenario=" << r.scenario << " epsilon=" << format_number(r.epsilon) << " N=" << r.n
            << " branch=" << r.branch << " error=" << format_number(r.error);
        if (r.order_vs_prev) out << " order=" << format_number(*r.order_vs_prev);
        out << '\n';
    };
    const auto rows = run_convergence_table(req);
    write_atomic(std::filesystem::path(resolve_output_dir(c)) / "convergence.csv", convergence_csv(rows));
    return exit_ok;
}

int cmd_stability(const RunConfig& c, std::ostream& out) {
    std::ostringstream map, verdicts;
    map << "epsilon,h,dt,phi,theta,radius\n";
    verdicts << "epsilon,h,sigma_s,sigma_a,dt,phi,timestep_ok,phi_ok,worst_theta,worst_radius,pass\n";
    std::size_t tuples = 0, passed = 0, skipped = 0;
    double max_radius = 0;
    for (double eps : c.stability_epsilons) {
        for (double h : c.stability_h) {
            for (double ss : c.stability_sigma_s) {
                for (double sa : c.stability_sigma_a) {
                    GrowthParams<double> p{eps, ss, sa, 0, h, 0, 0};
                    const double st = p.sigma_t();
                    if (!(eps > 0 && h > 0 && st > 0 && ss >= 0 && sa >= 0)) {
                        ++skipped;
                        continue;
                    }
                    p.dt = c.stability_safety * stable_timestep_bound(eps, h, st, sa);
                    p.phi = c.stability_phi_rule == "bound" ? relaxation_parameter_bound(eps, h, st) : 1 / (eps * eps);
                    const auto rep = certify_proposition(p, c.stability_n_theta);
                    ++tuples;
                    if (rep.radius_ok) ++passed;
                    max_radius = std::max(max_radius, rep.worst_radius);
                    verdicts << format_number(eps) << ',' << format_number(h) << ',' << format_number(ss) << ','
                             << format_number(sa) << ',' << format_number(p.dt) << ',' << format_number(p.phi) << ','
                             << rep.timestep_ok << ',' << rep.phi_ok << ',' << format_number(rep.worst_theta) << ','
                             << format_number(rep.worst_radius) << ',' << rep.pass() << '\n';
                    for (int k = 0; k < c.stability_map_theta; ++k) {
                        p.theta = 2 * std::numbers::pi * k / c.stability_map_theta;
                        map << format_number(eps) << ',' << format_number(h) << ',' << format_number(p.dt) << ','
                            << format_number(p.phi) << ',' << format_number(p.theta) << ','
                            << format_number(spectral_radius(p)) << '\n';
                    }
                }
            }
        }
    }
    if (tuples > 0) {
        const std::filesystem::path dir = resolve_output_dir(c);
        write_atomic(dir / "stability_map.csv", map.str());
        write_atomic(dir / "stability_verdicts.csv", verdicts.str());
    }
    out << "tuples=" << tuples << " stable=" << passed << " skipped=" << skipped
        << " max_radius=" << format_number(max_radius) << '\n';
    return exit_ok;
}

int cmd_ap_check(const RunConfig& c, std::ostream& out) {
    const double eps = c.epsilon.value_or(1e-6);
    const Scenario s = make_scenario(c, eps);
    const int n = c.n.value_or(64);
    const auto rep = ap_limit_check(s, n, eps, c.angular_points, c.t_final ? c.t_final : std::optional(0.02));
    auto drift = [](const std::vector<double>& m) {
        double d = 0;
        for (double v : m) d = std::max(d, std::abs(v - m.front()) / std::abs(m.front()));
        return d;
    };
    std::ostringstream csv;
    csv << "scenario,epsilon,N,distance,mass_drift_transport,mass_drift_diffusion\n"
        << s.name << ',' << format_number(eps) << ',' << n << ',' << format_number(rep.distance) << ','
        << format_number(drift(rep.mass_transport)) << ',' << format_number(drift(rep.mass_diffusion)) << '\n';
    const std::filesystem::path dir = resolve_output_dir(c);
    write_atomic(dir / "ap_check.csv", csv.str());
    write_field(dir, "rho_transport", rep.rho_transport, rep.grid);
    write_field(dir, "rho_diffusion", rep.rho_diffusion, rep.grid);
    out << "distance=" << format_number(rep.distance) << " epsilon=" << format_number(eps) << " N=" << n << '\n';
    return exit_ok;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Asymptotic-preserving staggered-grid transport solver"};
    app.require_subcommand(1);
    Parsed p_run, p_conv, p_stab, p_ap, p_dump;
    auto* run = app.add_subcommand("run", "run one scenario");
    auto* conv = app.add_subcommand("converge", "convergence table over N and epsilon");
    auto* stab = app.add_subcommand("stability", "von Neumann sweep of the 1D scheme");
    auto* ap = app.add_subcommand("ap-check", "compare against the limit diffusion solver");
    auto* dump = app.add_subcommand("dump-config", "print the effective configuration");
    register_flags(run, p_run);
    register_flags(conv, p_conv);
    register_flags(stab, p_stab);
    register_flags(ap, p_ap);
    register_flags(dump, p_dump);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_config;
    }

    try {
        if (run->parsed()) return cmd_run(effective_config(p_run, run), out, err);
        if (conv->parsed()) return cmd_converge(effective_config(p_conv, conv), out);
        if (stab->parsed()) return cmd_stability(effective_config(p_stab, stab), out);
        if (ap->parsed()) return cmd_ap_check(effective_config(p_ap, ap), out);
        if (dump->parsed()) {
            out << dump_config(effective_config(p_dump, dump));
            return exit_ok;
        }
    } catch (const NumericOverflow& e) {
        err << "error=numeric_overflow step=" << e.step() << " t=" << format_number(e.time()) << '\n';
        return exit_unstable;
    } catch (const IoError& e) {
        err << "error=io " << e.what() << '\n';
        return exit_io;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error=io " << e.what() << '\n';
        return exit_io;
    } catch (const Error& e) {
        err << "error=config " << e.what() << '\n';
        return exit_config;
    }
    return exit_failure;
}

}  // namespace apstag
