#include "apstag/harness.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "apstag/diffusion.hpp"
#include "apstag/errors.hpp"
#include "apstag/field_io.hpp"

namespace apstag {

Simulation simulate(const Scenario& s, const SimulationOptions& opt) {
    Simulation sim;
    sim.grid = s.grid(opt.n > 0 ? opt.n : s.n);
    sim.directions = gauss_nodes<double>(opt.angular_points);
    const auto mat = material(s, sim.grid);
    const auto src = source(s, sim.grid, sim.directions);
    sim.hyperbolic = hyperbolic_regime(s.epsilon, sim.grid, mat);

    RunOptions<double> ro;
    ro.epsilon = s.epsilon;
    ro.t_final = opt.t_final ? *opt.t_final : s.t_final;
    ro.safety = opt.safety;
    ro.phi = opt.phi ? opt.phi : s.phi;
    ro.snapshot_times = opt.snapshot_times;
    ro.blowup_factor = opt.blowup_factor;
    ro.on_step = opt.on_step;
    ro.on_snapshot = opt.on_snapshot;
    sim.result = run(initial_state(s, sim.grid, sim.directions), sim.directions, mat, src, ro);
    return sim;
}

RField<double> restrict_to(const RField<double>& fine, const GridGeometry<double>& g_fine,
                           const GridGeometry<double>& coarse) {
    require_conforms(fine, g_fine, "restrict_to");
    if (g_fine.x0 != coarse.x0 || g_fine.y0 != coarse.y0 || g_fine.lx != coarse.lx || g_fine.ly != coarse.ly) {
        throw InvalidArgument("restrict_to: grids cover different domains");
    }
    if (g_fine.nx % coarse.nx != 0 || g_fine.ny % coarse.ny != 0) {
        throw InvalidArgument("restrict_to: fine grid " + std::to_string(g_fine.nx) + " is not a multiple of " +
                              std::to_string(coarse.nx) + "; no coinciding points");
    }
    const Index kx = g_fine.nx / coarse.nx;
    const Index ky = g_fine.ny / coarse.ny;
    auto out = RField<double>::zeros(coarse);
    // coarse center (i+1/2) kx lands on a fine vertex for even k, a fine center for odd k
    const bool cx_vertex = kx % 2 == 0;
    const bool cy_vertex = ky % 2 == 0;
    if (cx_vertex != cy_vertex) throw InvalidArgument("restrict_to: refinement factors of different parity");
    const auto& center_src = cx_vertex ? fine.vertex : fine.center;
    const Index ox = cx_vertex ? kx / 2 : (kx - 1) / 2;
    const Index oy = cy_vertex ? ky / 2 : (ky - 1) / 2;
    for (Index j = 0; j < coarse.ny; ++j) {
        for (Index i = 0; i < coarse.nx; ++i) {
            out.vertex(j, i) = fine.vertex(j * ky, i * kx);
            out.center(j, i) = center_src(j * ky + oy, i * kx + ox);
        }
    }
    return out;
}

double l2_norm(const RField<double>& u, const GridGeometry<double>& g) {
    require_conforms(u, g, "l2_norm");
    return std::sqrt(dot(u, u) * g.point_volume());
}

double l2_error(const RField<double>& u, const RField<double>& ref, const GridGeometry<double>& g) {
    require_conforms(ref, g, "l2_error");
    return l2_norm(u - ref, g);
}

double l2_error(const RField<double>& u, const GridGeometry<double>& g, const RField<double>& ref_fine,
                const GridGeometry<double>& g_fine) {
    return l2_error(u, restrict_to(ref_fine, g_fine, g), g);
}

double l2_error(const RField<double>& u, const GridGeometry<double>& g,
                const std::function<double(double, double)>& exact) {
    return l2_error(u, sample_on_R<double>(exact, g), g);
}

double convergence_order(double e1, double n1, double e2, double n2) {
    if (!(e1 > 0 && e2 > 0)) throw InvalidArgument("convergence_order: errors must be positive");
    if (!(n1 > 0 && n2 > 0) || n1 == n2) throw InvalidArgument("convergence_order: need distinct positive N");
    return -(std::log(e1) - std::log(e2)) / (std::log(n1) - std::log(n2));
}

std::vector<ConvergenceRow> run_convergence_table(const ConvergenceRequest& req) {
    if (req.n_list.empty()) throw InvalidArgument("convergence: empty N list");
    if (req.epsilons.empty()) throw InvalidArgument("convergence: empty epsilon list");
    for (std::size_t k = 0; k < req.n_list.size(); ++k) {
        if (req.n_list[k] < 2) throw InvalidArgument("convergence: N must be at least 2");
        if (k > 0 && (req.n_list[k] <= req.n_list[k - 1] || req.n_list[k] % req.n_list[k - 1] != 0)) {
            throw InvalidArgument("convergence: N list must increase with each entry dividing the next");
        }
    }

    std::vector<ConvergenceRow> rows;
    for (double eps : req.epsilons) {
        const Scenario sc = req.make(eps);
        SimulationOptions opt;
        opt.angular_points = req.angular_points;
        opt.safety = req.safety;

        std::vector<int> ns = req.n_list;
        std::optional<Simulation> reference;
        if (!sc.rho_exact) {
            int ref_n = req.reference_n ? *req.reference_n : ns.back();
            if (!req.reference_n) ns.pop_back();
            if (ns.empty()) throw InvalidArgument("convergence: need at least one grid besides the reference");
            if (ref_n % ns.back() != 0) {
                throw InvalidArgument("convergence: reference N must be a multiple of every grid");
            }
            opt.n = ref_n;
            reference = simulate(sc, opt);
        }

        std::optional<std::pair<int, double>> prev;
        for (int n : ns) {
            opt.n = n;
            const Simulation sim = simulate(sc, opt);
            ConvergenceRow row;
            row.scenario = sc.name;
            row.epsilon = eps;
            row.n = n;
            row.branch = sim.hyperbolic ? "hyperbolic" : "parabolic";
            if (reference) {
                row.error = l2_error(sim.result.rho, sim.grid, reference->result.rho, reference->grid);
            } else {
                const double t = sim.result.state.t;
                row.error = l2_error(sim.result.rho, sim.grid,
                                     [&](double x, double y) { return sc.rho_exact(t, x, y); });
            }
            if (prev) row.order_vs_prev = convergence_order(prev->second, prev->first, row.error, n);
            prev = std::pair{n, row.error};
            if (req.on_row) req.on_row(row);
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

std::string convergence_csv(const std::vector<ConvergenceRow>& rows) {
    std::ostringstream out;
    out << "scenario,epsilon,N,branch,error,order_vs_prev\n";
    for (const auto& r : rows) {
        out << r.scenario << ',' << format_number(r.epsilon) << ',' << r.n << ',' << r.branch << ','
            << format_number(r.error) << ',';
        if (r.order_vs_prev) out << format_number(*r.order_vs_prev);
        out << '\n';
    }
    return out.str();
}

ApReport ap_limit_check(const Scenario& s_in, int n, double epsilon, int angular_points,
                        std::optional<double> t_final) {
    Scenario s = s_in;
    s.epsilon = epsilon;
    if (t_final) s.t_final = *t_final;

    ApReport rep;
    rep.grid = s.grid(n);
    const auto q = gauss_nodes<double>(angular_points);
    const auto init = initial_state(s, rep.grid, q);
    for (std::size_t d = 0; d < init.j1.size(); ++d) {
        if (init.j1[d].max_abs() != 0 || init.j2[d].max_abs() != 0) {
            throw InvalidArgument("ap_limit_check: initial data must be isotropic");
        }
    }
    const auto rho0 = density(init.r1, init.r2, q);
    const auto mat = material(s, rep.grid);
    const auto src = source(s, rep.grid, q);
    const double vol = rep.grid.point_volume();

    RunOptions<double> ro;
    ro.epsilon = epsilon;
    ro.t_final = s.t_final;
    ro.phi = s.phi;
    ro.on_step = [&](const StepDiagnostics<double>& d) { rep.mass_transport.push_back(d.mass); };
    rep.rho_transport = run(init, q, mat, src, ro).rho;

    auto diff = diffusion_run(rho0, mat, rep.grid, s.t_final, src, epsilon,
                              [&](std::size_t, const DiffusionState<double>& st) {
                                  rep.mass_diffusion.push_back(st.rho.sum() * vol);
                              });
    rep.rho_diffusion = std::move(diff.rho);
    rep.distance = l2_error(rep.rho_transport, rep.rho_diffusion, rep.grid) / l2_norm(rep.rho_diffusion, rep.grid);
    return rep;
}

}  // namespace apstag
