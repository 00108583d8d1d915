#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "apstag/grid.hpp"
#include "apstag/scenarios.hpp"
#include "apstag/solver.hpp"

namespace apstag {

struct SimulationOptions {
    int n = 0;                        ///< cells per axis, 0 keeps the scenario default
    int angular_points = 16;
    double safety = 0.9;
    std::optional<double> phi;        ///< wins over the scenario's own override
    std::optional<double> t_final;
    std::vector<double> snapshot_times;
    double blowup_factor = 1e6;
    std::function<void(const StepDiagnostics<double>&)> on_step;
    std::function<void(double, const ParityState<double>&, const RField<double>&)> on_snapshot;
};

struct Simulation {
    GridGeometry<double> grid;
    DirectionSet<double> directions;
    RunResult<double> result;
    bool hyperbolic = false;
};

Simulation simulate(const Scenario& s, const SimulationOptions& opt = {});

/// Samples `fine` at the R-points of `coarse`. Every coarse point must
/// coincide with a fine point, which holds when the fine cell count is an
/// integer multiple of the coarse one on the same domain.
RField<double> restrict_to(const RField<double>& fine, const GridGeometry<double>& g_fine,
                           const GridGeometry<double>& coarse);

/// sqrt(sum (u - ref)^2 dx dy / 2) over both R-planes.
double l2_error(const RField<double>& u, const RField<double>& ref, const GridGeometry<double>& g);
double l2_error(const RField<double>& u, const GridGeometry<double>& g, const RField<double>& ref_fine,
                const GridGeometry<double>& g_fine);
double l2_error(const RField<double>& u, const GridGeometry<double>& g,
                const std::function<double(double, double)>& exact);
double l2_norm(const RField<double>& u, const GridGeometry<double>& g);

/// -(log E1 - log E2) / (log N1 - log N2)
double convergence_order(double e1, double n1, double e2, double n2);

struct ConvergenceRow {
    std::string scenario;
    double epsilon = 0;
    int n = 0;
    std::string branch;                     ///< "hyperbolic" or "parabolic"
    double error = 0;
    std::optional<double> order_vs_prev;
};

struct ConvergenceRequest {
    std::function<Scenario(double)> make;   ///< scenario for a given epsilon
    std::vector<int> n_list;
    std::vector<double> epsilons;
    /// Reference grid when the scenario has no exact density; defaults to the
    /// finest entry of n_list, which then contributes no row.
    std::optional<int> reference_n;
    int angular_points = 16;
    double safety = 0.9;
    std::function<void(const ConvergenceRow&)> on_row;
};

std::vector<ConvergenceRow> run_convergence_table(const ConvergenceRequest& req);

std::string convergence_csv(const std::vector<ConvergenceRow>& rows);

struct ApReport {
    double distance = 0;                    ///< ||rho_ap - rho_diff|| / ||rho_diff||
    std::vector<double> mass_transport;
    std::vector<double> mass_diffusion;
    RField<double> rho_transport;
    RField<double> rho_diffusion;
    GridGeometry<double> grid;
};

/// Runs the transport solver at `epsilon` and the limit diffusion solver from
/// the same initial density to the scenario's final time.
ApReport ap_limit_check(const Scenario& s, int n, double epsilon, int angular_points = 16,
                        std::optional<double> t_final = {});

}  // namespace apstag
