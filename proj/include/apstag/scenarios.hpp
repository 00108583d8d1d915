#pragma once

// The five experiment definitions as plain descriptions. A Scenario holds
// callables of position (and velocity for the initial distribution); the
// builders below turn it into fields for a concrete grid and direction set.

#include <array>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "apstag/angular.hpp"
#include "apstag/grid.hpp"
#include "apstag/material.hpp"
#include "apstag/solver.hpp"
#include "apstag/source.hpp"

namespace apstag {

struct Rect {
    double x_min = 0;
    double y_min = 0;
    double x_max = 0;
    double y_max = 0;

    /// Open interior; points on the boundary are outside.
    bool contains(double x, double y) const { return x > x_min && x < x_max && y > y_min && y < y_max; }
};

struct Scenario {
    using Field2 = std::function<double(double, double)>;
    /// f(t=0, x, y, xi, eta) for signed velocity components.
    using Distribution = std::function<double(double, double, double, double)>;
    using SourceBuilder =
        std::function<SourceTerm<double>(const GridGeometry<double>&, const DirectionSet<double>&, double)>;

    std::string name;
    double x0 = 0;
    double y0 = 0;
    double length = 1;
    int n = 64;
    double epsilon = 1;
    double t_final = 0.1;
    Distribution initial_f;
    Field2 sigma_s;
    Field2 sigma_a;
    SourceBuilder source;                                        ///< empty means Q = 0
    std::function<double(double, double, double)> rho_exact;     ///< (t, x, y), may be empty
    std::optional<double> phi;                                   ///< relaxation-parameter override

    GridGeometry<double> grid(int n_cells) const;
    GridGeometry<double> grid() const { return grid(n); }
};

/// f = exp(-t) sin^2(2 pi x) sin^2(2 pi y) (1 + eta^2) on [0,1]^2 with the
/// source chosen as the exact residual of the transport equation.
Scenario mms(double epsilon = 1);

/// Gaussian bump exp(-(x^2+y^2)/(4 a))/(4 pi a) with a = 1e-2 on [-1,1]^2.
Scenario gauss(double epsilon = 1);

/// Gauss data with sigma_s = c^4 (c^2 - 2)^2 inside the unit disc, 1 outside.
Scenario variable_scattering(double epsilon = 0.01);

/// 5x5 box, unit source on [2,3]^2, absorbers with sigma_a = 100, sigma_s = 0.
Scenario two_material(const std::vector<Rect>& absorbers);
Scenario two_material(const std::filesystem::path& geometry_file);
Scenario two_material();

/// Narrow Gaussian (a = 5e-3) on [-1,1]^2, N = 300, t = 0.36.
Scenario phi_stability();

std::vector<std::string> scenario_names();
/// Scenario with its own default epsilon unless one is given. Throws
/// InvalidArgument for an unknown name.
Scenario scenario_by_name(const std::string& name, std::optional<double> epsilon = {},
                          const std::filesystem::path& geometry_file = {});

/// Lines `x_min y_min x_max y_max`; blank lines and `#` comments skipped.
std::vector<Rect> load_absorbers(const std::filesystem::path& path);
std::filesystem::path default_geometry_file();

double variable_sigma(double x, double y);
double gauss_bump(double x, double y, double a);

// Builders for a concrete discretization.
ParityState<double> initial_state(const Scenario& s, const GridGeometry<double>& g, const DirectionSet<double>& q);
MaterialField<double> material(const Scenario& s, const GridGeometry<double>& g);
SourceTerm<double> source(const Scenario& s, const GridGeometry<double>& g, const DirectionSet<double>& q);
RField<double> exact_density(const Scenario& s, const GridGeometry<double>& g, double t);

/// Residual source of the manufactured solution, split into the even part on
/// the R-grid and the scaled odd part on the J-grid.
SourceTerm<double> mms_source(const GridGeometry<double>& g, const DirectionSet<double>& q, double epsilon);

}  // namespace apstag
