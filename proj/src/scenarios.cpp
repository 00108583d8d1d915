#include "apstag/scenarios.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "apstag/errors.hpp"

#ifndef APSTAG_DATA_DIR
#define APSTAG_DATA_DIR "data"
#endif

namespace apstag {

namespace {

constexpr double pi = std::numbers::pi;

double mms_shape(double x, double y) {
    const double sx = std::sin(2 * pi * x);
    const double sy = std::sin(2 * pi * y);
    return sx * sx * sy * sy;
}

double mms_shape_dx(double x, double y) {
    const double sy = std::sin(2 * pi * y);
    return 2 * pi * std::sin(4 * pi * x) * sy * sy;
}

double mms_shape_dy(double x, double y) {
    const double sx = std::sin(2 * pi * x);
    return 2 * pi * sx * sx * std::sin(4 * pi * y);
}

Scenario gaussian_case(std::string name, double a, double epsilon) {
    Scenario s;
    s.name = std::move(name);
    s.x0 = s.y0 = -1;
    s.length = 2;
    s.epsilon = epsilon;
    s.initial_f = [a](double x, double y, double, double) { return gauss_bump(x, y, a); };
    s.sigma_s = [](double, double) { return 1.0; };
    s.sigma_a = [](double, double) { return 0.0; };
    return s;
}

}  // namespace

GridGeometry<double> Scenario::grid(int n_cells) const {
    return GridGeometry<double>::square(n_cells, x0, length);
}

double gauss_bump(double x, double y, double a) {
    return std::exp(-(x * x + y * y) / (4 * a)) / (4 * pi * a);
}

double variable_sigma(double x, double y) {
    const double c = std::sqrt(x * x + y * y);
    if (c >= 1) return 1;
    const double c2 = c * c;
    return c2 * c2 * (c2 - 2) * (c2 - 2);
}

Scenario mms(double epsilon) {
    Scenario s;
    s.name = "mms";
    s.epsilon = epsilon;
    s.t_final = 0.1;
    s.initial_f = [](double x, double y, double, double eta) { return mms_shape(x, y) * (1 + eta * eta); };
    s.sigma_s = [](double, double) { return 1.0; };
    s.sigma_a = [](double, double) { return 0.0; };
    s.source = mms_source;
    s.rho_exact = [](double t, double x, double y) { return 1.5 * std::exp(-t) * mms_shape(x, y); };
    return s;
}

Scenario gauss(double epsilon) {
    auto s = gaussian_case("gauss", 1e-2, epsilon);
    s.t_final = 0.1;
    return s;
}

Scenario variable_scattering(double epsilon) {
    auto s = gaussian_case("variable_scattering", 1e-2, epsilon);
    s.t_final = epsilon;
    s.sigma_s = variable_sigma;
    return s;
}

Scenario phi_stability() {
    auto s = gaussian_case("phi_stability", 5e-3, 1.0);
    s.n = 300;
    s.t_final = 0.36;
    return s;
}

Scenario two_material(const std::vector<Rect>& absorbers) {
    Scenario s;
    s.name = "two_material";
    s.x0 = s.y0 = 0;
    s.length = 5;
    s.n = 100;
    s.epsilon = 1;
    s.t_final = 1.7;
    auto inside = [absorbers](double x, double y) {
        for (const auto& r : absorbers) {
            if (r.contains(x, y)) return true;
        }
        return false;
    };
    s.initial_f = [](double, double, double, double) { return 0.0; };
    s.sigma_s = [inside](double x, double y) { return inside(x, y) ? 0.0 : 1.0; };
    s.sigma_a = [inside](double x, double y) { return inside(x, y) ? 100.0 : 0.0; };
    s.source = [](const GridGeometry<double>& g, const DirectionSet<double>& q, double) {
        auto q_field = sample_on_R<double>(
            [](double x, double y) { return x >= 2 && x <= 3 && y >= 2 && y <= 3 ? 1.0 : 0.0; }, g);
        return SourceTerm<double>::isotropic_field(std::move(q_field), q.size());
    };
    return s;
}

Scenario two_material(const std::filesystem::path& geometry_file) {
    return two_material(load_absorbers(geometry_file));
}

Scenario two_material() { return two_material(default_geometry_file()); }

std::vector<std::string> scenario_names() {
    return {"mms", "gauss", "variable_scattering", "two_material", "phi_stability"};
}

Scenario scenario_by_name(const std::string& name, std::optional<double> epsilon,
                          const std::filesystem::path& geometry_file) {
    if (name == "mms") return mms(epsilon.value_or(1.0));
    if (name == "gauss") return gauss(epsilon.value_or(1.0));
    if (name == "variable_scattering") return variable_scattering(epsilon.value_or(0.01));
    Scenario s;
    if (name == "two_material") {
        s = two_material(geometry_file.empty() ? default_geometry_file() : geometry_file);
    } else if (name == "phi_stability") {
        s = phi_stability();
    } else {
        throw InvalidArgument("unknown scenario '" + name + "'");
    }
    if (epsilon) s.epsilon = *epsilon;
    return s;
}

std::filesystem::path default_geometry_file() {
    return std::filesystem::path(APSTAG_DATA_DIR) / "two_material_absorbers.txt";
}

std::vector<Rect> load_absorbers(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open geometry file " + path.string());
    std::vector<Rect> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        Rect r;
        if (!(ls >> r.x_min)) continue;
        std::string extra;
        if (!(ls >> r.y_min >> r.x_max >> r.y_max) || (ls >> extra)) {
            throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                              ": expected 'x_min y_min x_max y_max'");
        }
        if (!(r.x_max > r.x_min && r.y_max > r.y_min)) {
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": empty rectangle");
        }
        out.push_back(r);
    }
    return out;
}

ParityState<double> initial_state(const Scenario& s, const GridGeometry<double>& g,
                                  const DirectionSet<double>& q) {
    auto st = ParityState<double>::zeros(g, q.size());
    const double inv2e = 1 / (2 * s.epsilon);
    for (Index d = 0; d < q.size(); ++d) {
        const double xi = q.xi[d];
        const double eta = q.eta[d];
        const auto k = static_cast<std::size_t>(d);
        const auto& f = s.initial_f;
        st.r1[k] = sample_on_R<double>([&](double x, double y) { return 0.5 * (f(x, y, xi, -eta) + f(x, y, -xi, eta)); }, g);
        st.r2[k] = sample_on_R<double>([&](double x, double y) { return 0.5 * (f(x, y, xi, eta) + f(x, y, -xi, -eta)); }, g);
        st.j1[k] = sample_on_J<double>([&](double x, double y) { return inv2e * (f(x, y, xi, -eta) - f(x, y, -xi, eta)); }, g);
        st.j2[k] = sample_on_J<double>([&](double x, double y) { return inv2e * (f(x, y, xi, eta) - f(x, y, -xi, -eta)); }, g);
    }
    return st;
}

MaterialField<double> material(const Scenario& s, const GridGeometry<double>& g) {
    return MaterialField<double>::sample(g, s.sigma_s, s.sigma_a);
}

SourceTerm<double> source(const Scenario& s, const GridGeometry<double>& g, const DirectionSet<double>& q) {
    if (!s.source) return {};
    auto src = s.source(g, q, s.epsilon);
    src.check(g, q.size());
    return src;
}

RField<double> exact_density(const Scenario& s, const GridGeometry<double>& g, double t) {
    if (!s.rho_exact) throw InvalidArgument("scenario '" + s.name + "' has no exact density");
    return sample_on_R<double>([&](double x, double y) { return s.rho_exact(t, x, y); }, g);
}

// Q = d_t f + (1/eps) v.grad f + (1/eps^2)(f - rho_f) with sigma_s = 1 and
// rho_f = 3/2 exp(-t) S. Per direction with signed (xi, eta):
//   even:   exp(-t) S [-(1 + eta^2) + (eta^2 - 1/2)/eps^2]
//   odd/eps: exp(-t)/eps^2 (1 + eta^2) (xi S_x -+ eta S_y)
SourceTerm<double> mms_source(const GridGeometry<double>& g, const DirectionSet<double>& q, double epsilon) {
    const auto n = static_cast<std::size_t>(q.size());
    const double e2 = epsilon * epsilon;
    auto decay = [](double t) { return std::exp(-t); };

    SourceTerm<double> src;
    SourceTerm<double>::Term<RField<double>> even{decay, sample_on_R<double>(mms_shape, g), {}};
    SourceTerm<double>::Term<JField<double>> along_x{decay, sample_on_J<double>(mms_shape_dx, g), {}};
    SourceTerm<double>::Term<JField<double>> along_y{decay, sample_on_J<double>(mms_shape_dy, g), {}};
    for (int p = 0; p < 2; ++p) {
        even.coeff[p].resize(n);
        along_x.coeff[p].resize(n);
        along_y.coeff[p].resize(n);
    }
    for (std::size_t d = 0; d < n; ++d) {
        const double xi = q.xi[static_cast<Index>(d)];
        const double eta = q.eta[static_cast<Index>(d)];
        const double a = 1 + eta * eta;
        even.coeff[0][d] = even.coeff[1][d] = -a + (eta * eta - 0.5) / e2;
        along_x.coeff[0][d] = along_x.coeff[1][d] = xi * a / e2;
        along_y.coeff[0][d] = -eta * a / e2;
        along_y.coeff[1][d] = eta * a / e2;
    }
    src.even.push_back(std::move(even));
    src.odd.push_back(std::move(along_x));
    src.odd.push_back(std::move(along_y));
    return src;
}

}  // namespace apstag
