#pragma once

// Asymptotic-preserving time stepper for the parity system on staggered grids.
//
// Per direction (xi, eta) of the first quadrant the state holds the even
// parities r1, r2 on the R-grid and the scaled odd parities j1, j2 on the
// J-grid. One step is
//   transport  (explicit Euler)  r -= dt (xi Dx j -+ eta Dy j + sa r - Q_even)
//                                 j -= dt (phi (xi Dx r -+ eta Dy r) + sa j - Q_odd/eps)
//   relaxation (implicit Euler, closed form since rho is invariant)
//                                 r  = r + ss dt/(eps^2 + ss dt) (rho - r)
//                                 j  = (eps^2 j - dt (1 - eps^2 phi)(xi Dx r -+ eta Dy r)) / (eps^2 + ss dt)
// where the upper sign belongs to parity 1 and the relaxed r is used in the
// last line.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "apstag/angular.hpp"
#include "apstag/errors.hpp"
#include "apstag/grid.hpp"
#include "apstag/kernels.hpp"
#include "apstag/material.hpp"
#include "apstag/source.hpp"
#include "apstag/stability.hpp"

namespace apstag {

template <typename Scalar>
struct ParityState {
    GridGeometry<Scalar> grid;
    std::vector<RField<Scalar>> r1, r2;
    std::vector<JField<Scalar>> j1, j2;
    Scalar t = 0;

    static ParityState zeros(const GridGeometry<Scalar>& g, Eigen::Index n_directions) {
        const auto n = static_cast<std::size_t>(n_directions);
        ParityState s;
        s.grid = g;
        s.r1.assign(n, RField<Scalar>::zeros(g));
        s.r2.assign(n, RField<Scalar>::zeros(g));
        s.j1.assign(n, JField<Scalar>::zeros(g));
        s.j2.assign(n, JField<Scalar>::zeros(g));
        return s;
    }

    Eigen::Index directions() const { return static_cast<Eigen::Index>(r1.size()); }

    bool all_finite() const {
        for (std::size_t d = 0; d < r1.size(); ++d) {
            if (!r1[d].all_finite() || !r2[d].all_finite() || !j1[d].all_finite() || !j2[d].all_finite()) {
                return false;
            }
        }
        return true;
    }

    void check(const DirectionSet<Scalar>& q) const {
        const auto n = static_cast<std::size_t>(q.size());
        if (r1.size() != n || r2.size() != n || j1.size() != n || j2.size() != n) {
            throw ShapeMismatch("parity state: direction count differs from the direction set");
        }
        for (std::size_t d = 0; d < n; ++d) {
            require_conforms(r1[d], grid, "parity state");
            require_conforms(r2[d], grid, "parity state");
            require_conforms(j1[d], grid, "parity state");
            require_conforms(j2[d], grid, "parity state");
        }
    }
};

template <typename Scalar>
struct SchemeParams {
    Scalar epsilon = 1;
    Scalar phi = 0;
    Scalar dt = 0;
    Scalar safety = Scalar(0.9);

    void validate() const {
        if (!(epsilon > 0)) throw InvalidArgument("scheme: epsilon must be positive");
        if (!(dt > 0)) throw InvalidArgument("scheme: dt must be positive");
        if (!(phi >= 0) || phi > Scalar(1) / (epsilon * epsilon) * (1 + 1e-12)) {
            throw InvalidArgument("scheme: phi must lie in [0, 1/eps^2]");
        }
    }
};

template <typename Scalar>
Scalar checked_sigma_t_min(Scalar epsilon, const MaterialField<Scalar>& mat) {
    mat.validate();
    const Scalar st = mat.sigma_t_min(epsilon);
    // sigma_t = 0 at isolated points (void) still yields a positive step from the
    // hyperbolic arm; only a negative total is rejected
    if (!(st >= 0)) throw InvalidMaterial("material: total cross section must be nonnegative");
    return st;
}

/// safety * 1/2 * min{ 1/sigma_a_max, max{ eps h/2, h^2 sigma_t_min/4 } } with
/// h = min(dx, dy) and worst-case cross sections over every grid sample.
template <typename Scalar>
Scalar cfl_timestep(Scalar epsilon, const GridGeometry<Scalar>& g, const MaterialField<Scalar>& mat,
                    Scalar safety = Scalar(0.9)) {
    if (!(safety > 0 && safety <= 1)) throw InvalidArgument("cfl_timestep: safety must lie in (0,1]");
    if (!(epsilon > 0)) throw InvalidArgument("cfl_timestep: epsilon must be positive");
    const Scalar st = checked_sigma_t_min(epsilon, mat);
    return safety * Scalar(0.5) * stable_timestep_bound(epsilon, g.h(), st, mat.sigma_a_max());
}

template <typename Scalar>
Scalar relaxation_parameter(Scalar epsilon, const GridGeometry<Scalar>& g, const MaterialField<Scalar>& mat) {
    if (!(epsilon > 0)) throw InvalidArgument("relaxation_parameter: epsilon must be positive");
    return relaxation_parameter_bound(epsilon, g.h(), checked_sigma_t_min(epsilon, mat));
}

/// Which arm of the CFL max is active for the worst-case material.
template <typename Scalar>
bool hyperbolic_regime(Scalar epsilon, const GridGeometry<Scalar>& g, const MaterialField<Scalar>& mat) {
    return hyperbolic_branch(epsilon, g.h(), checked_sigma_t_min(epsilon, mat));
}

/// Applies the two sub-steps in place. Holds scratch fields so a long run does
/// not allocate per step.
template <typename Scalar>
class Stepper {
public:
    Stepper(const GridGeometry<Scalar>& g, const DirectionSet<Scalar>& q, const MaterialField<Scalar>& mat,
            const SourceTerm<Scalar>& src, SchemeParams<Scalar> p)
        : g_(g), q_(q), mat_(mat), src_(src), p_(p) {
        p_.validate();
        if (!mat_.conforms(g_)) throw ShapeMismatch("stepper: material does not match the grid");
        src_.check(g_, q_.size());
        absorbing_ = mat_.sigma_a_max() > 0;
        rho_ = q_r_ = r_next_ = RField<Scalar>::zeros(g_);
        q_j_ = j_next_ = JField<Scalar>::zeros(g_);
        update_coefficients();
    }

    const SchemeParams<Scalar>& params() const { return p_; }

    void set_dt(Scalar dt) {
        if (dt == p_.dt) return;
        p_.dt = dt;
        p_.validate();
        update_coefficients();
    }

    void transport(ParityState<Scalar>& s) {
        for (Eigen::Index d = 0; d < q_.size(); ++d) {
            const auto k = static_cast<std::size_t>(d);
            transport_parity(s.r1[k], s.j1[k], s.t, 0, d);
            transport_parity(s.r2[k], s.j2[k], s.t, 1, d);
        }
    }

    void relax(ParityState<Scalar>& s) {
        compute_density(s);
        for (Eigen::Index d = 0; d < q_.size(); ++d) {
            const auto k = static_cast<std::size_t>(d);
            relax_parity(s.r1[k], s.j1[k], Scalar(-1), d);
            relax_parity(s.r2[k], s.j2[k], Scalar(1), d);
        }
    }

    void step(ParityState<Scalar>& s) {
        transport(s);
        relax(s);
        s.t += p_.dt;
    }

    /// Density computed at the start of the last relaxation; equals the
    /// density of the relaxed state.
    const RField<Scalar>& last_density() const { return rho_; }

private:
    void update_coefficients() {
        const Scalar e2 = p_.epsilon * p_.epsilon;
        const Scalar dt = p_.dt;
        auto pull = [&](const Plane<Scalar>& ss) {
            return Plane<Scalar>((ss * dt) / (e2 + ss * dt));
        };
        pull_R_ = {pull(mat_.sigma_s_R.vertex), pull(mat_.sigma_s_R.center)};
        auto keep = [&](const Plane<Scalar>& ss) { return Plane<Scalar>(e2 / (e2 + ss * dt)); };
        keep_J_ = {keep(mat_.sigma_s_J.hface), keep(mat_.sigma_s_J.vface)};
        const Scalar grad = dt * (Scalar(1) - e2 * p_.phi);
        auto drive = [&](const Plane<Scalar>& ss) { return Plane<Scalar>(grad / (e2 + ss * dt)); };
        drive_J_ = {drive(mat_.sigma_s_J.hface), drive(mat_.sigma_s_J.vface)};
    }

    // parity 0 -> (xi, -eta), parity 1 -> (xi, eta)
    void transport_parity(RField<Scalar>& r, JField<Scalar>& j, Scalar t, int parity, Eigen::Index d) {
        const Scalar sign = parity == 0 ? Scalar(-1) : Scalar(1);
        kernel::TransportArgs<Scalar> a;
        a.ax = q_.xi[d] / g_.dx();
        a.ay = sign * q_.eta[d] / g_.dy();
        a.dt = p_.dt;
        a.dt_phi = p_.dt * p_.phi;
        if (absorbing_) {
            a.sigma_a_R = &mat_.sigma_a_R;
            a.sigma_a_J = &mat_.sigma_a_J;
        }
        if (!src_.even.empty()) {
            src_.even_into(t, parity, d, q_r_);
            a.q_R = &q_r_;
        }
        if (!src_.odd.empty()) {
            src_.odd_into(t, parity, d, q_j_);
            a.q_J = &q_j_;
        }
        kernel::transport(r, j, r_next_, j_next_, a);
        r.vertex.swap(r_next_.vertex);
        r.center.swap(r_next_.center);
        j.hface.swap(j_next_.hface);
        j.vface.swap(j_next_.vface);
    }

    void relax_parity(RField<Scalar>& r, JField<Scalar>& j, Scalar sign, Eigen::Index d) {
        r.vertex += pull_R_.vertex * (rho_.vertex - r.vertex);
        r.center += pull_R_.center * (rho_.center - r.center);
        kernel::relax_odd(r, j, keep_J_, drive_J_, q_.xi[d] / g_.dx(), sign * q_.eta[d] / g_.dy());
    }

    void compute_density(const ParityState<Scalar>& s) {
        rho_.vertex.setZero();
        rho_.center.setZero();
        for (Eigen::Index d = 0; d < q_.size(); ++d) {
            const auto k = static_cast<std::size_t>(d);
            const Scalar half_w = q_.weights[d] / Scalar(2);
            rho_.vertex += half_w * (s.r1[k].vertex + s.r2[k].vertex);
            rho_.center += half_w * (s.r1[k].center + s.r2[k].center);
        }
    }

    GridGeometry<Scalar> g_;
    DirectionSet<Scalar> q_;
    const MaterialField<Scalar>& mat_;
    const SourceTerm<Scalar>& src_;
    SchemeParams<Scalar> p_;
    bool absorbing_ = false;

    RField<Scalar> rho_, q_r_, r_next_, pull_R_;
    JField<Scalar> q_j_, j_next_, keep_J_, drive_J_;
};

namespace detail {
template <typename Scalar>
void require_finite(const ParityState<Scalar>& s, const char* who) {
    if (!s.all_finite()) throw NumericOverflow(std::string(who) + ": nonfinite state", 0, double(s.t));
}
}  // namespace detail

template <typename Scalar>
ParityState<Scalar> transport_step(ParityState<Scalar> s, const DirectionSet<Scalar>& q,
                                   const MaterialField<Scalar>& mat, const SourceTerm<Scalar>& src,
                                   const SchemeParams<Scalar>& p) {
    s.check(q);
    Stepper<Scalar>(s.grid, q, mat, src, p).transport(s);
    detail::require_finite(s, "transport_step");
    return s;
}

template <typename Scalar>
ParityState<Scalar> relaxation_step(ParityState<Scalar> s, const DirectionSet<Scalar>& q,
                                    const MaterialField<Scalar>& mat, const SchemeParams<Scalar>& p) {
    s.check(q);
    const SourceTerm<Scalar> none;
    Stepper<Scalar>(s.grid, q, mat, none, p).relax(s);
    detail::require_finite(s, "relaxation_step");
    return s;
}

template <typename Scalar>
ParityState<Scalar> step(ParityState<Scalar> s, const DirectionSet<Scalar>& q, const MaterialField<Scalar>& mat,
                         const SourceTerm<Scalar>& src, const SchemeParams<Scalar>& p) {
    s.check(q);
    Stepper<Scalar>(s.grid, q, mat, src, p).step(s);
    detail::require_finite(s, "step");
    return s;
}

// ---------------------------------------------------------------------------

template <typename Scalar>
struct StepDiagnostics {
    std::size_t step = 0;
    Scalar t = 0;
    Scalar dt = 0;
    Scalar mass = 0;
    Scalar max_rho = 0;
};

template <typename Scalar>
struct RunOptions {
    Scalar epsilon = 1;
    Scalar t_final = 0;
    Scalar safety = Scalar(0.9);
    std::optional<Scalar> phi;  ///< overrides the relaxation-parameter rule
    std::optional<Scalar> dt;   ///< overrides the CFL rule
    std::vector<Scalar> snapshot_times;
    /// A run is declared unstable once max|rho| exceeds this multiple of its
    /// initial value (or turns nonfinite).
    Scalar blowup_factor = Scalar(1e6);
    std::function<void(const StepDiagnostics<Scalar>&)> on_step;
    std::function<void(Scalar, const ParityState<Scalar>&, const RField<Scalar>&)> on_snapshot;
};

template <typename Scalar>
struct RunResult {
    ParityState<Scalar> state;
    RField<Scalar> rho;
    std::vector<StepDiagnostics<Scalar>> diagnostics;
    Scalar dt = 0;
    Scalar phi = 0;
    std::size_t steps = 0;
};

/// Advances `init` to t_final with the CFL step (last step truncated) and the
/// relaxation-parameter rule unless overridden. Snapshot times are hit exactly.
/// Throws NumericOverflow with the failing step index on blow-up.
template <typename Scalar>
RunResult<Scalar> run(ParityState<Scalar> init, const DirectionSet<Scalar>& q, const MaterialField<Scalar>& mat,
                      const SourceTerm<Scalar>& src, const RunOptions<Scalar>& opt) {
    if (!(opt.t_final >= 0)) throw InvalidArgument("run: t_final must be nonnegative");
    init.check(q);
    const auto& g = init.grid;

    RunResult<Scalar> res;
    res.dt = opt.dt ? *opt.dt : cfl_timestep(opt.epsilon, g, mat, opt.safety);
    res.phi = opt.phi ? *opt.phi : relaxation_parameter(opt.epsilon, g, mat);

    std::vector<Scalar> snaps = opt.snapshot_times;
    std::sort(snaps.begin(), snaps.end());
    std::size_t next_snap = 0;

    const Scalar vol = g.point_volume();
    auto record = [&](std::size_t k, Scalar t, Scalar dt, const RField<Scalar>& rho) {
        StepDiagnostics<Scalar> d{k, t, dt, rho.sum() * vol, rho.max_abs()};
        res.diagnostics.push_back(d);
        if (opt.on_step) opt.on_step(d);
        return d;
    };
    auto emit_snapshots = [&](const ParityState<Scalar>& s, const RField<Scalar>& rho) {
        while (next_snap < snaps.size() && snaps[next_snap] <= s.t) {
            if (opt.on_snapshot) opt.on_snapshot(snaps[next_snap], s, rho);
            ++next_snap;
        }
    };

    res.rho = density(init.r1, init.r2, q);
    const Scalar initial_max = record(0, init.t, Scalar(0), res.rho).max_rho;
    emit_snapshots(init, res.rho);

    res.state = std::move(init);
    auto& s = res.state;
    const Scalar t_end = s.t + opt.t_final;
    if (!(opt.t_final > 0)) return res;

    Stepper<Scalar> stepper(g, q, mat, src, SchemeParams<Scalar>{opt.epsilon, res.phi, res.dt, opt.safety});
    const Scalar threshold = initial_max > 0 ? opt.blowup_factor * initial_max
                                             : std::numeric_limits<Scalar>::infinity();
    while (s.t < t_end) {
        Scalar target = t_end;
        if (next_snap < snaps.size() && snaps[next_snap] < target) target = snaps[next_snap];
        const Scalar remaining = target - s.t;
        const bool lands = remaining <= res.dt * (Scalar(1) + Scalar(1e-10));
        const Scalar dt = lands ? remaining : res.dt;
        stepper.set_dt(dt);
        stepper.step(s);
        if (lands) s.t = target;
        ++res.steps;

        const auto d = record(res.steps, s.t, dt, stepper.last_density());
        if (!std::isfinite(double(d.max_rho)) || d.max_rho > threshold) {
            throw NumericOverflow("run: solution blew up at step " + std::to_string(res.steps) +
                                      " (t=" + std::to_string(double(s.t)) + ")",
                                  res.steps, double(s.t));
        }
        emit_snapshots(s, stepper.last_density());
    }
    if (!s.all_finite()) throw NumericOverflow("run: nonfinite state", res.steps, double(s.t));
    res.rho = stepper.last_density();
    return res;
}

// ---------------------------------------------------------------------------

/// Velocity quadrant by the signs of (xi, eta).
enum class Quadrant { pp, mp, mm, pm };

template <typename Scalar>
RField<Scalar> interpolate_to_R(const JField<Scalar>& j) {
    const Eigen::Index ny = j.hface.rows();
    const Eigen::Index nx = j.hface.cols();
    RField<Scalar> out{Plane<Scalar>(ny, nx), Plane<Scalar>(ny, nx)};
    for (Eigen::Index r = 0; r < ny; ++r) {
        const Eigen::Index rm = (r + ny - 1) % ny;
        const Eigen::Index rp = (r + 1) % ny;
        for (Eigen::Index c = 0; c < nx; ++c) {
            const Eigen::Index cm = (c + nx - 1) % nx;
            const Eigen::Index cp = (c + 1) % nx;
            // vertex (i,j): faces (i+-1/2, j) and (i, j+-1/2)
            out.vertex(r, c) = (j.hface(r, c) + j.hface(r, cm) + j.vface(r, c) + j.vface(rm, c)) / Scalar(4);
            // center (i+1/2, j+1/2): faces (i+1/2, j), (i+1/2, j+1), (i, j+1/2), (i+1, j+1/2)
            out.center(r, c) = (j.hface(r, c) + j.hface(rp, c) + j.vface(r, c) + j.vface(r, cp)) / Scalar(4);
        }
    }
    return out;
}

/// f at R-points for every direction of the requested quadrant:
/// xi*eta < 0 uses r1 + eps sign(xi) j1, otherwise r2 + eps sign(xi) j2.
template <typename Scalar>
std::vector<RField<Scalar>> reconstruct_f(const ParityState<Scalar>& s, Quadrant quadrant, Scalar epsilon) {
    const bool mixed = quadrant == Quadrant::mp || quadrant == Quadrant::pm;
    const Scalar sign_xi = (quadrant == Quadrant::pp || quadrant == Quadrant::pm) ? Scalar(1) : Scalar(-1);
    const auto& r = mixed ? s.r1 : s.r2;
    const auto& j = mixed ? s.j1 : s.j2;
    std::vector<RField<Scalar>> f;
    f.reserve(r.size());
    for (std::size_t d = 0; d < r.size(); ++d) {
        require_conforms(r[d], s.grid, "reconstruct_f");
        require_conforms(j[d], s.grid, "reconstruct_f");
        f.push_back(r[d] + (epsilon * sign_xi) * interpolate_to_R(j[d]));
    }
    return f;
}

}  // namespace apstag
