#pragma once

// Separable source terms in parity form.
//
// The even part Q_even feeds the r-equations on the R-grid and the scaled odd
// part Q_odd/eps feeds the j-equations on the J-grid. Both are stored as sums
// of  time_factor(t) * coefficient[parity][direction] * spatial_field,
// so a step costs one axpy per term and direction.

#include <functional>
#include <utility>
#include <vector>

#include "apstag/angular.hpp"
#include "apstag/errors.hpp"
#include "apstag/grid.hpp"

namespace apstag {

template <typename Scalar>
struct SourceTerm {
    using TimeFactor = std::function<Scalar(Scalar)>;

    template <typename Field>
    struct Term {
        TimeFactor time;                             ///< empty means constant 1
        Field space;
        std::vector<Scalar> coeff[2];                ///< [parity 0 -> r1/j1, 1 -> r2/j2][direction]

        Scalar factor(Scalar t) const { return time ? time(t) : Scalar(1); }
    };

    std::vector<Term<RField<Scalar>>> even;
    std::vector<Term<JField<Scalar>>> odd;

    bool empty() const { return even.empty() && odd.empty(); }

    /// Direction independent with no odd part.
    bool isotropic() const {
        if (!odd.empty()) return false;
        for (const auto& t : even) {
            for (const auto& c : t.coeff) {
                for (Scalar v : c) {
                    if (v != c.front() || v != t.coeff[0].front()) return false;
                }
            }
        }
        return true;
    }

    /// Isotropic source Q(x,y) with an optional time factor.
    static SourceTerm isotropic_field(RField<Scalar> q, Eigen::Index n_directions, TimeFactor time = {}) {
        SourceTerm s;
        Term<RField<Scalar>> t{std::move(time), std::move(q), {}};
        t.coeff[0].assign(static_cast<std::size_t>(n_directions), Scalar(1));
        t.coeff[1] = t.coeff[0];
        s.even.push_back(std::move(t));
        return s;
    }

    /// out = Q_even for the given parity (0 or 1) and direction at time t.
    void even_into(Scalar t, int parity, Eigen::Index dir, RField<Scalar>& out) const {
        out.vertex.setZero();
        out.center.setZero();
        for (const auto& term : even) {
            const Scalar c = term.factor(t) * term.coeff[parity][static_cast<std::size_t>(dir)];
            if (c == Scalar(0)) continue;
            out.vertex += c * term.space.vertex;
            out.center += c * term.space.center;
        }
    }

    /// out = Q_odd / eps for the given parity and direction at time t.
    void odd_into(Scalar t, int parity, Eigen::Index dir, JField<Scalar>& out) const {
        out.hface.setZero();
        out.vface.setZero();
        for (const auto& term : odd) {
            const Scalar c = term.factor(t) * term.coeff[parity][static_cast<std::size_t>(dir)];
            if (c == Scalar(0)) continue;
            out.hface += c * term.space.hface;
            out.vface += c * term.space.vface;
        }
    }

    void check(const GridGeometry<Scalar>& g, Eigen::Index n_directions) const {
        const auto n = static_cast<std::size_t>(n_directions);
        for (const auto& t : even) {
            require_conforms(t.space, g, "source");
            if (t.coeff[0].size() != n || t.coeff[1].size() != n) {
                throw ShapeMismatch("source: coefficient count does not match the direction set");
            }
        }
        for (const auto& t : odd) {
            require_conforms(t.space, g, "source");
            if (t.coeff[0].size() != n || t.coeff[1].size() != n) {
                throw ShapeMismatch("source: coefficient count does not match the direction set");
            }
        }
    }
};

}  // namespace apstag
