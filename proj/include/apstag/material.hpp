#pragma once

#include <algorithm>
#include <limits>

#include "apstag/errors.hpp"
#include "apstag/grid.hpp"

namespace apstag {

/// Scattering and absorption coefficients sampled independently on the R-
/// and J-grids. The total cross section is sigma_t = sigma_s + eps^2 sigma_a.
template <typename Scalar>
struct MaterialField {
    RField<Scalar> sigma_s_R;
    RField<Scalar> sigma_a_R;
    JField<Scalar> sigma_s_J;
    JField<Scalar> sigma_a_J;

    template <typename SigmaS, typename SigmaA>
    static MaterialField sample(const GridGeometry<Scalar>& g, SigmaS&& sigma_s, SigmaA&& sigma_a) {
        MaterialField m{sample_on_R<Scalar>(sigma_s, g), sample_on_R<Scalar>(sigma_a, g),
                        sample_on_J<Scalar>(sigma_s, g), sample_on_J<Scalar>(sigma_a, g)};
        m.validate();
        return m;
    }

    static MaterialField uniform(const GridGeometry<Scalar>& g, Scalar sigma_s, Scalar sigma_a) {
        return sample(g, [=](Scalar, Scalar) { return sigma_s; }, [=](Scalar, Scalar) { return sigma_a; });
    }

    bool conforms(const GridGeometry<Scalar>& g) const {
        return sigma_s_R.conforms(g) && sigma_a_R.conforms(g) && sigma_s_J.conforms(g) &&
               sigma_a_J.conforms(g);
    }

    /// Coefficients must be finite and nonnegative.
    void validate() const {
        const bool finite = sigma_s_R.all_finite() && sigma_a_R.all_finite() &&
                            sigma_s_J.all_finite() && sigma_a_J.all_finite();
        if (!finite) throw InvalidMaterial("material: nonfinite cross section");
        const Scalar lowest = std::min({sigma_s_R.min_coeff(), sigma_a_R.min_coeff(),
                                        sigma_s_J.hface.minCoeff(), sigma_s_J.vface.minCoeff(),
                                        sigma_a_J.hface.minCoeff(), sigma_a_J.vface.minCoeff()});
        if (lowest < 0) throw InvalidMaterial("material: negative cross section");
    }

    Scalar sigma_a_max() const {
        return std::max({sigma_a_R.max_coeff(), sigma_a_J.hface.maxCoeff(), sigma_a_J.vface.maxCoeff()});
    }

    /// Smallest sigma_s + eps^2 sigma_a over every sample of both grids.
    Scalar sigma_t_min(Scalar epsilon) const {
        const Scalar e2 = epsilon * epsilon;
        return std::min({(sigma_s_R.vertex + e2 * sigma_a_R.vertex).minCoeff(),
                         (sigma_s_R.center + e2 * sigma_a_R.center).minCoeff(),
                         (sigma_s_J.hface + e2 * sigma_a_J.hface).minCoeff(),
                         (sigma_s_J.vface + e2 * sigma_a_J.vface).minCoeff()});
    }

    JField<Scalar> sigma_t_J(Scalar epsilon) const {
        const Scalar e2 = epsilon * epsilon;
        return {sigma_s_J.hface + e2 * sigma_a_J.hface, sigma_s_J.vface + e2 * sigma_a_J.vface};
    }
};

}  // namespace apstag
