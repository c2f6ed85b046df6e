#pragma once

#include <functional>
#include <string_view>

#include "ibf/quadrature.hpp"

namespace ibf {

enum class Region { Null, Alternative };

std::string_view to_string(Region r);

/// H0: |theta - center| <= half_width versus H1: |theta - center| > half_width.
/// The boundary belongs to the null region.
class IntervalHypothesis {
public:
    IntervalHypothesis(double center, double half_width);

    double center() const { return center_; }
    double half_width() const { return half_width_; }
    double null_lower() const { return center_ - half_width_; }
    double null_upper() const { return center_ + half_width_; }

    Region region_of(double theta) const;
    bool in_null(double theta) const { return region_of(theta) == Region::Null; }

    /// Same center, different half-width.
    IntervalHypothesis with_half_width(double half_width) const { return {center_, half_width}; }

private:
    double center_;
    double half_width_;
};

/// Uniform density on the null region.
class UniformNullPrior {
public:
    explicit UniformNullPrior(IntervalHypothesis h) : h_(h) {}

    const IntervalHypothesis& hypothesis() const { return h_; }
    double log_density(double theta) const;
    double density(double theta) const;
    /// Density value inside the null region, 1 / (2 delta).
    double height() const { return 0.5 / h_.half_width(); }

private:
    IntervalHypothesis h_;
};

/// Normal(center, scale^2) restricted to the alternative region and renormalized.
class TruncatedNormalAltPrior {
public:
    TruncatedNormalAltPrior(IntervalHypothesis h, double scale);

    const IntervalHypothesis& hypothesis() const { return h_; }
    double scale() const { return scale_; }
    double log_density(double theta) const;
    double density(double theta) const;
    /// log of the normal mass outside the null region: log(2 (1 - Phi(delta / tau))).
    double log_normalizer() const { return log_normalizer_; }
    /// Limit of the density as theta approaches the null boundary from outside.
    double boundary_density() const;

private:
    IntervalHypothesis h_;
    double scale_;
    double log_normalizer_;
};

/// pi = (1 - eta1) pi0 + eta1 pi1. The two components have disjoint supports,
/// so at most one term is nonzero at any theta.
class MixturePrior {
public:
    MixturePrior(UniformNullPrior null_prior, TruncatedNormalAltPrior alt_prior, double eta1);
    MixturePrior(const IntervalHypothesis& h, double tau, double eta1)
        : MixturePrior(UniformNullPrior(h), TruncatedNormalAltPrior(h, tau), eta1) {}

    const IntervalHypothesis& hypothesis() const { return null_.hypothesis(); }
    const UniformNullPrior& null_prior() const { return null_; }
    const TruncatedNormalAltPrior& alt_prior() const { return alt_; }
    double eta1() const { return eta1_; }
    double eta0() const { return 1.0 - eta1_; }

    double log_density(double theta) const;
    double density(double theta) const;

    /// Inverse-CDF draw from two independent uniforms on (0, 1): the first
    /// picks the component (and the side of the alternative), the second the value.
    double sample(double u_component, double u_value) const;

private:
    UniformNullPrior null_;
    TruncatedNormalAltPrior alt_;
    double eta1_;
};

double mixture_density(const MixturePrior& p, double theta);

using DensityFn = std::function<double(double)>;

/// A prior split along the hypothesis partition.
struct DecompositionResult {
    DensityFn null_prior_density;
    DensityFn alt_prior_density;
    double eta1 = 0.0;
    /// Quadrature mass of the original density over the null region.
    double null_mass = 0.0;
    double quadrature_error = 0.0;

    /// (1 - eta1) pi0(theta) + eta1 pi1(theta).
    double recombined(double theta) const;
};

/// Truncates `density` on the null and alternative regions. `scale` is the
/// rough width of the density, used for the infinite-tail substitution.
/// Throws DegenerateError when either region carries no mass.
DecompositionResult decompose(const DensityFn& density, const IntervalHypothesis& h,
                              double scale = 1.0, const QuadratureConfig& config = {});
DecompositionResult decompose(const MixturePrior& p, const QuadratureConfig& config = {});

}  // namespace ibf
