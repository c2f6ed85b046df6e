#include "ibf/hypothesis.hpp"

#include <cmath>
#include <limits>

#include "ibf/errors.hpp"
#include "ibf/special.hpp"

namespace ibf {

namespace {
constexpr double neg_inf = -std::numeric_limits<double>::infinity();
}

std::string_view to_string(Region r) {
    return r == Region::Null ? "null" : "alternative";
}

IntervalHypothesis::IntervalHypothesis(double center, double half_width)
    : center_(center), half_width_(half_width) {
    if (!std::isfinite(center)) throw InputError("hypothesis center must be finite");
    if (!std::isfinite(half_width) || !(half_width > 0.0))
        throw InputError("hypothesis half-width must be positive and finite");
}

Region IntervalHypothesis::region_of(double theta) const {
    if (!std::isfinite(theta)) throw InputError("region_of: theta must be finite");
    return std::fabs(theta - center_) <= half_width_ ? Region::Null : Region::Alternative;
}

double UniformNullPrior::log_density(double theta) const {
    return h_.in_null(theta) ? -std::log(2.0 * h_.half_width()) : neg_inf;
}

double UniformNullPrior::density(double theta) const {
    return h_.in_null(theta) ? height() : 0.0;
}

TruncatedNormalAltPrior::TruncatedNormalAltPrior(IntervalHypothesis h, double scale)
    : h_(h), scale_(scale) {
    if (!std::isfinite(scale) || !(scale > 0.0))
        throw InputError("alternative prior scale must be positive and finite");
    log_normalizer_ = std::log(2.0) + math::normal_log_sf(h_.half_width() / scale_);
}

double TruncatedNormalAltPrior::log_density(double theta) const {
    if (h_.in_null(theta)) return neg_inf;
    return math::normal_log_pdf(theta, h_.center(), scale_) - log_normalizer_;
}

double TruncatedNormalAltPrior::density(double theta) const {
    if (h_.in_null(theta)) return 0.0;
    return std::exp(log_density(theta));
}

double TruncatedNormalAltPrior::boundary_density() const {
    return std::exp(math::normal_log_pdf(h_.half_width(), 0.0, scale_) - log_normalizer_);
}

MixturePrior::MixturePrior(UniformNullPrior null_prior, TruncatedNormalAltPrior alt_prior,
                           double eta1)
    : null_(null_prior), alt_(alt_prior), eta1_(eta1) {
    const auto& a = null_.hypothesis();
    const auto& b = alt_.hypothesis();
    if (a.center() != b.center() || a.half_width() != b.half_width())
        throw InputError("mixture components must share one hypothesis");
    if (!(eta1 > 0.0 && eta1 < 1.0)) throw InputError("eta1 must lie in (0, 1)");
}

double MixturePrior::log_density(double theta) const {
    if (hypothesis().in_null(theta)) return std::log1p(-eta1_) + null_.log_density(theta);
    return std::log(eta1_) + alt_.log_density(theta);
}

double MixturePrior::density(double theta) const {
    return (1.0 - eta1_) * null_.density(theta) + eta1_ * alt_.density(theta);
}

double MixturePrior::sample(double u_component, double u_value) const {
    const auto& h = hypothesis();
    if (u_component < eta0()) return h.null_lower() + 2.0 * h.half_width() * u_value;
    const double side = (u_component - eta0()) / eta1_ < 0.5 ? -1.0 : 1.0;
    const double tail = math::normal_sf(h.half_width() / alt_.scale());
    // Upper-tail quantile through the lower tail keeps precision for small masses.
    double z = -math::normal_quantile(tail * (1.0 - u_value));
    z = std::max(z, h.half_width() / alt_.scale());
    double theta = h.center() + side * alt_.scale() * z;
    if (h.in_null(theta)) theta = std::nextafter(theta, side * std::numeric_limits<double>::infinity());
    return theta;
}

double mixture_density(const MixturePrior& p, double theta) {
    if (!std::isfinite(theta)) throw InputError("mixture_density: theta must be finite");
    return p.density(theta);
}

double DecompositionResult::recombined(double theta) const {
    return (1.0 - eta1) * null_prior_density(theta) + eta1 * alt_prior_density(theta);
}

DecompositionResult decompose(const DensityFn& density, const IntervalHypothesis& h,
                              double scale, const QuadratureConfig& config) {
    const auto inside = integrate_1d(density, Domain::interval(h.null_lower(), h.null_upper()), config);
    const auto left = integrate_1d(density, Domain::below(h.null_lower(), scale), config);
    const auto right = integrate_1d(density, Domain::above(h.null_upper(), scale), config);

    const double m0 = inside.value;
    const double m1 = left.value + right.value;
    if (!(m0 > 0.0) || !(m1 > 0.0))
        throw DegenerateError("decompose: prior has no mass in one of the regions");

    DecompositionResult out;
    out.null_mass = m0;
    out.eta1 = m1 / (m0 + m1);
    out.quadrature_error = inside.error_estimate + left.error_estimate + right.error_estimate;
    out.null_prior_density = [density, h, m0](double theta) {
        return h.in_null(theta) ? density(theta) / m0 : 0.0;
    };
    out.alt_prior_density = [density, h, m1](double theta) {
        return h.in_null(theta) ? 0.0 : density(theta) / m1;
    };
    return out;
}

DecompositionResult decompose(const MixturePrior& p, const QuadratureConfig& config) {
    const double scale = std::max(p.alt_prior().scale(), p.hypothesis().half_width());
    return decompose([p](double theta) { return p.density(theta); }, p.hypothesis(), scale, config);
}

}  // namespace ibf
