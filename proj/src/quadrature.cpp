#include "ibf/quadrature.hpp"

#include <cmath>
#include <limits>

#include "ibf/errors.hpp"

namespace ibf {

void QuadratureConfig::validate() const {
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0))
        throw InputError("quadrature tolerances must be positive");
    if (max_depth < 10) throw InputError("quadrature max_depth must be at least 10");
}

QuadratureConfig QuadratureConfig::tightened(double factor) const {
    QuadratureConfig out = *this;
    out.abs_tol *= factor;
    out.rel_tol *= factor;
    return out;
}

Domain Domain::interval(double lower, double upper) {
    if (!std::isfinite(lower) || !std::isfinite(upper) || !(lower <= upper))
        throw InputError("Domain::interval requires finite lower <= upper");
    return {Kind::Interval, lower, upper, 1.0};
}

Domain Domain::above(double lower, double scale) {
    if (!std::isfinite(lower) || !(scale > 0.0))
        throw InputError("Domain::above requires a finite bound and positive scale");
    return {Kind::Above, lower, std::numeric_limits<double>::infinity(), scale};
}

Domain Domain::below(double upper, double scale) {
    if (!std::isfinite(upper) || !(scale > 0.0))
        throw InputError("Domain::below requires a finite bound and positive scale");
    return {Kind::Below, -std::numeric_limits<double>::infinity(), upper, scale};
}

Domain Domain::line(double center, double scale) {
    if (!std::isfinite(center) || !(scale > 0.0))
        throw InputError("Domain::line requires a finite center and positive scale");
    return {Kind::Line, center, center, scale};
}

namespace {

constexpr int initial_panels = 16;

class Simpson {
public:
    Simpson(const Integrand& g, int max_depth) : g_(g), max_depth_(max_depth) {}

    double eval(double u) {
        ++result.evaluations;
        return g_(u);
    }

    double refine(double a, double b, double fa, double fm, double fb, double whole,
                  double tol, int depth) {
        const double m = 0.5 * (a + b);
        const double lm = 0.5 * (a + m);
        const double rm = 0.5 * (m + b);
        const double flm = eval(lm);
        const double frm = eval(rm);
        const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        const double delta = left + right - whole;
        if (!std::isfinite(delta)) {
            result.converged = false;
            return left + right;
        }
        if (std::fabs(delta) <= 15.0 * tol) {
            result.error_estimate += std::fabs(delta) / 15.0;
            return left + right + delta / 15.0;
        }
        if (depth >= max_depth_ || m <= a || m >= b) {
            result.converged = false;
            result.error_estimate += std::fabs(delta) / 15.0;
            return left + right + delta / 15.0;
        }
        return refine(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
               refine(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
    }

    QuadratureResult result;

private:
    const Integrand& g_;
    int max_depth_;
};

QuadratureResult integrate_bounded(const Integrand& g, double a, double b,
                                   const QuadratureConfig& config) {
    Simpson s(g, config.max_depth);
    if (a == b) return s.result;

    const double h = (b - a) / initial_panels;
    double nodes[2 * initial_panels + 1];
    for (int i = 0; i <= 2 * initial_panels; ++i) {
        const double u = (i == 2 * initial_panels) ? b : a + 0.5 * h * i;
        nodes[i] = s.eval(u);
    }
    double coarse = 0.0;
    double panel_sum[initial_panels];
    for (int p = 0; p < initial_panels; ++p) {
        panel_sum[p] = h / 6.0 * (nodes[2 * p] + 4.0 * nodes[2 * p + 1] + nodes[2 * p + 2]);
        coarse += panel_sum[p];
    }
    const double tol = std::max(config.abs_tol, config.rel_tol * std::fabs(coarse));
    double total = 0.0;
    for (int p = 0; p < initial_panels; ++p) {
        const double pa = a + h * p;
        const double pb = (p == initial_panels - 1) ? b : a + h * (p + 1);
        total += s.refine(pa, pb, nodes[2 * p], nodes[2 * p + 1], nodes[2 * p + 2],
                          panel_sum[p], tol / initial_panels, 0);
    }
    s.result.value = total;
    return s.result;
}

// Returns 0 where the mapped point or Jacobian is not finite (the endpoints of
// an infinite tail).
double guarded(double v) { return std::isfinite(v) ? v : 0.0; }

// Half-lines are open at their finite end: u = 0 samples the first double past
// the bound, so a density that jumps there (a region boundary that belongs to
// the other side) is seen through its one-sided limit.
double open_end(double bound, double toward) { return std::nextafter(bound, toward); }

}  // namespace

QuadratureResult integrate_1d(const Integrand& f, const Domain& domain,
                              const QuadratureConfig& config) {
    config.validate();
    switch (domain.kind()) {
        case Domain::Kind::Interval:
            return integrate_bounded(f, domain.lower(), domain.upper(), config);
        case Domain::Kind::Above: {
            const double lo = domain.lower();
            const double s = domain.scale();
            const Integrand g = [&](double u) {
                if (u >= 1.0) return 0.0;
                const double x = u == 0.0 ? open_end(lo, INFINITY) : lo + s * std::atanh(u);
                return guarded(f(x) * s / (1.0 - u * u));
            };
            return integrate_bounded(g, 0.0, 1.0, config);
        }
        case Domain::Kind::Below: {
            const double hi = domain.upper();
            const double s = domain.scale();
            const Integrand g = [&](double u) {
                if (u >= 1.0) return 0.0;
                const double x = u == 0.0 ? open_end(hi, -INFINITY) : hi - s * std::atanh(u);
                return guarded(f(x) * s / (1.0 - u * u));
            };
            return integrate_bounded(g, 0.0, 1.0, config);
        }
        case Domain::Kind::Line: {
            const double c = domain.lower();
            const double s = domain.scale();
            const Integrand g = [&](double u) {
                if (u <= -1.0 || u >= 1.0) return 0.0;
                return guarded(f(c + s * std::atanh(u)) * s / (1.0 - u * u));
            };
            return integrate_bounded(g, -1.0, 1.0, config);
        }
    }
    return {};
}

}  // namespace ibf
