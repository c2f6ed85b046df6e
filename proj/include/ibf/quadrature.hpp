#pragma once

#include <functional>

namespace ibf {

struct QuadratureConfig {
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    int max_depth = 50;

    /// Throws InputError unless tolerances are positive and max_depth >= 10.
    void validate() const;
    QuadratureConfig tightened(double factor) const;
};

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    /// False when some subinterval hit max_depth before meeting its tolerance.
    bool converged = true;
    long evaluations = 0;
};

/// Integration domain. Infinite ends are mapped onto a bounded interval with
/// x = origin + scale * atanh(u); `scale` should roughly match the width of
/// the integrand so that the transformed integrand is well resolved. The
/// integrand must decay faster than exp(-2|x| / scale) in an infinite tail.
class Domain {
public:
    static Domain interval(double lower, double upper);
    /// [lower, +inf)
    static Domain above(double lower, double scale = 1.0);
    /// (-inf, upper]
    static Domain below(double upper, double scale = 1.0);
    /// (-inf, +inf), centered at `center`.
    static Domain line(double center = 0.0, double scale = 1.0);

    enum class Kind { Interval, Above, Below, Line };

    Kind kind() const { return kind_; }
    double lower() const { return lower_; }
    double upper() const { return upper_; }
    double scale() const { return scale_; }

private:
    Domain(Kind kind, double lower, double upper, double scale)
        : kind_(kind), lower_(lower), upper_(upper), scale_(scale) {}

    Kind kind_;
    double lower_;
    double upper_;
    double scale_;
};

using Integrand = std::function<double(double)>;

/// Adaptive Simpson quadrature. Non-convergence is reported through
/// `QuadratureResult::converged`, never thrown.
QuadratureResult integrate_1d(const Integrand& f, const Domain& domain,
                              const QuadratureConfig& config = {});

}  // namespace ibf
