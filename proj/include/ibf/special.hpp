#pragma once

// Scalar special functions used across the library. Everything here is a pure
// function of its arguments.

namespace ibf::math {

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double ln10 = 2.30258509299404568402;
inline constexpr double log_sqrt_2pi = 0.91893853320467274178;

double normal_pdf(double x, double mean = 0.0, double sd = 1.0);
double normal_log_pdf(double x, double mean = 0.0, double sd = 1.0);
double normal_cdf(double z);
/// Upper tail 1 - Phi(z), accurate for large positive z.
double normal_sf(double z);
/// log(1 - Phi(z)); stays finite far into the tail.
double normal_log_sf(double z);
double normal_quantile(double p);

double inverse_gamma_log_pdf(double x, double shape, double rate);

/// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double incomplete_beta(double a, double b, double x);
double student_t_cdf(double t, double df);

/// log(1 + exp(x)) without overflow.
double softplus(double x);
double inv_logit(double x);
double log_sum_exp(double a, double b);

}  // namespace ibf::math
