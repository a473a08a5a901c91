// Statistical utilities: regularized incomplete gamma, chi-square quantile
// (used for the noise-based sphere radius), Gaussian tail function, and
// sample moments.
#pragma once

#include <cstdint>
#include <vector>

namespace ftn {

// Regularized lower incomplete gamma P(a, x); series for x < a+1, continued
// fraction otherwise.
double gamma_p(double a, double x);

// Chi-square CDF with dof degrees of freedom evaluated at x.
double chi_square_cdf(double x, double dof);

// Inverse chi-square CDF: smallest x with CDF(x) >= p. Bisection on a
// bracket grown from the mean; robust for the small dof used here.
double chi_square_quantile(double dof, double p);

// Gaussian tail probability Q(x) = P(N(0,1) > x).
double q_function(double x);

double mean(const std::vector<double>& v);
// Unbiased sample standard deviation (n-1 denominator); 0 for n < 2.
double sample_stddev(const std::vector<double>& v);

} // namespace ftn
