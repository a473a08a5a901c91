#include "ftn/stats.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ftn {

namespace {

// Series representation, converges fast for x < a+1.
double gamma_p_series(double a, double x)
{
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int n = 0; n < 500; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * 1e-16)
            break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for the upper tail Q(a,x), x >= a+1 (modified Lentz).
double gamma_q_cf(double a, double x)
{
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 500; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny)
            d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny)
            c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16)
            break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

} // namespace

double gamma_p(double a, double x)
{
    if (!(a > 0.0) || x < 0.0 || !std::isfinite(a) || !std::isfinite(x))
        throw std::domain_error("gamma_p: need a > 0 and x >= 0");
    if (x == 0.0)
        return 0.0;
    if (x < a + 1.0)
        return gamma_p_series(a, x);
    return 1.0 - gamma_q_cf(a, x);
}

double chi_square_cdf(double x, double dof)
{
    if (!(dof > 0.0))
        throw std::domain_error("chi_square_cdf: dof must be positive");
    if (x <= 0.0)
        return 0.0;
    return gamma_p(0.5 * dof, 0.5 * x);
}

double chi_square_quantile(double dof, double p)
{
    if (!(dof > 0.0))
        throw std::domain_error("chi_square_quantile: dof must be positive");
    if (!(p >= 0.0 && p < 1.0))
        throw std::domain_error("chi_square_quantile: need 0 <= p < 1");
    if (p == 0.0)
        return 0.0;

    // Grow an upper bracket, then bisect. ~90 iterations gives full double
    // precision on any bracket we can hit here.
    double hi = dof + 10.0 * std::sqrt(2.0 * dof) + 10.0;
    while (chi_square_cdf(hi, dof) < p)
        hi *= 2.0;
    double lo = 0.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi)
            break;
        if (chi_square_cdf(mid, dof) < p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double q_function(double x)
{
    return 0.5 * std::erfc(x / std::sqrt(2.0));
}

double mean(const std::vector<double>& v)
{
    if (v.empty())
        return 0.0;
    double s = 0.0;
    for (double x : v)
        s += x;
    return s / static_cast<double>(v.size());
}

double sample_stddev(const std::vector<double>& v)
{
    if (v.size() < 2)
        return 0.0;
    const double m = mean(v);
    double s = 0.0;
    for (double x : v)
        s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

} // namespace ftn
