#include "ftn/pulse.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

#include "ftn/errors.hpp"

namespace ftn {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_spec(const PulseSpec& s, const char* who)
{
    if (!(s.symbol_time > 0.0) || !std::isfinite(s.symbol_time))
        throw std::domain_error(std::string(who) + ": symbol_time must be positive");
    if (!(s.rolloff >= 0.0 && s.rolloff <= 1.0))
        throw std::domain_error(std::string(who) + ": rolloff must be in [0, 1]");
}

} // namespace

double rrc_value(const PulseSpec& spec, double t)
{
    check_spec(spec, "rrc_value");
    const double T = spec.symbol_time;
    const double b = spec.rolloff;
    const double x = t / T; // time in symbol periods

    if (std::fabs(x) < 1e-10)
        return (1.0 - b + 4.0 * b / kPi) / std::sqrt(T);

    if (b > 0.0 && std::fabs(std::fabs(x) - 1.0 / (4.0 * b)) < 1e-8) {
        // limit at the vanishing-denominator point
        const double s = std::sin(kPi / (4.0 * b));
        const double c = std::cos(kPi / (4.0 * b));
        return (b / std::sqrt(2.0)) * ((1.0 + 2.0 / kPi) * s + (1.0 - 2.0 / kPi) * c) / std::sqrt(T);
    }

    const double num = std::sin(kPi * x * (1.0 - b)) + 4.0 * b * x * std::cos(kPi * x * (1.0 + b));
    const double den = kPi * x * (1.0 - (4.0 * b * x) * (4.0 * b * x));
    return num / den / std::sqrt(T);
}

double rrc_spectrum(const PulseSpec& spec, double f)
{
    check_spec(spec, "rrc_spectrum");
    const double T = spec.symbol_time;
    const double b = spec.rolloff;
    const double af = std::fabs(f);
    const double f1 = (1.0 - b) / (2.0 * T);
    const double f2 = (1.0 + b) / (2.0 * T);

    if (af <= f1)
        return std::sqrt(T);
    if (af >= f2 || b == 0.0)
        return 0.0;
    const double c = std::cos(kPi * T / b * (af - f1));
    return std::sqrt(0.5 * T * (1.0 + c));
}

bool operation_region_ok(double tau, double rolloff)
{
    if (!(tau > 0.0) || !std::isfinite(tau))
        throw std::domain_error("operation_region_ok: tau must be positive");
    if (!(rolloff >= 0.0 && rolloff <= 1.0))
        throw std::domain_error("operation_region_ok: rolloff must be in [0, 1]");
    return tau < 1.0 / (1.0 + rolloff);
}

double flat_band_constant(const PulseSpec& basis_spec, double bandwidth)
{
    check_spec(basis_spec, "flat_band_constant");
    if (!(bandwidth > 0.0))
        throw std::domain_error("flat_band_constant: bandwidth must be positive");
    const double flat_end = (1.0 - basis_spec.rolloff) / (2.0 * basis_spec.symbol_time);
    if (bandwidth > flat_end * (1.0 + 1e-12))
        throw FlatBandViolation("flat_band_constant: basis flat band ends at " +
                                std::to_string(flat_end) + " but bandwidth " +
                                std::to_string(bandwidth) + " is required");
    return std::sqrt(basis_spec.symbol_time);
}

BasisExpansion basis_coefficients(const PulseSpec& signal_spec, const PulseSpec& basis_spec,
                                  double tau, int num_taps, bool force)
{
    check_spec(signal_spec, "basis_coefficients");
    check_spec(basis_spec, "basis_coefficients");
    if (num_taps < 1)
        throw std::invalid_argument("basis_coefficients: num_taps must be >= 1");
    const double tT = tau * signal_spec.symbol_time;
    if (std::fabs(basis_spec.symbol_time - tT) > 1e-9 * signal_spec.symbol_time)
        throw std::invalid_argument("basis_coefficients: basis symbol_time must equal tau * T");

    double c0;
    if (force) {
        c0 = rrc_spectrum(basis_spec, 0.0);
    } else {
        if (!operation_region_ok(tau, signal_spec.rolloff))
            throw OperationRegionViolation("basis_coefficients: tau=" + std::to_string(tau) +
                                           " not below 1/(1+rolloff)=" +
                                           std::to_string(1.0 / (1.0 + signal_spec.rolloff)));
        const double bandwidth = 0.5 * (1.0 + signal_spec.rolloff) / signal_spec.symbol_time;
        c0 = flat_band_constant(basis_spec, bandwidth);
    }

    BasisExpansion e;
    e.tau = tau;
    e.num_taps = num_taps;
    e.c0 = c0;
    e.coefficients.resize(static_cast<std::size_t>(num_taps));
    const int center = num_taps / 2;
    for (int k = 0; k < num_taps; ++k) {
        const int n = k - center;
        e.coefficients[static_cast<std::size_t>(k)] = tT / c0 * rrc_value(signal_spec, n * tT);
    }
    return e;
}

double reconstruct(const BasisExpansion& expansion, const PulseSpec& basis_spec, double t)
{
    check_spec(basis_spec, "reconstruct");
    const double tT = basis_spec.symbol_time;
    const int center = expansion.center_index();
    double s = 0.0;
    for (int k = 0; k < expansion.num_taps; ++k) {
        const int n = k - center;
        s += expansion.coefficients[static_cast<std::size_t>(k)] * rrc_value(basis_spec, t - n * tT);
    }
    return s;
}

double approximation_error(const PulseSpec& signal_spec, const PulseSpec& basis_spec,
                           const BasisExpansion& expansion, const std::vector<double>& grid)
{
    double worst = 0.0;
    for (double t : grid) {
        const double err = std::fabs(rrc_value(signal_spec, t) - reconstruct(expansion, basis_spec, t));
        if (err > worst)
            worst = err;
    }
    return worst;
}

std::vector<double> default_time_grid(double symbol_time)
{
    if (!(symbol_time > 0.0))
        throw std::domain_error("default_time_grid: symbol_time must be positive");
    std::vector<double> g;
    const int half = 5 * 64;
    g.reserve(2 * half + 1);
    for (int k = -half; k <= half; ++k)
        g.push_back(k * symbol_time / 64.0);
    return g;
}

double spectral_identity_error(const PulseSpec& signal_spec, double tau, int num_samples)
{
    check_spec(signal_spec, "spectral_identity_error");
    if (!(tau > 0.0) || !std::isfinite(tau))
        throw std::domain_error("spectral_identity_error: tau must be positive");
    if (num_samples < 1)
        throw std::invalid_argument("spectral_identity_error: num_samples must be >= 1");

    const double T = signal_spec.symbol_time;
    const double b = signal_spec.rolloff;
    const double tT = tau * T;
    const double W = 0.5 * (1.0 + b) / T;

    // Truncate the tap sum where the pulse envelope is negligible. Slowly
    // decaying near-zero rolloffs need a much wider window.
    const double t_max = T * std::max(1500.0, 48.0 / std::max(b, 0.004));
    const int n_max = static_cast<int>(std::ceil(t_max / tT));

    std::vector<double> taps(static_cast<std::size_t>(n_max) + 1);
    for (int n = 0; n <= n_max; ++n)
        taps[static_cast<std::size_t>(n)] = rrc_value(signal_spec, n * tT);

    double worst = 0.0;
    for (int i = 0; i < num_samples; ++i) {
        // interior points only; at rolloff 0 the spectrum has a jump exactly
        // at W where the truncated sum converges to the midpoint
        const double f = (i + 0.5) * W / num_samples;
        // sum via incremental rotation; h(-n tau T) = h(n tau T)
        const std::complex<double> step = std::polar(1.0, -2.0 * kPi * f * tT);
        std::complex<double> rot = step;
        std::complex<double> acc = taps[0];
        for (int n = 1; n <= n_max; ++n) {
            acc += taps[static_cast<std::size_t>(n)] * (rot + std::conj(rot));
            rot *= step;
        }
        const double err = std::abs(tT * acc - rrc_spectrum(signal_spec, f));
        if (err > worst)
            worst = err;
    }
    return worst;
}

} // namespace ftn
