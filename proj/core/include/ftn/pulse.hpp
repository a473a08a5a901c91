// Root-raised-cosine pulse, its analytic spectrum, and the expansion of a
// T-orthogonal pulse onto a bank of time-compressed orthonormal pulses.
// The expansion turns the continuous-time accelerated-signaling waveform into
// a finite discrete tap model with white noise after matched filtering.
#pragma once

#include <vector>

#include "ftn/mat.hpp"

namespace ftn {

// Unit-energy root-raised-cosine pulse description.
struct PulseSpec {
    double rolloff;     // in [0, 1]
    double symbol_time; // T > 0, orthogonality period of the pulse
};

// h(t) for the unit-energy rRC pulse. The two removable singularities
// (t = 0 and |t| = T/(4*rolloff)) use their analytic limits.
double rrc_value(const PulseSpec& spec, double t);

// Analytic spectrum H(f) = sqrt of the raised-cosine spectrum; real,
// nonnegative, zero beyond (1+rolloff)/(2T).
double rrc_spectrum(const PulseSpec& spec, double f);

// True when the compression factor tau and the signal pulse rolloff admit an
// exact basis expansion: tau < 1/(1+rolloff), strict.
bool operation_region_ok(double tau, double rolloff);

// Value of the basis pulse's spectrum on its flat band, checked against the
// signal bandwidth: the flat band must extend to at least `bandwidth`.
// Throws FlatBandViolation otherwise. (The same inequality also guarantees
// the basis spectrum is zero beyond 1/symbol_time - bandwidth, i.e. adjacent
// spectral replicas of the tap sum do not reach into the signal band.)
double flat_band_constant(const PulseSpec& basis_spec, double bandwidth);

// Tap expansion h(t) ~= sum_k coefficients[k] * v(t - offset_k * tau * T)
// with offset_k = k - num_taps/2, so the center tap sits on the pulse peak.
struct BasisExpansion {
    std::vector<double> coefficients;
    double tau = 0.0;
    int num_taps = 0;
    double c0 = 0.0; // flat-band constant of the basis pulse

    int center_index() const { return num_taps / 2; }
};

// Sample-and-scale tap coefficients: coefficients[k] = (tau*T/c0) * h(n*tau*T).
// Preconditions: basis_spec.symbol_time == tau * signal_spec.symbol_time, and
// (unless force is set) the operation region and flat-band conditions hold.
// With force=true the taps are computed anyway (the expansion is then only
// approximate); used to demonstrate how the expansion degrades outside the
// valid region.
BasisExpansion basis_coefficients(const PulseSpec& signal_spec, const PulseSpec& basis_spec,
                                  double tau, int num_taps, bool force = false);

// Evaluate the tap expansion at time t.
double reconstruct(const BasisExpansion& expansion, const PulseSpec& basis_spec, double t);

// Max absolute deviation |h(t) - reconstruction(t)| over the given grid.
double approximation_error(const PulseSpec& signal_spec, const PulseSpec& basis_spec,
                           const BasisExpansion& expansion, const std::vector<double>& grid);

// Default comparison grid: |t| <= 5T at 64 points per symbol period.
std::vector<double> default_time_grid(double symbol_time);

// Numerically checks that inside the signal band the analytic spectrum equals
// the discrete-time spectrum of the samples h(n*tau*T) scaled by tau*T:
//   H(f) == tau*T * sum_n h(n*tau*T) e^{-j 2 pi f n tau T},  |f| <= W,
// with W = (1+rolloff)/(2T). Returns the max modulus difference over
// num_samples interior frequency points. Violating the operation region makes
// spectral replicas overlap and the difference large.
double spectral_identity_error(const PulseSpec& signal_spec, double tau, int num_samples);

} // namespace ftn
