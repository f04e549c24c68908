#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "weakbeam/errors.hpp"
#include "weakbeam/params.hpp"

namespace weakbeam {

// Postselected spectral amplitude sampled on a detuning grid. All frequencies
// are detunings from the carrier (omega - omega0), angular.
struct SpectralAmplitude {
  std::vector<double> detuning;                // rad/s, strictly increasing
  std::vector<std::complex<double>> amplitude; // unnormalized
  bool grid_certified = false;  // true when the grid supports the Fourier check
};

// Single-line spectral amplitude of spontaneous emission,
// L(w) = 1 / (1 + 2i w / gamma); |L|^2 is a Lorentzian of FWHM gamma.
inline std::complex<double> lorentzian_amplitude(double detuning, double gamma) {
  return 1.0 / std::complex<double>(1.0, 2.0 * detuning / gamma);
}

// Superposition of the two Zeeman-shifted lines projected on the
// postselected polarization:
//   a(w) = e^{+i eps} L(w - delta) - e^{-i eps} L(w + delta).
// With the causal inverse transform s(t) = (1/2pi) int a(w) e^{+iwt} dw this
// gives |s(t)|^2 proportional to exp(-gamma t) sin^2(delta t + eps), i.e. the
// time-domain distribution of pointer_pdf.
inline SpectralAmplitude spectral_amplitude(const VSystemParams& params,
                                            const std::vector<double>& grid) {
  params.validate();
  if (grid.size() < 2) throw ValidationError("spectral grid needs at least 2 points");
  double max_spacing = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double step = grid[i] - grid[i - 1];
    if (!(step > 0.0)) throw ValidationError("spectral grid must be strictly increasing");
    if (step > max_spacing) max_spacing = step;
  }

  SpectralAmplitude out;
  out.detuning = grid;
  out.amplitude.reserve(grid.size());
  const std::complex<double> ep = std::polar(1.0, params.epsilon);
  for (double w : grid) {
    out.amplitude.push_back(ep * lorentzian_amplitude(w - params.delta, params.gamma) -
                            std::conj(ep) * lorentzian_amplitude(w + params.delta, params.gamma));
  }
  // Certify the grid for the time-domain reconstruction invariant: span of at
  // least +-20 gamma and spacing no coarser than gamma / 50.
  out.grid_certified = grid.front() <= -20.0 * params.gamma &&
                       grid.back() >= 20.0 * params.gamma &&
                       max_spacing <= params.gamma / 50.0 + 1e-12 * params.gamma;
  return out;
}

// Convenience uniform grid spanning +-span_gammas * gamma.
inline std::vector<double> uniform_detuning_grid(double gamma, double span_gammas,
                                                 std::size_t n_points) {
  if (n_points < 2) throw ValidationError("grid needs at least 2 points");
  std::vector<double> grid(n_points);
  const double w0 = -span_gammas * gamma;
  const double step = 2.0 * span_gammas * gamma / static_cast<double>(n_points - 1);
  for (std::size_t i = 0; i < n_points; ++i) grid[i] = w0 + step * static_cast<double>(i);
  return grid;
}

}  // namespace weakbeam
