#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "mcirc/vasculature.hpp"

namespace mcirc {

/// Samples of the damped-oscillator response on t_k = k * dt, k = 0..n-1.
struct OscillatorSamples {
  std::vector<double> times;
  std::vector<double> r;
  std::vector<double> r_dot;
};

/// Sampled local regulation term alpha = beta * r and its time derivative.
struct HrfSeries {
  std::vector<double> times;
  std::vector<double> r;
  std::vector<double> beta;
  std::vector<double> alpha;
  std::vector<double> alpha_dot;
  double scale = 1.0;  ///< uniform factor applied by amplitude normalization

  std::size_t size() const { return times.size(); }
  /// alpha_dot at the sample nearest to t (zero outside [0, T]).
  double alpha_dot_at(double t) const;
};

/// Number of samples on [0, T] with spacing dt; T must be a multiple of dt.
std::size_t sample_count(double duration, double dt);

/// Solves r'' + kappa r' + gamma r = zeta from rest, propagating the exact
/// 2x2 matrix exponential per step.
OscillatorSamples solve_balloon(const VesselParams& p);

/// exp(1 - 1/(1 - ((2t - T)/T)^2)) on (0, T), zero elsewhere.
double mollifier(double t, double duration);
double mollifier_derivative(double t, double duration);

HrfSeries hrf_alpha(const OscillatorSamples& osc, double duration,
                    std::optional<double> amplitude_target);

}  // namespace mcirc
