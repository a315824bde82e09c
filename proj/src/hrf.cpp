#include "mcirc/hrf.hpp"

#include <algorithm>
#include <cmath>

#include "mcirc/error.hpp"

namespace mcirc {

namespace {

// exp(A h) for A = [[0, 1], [-gamma, -kappa]], via
// exp(A h) = e^{m h} (c(h) I + s(h) (A - m I)), m = trace/2.
struct Propagator {
  double a00, a01, a10, a11;
};

Propagator oscillator_propagator(double kappa, double gamma, double h) {
  const double m = -0.5 * kappa;
  const double disc = 0.25 * kappa * kappa - gamma;
  double c, s;
  if (disc < 0.0) {
    const double w = std::sqrt(-disc);
    c = std::cos(w * h);
    s = std::sin(w * h) / w;
  } else if (disc > 0.0) {
    const double w = std::sqrt(disc);
    c = std::cosh(w * h);
    s = std::sinh(w * h) / w;
  } else {
    c = 1.0;
    s = h;
  }
  const double e = std::exp(m * h);
  // A - m I = [[-m, 1], [-gamma, -kappa - m]]
  return {e * (c - s * m), e * s, -e * s * gamma, e * (c + s * (-kappa - m))};
}

}  // namespace

std::size_t sample_count(double duration, double dt) {
  if (!(dt > 0.0)) throw ValidationError("dt must be positive");
  if (!(duration >= 0.0)) throw ValidationError("T must be nonnegative");
  const double steps = duration / dt;
  const double rounded = std::round(steps);
  if (std::abs(steps - rounded) > 1e-9 * std::max(1.0, steps))
    throw ValidationError("T must be an integer multiple of dt");
  return static_cast<std::size_t>(rounded) + 1;
}

double HrfSeries::alpha_dot_at(double t) const {
  if (times.empty() || t < 0.0 || t > times.back()) return 0.0;
  if (times.size() == 1) return alpha_dot.front();
  const double dt = times[1] - times[0];
  auto k = static_cast<std::size_t>(std::llround(t / dt));
  return alpha_dot[std::min(k, alpha_dot.size() - 1)];
}

OscillatorSamples solve_balloon(const VesselParams& p) {
  if (!(p.time_step > 0.0)) throw ValidationError("dt must be positive");
  if (!(p.duration >= 0.0)) throw ValidationError("T must be nonnegative");
  if (!(p.signal_decay > 0.0) || !(p.flow_elimination > 0.0))
    throw ValidationError("kappa and gamma_hrf must be positive");

  const std::size_t n = sample_count(p.duration, p.time_step);
  const double gamma = p.flow_elimination;
  const double steady = p.neural_drive / gamma;
  const Propagator prop = oscillator_propagator(p.signal_decay, gamma, p.time_step);

  OscillatorSamples out;
  out.times.resize(n);
  out.r.resize(n);
  out.r_dot.resize(n);
  // Deviation from the forced steady state evolves homogeneously.
  double y = -steady, v = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    out.times[k] = static_cast<double>(k) * p.time_step;
    out.r[k] = y + steady;
    out.r_dot[k] = v;
    const double y1 = prop.a00 * y + prop.a01 * v;
    const double v1 = prop.a10 * y + prop.a11 * v;
    y = y1;
    v = v1;
  }
  return out;
}

double mollifier(double t, double duration) {
  if (!(t > 0.0) || !(t < duration)) return 0.0;
  const double u = (2.0 * t - duration) / duration;
  const double q = 1.0 - u * u;
  if (!(q > 0.0)) return 0.0;
  return std::exp(1.0 - 1.0 / q);
}

double mollifier_derivative(double t, double duration) {
  if (!(t > 0.0) || !(t < duration)) return 0.0;
  const double u = (2.0 * t - duration) / duration;
  const double q = 1.0 - u * u;
  if (!(q > 0.0)) return 0.0;
  // d/dt [1 - 1/q] = -(2u/q^2) * (2/T)
  return mollifier(t, duration) * (-4.0 * u / (duration * q * q));
}

HrfSeries hrf_alpha(const OscillatorSamples& osc, double duration,
                    std::optional<double> amplitude_target) {
  const std::size_t n = osc.times.size();
  if (osc.r.size() != n || osc.r_dot.size() != n)
    throw ValidationError("oscillator samples have inconsistent lengths");

  HrfSeries s;
  s.times = osc.times;
  s.r = osc.r;
  s.beta.resize(n);
  s.alpha.resize(n);
  s.alpha_dot.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = osc.times[k];
    s.beta[k] = mollifier(t, duration);
    s.alpha[k] = s.beta[k] * osc.r[k];
    s.alpha_dot[k] = mollifier_derivative(t, duration) * osc.r[k] + s.beta[k] * osc.r_dot[k];
  }

  if (amplitude_target) {
    const double peak = n ? *std::max_element(s.alpha.begin(), s.alpha.end()) : 0.0;
    if (!(peak > 0.0)) throw ValidationError("cannot normalize a nonpositive response");
    s.scale = *amplitude_target / peak;
    for (std::size_t k = 0; k < n; ++k) {
      s.alpha[k] *= s.scale;
      s.alpha_dot[k] *= s.scale;
    }
  }
  return s;
}

}  // namespace mcirc
