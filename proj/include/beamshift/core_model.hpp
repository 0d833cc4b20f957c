#pragma once

// Closed-form forward model of the polarization-post-selected beam displacer.
//
// An input Gaussian E0 exp[-(x^2+y^2)/(2w^2)], polarized at 45 degrees, is split
// into a horizontal copy shifted by +dx and a vertical copy shifted by -dx with
// relative phase phi. A polarizer at angle beta projects the pair back onto a
// single polarization. Everything here is a pure function of value inputs.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "beamshift/errors.hpp"
#include "beamshift/units.hpp"

namespace beamshift {

/// Denominator / log-argument floor below which the projection is treated as dark.
inline constexpr double kDefaultDegeneracyEps = 1e-12;

/// Input Gaussian beam. width_um is the 1/e half-width of the field amplitude.
struct BeamParams {
  double peak_amplitude = 1.0;
  double width_um = 600.0;

  void validate() const {
    if (!(peak_amplitude > 0.0) || !std::isfinite(peak_amplitude))
      throw ValidationError("beam.peak_amplitude", "must be finite and > 0");
    if (!(width_um > 0.0) || !std::isfinite(width_um))
      throw ValidationError("beam.width_um", "must be finite and > 0");
  }

  /// I0 of the intensity model; defined as E0^2 so |field|^2 reproduces it.
  double peak_intensity() const { return peak_amplitude * peak_amplitude; }
};

/// Overlap of the two displaced copies, exp(-dx^2/w^2).
inline double gamma_of(const BeamParams& beam, double delta_x_um) {
  beam.validate();
  const double r = delta_x_um / beam.width_um;
  return std::exp(-r * r);
}

/// Device configuration: half-separation, relative phase and overlap factor.
class DisplacerState {
 public:
  /// gamma is derived from the beam width.
  DisplacerState(const BeamParams& beam, double delta_x_um, Angle phase)
      : delta_x_um_(delta_x_um), phase_(phase), gamma_(gamma_of(beam, delta_x_um)) {
    validate();
  }

  /// For data where the overlap factor is quoted directly rather than a beam width.
  static DisplacerState from_overlap(double delta_x_um, double gamma, Angle phase) {
    return DisplacerState(delta_x_um, phase, gamma);
  }

  double delta_x_um() const { return delta_x_um_; }
  Angle phase() const { return phase_; }
  double gamma() const { return gamma_; }

 private:
  DisplacerState(double delta_x_um, Angle phase, double gamma)
      : delta_x_um_(delta_x_um), phase_(phase), gamma_(gamma) {
    validate();
  }

  void validate() const {
    if (!(delta_x_um_ >= 0.0) || !std::isfinite(delta_x_um_))
      throw ValidationError("device.delta_x_um", "must be finite and >= 0");
    if (!(gamma_ > 0.0 && gamma_ <= 1.0))
      throw ValidationError("device.gamma", "must lie in (0, 1]");
    if (!std::isfinite(phase_.rad()))
      throw ValidationError("device.phi_deg", "must be finite");
  }

  double delta_x_um_;
  Angle phase_;
  double gamma_;
};

/// Output polarizer angle measured from horizontal. Pre-selection is fixed at 45 degrees.
struct PostSelection {
  Angle beta;
};

struct ProfileSample {
  double x_um;
  double intensity;
};

/// Complex output amplitude at (x, y) after the output polarizer.
inline std::complex<double> output_field(const BeamParams& beam, const DisplacerState& dev,
                                         const PostSelection& ps, double x_um, double y_um) {
  const double two_w2 = 2.0 * beam.width_um * beam.width_um;
  const double dx = dev.delta_x_um();
  const double amp = beam.peak_amplitude / std::numbers::sqrt2;
  const double y2 = y_um * y_um;
  const double horiz =
      amp * cos_of(ps.beta) * std::exp(-((x_um - dx) * (x_um - dx) + y2) / two_w2);
  const double vert = amp * sin_of(ps.beta) * std::exp(-((x_um + dx) * (x_um + dx) + y2) / two_w2);
  return {horiz * cos_of(dev.phase()) + vert, horiz * sin_of(dev.phase())};
}

/// Output intensity along x (the y factor exp(-y^2/w^2) is dropped).
inline double output_intensity(const BeamParams& beam, const DisplacerState& dev,
                               const PostSelection& ps, double x_um) {
  const double w2 = beam.width_um * beam.width_um;
  const double dx = dev.delta_x_um();
  const double c = cos_of(ps.beta);
  const double s = sin_of(ps.beta);
  const double horiz = c * c * std::exp(-(x_um - dx) * (x_um - dx) / w2);
  const double vert = s * s * std::exp(-(x_um + dx) * (x_um + dx) / w2);
  const double cross =
      dev.gamma() * sin_of(2.0 * ps.beta) * cos_of(dev.phase()) * std::exp(-x_um * x_um / w2);
  return 0.5 * beam.peak_intensity() * (horiz + vert + cross);
}

/// 1 + γ sin2β cosφ, i.e. twice the transmitted power fraction.
inline double projection_factor(const DisplacerState& dev, const PostSelection& ps) {
  return 1.0 + dev.gamma() * sin_of(2.0 * ps.beta) * cos_of(dev.phase());
}

namespace detail {
inline double checked_projection(const DisplacerState& dev, const PostSelection& ps, double eps) {
  const double d = projection_factor(dev, ps);
  if (!(d > eps))
    throw DegenerateProjection("output beam carries no power (1 + gamma sin2beta cosphi = " +
                               std::to_string(d) + ")");
  return d;
}
}  // namespace detail

/// A = cos2β / (1 + γ sin2β cosφ); the centroid is A·Δx.
inline double amplification_factor(const DisplacerState& dev, const PostSelection& ps,
                                   double eps = kDefaultDegeneracyEps) {
  const double d = detail::checked_projection(dev, ps, eps);
  return cos_of(2.0 * ps.beta) / d;
}

/// Intensity-weighted mean x of the output beam, in µm.
inline double analytic_centroid(const DisplacerState& dev, const PostSelection& ps,
                                double eps = kDefaultDegeneracyEps) {
  return amplification_factor(dev, ps, eps) * dev.delta_x_um();
}

/// Fraction of input power transmitted by the output polarizer.
inline double transmitted_fraction(const DisplacerState& dev, const PostSelection& ps) {
  return 0.5 * projection_factor(dev, ps);
}

inline double insertion_loss_db(const DisplacerState& dev, const PostSelection& ps,
                                double eps = kDefaultDegeneracyEps) {
  const double d = detail::checked_projection(dev, ps, eps);
  return -10.0 * std::log10(0.5 * d);
}

/// Optical path difference for a relative phase, on the principal branch [0, 2π).
inline double phase_to_path_difference(Angle phi, double wavelength_um) {
  if (!(wavelength_um > 0.0))
    throw ValidationError("wavelength_um", "must be > 0");
  double turns = std::fmod(phi.deg(), 360.0) / 360.0;
  if (turns < 0.0) turns += 1.0;
  if (turns >= 1.0) turns = 0.0;
  return turns * wavelength_um;
}

/// Samples output_intensity on n evenly spaced points of [x_min, x_max].
inline std::vector<ProfileSample> sample_profile(const BeamParams& beam, const DisplacerState& dev,
                                                 const PostSelection& ps, double x_min_um,
                                                 double x_max_um, std::size_t n) {
  if (n < 2) throw ValidationError("profile.points", "need at least 2 samples");
  std::vector<ProfileSample> out;
  out.reserve(n);
  const double h = (x_max_um - x_min_um) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = x_min_um + h * static_cast<double>(i);
    out.push_back({x, output_intensity(beam, dev, ps, x)});
  }
  return out;
}

}  // namespace beamshift
