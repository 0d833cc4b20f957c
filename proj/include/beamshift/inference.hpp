#pragma once

// Parameter recovery from centroid-versus-polarizer-angle data.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <vector>

#include "beamshift/core_model.hpp"
#include "beamshift/errors.hpp"

namespace beamshift {

struct SweepRecord {
  double beta_deg;
  double centroid_um;
  double centroid_sigma_um = 9.0;
  std::optional<double> loss_db;
};

/// Parameters held fixed by the alignment step.
struct KnownParameters {
  double delta_x_um;
  double gamma;
};

struct FitOptions {
  double grid_step_deg = 1.0;  // coarse scan that brackets the minimum
  double tolerance_deg = 0.01;
  bool fit_delta_x = false;  // joint (phi, delta_x) refinement, gamma stays fixed
};

struct FitResult {
  double phi_hat_deg;  // folded into [0, 180]
  double gamma_used;
  double delta_x_used_um;
  double residual_rms_um;
  double covariance_phi_deg2;  // Gauss-Newton 1-sigma^2; +inf when the data are flat in phi
  double chi_square;
  std::optional<double> delta_x_sigma_um;  // joint fit only
};

struct LinearFit {
  double slope_um_per_deg;
  double intercept_um;
  double beta_lo_deg;
  double beta_hi_deg;
  double r_squared;
  std::size_t points;
};

struct LossPoint {
  double beta_deg;
  double loss_db;
};

namespace detail {

inline constexpr double kIdentifiabilityFloor = 1e-9;

// Model centroid; +inf when the projection is dark so the objective rejects it.
inline double model_centroid(double beta_deg, double phi_deg, double delta_x_um, double gamma) {
  const Angle two_beta = Angle::degrees(2.0 * beta_deg);
  const double d = 1.0 + gamma * sin_of(two_beta) * cos_of(Angle::degrees(phi_deg));
  if (!(d > kDefaultDegeneracyEps)) return std::numeric_limits<double>::infinity();
  return delta_x_um * cos_of(two_beta) / d;
}

inline double chi_square(const std::vector<SweepRecord>& data, double phi_deg, double delta_x_um,
                         double gamma) {
  double chi2 = 0.0;
  for (const auto& r : data) {
    const double res = (r.centroid_um - model_centroid(r.beta_deg, phi_deg, delta_x_um, gamma)) /
                       r.centroid_sigma_um;
    chi2 += res * res;
  }
  return std::isfinite(chi2) ? chi2 : std::numeric_limits<double>::infinity();
}

inline double residual_rms(const std::vector<SweepRecord>& data, double phi_deg,
                           double delta_x_um, double gamma) {
  double ss = 0.0;
  for (const auto& r : data) {
    const double res = r.centroid_um - model_centroid(r.beta_deg, phi_deg, delta_x_um, gamma);
    ss += res * res;
  }
  return std::sqrt(ss / static_cast<double>(data.size()));
}

// d(centroid)/d(phi) per radian and d(centroid)/d(delta_x) at one beta.
inline std::array<double, 2> model_gradient(double beta_deg, double phi_deg, double delta_x_um,
                                            double gamma) {
  const Angle two_beta = Angle::degrees(2.0 * beta_deg);
  const Angle phi = Angle::degrees(phi_deg);
  const double s2b = sin_of(two_beta);
  const double c2b = cos_of(two_beta);
  const double d = 1.0 + gamma * s2b * cos_of(phi);
  return {delta_x_um * c2b * gamma * s2b * sin_of(phi) / (d * d), c2b / d};
}

// Weighted least-squares delta_x for a fixed phi.
inline double best_delta_x(const std::vector<SweepRecord>& data, double phi_deg, double gamma) {
  double num = 0.0;
  double den = 0.0;
  for (const auto& r : data) {
    const double f = model_centroid(r.beta_deg, phi_deg, 1.0, gamma);
    if (!std::isfinite(f)) return std::numeric_limits<double>::infinity();
    const double w = 1.0 / (r.centroid_sigma_um * r.centroid_sigma_um);
    num += w * f * r.centroid_um;
    den += w * f * f;
  }
  return den > 0.0 ? num / den : std::numeric_limits<double>::infinity();
}

inline double fold_phase_deg(double phi_deg) {
  double p = std::fmod(phi_deg, 360.0);
  if (p < 0.0) p += 360.0;
  return p > 180.0 ? 360.0 - p : p;
}

inline void validate_records(const std::vector<SweepRecord>& data) {
  for (const auto& r : data) {
    if (!std::isfinite(r.beta_deg) || !std::isfinite(r.centroid_um))
      throw ValidationError("record", "beta and centroid must be finite");
    if (!(r.centroid_sigma_um > 0.0))
      throw ValidationError("centroid_sigma_um", "must be > 0");
  }
}

// Golden-section minimisation of f on [a, b] until the bracket is narrower than tol.
template <typename F>
double golden_section(F&& f, double a, double b, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  // Endpoints of [0, 180] are legitimate optima (e.g. phi = 0 exactly).
  const double mid = 0.5 * (a + b);
  double best = mid;
  double fbest = f(mid);
  for (double x : {a, b}) {
    const double fx = f(x);
    if (fx < fbest) {
      best = x;
      fbest = fx;
    }
  }
  return best;
}

inline double phi_variance_deg2(const std::vector<SweepRecord>& data, double phi_deg,
                                double delta_x_um, double gamma) {
  double info = 0.0;
  for (const auto& r : data) {
    const double g = model_gradient(r.beta_deg, phi_deg, delta_x_um, gamma)[0] / r.centroid_sigma_um;
    info += g * g;
  }
  if (!(info > 0.0)) return std::numeric_limits<double>::infinity();
  const double to_deg = 180.0 / std::numbers::pi;
  return to_deg * to_deg / info;
}

}  // namespace detail

/// Best-fit relative phase for centroid data with delta_x and gamma held fixed.
///
/// Minimises sum(((c_i - model(beta_i; phi)) / sigma_i)^2) over phi in [0, 180] deg by a
/// coarse grid scan followed by golden-section refinement of the bracketing cell. The
/// model depends on phi only through cos(phi), so the sign of phi is not recoverable.
/// With opts.fit_delta_x, delta_x is fitted as well (profiled out in closed form at each phi).
inline FitResult fit_phi(const std::vector<SweepRecord>& data, const KnownParameters& known,
                         const FitOptions& opts = {}) {
  std::set<double> distinct;
  for (const auto& r : data) distinct.insert(r.beta_deg);
  if (data.size() < 3 || distinct.size() < 3)
    throw InsufficientData("phi fit needs at least 3 records with distinct beta");
  if (!(known.delta_x_um > 0.0)) throw ValidationError("delta_x_um", "must be > 0");
  if (!(known.gamma > 0.0 && known.gamma <= 1.0))
    throw ValidationError("gamma", "must lie in (0, 1]");
  if (!(opts.grid_step_deg > 0.0 && opts.tolerance_deg > 0.0))
    throw ValidationError("fit options", "grid step and tolerance must be > 0");
  detail::validate_records(data);
  const bool informative = std::any_of(data.begin(), data.end(), [](const SweepRecord& r) {
    return std::abs(sin_of(Angle::degrees(2.0 * r.beta_deg))) > detail::kIdentifiabilityFloor;
  });
  if (!informative)
    throw NonIdentifiable("every beta has sin(2 beta) = 0; the centroid does not depend on phi");

  const double g = known.gamma;
  // The centroid is linear in delta_x, so the joint fit profiles it out in closed form.
  auto dx_at = [&](double phi_deg) {
    return opts.fit_delta_x ? detail::best_delta_x(data, phi_deg, g) : known.delta_x_um;
  };
  auto objective = [&](double phi) { return detail::chi_square(data, phi, dx_at(phi), g); };

  const int steps = static_cast<int>(std::ceil(180.0 / opts.grid_step_deg));
  const double h = 180.0 / steps;
  int best = 0;
  double best_val = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= steps; ++i) {
    const double v = objective(i * h);
    if (v < best_val) {
      best_val = v;
      best = i;
    }
  }
  if (!std::isfinite(best_val))
    throw DegenerateProjection("model is dark at every beta for all phi");
  const double lo = std::max(0, best - 1) * h;
  const double hi = std::min(steps, best + 1) * h;
  const double phi = detail::golden_section(objective, lo, hi, opts.tolerance_deg);

  FitResult out{};
  out.gamma_used = g;
  out.delta_x_used_um = dx_at(phi);
  if (opts.fit_delta_x) {
    if (!(out.delta_x_used_um > 0.0))
      throw NonIdentifiable("joint fit gives a non-positive delta_x");
    double a00 = 0.0, a01 = 0.0, a11 = 0.0;
    for (const auto& r : data) {
      const auto grad = detail::model_gradient(r.beta_deg, phi, out.delta_x_used_um, g);
      const double w = 1.0 / (r.centroid_sigma_um * r.centroid_sigma_um);
      a00 += w * grad[0] * grad[0];
      a01 += w * grad[0] * grad[1];
      a11 += w * grad[1] * grad[1];
    }
    const double det = a00 * a11 - a01 * a01;
    // Flat in phi (phi at 0 or 180): report the conditional delta_x uncertainty.
    if (det > 1e-12 * a00 * a11) out.delta_x_sigma_um = std::sqrt(a00 / det);
    else if (a11 > 0.0) out.delta_x_sigma_um = std::sqrt(1.0 / a11);
  }

  out.phi_hat_deg = detail::fold_phase_deg(phi);
  out.chi_square = detail::chi_square(data, out.phi_hat_deg, out.delta_x_used_um, g);
  out.residual_rms_um = detail::residual_rms(data, out.phi_hat_deg, out.delta_x_used_um, g);
  out.covariance_phi_deg2 = detail::phi_variance_deg2(data, out.phi_hat_deg, out.delta_x_used_um, g);
  return out;
}

/// Ordinary least squares of centroid on beta over records with beta in [lo, hi].
inline LinearFit linear_region_fit(const std::vector<SweepRecord>& data, double beta_lo_deg,
                                   double beta_hi_deg) {
  if (!(beta_lo_deg <= beta_hi_deg))
    throw ValidationError("beta_range", "lower bound exceeds upper bound");
  std::vector<const SweepRecord*> used;
  std::set<double> distinct;
  for (const auto& r : data) {
    if (r.beta_deg >= beta_lo_deg && r.beta_deg <= beta_hi_deg) {
      used.push_back(&r);
      distinct.insert(r.beta_deg);
    }
  }
  if (distinct.size() < 2)
    throw InsufficientData("linear fit needs at least 2 distinct beta inside the range");

  const double n = static_cast<double>(used.size());
  double mx = 0.0;
  double my = 0.0;
  for (const auto* r : used) {
    mx += r->beta_deg;
    my += r->centroid_um;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (const auto* r : used) {
    const double dx = r->beta_deg - mx;
    const double dy = r->centroid_um - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  LinearFit fit{};
  fit.slope_um_per_deg = sxy / sxx;
  fit.intercept_um = my - fit.slope_um_per_deg * mx;
  fit.beta_lo_deg = beta_lo_deg;
  fit.beta_hi_deg = beta_hi_deg;
  fit.points = used.size();
  double ss_res = 0.0;
  for (const auto* r : used) {
    const double e = r->centroid_um - (fit.intercept_um + fit.slope_um_per_deg * r->beta_deg);
    ss_res += e * e;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

/// Smallest centroid step reachable with a given polarizer angular resolution, in µm.
inline double sensitivity(const LinearFit& fit, Angle angular_resolution) {
  if (!(angular_resolution.deg() >= 0.0))
    throw ValidationError("angular_resolution", "must be >= 0");
  return std::abs(fit.slope_um_per_deg) * angular_resolution.deg();
}

inline std::vector<LossPoint> predict_loss_curve(const DisplacerState& dev,
                                                 const std::vector<double>& betas_deg) {
  std::vector<LossPoint> out;
  out.reserve(betas_deg.size());
  for (double b : betas_deg)
    out.push_back({b, insertion_loss_db(dev, PostSelection{Angle::degrees(b)})});
  return out;
}

}  // namespace beamshift
