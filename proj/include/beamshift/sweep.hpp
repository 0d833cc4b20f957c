#pragma once

// Post-selection sweeps: closed-form, or end-to-end through synthetic CCD frames.

#include <cmath>
#include <cstdint>
#include <vector>

#include "beamshift/core_model.hpp"
#include "beamshift/detector.hpp"
#include "beamshift/errors.hpp"
#include "beamshift/inference.hpp"

namespace beamshift {

struct SweepRow {
  double beta_deg;
  double centroid_um;
  double centroid_sigma_um;
  double loss_db;
  double amplification;
};

/// Inclusive grid start, start+step, ... up to stop (with a small tolerance on the last point).
inline std::vector<double> beta_grid(double start_deg, double stop_deg, double step_deg) {
  if (!std::isfinite(start_deg) || !std::isfinite(stop_deg))
    throw ValidationError("sweep.beta_start_deg", "grid bounds must be finite");
  if (!(step_deg > 0.0)) throw ValidationError("sweep.beta_step_deg", "must be > 0");
  if (stop_deg < start_deg)
    throw ValidationError("sweep.beta_stop_deg", "empty beta grid (stop < start)");
  const auto n = static_cast<std::size_t>(std::floor((stop_deg - start_deg) / step_deg + 1e-9)) + 1;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = start_deg + step_deg * static_cast<double>(i);
  return out;
}

inline std::vector<SweepRow> analytic_sweep(const DisplacerState& dev,
                                            const std::vector<double>& betas_deg,
                                            double centroid_sigma_um = 9.0) {
  if (betas_deg.empty()) throw ValidationError("sweep", "empty beta grid");
  std::vector<SweepRow> rows;
  rows.reserve(betas_deg.size());
  for (double b : betas_deg) {
    const PostSelection ps{Angle::degrees(b)};
    const double a = amplification_factor(dev, ps);
    rows.push_back({b, a * dev.delta_x_um(), centroid_sigma_um, insertion_loss_db(dev, ps), a});
  }
  return rows;
}

/// Per-row seed so rows stay reproducible regardless of evaluation order.
inline std::uint64_t row_seed(std::uint64_t base, std::size_t index) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(index) + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Synthesizes one frame per beta and measures centroid and insertion loss from it.
/// Loss compares the frame signal with the noise-free input-beam total on the same sensor.
inline std::vector<SweepRow> ccd_sweep(const BeamParams& beam, const DisplacerState& dev,
                                       const std::vector<double>& betas_deg, const CcdConfig& cfg,
                                       const CentroidOptions& centroid_opts = {},
                                       double origin_offset_um = 0.0) {
  if (betas_deg.empty()) throw ValidationError("sweep", "empty beta grid");
  const double input_counts = reference_input_counts(beam, dev, cfg, origin_offset_um);
  std::vector<SweepRow> rows;
  rows.reserve(betas_deg.size());
  for (std::size_t i = 0; i < betas_deg.size(); ++i) {
    CcdConfig frame_cfg = cfg;
    frame_cfg.rng_seed = row_seed(cfg.rng_seed, i);
    const double b = betas_deg[i];
    const Frame frame =
        synthesize_frame(beam, dev, PostSelection{Angle::degrees(b)}, frame_cfg, origin_offset_um);
    const CentroidEstimate est = estimate_centroid(frame, centroid_opts);
    const double loss = -10.0 * std::log10(est.total_counts / input_counts);
    const double amp = dev.delta_x_um() > 0.0 ? est.x_um / dev.delta_x_um() : 0.0;
    rows.push_back({b, est.x_um, est.sigma_um, loss, amp});
  }
  return rows;
}

inline std::vector<SweepRecord> to_records(const std::vector<SweepRow>& rows) {
  std::vector<SweepRecord> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back({r.beta_deg, r.centroid_um, r.centroid_sigma_um, r.loss_db});
  return out;
}

}  // namespace beamshift
