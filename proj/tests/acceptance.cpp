// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iterator>
#include <string>
#include <vector>

#include "beamshift/beamshift.hpp"
#include "oracles.hpp"
#include "properties.hpp"

using namespace beamshift;

namespace {

int failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail) {
  std::printf("[%s] %2d %-28s %s\n", ok ? "PASS" : "FAIL", id, name, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const BeamParams kBeam{1.0, 600.0};

DisplacerState operating_point() { return DisplacerState(kBeam, 120.0, Angle::degrees(54.0)); }

std::vector<SweepRecord> ccd_records(const CcdConfig& cfg, const CentroidOptions& opts) {
  return to_records(ccd_sweep(kBeam, operating_point(), beta_grid(0.0, 90.0, 10.0), cfg, opts));
}

void model_identity() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto c = props::field_intensity_identity(1000, 10000, 101);
  const double t = seconds_since(t0);
  report(1, "model identity", c.ok && t < 5.0, c.detail + props::fmt(", %.2f s", t));
}

void centroid_oracle() {
  const auto c = props::centroid_matches_quadrature(1000, 102);
  report(2, "centroid oracle", c.ok, c.detail);
}

void gamma_point() {
  const double g = gamma_of(kBeam, 120.0);
  report(3, "overlap factor", std::abs(g - 0.9608) <= 0.0005, props::fmt("gamma = %.6f", g));
}

void phase_to_path() {
  const double d = phase_to_path_difference(Angle::degrees(54.0), 0.6328);
  report(4, "phase to path difference", std::abs(d - 0.0949) <= 0.02 * 0.0949,
         props::fmt("path = %.5f um", d));
}

void loss_ceiling() {
  const auto dev = DisplacerState::from_overlap(120.0, 0.96, Angle::degrees(54.0));
  double worst = 0.0;
  for (int i = 0; i <= 9000; ++i)
    worst = std::max(worst, insertion_loss_db(dev, {Angle::degrees(0.01 * i)}));
  report(5, "loss ceiling", std::abs(worst - 3.01) <= 0.02, props::fmt("max loss = %.4f dB", worst));
}

void endpoints() {
  const auto dev = operating_point();
  const double c0 = analytic_centroid(dev, {Angle::degrees(0.0)});
  const double c90 = analytic_centroid(dev, {Angle::degrees(90.0)});
  report(6, "endpoints", c0 == 120.0 && c90 == -120.0,
         props::fmt("centroid(0) = %.17g, centroid(90) = %.17g", c0, c90));
}

void fit_round_trip() {
  const auto t0 = std::chrono::steady_clock::now();
  const KnownParameters known{120.0, gamma_of(kBeam, 120.0)};

  // Full sensor, no noise, plain weighted mean.
  const double clean = fit_phi(ccd_records(CcdConfig{}, {}), known).phi_hat_deg;
  const bool clean_ok = std::abs(clean - 54.0) <= 2.0;

  // Noise at 1% of the peak, 100 seeds, 512 x 512 readout window, border background removed.
  CcdConfig noisy;
  noisy.cols = 512;
  noisy.rows = 512;
  noisy.noise_rms = 0.01 * noisy.peak_counts();
  CentroidOptions opts;
  opts.background = Background::BorderMean;
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    noisy.rng_seed = 1000 + s;
    worst = std::max(worst, std::abs(fit_phi(ccd_records(noisy, opts), known).phi_hat_deg - 54.0));
  }
  const double t = seconds_since(t0);
  report(7, "fit round-trip", clean_ok && worst <= 3.0 && t < 30.0,
         props::fmt("noise-free phi = %.3f deg, ", clean) +
             props::fmt("noisy worst |err| = %.3f deg, ", worst) + props::fmt("%.1f s", t));
}

void sensitivity_rule() {
  LinearFit f{};
  f.slope_um_per_deg = -2.32;
  const double s = sensitivity(f, Angle::arcminutes(10.0));
  const bool ok = std::abs(s - 0.387) <= 0.0005 && std::abs(s - 0.38) <= 0.03 * 0.38;
  report(8, "sensitivity rule", ok, props::fmt("step = %.4f um", s));
}

void model_slope() {
  const auto rows = analytic_sweep(DisplacerState::from_overlap(120.0, 0.96, Angle::degrees(54.0)),
                                   beta_grid(0.0, 90.0, 10.0));
  const auto f = linear_region_fit(to_records(rows), 0.0, 90.0);
  report(9, "model OLS slope", std::abs(f.slope_um_per_deg + 2.68) <= 0.02,
         props::fmt("slope = %.4f um/deg, intercept = %.3f um", f.slope_um_per_deg, f.intercept_um));
}

void property_suites() {
  struct Named {
    const char* name;
    props::Check check;
  };
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<Named> checks = {
      {"power ratio", props::power_ratio_matches_loss(200, 201)},
      {"antisymmetry", props::centroid_antisymmetry(2000, 202)},
      {"bounds/monotonicity", props::centroid_bounds_and_monotonicity(200, 203)},
      {"endpoints", props::endpoint_pinning(2000, 204)},
      {"small amplification", props::small_amplification_regime()},
      {"displacement linearity", props::displacement_linear_antisymmetric()},
      {"overlap vs rotation", props::overlap_decreases_with_rotation()},
      {"scale invariance", props::centroid_scale_invariance()},
      {"shift equivariance", props::centroid_shift_equivariance()},
      {"determinism", props::synthesis_determinism()},
      {"supersampling", props::supersampling_convergence()},
      {"fit round-trip", props::fit_round_trip(200, 205)},
      {"fit objective", props::fit_objective_sanity(100, 206)},
      {"linear fit", props::linear_fit_exact()},
      {"sensitivity", props::sensitivity_homogeneous()},
      {"config round-trip", props::config_round_trip(300, 207)},
  };
  int passed = 0;
  std::string failed;
  for (const auto& c : checks) {
    if (c.check.ok)
      ++passed;
    else
      failed += std::string(" ") + c.name + " (" + c.check.detail + ")";
  }
  const bool ok = passed == static_cast<int>(checks.size());
  report(10, "property suites", ok,
         std::to_string(passed) + "/" + std::to_string(checks.size()) + " checks" +
             props::fmt(", %.1f s", seconds_since(t0)) + (ok ? "" : ";" + failed));
}

}  // namespace

// With no arguments every criterion runs; otherwise only the numbered ones.
int main(int argc, char** argv) {
  using Criterion = void (*)();
  const Criterion all[] = {model_identity, centroid_oracle, gamma_point,      phase_to_path,
                           loss_ceiling,   endpoints,       fit_round_trip,   sensitivity_rule,
                           model_slope,    property_suites};
  constexpr int n = static_cast<int>(std::size(all));
  if (argc == 1) {
    for (auto c : all) c();
  } else {
    for (int i = 1; i < argc; ++i) {
      const int id = std::atoi(argv[i]);
      if (id < 1 || id > n) {
        std::fprintf(stderr, "unknown criterion '%s' (expected 1..%d)\n", argv[i], n);
        return 2;
      }
      all[id - 1]();
    }
  }
  std::printf("%s: %d failure(s)\n", failures ? "FAILED" : "ALL PASSED", failures);
  return failures ? 1 : 0;
}
