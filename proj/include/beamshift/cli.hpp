#pragma once

// Command-line front end: profile | sweep | fit | sensitivity | frame.
//
// Exit codes: 0 success, 2 validation error (bad flag, config or input file),
// 3 numerical failure (dark projection, unidentifiable fit, empty frame).

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "beamshift/config.hpp"
#include "beamshift/core_model.hpp"
#include "beamshift/csv.hpp"
#include "beamshift/detector.hpp"
#include "beamshift/errors.hpp"
#include "beamshift/inference.hpp"
#include "beamshift/sweep.hpp"

namespace beamshift::cli {

enum ExitCode : int { kOk = 0, kValidation = 2, kNumerical = 3 };

/// Profile curves on [-4w, 4w], normalised to the input peak intensity.
inline std::vector<ProfileCurve> profile_curves(const RunConfig& cfg) {
  cfg.validate();
  const BeamParams beam = cfg.beam();
  const DisplacerState dev = cfg.device();
  std::vector<ProfileCurve> curves;
  for (double b : cfg.profile_betas_deg) {
    auto samples = sample_profile(beam, dev, PostSelection{Angle::degrees(b)}, -4.0 * beam.width_um,
                                  4.0 * beam.width_um, static_cast<std::size_t>(cfg.profile_points));
    for (auto& s : samples) s.intensity /= beam.peak_intensity();
    curves.push_back({b, std::move(samples)});
  }
  return curves;
}

inline std::vector<SweepRow> run_sweep(const RunConfig& cfg) {
  cfg.validate();
  const auto betas = beta_grid(cfg.beta_start_deg, cfg.beta_stop_deg, cfg.beta_step_deg);
  const DisplacerState dev = cfg.device();
  if (cfg.mode == SweepMode::Analytic) return analytic_sweep(dev, betas, cfg.pixel_pitch_um);
  return ccd_sweep(cfg.beam(), dev, betas, cfg.ccd(), cfg.centroid_options(), cfg.origin_offset_um);
}

inline nlohmann::json linear_fit_json(const LinearFit& f) {
  return {{"slope_um_per_deg", f.slope_um_per_deg},
          {"intercept_um", f.intercept_um},
          {"beta_range_deg", {f.beta_lo_deg, f.beta_hi_deg}},
          {"r_squared", f.r_squared},
          {"points", f.points}};
}

/// phi fit, linear-region fit and sensitivity for one data set.
inline nlohmann::json fit_report(const std::vector<SweepRecord>& data, const RunConfig& cfg,
                                 const KnownParameters& known) {
  FitOptions opts;
  opts.fit_delta_x = cfg.joint_fit;
  const FitResult fit = fit_phi(data, known, opts);
  const LinearFit line = linear_region_fit(data, cfg.fit_range_lo_deg, cfg.fit_range_hi_deg);
  const Angle resolution = Angle::arcminutes(cfg.resolution_arcmin);

  nlohmann::json j;
  j["phi_hat_deg"] = fit.phi_hat_deg;
  j["path_difference_um"] =
      phase_to_path_difference(Angle::degrees(fit.phi_hat_deg), cfg.wavelength_um);
  j["wavelength_um"] = cfg.wavelength_um;
  j["gamma_used"] = fit.gamma_used;
  j["delta_x_used_um"] = fit.delta_x_used_um;
  j["residual_rms_um"] = fit.residual_rms_um;
  j["chi_square"] = fit.chi_square;
  j["covariance_phi_deg2"] = std::isfinite(fit.covariance_phi_deg2)
                                 ? nlohmann::json(fit.covariance_phi_deg2)
                                 : nlohmann::json(nullptr);
  j["joint_fit"] = cfg.joint_fit;
  if (fit.delta_x_sigma_um) j["delta_x_sigma_um"] = *fit.delta_x_sigma_um;
  j["records"] = data.size();
  j["linear_fit"] = linear_fit_json(line);
  j["resolution_arcmin"] = cfg.resolution_arcmin;
  j["sensitivity_um"] = sensitivity(line, resolution);
  return j;
}

namespace detail {

inline std::vector<SweepRecord> load_sweep(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("--in", "cannot open '" + path + "'");
  return read_sweep_csv(in);
}

inline void emit(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty()) {
    out << content;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("--out", "cannot write '" + path + "'");
  f << content;
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulator and parameter inference for a polarization-tuned beam displacer",
               "beamshift"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "key=value experiment description")
      ->check(CLI::ExistingFile);

  // Flags shared by several subcommands; each subcommand registers the ones it accepts.
  std::string out_path;
  std::string mode;
  std::uint64_t seed = 0;
  double beta_start = 0, beta_stop = 0, beta_step = 0, lambda_um = 0, resolution_arcmin = 0;
  std::vector<double> betas;
  std::string in_path;
  double slope = 0;
  std::vector<double> fit_range;
  bool joint = false;
  double known_dx = 0, known_gamma = 0;

  struct Shared {
    CLI::Option* seed = nullptr;
    CLI::Option* beta_start = nullptr;
    CLI::Option* beta_stop = nullptr;
    CLI::Option* beta_step = nullptr;
    CLI::Option* lambda = nullptr;
    CLI::Option* resolution = nullptr;
    CLI::Option* fit_range = nullptr;
    CLI::Option* mode = nullptr;
    CLI::Option* slope = nullptr;
    CLI::Option* dx = nullptr;
    CLI::Option* gamma = nullptr;
    CLI::Option* joint = nullptr;
    CLI::Option* betas = nullptr;
  };
  Shared sub_profile, sub_sweep, sub_fit, sub_sens, sub_frame;

  auto add_out = [&](CLI::App* s) { s->add_option("--out", out_path, "output file (default stdout)"); };
  auto add_grid = [&](CLI::App* s, Shared& o) {
    o.beta_start = s->add_option("--beta-start", beta_start, "first beta, deg");
    o.beta_stop = s->add_option("--beta-stop", beta_stop, "last beta, deg");
    o.beta_step = s->add_option("--beta-step", beta_step, "beta step, deg");
  };
  auto add_fit_flags = [&](CLI::App* s, Shared& o) {
    o.resolution = s->add_option("--resolution-arcmin", resolution_arcmin,
                                 "polarizer angular resolution");
    o.fit_range = s->add_option("--fit-range", fit_range, "beta range of the linear fit, deg")
                      ->expected(2);
  };

  auto* profile = app.add_subcommand("profile", "output beam profile along x for each beta");
  add_out(profile);
  sub_profile.betas = profile->add_option("--beta", betas, "post-selection angle(s), deg");

  auto* sweep = app.add_subcommand("sweep", "centroid, loss and amplification versus beta");
  add_out(sweep);
  add_grid(sweep, sub_sweep);
  sub_sweep.mode = sweep->add_option("--mode", mode, "analytic or ccd")
                       ->check(CLI::IsMember({"analytic", "ccd"}));
  sub_sweep.seed = sweep->add_option("--seed", seed, "detector noise seed");

  auto* fit = app.add_subcommand("fit", "recover phi from a sweep CSV");
  add_out(fit);
  fit->add_option("--in", in_path, "sweep CSV")->required();
  sub_fit.lambda = fit->add_option("--lambda-um", lambda_um, "wavelength for the path difference");
  add_fit_flags(fit, sub_fit);
  sub_fit.joint = fit->add_flag("--joint", joint, "fit delta_x jointly with phi");
  sub_fit.dx = fit->add_option("--delta-x-um", known_dx, "known half-separation");
  sub_fit.gamma = fit->add_option("--gamma", known_gamma, "known overlap factor");

  auto* sens = app.add_subcommand("sensitivity", "displacement step for a polarizer resolution");
  add_out(sens);
  add_fit_flags(sens, sub_sens);
  sub_sens.slope = sens->add_option("--slope", slope, "centroid slope, um/deg");
  sens->add_option("--in", in_path, "sweep CSV to fit the slope from");
  add_grid(sens, sub_sens);

  auto* frame = app.add_subcommand("frame", "write one synthetic CCD frame as 16-bit PGM");
  frame->add_option("--out", out_path, "PGM file")->required();
  sub_frame.betas = frame->add_option("--beta", betas, "post-selection angle, deg")->expected(1);
  sub_frame.seed = frame->add_option("--seed", seed, "detector noise seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kValidation;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw ValidationError("--config", "cannot open '" + config_path + "'");
      cfg = parse_config(in);
    }
    const Shared& o = profile->parsed() ? sub_profile
                      : sweep->parsed() ? sub_sweep
                      : fit->parsed()   ? sub_fit
                      : sens->parsed()  ? sub_sens
                                        : sub_frame;
    auto given = [](CLI::Option* opt) { return opt != nullptr && opt->count() > 0; };
    if (given(o.seed)) cfg.seed = seed;
    if (given(o.mode)) cfg.mode = parse_sweep_mode(mode, "--mode");
    if (given(o.beta_start)) cfg.beta_start_deg = beta_start;
    if (given(o.beta_stop)) cfg.beta_stop_deg = beta_stop;
    if (given(o.beta_step)) cfg.beta_step_deg = beta_step;
    if (given(o.lambda)) cfg.wavelength_um = lambda_um;
    if (given(o.resolution)) cfg.resolution_arcmin = resolution_arcmin;
    if (given(o.joint)) cfg.joint_fit = joint;
    if (given(o.fit_range)) {
      cfg.fit_range_lo_deg = fit_range.at(0);
      cfg.fit_range_hi_deg = fit_range.at(1);
    }
    if (given(o.betas) && profile->parsed()) cfg.profile_betas_deg = betas;
    if (out_path.empty()) out_path = cfg.output_path;
    cfg.validate();

    if (profile->parsed()) {
      std::ostringstream csv;
      write_profile_csv(csv, profile_curves(cfg));
      detail::emit(out_path, csv.str(), out);
    } else if (sweep->parsed()) {
      std::ostringstream csv;
      write_sweep_csv(csv, run_sweep(cfg));
      detail::emit(out_path, csv.str(), out);
    } else if (fit->parsed()) {
      const auto data = detail::load_sweep(in_path);
      KnownParameters known{cfg.resolved_delta_x_um(), cfg.device().gamma()};
      if (given(o.dx)) known.delta_x_um = known_dx;
      if (given(o.gamma)) known.gamma = known_gamma;
      detail::emit(out_path, fit_report(data, cfg, known).dump(2) + "\n", out);
    } else if (sens->parsed()) {
      nlohmann::json j;
      double s = 0.0;
      if (given(o.slope)) {
        s = slope;
        j["source"] = "slope";
      } else {
        const auto data = in_path.empty() ? to_records(run_sweep(cfg)) : detail::load_sweep(in_path);
        const LinearFit line = linear_region_fit(data, cfg.fit_range_lo_deg, cfg.fit_range_hi_deg);
        s = line.slope_um_per_deg;
        j["source"] = in_path.empty() ? "model" : "csv";
        j["linear_fit"] = linear_fit_json(line);
      }
      LinearFit line{};
      line.slope_um_per_deg = s;
      j["slope_um_per_deg"] = s;
      j["resolution_arcmin"] = cfg.resolution_arcmin;
      j["step_um"] = sensitivity(line, Angle::arcminutes(cfg.resolution_arcmin));
      detail::emit(out_path, j.dump(2) + "\n", out);
    } else {
      const double beta = betas.empty() ? 45.0 : betas.front();
      const Frame f = synthesize_frame(cfg.beam(), cfg.device(), PostSelection{Angle::degrees(beta)},
                                       cfg.ccd(), cfg.origin_offset_um);
      std::ostringstream pgm;
      write_pgm(f, pgm);
      detail::emit(out_path, pgm.str(), out);
      const CentroidEstimate est = estimate_centroid(f, cfg.centroid_options());
      nlohmann::json j{{"beta_deg", beta},
                       {"centroid_um", est.x_um},
                       {"centroid_sigma_um", est.sigma_um},
                       {"saturated", f.saturated()}};
      out << j.dump() << '\n';
    }
    return kOk;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const SchemaError& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const InsufficientData& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const OutOfLinearRange& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kNumerical;
  }
}

}  // namespace beamshift::cli
