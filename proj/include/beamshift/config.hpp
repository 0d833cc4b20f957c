#pragma once

// Experiment description as flat "namespace.key = value" text.
//
// Blank lines and lines starting with '#' are ignored. Unknown keys, duplicate keys and
// unparsable values are rejected with the offending key named. Doubles are written with
// 17 significant digits so a parse of the written form reproduces the config exactly.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "beamshift/core_model.hpp"
#include "beamshift/detector.hpp"
#include "beamshift/errors.hpp"
#include "beamshift/geometry.hpp"

namespace beamshift {

enum class SweepMode { Analytic, Ccd };

inline const char* to_string(SweepMode m) { return m == SweepMode::Analytic ? "analytic" : "ccd"; }

inline SweepMode parse_sweep_mode(const std::string& s, const std::string& field = "sweep.mode") {
  if (s == "analytic") return SweepMode::Analytic;
  if (s == "ccd") return SweepMode::Ccd;
  throw ValidationError(field, "expected 'analytic' or 'ccd', got '" + s + "'");
}

struct RunConfig {
  // beam
  double peak_amplitude = 1.0;
  std::optional<double> width_um;  // 600 when neither this nor device.gamma is given

  // device; delta_x comes from device.delta_x_um, else geometry.theta_deg, else 120 µm
  std::optional<double> delta_x_um;
  double phi_deg = 54.0;
  std::optional<double> gamma;  // when set, the beam width follows from gamma and delta_x

  // geometry
  std::optional<double> theta_deg;
  double mirror_distance_cm = 7.0;
  double pbs_size_cm = 1.0;
  double coefficient_mm_per_deg = 5.0;
  double max_theta_deg = 2.0;

  // ccd
  int ccd_cols = 1530;
  int ccd_rows = 1020;
  double pixel_pitch_um = 9.0;
  int full_well = 65535;
  double nd_attenuation_db = 0.0;
  double noise_rms = 0.0;
  double origin_offset_um = 0.0;
  Background background = Background::BorderMean;
  int border_px = 16;

  // sweep
  SweepMode mode = SweepMode::Analytic;
  double beta_start_deg = 0.0;
  double beta_stop_deg = 90.0;
  double beta_step_deg = 10.0;

  // profile
  std::vector<double> profile_betas_deg{30.0, 45.0, 60.0};
  int profile_points = 1025;

  // fit
  double wavelength_um = 0.6328;
  double fit_range_lo_deg = 0.0;
  double fit_range_hi_deg = 90.0;
  double resolution_arcmin = 10.0;
  bool joint_fit = false;

  std::uint64_t seed = 0;
  std::string output_path;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;

  BeamParams beam() const {
    BeamParams b{peak_amplitude, width_um.value_or(600.0)};
    if (gamma) {
      if (width_um)
        throw ValidationError("device.gamma", "conflicts with beam.width_um; give only one");
      const double dx = resolved_delta_x_um();
      if (!(*gamma > 0.0 && *gamma < 1.0) || !(dx > 0.0))
        throw ValidationError("device.gamma", "needs 0 < gamma < 1 and delta_x > 0 to imply a width");
      b.width_um = dx / std::sqrt(-std::log(*gamma));
    }
    b.validate();
    return b;
  }

  TbdGeometry geometry() const {
    TbdGeometry g;
    g.theta = Angle::degrees(theta_deg.value_or(0.0));
    g.mirror_distance_cm = mirror_distance_cm;
    g.pbs_size_cm = pbs_size_cm;
    g.displacement_coefficient_mm_per_deg = coefficient_mm_per_deg;
    g.max_theta_deg = max_theta_deg;
    return g;
  }

  double resolved_delta_x_um() const {
    if (delta_x_um && theta_deg)
      throw ValidationError("geometry.theta_deg", "conflicts with device.delta_x_um; give only one");
    if (delta_x_um) return *delta_x_um;
    if (theta_deg) return theta_to_delta_x(geometry());
    return 120.0;
  }

  DisplacerState device() const {
    const BeamParams b = beam();
    const double dx = resolved_delta_x_um();
    if (gamma) return DisplacerState::from_overlap(dx, *gamma, Angle::degrees(phi_deg));
    return DisplacerState(b, dx, Angle::degrees(phi_deg));
  }

  CcdConfig ccd() const {
    CcdConfig c;
    c.cols = ccd_cols;
    c.rows = ccd_rows;
    c.pixel_pitch_um = pixel_pitch_um;
    c.full_well = full_well;
    c.nd_attenuation_db = nd_attenuation_db;
    c.noise_rms = noise_rms;
    c.rng_seed = seed;
    c.validate();
    return c;
  }

  CentroidOptions centroid_options() const {
    CentroidOptions o;
    o.background = background;
    o.border_px = border_px;
    return o;
  }

  /// Full check of every derived object, so commands fail before producing output.
  void validate() const {
    device();
    ccd();
    if (!(beta_step_deg > 0.0)) throw ValidationError("sweep.beta_step_deg", "must be > 0");
    if (beta_stop_deg < beta_start_deg)
      throw ValidationError("sweep.beta_stop_deg", "empty beta grid (stop < start)");
    if (profile_betas_deg.empty()) throw ValidationError("profile.betas_deg", "must not be empty");
    if (profile_points < 512) throw ValidationError("profile.points", "must be >= 512");
    if (!(wavelength_um > 0.0)) throw ValidationError("fit.wavelength_um", "must be > 0");
    if (fit_range_hi_deg < fit_range_lo_deg)
      throw ValidationError("fit.range_hi_deg", "must be >= fit.range_lo_deg");
    if (!(resolution_arcmin >= 0.0)) throw ValidationError("fit.resolution_arcmin", "must be >= 0");
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size() && std::isfinite(d)) return d;
  } catch (const std::exception&) {
  }
  throw ValidationError(key, "expected a finite number, got '" + v + "'");
}

inline long long parse_integer(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long i = std::stoll(v, &used);
    if (used == v.size()) return i;
  } catch (const std::exception&) {
  }
  throw ValidationError(key, "expected an integer, got '" + v + "'");
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ValidationError(key, "expected true or false, got '" + v + "'");
}

inline std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, trim(item)));
  return out;
}

inline std::string fmt_exact(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

inline RunConfig parse_config(std::istream& is) {
  using namespace detail;
  RunConfig c;
  using Setter = std::function<void(const std::string&, const std::string&)>;
  auto dbl = [](double& f) -> Setter { return [&f](auto& k, auto& v) { f = parse_double(k, v); }; };
  auto opt = [](std::optional<double>& f) -> Setter {
    return [&f](auto& k, auto& v) { f = parse_double(k, v); };
  };
  auto integer = [](int& f) -> Setter {
    return [&f](auto& k, auto& v) { f = static_cast<int>(parse_integer(k, v)); };
  };

  const std::map<std::string, Setter> setters = {
      {"beam.peak_amplitude", dbl(c.peak_amplitude)},
      {"beam.width_um", opt(c.width_um)},
      {"device.delta_x_um", opt(c.delta_x_um)},
      {"device.phi_deg", dbl(c.phi_deg)},
      {"device.gamma", opt(c.gamma)},
      {"geometry.theta_deg", opt(c.theta_deg)},
      {"geometry.mirror_distance_cm", dbl(c.mirror_distance_cm)},
      {"geometry.pbs_size_cm", dbl(c.pbs_size_cm)},
      {"geometry.coefficient_mm_per_deg", dbl(c.coefficient_mm_per_deg)},
      {"geometry.max_theta_deg", dbl(c.max_theta_deg)},
      {"ccd.cols", integer(c.ccd_cols)},
      {"ccd.rows", integer(c.ccd_rows)},
      {"ccd.pixel_pitch_um", dbl(c.pixel_pitch_um)},
      {"ccd.full_well", integer(c.full_well)},
      {"ccd.nd_attenuation_db", dbl(c.nd_attenuation_db)},
      {"ccd.noise_rms", dbl(c.noise_rms)},
      {"ccd.origin_offset_um", dbl(c.origin_offset_um)},
      {"ccd.background",
       [&c](auto& k, auto& v) {
         if (v == "none")
           c.background = Background::None;
         else if (v == "border")
           c.background = Background::BorderMean;
         else
           throw ValidationError(k, "expected 'none' or 'border', got '" + v + "'");
       }},
      {"ccd.border_px", integer(c.border_px)},
      {"sweep.mode", [&c](auto& k, auto& v) { c.mode = parse_sweep_mode(v, k); }},
      {"sweep.beta_start_deg", dbl(c.beta_start_deg)},
      {"sweep.beta_stop_deg", dbl(c.beta_stop_deg)},
      {"sweep.beta_step_deg", dbl(c.beta_step_deg)},
      {"profile.betas_deg", [&c](auto& k, auto& v) { c.profile_betas_deg = parse_list(k, v); }},
      {"profile.points", integer(c.profile_points)},
      {"fit.wavelength_um", dbl(c.wavelength_um)},
      {"fit.range_lo_deg", dbl(c.fit_range_lo_deg)},
      {"fit.range_hi_deg", dbl(c.fit_range_hi_deg)},
      {"fit.resolution_arcmin", dbl(c.resolution_arcmin)},
      {"fit.joint", [&c](auto& k, auto& v) { c.joint_fit = parse_bool(k, v); }},
      {"rng.seed",
       [&c](auto& k, auto& v) {
         try {
           std::size_t used = 0;
           if (!v.empty() && v.front() != '-') {
             c.seed = std::stoull(v, &used);
             if (used == v.size()) return;
           }
         } catch (const std::exception&) {
         }
         throw ValidationError(k, "expected a non-negative integer, got '" + v + "'");
       }},
      {"output.path", [&c](auto&, auto& v) { c.output_path = v; }},
  };

  std::set<std::string> seen;
  std::string line;
  while (std::getline(is, line)) {
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ValidationError(line, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) throw ValidationError(key, "unknown configuration key");
    if (!seen.insert(key).second) throw ValidationError(key, "given more than once");
    it->second(key, value);
  }
  return c;
}

inline void write_config(const RunConfig& c, std::ostream& os) {
  using detail::fmt_exact;
  os << "beam.peak_amplitude = " << fmt_exact(c.peak_amplitude) << '\n';
  if (c.width_um) os << "beam.width_um = " << fmt_exact(*c.width_um) << '\n';
  if (c.delta_x_um) os << "device.delta_x_um = " << fmt_exact(*c.delta_x_um) << '\n';
  os << "device.phi_deg = " << fmt_exact(c.phi_deg) << '\n';
  if (c.gamma) os << "device.gamma = " << fmt_exact(*c.gamma) << '\n';
  if (c.theta_deg) os << "geometry.theta_deg = " << fmt_exact(*c.theta_deg) << '\n';
  os << "geometry.mirror_distance_cm = " << fmt_exact(c.mirror_distance_cm) << '\n'
     << "geometry.pbs_size_cm = " << fmt_exact(c.pbs_size_cm) << '\n'
     << "geometry.coefficient_mm_per_deg = " << fmt_exact(c.coefficient_mm_per_deg) << '\n'
     << "geometry.max_theta_deg = " << fmt_exact(c.max_theta_deg) << '\n'
     << "ccd.cols = " << c.ccd_cols << '\n'
     << "ccd.rows = " << c.ccd_rows << '\n'
     << "ccd.pixel_pitch_um = " << fmt_exact(c.pixel_pitch_um) << '\n'
     << "ccd.full_well = " << c.full_well << '\n'
     << "ccd.nd_attenuation_db = " << fmt_exact(c.nd_attenuation_db) << '\n'
     << "ccd.noise_rms = " << fmt_exact(c.noise_rms) << '\n'
     << "ccd.origin_offset_um = " << fmt_exact(c.origin_offset_um) << '\n'
     << "ccd.background = " << (c.background == Background::None ? "none" : "border") << '\n'
     << "ccd.border_px = " << c.border_px << '\n'
     << "sweep.mode = " << to_string(c.mode) << '\n'
     << "sweep.beta_start_deg = " << fmt_exact(c.beta_start_deg) << '\n'
     << "sweep.beta_stop_deg = " << fmt_exact(c.beta_stop_deg) << '\n'
     << "sweep.beta_step_deg = " << fmt_exact(c.beta_step_deg) << '\n'
     << "profile.betas_deg = ";
  for (std::size_t i = 0; i < c.profile_betas_deg.size(); ++i)
    os << (i ? ", " : "") << fmt_exact(c.profile_betas_deg[i]);
  os << '\n'
     << "profile.points = " << c.profile_points << '\n'
     << "fit.wavelength_um = " << fmt_exact(c.wavelength_um) << '\n'
     << "fit.range_lo_deg = " << fmt_exact(c.fit_range_lo_deg) << '\n'
     << "fit.range_hi_deg = " << fmt_exact(c.fit_range_hi_deg) << '\n'
     << "fit.resolution_arcmin = " << fmt_exact(c.resolution_arcmin) << '\n'
     << "fit.joint = " << (c.joint_fit ? "true" : "false") << '\n'
     << "rng.seed = " << c.seed << '\n';
  if (!c.output_path.empty()) os << "output.path = " << c.output_path << '\n';
}

}  // namespace beamshift
