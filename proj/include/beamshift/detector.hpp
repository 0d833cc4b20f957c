#pragma once

// CCD frame synthesis and centroid estimation.
//
// Pixels sample the separable 2D intensity |E(x, y)|^2 = I(x) exp(-y^2/w^2) at their
// centres (no area integration). A gain maps the beta = 45 deg peak of the current
// device to 80% of full well, ND attenuation scales the signal, additive Gaussian read
// noise is optional, and the result is rounded and clipped to [0, full_well].

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "beamshift/core_model.hpp"
#include "beamshift/errors.hpp"

namespace beamshift {

struct CcdConfig {
  int cols = 1530;
  int rows = 1020;
  double pixel_pitch_um = 9.0;
  int full_well = 65535;  // also the PGM maxval, so at most 16 bits
  double nd_attenuation_db = 0.0;
  double noise_rms = 0.0;  // counts
  std::uint64_t rng_seed = 0;

  static constexpr double kPeakFill = 0.8;

  void validate() const {
    if (cols < 1) throw ValidationError("ccd.cols", "must be >= 1");
    if (rows < 1) throw ValidationError("ccd.rows", "must be >= 1");
    if (!(pixel_pitch_um > 0.0)) throw ValidationError("ccd.pixel_pitch_um", "must be > 0");
    if (full_well < 1 || full_well > 65535)
      throw ValidationError("ccd.full_well", "must lie in [1, 65535]");
    if (!(nd_attenuation_db >= 0.0))
      throw ValidationError("ccd.nd_attenuation_db", "must be >= 0");
    if (!(noise_rms >= 0.0)) throw ValidationError("ccd.noise_rms", "must be >= 0");
  }

  double attenuation() const { return std::pow(10.0, -nd_attenuation_db / 10.0); }
  double peak_counts() const { return kPeakFill * full_well; }
};

/// A rows x cols raster of counts in row-major order.
struct Frame {
  CcdConfig config;
  double origin_offset_um = 0.0;  // lab-frame x of the frame centre
  std::vector<std::uint16_t> counts;

  Frame() = default;
  Frame(const CcdConfig& cfg, double origin_um)
      : config(cfg),
        origin_offset_um(origin_um),
        counts(static_cast<std::size_t>(cfg.cols) * static_cast<std::size_t>(cfg.rows), 0) {}

  int cols() const { return config.cols; }
  int rows() const { return config.rows; }

  std::uint16_t at(int row, int col) const {
    return counts[static_cast<std::size_t>(row) * config.cols + col];
  }
  std::uint16_t& at(int row, int col) {
    return counts[static_cast<std::size_t>(row) * config.cols + col];
  }

  double x_of_col(int col) const {
    return origin_offset_um + (col - 0.5 * (config.cols - 1)) * config.pixel_pitch_um;
  }
  double y_of_row(int row) const { return (row - 0.5 * (config.rows - 1)) * config.pixel_pitch_um; }

  /// True iff some pixel sits at full well, i.e. clipping occurred at the top.
  bool saturated() const {
    const auto fw = static_cast<std::uint16_t>(config.full_well);
    return std::any_of(counts.begin(), counts.end(), [fw](std::uint16_t v) { return v >= fw; });
  }
};

namespace detail {

// Continuous peak of I(x, 0) at beta = 45 deg for this device.
inline double reference_peak(const BeamParams& beam, const DisplacerState& dev) {
  const PostSelection ref{Angle::degrees(45.0)};
  const double w = beam.width_um;
  constexpr int n = 6001;
  double peak = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = -3.0 * w + 6.0 * w * i / (n - 1);
    peak = std::max(peak, output_intensity(beam, dev, ref, x));
  }
  if (!(peak > 1e-9 * beam.peak_intensity()))
    throw DegenerateProjection("beta = 45 deg projection is dark; cannot normalize detector gain");
  return peak;
}

}  // namespace detail

/// Counts per unit intensity before ND attenuation.
inline double detector_gain(const BeamParams& beam, const DisplacerState& dev, const CcdConfig& cfg) {
  return cfg.peak_counts() / detail::reference_peak(beam, dev);
}

/// Renders the post-selected beam onto the sensor.
inline Frame synthesize_frame(const BeamParams& beam, const DisplacerState& dev,
                              const PostSelection& ps, const CcdConfig& cfg,
                              double origin_offset_um = 0.0) {
  beam.validate();
  cfg.validate();
  Frame frame(cfg, origin_offset_um);
  const double scale = detector_gain(beam, dev, cfg) * cfg.attenuation();
  const double w2 = beam.width_um * beam.width_um;

  std::vector<double> col_profile(cfg.cols);
  for (int c = 0; c < cfg.cols; ++c)
    col_profile[c] = scale * std::norm(output_field(beam, dev, ps, frame.x_of_col(c), 0.0));

  std::mt19937_64 rng(cfg.rng_seed);
  std::normal_distribution<double> noise(0.0, cfg.noise_rms > 0.0 ? cfg.noise_rms : 1.0);
  const bool noisy = cfg.noise_rms > 0.0;
  const double fw = cfg.full_well;

  for (int r = 0; r < cfg.rows; ++r) {
    const double y = frame.y_of_row(r);
    const double row_factor = std::exp(-y * y / w2);
    std::uint16_t* out = frame.counts.data() + static_cast<std::size_t>(r) * cfg.cols;
    for (int c = 0; c < cfg.cols; ++c) {
      double v = col_profile[c] * row_factor;
      if (noisy) v += noise(rng);
      out[c] = static_cast<std::uint16_t>(std::clamp(std::round(v), 0.0, fw));
    }
  }
  return frame;
}

/// Noise-free, unrounded total counts the input beam (no output polarizer) would give.
inline double reference_input_counts(const BeamParams& beam, const DisplacerState& dev,
                                     const CcdConfig& cfg, double origin_offset_um = 0.0) {
  cfg.validate();
  const double scale = detector_gain(beam, dev, cfg) * cfg.attenuation();
  const double w2 = beam.width_um * beam.width_um;
  double sx = 0.0;
  for (int c = 0; c < cfg.cols; ++c) {
    const double x = origin_offset_um + (c - 0.5 * (cfg.cols - 1)) * cfg.pixel_pitch_um;
    sx += std::exp(-x * x / w2);
  }
  double sy = 0.0;
  for (int r = 0; r < cfg.rows; ++r) {
    const double y = (r - 0.5 * (cfg.rows - 1)) * cfg.pixel_pitch_um;
    sy += std::exp(-y * y / w2);
  }
  return scale * beam.peak_intensity() * sx * sy;
}

enum class Background {
  None,        // plain weighted mean of raw counts
  BorderMean,  // subtract the mean of a border strip first
};

struct CentroidOptions {
  Background background = Background::None;
  int border_px = 16;
  double min_total_counts = 10.0;
};

struct CentroidEstimate {
  double x_um;
  double sigma_um;      // one pixel pitch
  double total_counts;  // background-subtracted signal
  double background;    // per-pixel level that was removed
};

inline double border_mean(const Frame& frame, int border_px) {
  if (border_px < 1 || 2 * border_px >= std::min(frame.cols(), frame.rows()))
    throw ValidationError("ccd.border_px", "border strip must be >= 1 and leave an interior");
  double sum = 0.0;
  std::size_t n = 0;
  for (int r = 0; r < frame.rows(); ++r) {
    const bool edge_row = r < border_px || r >= frame.rows() - border_px;
    for (int c = 0; c < frame.cols(); ++c) {
      if (edge_row || c < border_px || c >= frame.cols() - border_px) {
        sum += frame.at(r, c);
        ++n;
      }
    }
  }
  return sum / static_cast<double>(n);
}

/// Intensity-weighted mean of pixel-centre x, in lab-frame µm.
inline CentroidEstimate estimate_centroid(const Frame& frame, const CentroidOptions& opts = {}) {
  const double bg =
      opts.background == Background::BorderMean ? border_mean(frame, opts.border_px) : 0.0;

  std::vector<double> col_sums(frame.cols(), 0.0);
  for (int r = 0; r < frame.rows(); ++r)
    for (int c = 0; c < frame.cols(); ++c) col_sums[c] += frame.at(r, c);

  double total = 0.0;
  double moment = 0.0;
  for (int c = 0; c < frame.cols(); ++c) {
    const double s = col_sums[c] - bg * frame.rows();
    total += s;
    moment += s * frame.x_of_col(c);
  }
  if (!(total >= opts.min_total_counts))
    throw EmptyFrame("frame signal " + std::to_string(total) + " counts is below the floor of " +
                     std::to_string(opts.min_total_counts));
  return {moment / total, frame.config.pixel_pitch_um, total, bg};
}

// --- portable graymap -------------------------------------------------------
//
// Binary P5, one or two bytes per sample (big-endian) depending on maxval, with
// maxval = full_well. Configuration travels as "# key=value" comment lines ahead of
// the dimensions; doubles are written with 17 significant digits so they round-trip.

namespace detail {
inline std::string format_exact(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace detail

inline void write_pgm(const Frame& frame, std::ostream& os) {
  const auto& cfg = frame.config;
  os << "P5\n"
     << "# beamshift-frame 1\n"
     << "# origin_offset_um=" << detail::format_exact(frame.origin_offset_um) << '\n'
     << "# pixel_pitch_um=" << detail::format_exact(cfg.pixel_pitch_um) << '\n'
     << "# nd_attenuation_db=" << detail::format_exact(cfg.nd_attenuation_db) << '\n'
     << "# noise_rms=" << detail::format_exact(cfg.noise_rms) << '\n'
     << "# rng_seed=" << cfg.rng_seed << '\n'
     << cfg.cols << ' ' << cfg.rows << '\n'
     << cfg.full_well << '\n';
  const bool wide = cfg.full_well > 255;
  std::string raw;
  raw.reserve(frame.counts.size() * (wide ? 2 : 1));
  for (std::uint16_t v : frame.counts) {
    if (wide) raw.push_back(static_cast<char>(v >> 8));
    raw.push_back(static_cast<char>(v & 0xff));
  }
  os.write(raw.data(), static_cast<std::streamsize>(raw.size()));
}

inline Frame read_pgm(std::istream& is) {
  std::map<std::string, std::string> meta;
  std::size_t line = 1;

  auto next_token = [&]() -> std::string {
    std::string tok;
    while (true) {
      int ch = is.peek();
      if (ch == EOF) break;
      if (ch == '#') {
        std::string comment;
        std::getline(is, comment);
        const auto eq = comment.find('=');
        if (eq != std::string::npos) {
          auto key = comment.substr(1, eq - 1);
          key.erase(0, key.find_first_not_of(' '));
          meta[key] = comment.substr(eq + 1);
        }
        ++line;
        if (!tok.empty()) break;
        continue;
      }
      if (std::isspace(ch)) {
        if (!tok.empty()) break;
        if (ch == '\n') ++line;
        is.get();
        continue;
      }
      tok.push_back(static_cast<char>(is.get()));
    }
    return tok;
  };
  auto next_int = [&](const char* what) {
    const std::string tok = next_token();
    try {
      std::size_t used = 0;
      const long v = std::stol(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      return v;
    } catch (const std::exception&) {
      throw SchemaError(line, std::string("expected integer ") + what + ", got '" + tok + "'");
    }
  };

  if (next_token() != "P5") throw SchemaError(line, "not a binary PGM (missing P5 magic)");
  CcdConfig cfg;
  cfg.cols = static_cast<int>(next_int("width"));
  cfg.rows = static_cast<int>(next_int("height"));
  cfg.full_well = static_cast<int>(next_int("maxval"));
  if (is.get() == EOF) throw SchemaError(line, "truncated header");

  auto meta_double = [&](const char* key, double fallback) {
    const auto it = meta.find(key);
    if (it == meta.end()) return fallback;
    try {
      return std::stod(it->second);
    } catch (const std::exception&) {
      throw SchemaError(line, std::string("bad value for ") + key);
    }
  };
  cfg.pixel_pitch_um = meta_double("pixel_pitch_um", cfg.pixel_pitch_um);
  cfg.nd_attenuation_db = meta_double("nd_attenuation_db", 0.0);
  cfg.noise_rms = meta_double("noise_rms", 0.0);
  if (const auto it = meta.find("rng_seed"); it != meta.end()) cfg.rng_seed = std::stoull(it->second);
  try {
    cfg.validate();
  } catch (const ValidationError& e) {
    throw SchemaError(line, e.what());
  }

  Frame frame(cfg, meta_double("origin_offset_um", 0.0));
  const bool wide = cfg.full_well > 255;
  std::string raw(frame.counts.size() * (wide ? 2 : 1), '\0');
  is.read(raw.data(), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(is.gcount()) != raw.size())
    throw SchemaError(line, "pixel data truncated");
  for (std::size_t i = 0; i < frame.counts.size(); ++i) {
    const auto v = wide ? static_cast<std::uint16_t>(
                              (static_cast<unsigned char>(raw[2 * i]) << 8) |
                              static_cast<unsigned char>(raw[2 * i + 1]))
                        : static_cast<std::uint16_t>(static_cast<unsigned char>(raw[i]));
    if (v > cfg.full_well) throw SchemaError(line, "sample exceeds maxval");
    frame.counts[i] = v;
  }
  return frame;
}

}  // namespace beamshift
