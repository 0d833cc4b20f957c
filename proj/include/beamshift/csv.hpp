#pragma once

// CSV formats shared by the CLI and its consumers. Headers are fixed strings and every
// number is printed with 9 significant digits, so output is byte-stable for fixed inputs.

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "beamshift/core_model.hpp"
#include "beamshift/errors.hpp"
#include "beamshift/inference.hpp"
#include "beamshift/sweep.hpp"

namespace beamshift {

inline constexpr std::string_view kSweepHeader =
    "beta_deg,centroid_um,centroid_sigma_um,loss_db,amplification";
inline constexpr std::string_view kProfileHeader = "beta_deg,x_um,intensity_norm";

inline std::string format_g9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << kSweepHeader << '\n';
  for (const auto& r : rows)
    os << format_g9(r.beta_deg) << ',' << format_g9(r.centroid_um) << ','
       << format_g9(r.centroid_sigma_um) << ',' << format_g9(r.loss_db) << ','
       << format_g9(r.amplification) << '\n';
}

struct ProfileCurve {
  double beta_deg;
  std::vector<ProfileSample> samples;  // intensity already normalised to the input peak
};

inline void write_profile_csv(std::ostream& os, const std::vector<ProfileCurve>& curves) {
  os << kProfileHeader << '\n';
  for (const auto& c : curves)
    for (const auto& s : c.samples)
      os << format_g9(c.beta_deg) << ',' << format_g9(s.x_um) << ',' << format_g9(s.intensity)
         << '\n';
}

namespace detail {
inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double csv_number(const std::string& cell, std::size_t line, const char* column) {
  try {
    std::size_t used = 0;
    const double v = std::stod(cell, &used);
    if (used == cell.size()) return v;
  } catch (const std::exception&) {
  }
  throw SchemaError(line, std::string("column ") + column + ": '" + cell + "' is not a number");
}
}  // namespace detail

/// Reads sweep data. The header must be the sweep header or a leading prefix of it with at
/// least the first three columns; loss_db may be left empty per row.
inline std::vector<SweepRecord> read_sweep_csv(std::istream& is) {
  static constexpr const char* columns[] = {"beta_deg", "centroid_um", "centroid_sigma_um",
                                            "loss_db", "amplification"};
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(is, line)) throw SchemaError(1, "empty input, expected header");
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = detail::split_csv(line);
  if (header.size() < 3 || header.size() > 5)
    throw SchemaError(lineno, "expected header '" + std::string(kSweepHeader) + "'");
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] != columns[i])
      throw SchemaError(lineno, "header column " + std::to_string(i + 1) + " must be '" +
                                    columns[i] + "', got '" + header[i] + "'");

  std::vector<SweepRecord> out;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = detail::split_csv(line);
    if (cells.size() != header.size())
      throw SchemaError(lineno, "expected " + std::to_string(header.size()) + " fields, got " +
                                    std::to_string(cells.size()));
    SweepRecord r{};
    r.beta_deg = detail::csv_number(cells[0], lineno, columns[0]);
    r.centroid_um = detail::csv_number(cells[1], lineno, columns[1]);
    r.centroid_sigma_um = detail::csv_number(cells[2], lineno, columns[2]);
    if (!(r.centroid_sigma_um > 0.0))
      throw SchemaError(lineno, "centroid_sigma_um must be > 0");
    if (cells.size() > 3 && !cells[3].empty())
      r.loss_db = detail::csv_number(cells[3], lineno, columns[3]);
    if (cells.size() > 4 && !cells[4].empty()) detail::csv_number(cells[4], lineno, columns[4]);
    out.push_back(r);
  }
  return out;
}

/// Reads profile CSV back into curves, grouping consecutive rows with the same beta.
inline std::vector<ProfileCurve> read_profile_csv(std::istream& is) {
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(is, line) || line != kProfileHeader)
    throw SchemaError(1, "expected header '" + std::string(kProfileHeader) + "'");
  std::vector<ProfileCurve> out;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = detail::split_csv(line);
    if (cells.size() != 3) throw SchemaError(lineno, "expected 3 fields");
    const double b = detail::csv_number(cells[0], lineno, "beta_deg");
    if (out.empty() || out.back().beta_deg != b) out.push_back({b, {}});
    out.back().samples.push_back({detail::csv_number(cells[1], lineno, "x_um"),
                                  detail::csv_number(cells[2], lineno, "intensity_norm")});
  }
  return out;
}

}  // namespace beamshift
