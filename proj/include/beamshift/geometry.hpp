#pragma once

#include <cmath>
#include <string>

#include "beamshift/core_model.hpp"
#include "beamshift/errors.hpp"
#include "beamshift/units.hpp"

namespace beamshift {

/// Rotating-platform displacer: two mirrors and a PBS on an L-shaped stage.
struct TbdGeometry {
  Angle theta;
  double mirror_distance_cm = 7.0;
  double pbs_size_cm = 1.0;
  double displacement_coefficient_mm_per_deg = 5.0;  // separation of the two output beams per degree
  double max_theta_deg = 2.0;                        // linear law trusted below this

  void validate() const {
    if (!(mirror_distance_cm > 0.0))
      throw ValidationError("geometry.mirror_distance_cm", "must be > 0");
    if (!(pbs_size_cm > 0.0)) throw ValidationError("geometry.pbs_size_cm", "must be > 0");
    if (!(displacement_coefficient_mm_per_deg > 0.0))
      throw ValidationError("geometry.coefficient_mm_per_deg", "must be > 0");
    if (!(max_theta_deg > 0.0)) throw ValidationError("geometry.max_theta_deg", "must be > 0");
  }
};

/// Half of the inter-beam separation, in µm. Signed: negative theta swaps the two copies.
inline double theta_to_delta_x(const TbdGeometry& geom) {
  geom.validate();
  if (!(std::abs(geom.theta.deg()) <= geom.max_theta_deg))
    throw OutOfLinearRange("|theta| = " + std::to_string(std::abs(geom.theta.deg())) +
                           " deg exceeds the linear-model cap of " +
                           std::to_string(geom.max_theta_deg) + " deg");
  const double separation_um = geom.displacement_coefficient_mm_per_deg * 1000.0 * geom.theta.deg();
  return 0.5 * separation_um;
}

enum class OverlapRegime { Overlapping, Separated };

inline const char* to_string(OverlapRegime r) {
  return r == OverlapRegime::Overlapping ? "overlapping" : "separated";
}

/// Overlapping iff the separation 2Δx is at most threshold·w.
inline OverlapRegime overlap_regime(const BeamParams& beam, double delta_x_um,
                                    double threshold = 1.0) {
  beam.validate();
  if (!(threshold > 0.0 && threshold <= 1.0))
    throw ValidationError("threshold", "must lie in (0, 1]");
  const double ratio = 2.0 * std::abs(delta_x_um) / beam.width_um;
  return ratio <= threshold ? OverlapRegime::Overlapping : OverlapRegime::Separated;
}

}  // namespace beamshift
