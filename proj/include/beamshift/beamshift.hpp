#pragma once

#include "beamshift/config.hpp"
#include "beamshift/core_model.hpp"
#include "beamshift/csv.hpp"
#include "beamshift/detector.hpp"
#include "beamshift/errors.hpp"
#include "beamshift/geometry.hpp"
#include "beamshift/inference.hpp"
#include "beamshift/sweep.hpp"
#include "beamshift/units.hpp"
