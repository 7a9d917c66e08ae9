#pragma once

#include "gafzero/bipotential.hpp"
#include "gafzero/ensembles.hpp"
#include "gafzero/error.hpp"
#include "gafzero/geometry.hpp"
#include "gafzero/montecarlo.hpp"
#include "gafzero/predictions.hpp"
#include "gafzero/rng.hpp"
#include "gafzero/zeros.hpp"

namespace gafzero {
inline constexpr const char* kVersion = "0.1.0";
}
