#ifndef GBRIDGE_GBRIDGE_HPP
#define GBRIDGE_GBRIDGE_HPP

#include "gbridge/compensator.hpp"
#include "gbridge/filter.hpp"
#include "gbridge/harness.hpp"
#include "gbridge/mixing_law.hpp"
#include "gbridge/pathgen.hpp"
#include "gbridge/rng.hpp"
#include "gbridge/specfun.hpp"

#endif  // GBRIDGE_GBRIDGE_HPP
