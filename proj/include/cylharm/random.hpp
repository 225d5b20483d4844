#pragma once

#include <random>

#include "cylharm/isometry.hpp"
#include "cylharm/spaces.hpp"

namespace cylharm {

using Rng = std::mt19937_64;

// seeded sampling helpers shared by tests, oracles and the solver's
// multi-start probes; all deterministic for a fixed generator state

Point random_point(const ModelSpace& s, Rng& rng, double spread = 1.0);
Point sample_near(const ModelSpace& s, const Point& p, double radius,
                  Rng& rng);

// variants that stay inside the twist's domain (tree translations only act
// on the designated line and its extension rays, so jitter moves along it)
Point random_point_compatible(const ModelSpace& s, const Isometry& twist,
                              Rng& rng, double spread = 1.0);
Point sample_near_compatible(const ModelSpace& s, const Isometry& twist,
                             const Point& p, double radius, Rng& rng);

}  // namespace cylharm
