#pragma once

#include <vector>

#include "cylharm/grid.hpp"
#include "cylharm/isometry.hpp"
#include "cylharm/spaces.hpp"

namespace cylharm {

// Family of twisted geodesic loops gamma_s(psi): the constant-speed geodesic
// from c(s) to twist * c(s), traversed as psi runs over [0, 2 pi).  c(s) is
// the profile's witness (constant in s) when the twist is semisimple and the
// profile ray otherwise.
struct GammaFamily {
    ModelSpace space;
    Isometry twist;
    DisplacementProfile profile;

    Point center(double s) const;
    Point eval(double s, double psi) const;
};

GammaFamily make_gamma_family(const ModelSpace& space, const Isometry& twist);

// Sampled finite-energy equivariant map on the grid:
//   t >= log 2:  u(t, psi) = gamma_{s(t)}(psi) with s(t) = (t - log 2)^p,
//   t <  log 2:  geodesic interpolation from boundary loop to gamma_0.
// The default boundary loop is gamma_0 itself, so the collar is constant in
// t unless a custom boundary is supplied.  Requires grid.T > log 2.
EquivariantGridMap prototype_map(const ModelSpace& space, const Isometry& twist,
                                 const CylinderGrid& grid,
                                 double exponent = 1.0 / 3.0);
EquivariantGridMap prototype_map(const ModelSpace& space, const Isometry& twist,
                                 const CylinderGrid& grid,
                                 const std::vector<Point>& boundary,
                                 double exponent);

// map on [0, L] x S^1 interpolating two twisted loops along radial geodesics
EquivariantGridMap bridge_map(const ModelSpace& space, const Isometry& twist,
                              const std::vector<Point>& loop0,
                              const std::vector<Point>& loop1, double L,
                              int n_t);

// nodewise geodesic interpolation between maps on the same grid
EquivariantGridMap interpolate_maps(const EquivariantGridMap& u0,
                                    const EquivariantGridMap& u1, double s);

// loop of n_psi samples of gamma_s
std::vector<Point> sample_gamma(const GammaFamily& fam, double s, int n_psi);

}  // namespace cylharm
