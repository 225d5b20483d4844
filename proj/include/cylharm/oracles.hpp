#pragma once

#include <vector>

#include "cylharm/grid.hpp"
#include "cylharm/random.hpp"

namespace cylharm {

// Exact solution of the same discrete system the sweep solver relaxes, for
// Euclidean targets with pure translation twists: split off the twist-linear
// part, discrete Fourier transform the periodic remainder across psi, solve
// a tridiagonal system per mode along t.  Independent of the sweep code.
EquivariantGridMap flat_oracle_solve(const ModelSpace& space,
                                     const Isometry& twist,
                                     const CylinderGrid& grid,
                                     const std::vector<Point>& outer,
                                     const std::vector<Point>& inner);

// translation length estimate by direct displacement minimization
// (midpoint descent from random starts); agrees with the closed form for
// semisimple isometries
double delta_min_oracle(const ModelSpace& space, const Isometry& twist,
                        int starts, int iters, Rng& rng);

// smallest margin loop_energy - delta^2/(2 pi) over random twisted loops;
// nonnegative up to roundoff for every loop
double loop_bound_margin(const ModelSpace& space, const Isometry& twist,
                         int n_psi, int trials, double spread, Rng& rng);

}  // namespace cylharm
