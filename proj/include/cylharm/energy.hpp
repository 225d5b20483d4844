#pragma once

#include <iosfwd>
#include <vector>

#include "cylharm/grid.hpp"

namespace cylharm {

// Discrete Dirichlet energy of the map restricted to t in [t_a, t_b] (both
// must lie on grid lines).  Axial edges contribute (d/h_t)^2 h_t h_psi, one
// term per layer; angular edges contribute (d/h_psi)^2 h_t h_psi with
// trapezoid weights in t (the slices at t_a and t_b count half), which makes
// the energy exactly additive over adjacent sub-annuli.
double discrete_energy(const EquivariantGridMap& m, double t_a, double t_b);

// angular energy of the twisted loop at slice i: sum_j d_j^2 / h_psi
double loop_energy(const EquivariantGridMap& m, int i);

// same for a free-standing twisted loop (seam chord closes via the twist)
double loop_energy(const ModelSpace& space, const Isometry& twist,
                   const std::vector<Point>& loop);

// E[0, t] - e_rho * t at r = e^{-t}
double modified_energy(const EquivariantGridMap& m, double e_rho, double r);

// delta_i = min_j d(u(t_i, psi_j), base)
std::vector<double> growth_delta(const EquivariantGridMap& m,
                                 const Point& base);

// per-slice and cumulative quantities, one row per grid line in t
struct EnergyReport {
    double e_rho = 0.0;
    std::vector<double> t;
    std::vector<double> r;
    std::vector<double> slice_theta;  // angular energy of slice i
    std::vector<double> slice_t;      // axial layer energy between i and i+1,
                                      // 0 in the last row
    std::vector<double> F;            // slice_theta - e_rho
    std::vector<double> G;            // axial layer energy, alias of slice_t
    std::vector<double> cumulative;   // discrete_energy over [0, t_i]
    std::vector<double> modified;     // cumulative - e_rho * t_i
};

EnergyReport energy_report(const EquivariantGridMap& m, double e_rho);

// columns: t,r,slice_theta,slice_t,F,G,cumulative,modified
void write_energy_csv(std::ostream& out, const EnergyReport& rep);

// Discretization allowance c (1/n_psi^2 + 1/n_t^2) * len * scale with a
// single project-wide constant c; len is the t-length of the window being
// judged and scale tracks the size of the quantities involved.
double tol_disc(const CylinderGrid& g, double len, double scale);

extern const double kTolDiscC;

// numerically stable running sum, used so energy totals do not depend on
// summation order beyond 1e-12 relative
struct KahanSum {
    double s = 0.0;
    double c = 0.0;
    void add(double x) {
        double y = x - c;
        double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    double value() const { return s; }
};

}  // namespace cylharm
