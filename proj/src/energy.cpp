#include "cylharm/energy.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "cylharm/serialize.hpp"

namespace cylharm {

const double kTolDiscC = 8.0;

double tol_disc(const CylinderGrid& g, double len, double scale) {
    double h2 = 1.0 / (static_cast<double>(g.n_psi) * g.n_psi) +
                1.0 / (static_cast<double>(g.n_t) * g.n_t);
    return kTolDiscC * h2 * std::max(len, 1.0) * std::max(scale, 1.0);
}

double loop_energy(const EquivariantGridMap& m, int i) {
    KahanSum s;
    for (int j = 0; j < m.grid.n_psi; ++j) {
        double d = distance(m.space, m.at(i, j),
                            *neighbor(m, i, j, Dir::psi_plus));
        s.add(d * d);
    }
    return s.value() / m.grid.h_psi;
}

double loop_energy(const ModelSpace& space, const Isometry& twist,
                   const std::vector<Point>& loop) {
    const int np = static_cast<int>(loop.size());
    if (np < 3) throw std::domain_error("loop needs at least 3 nodes");
    const double h_psi = 2.0 * M_PI / np;
    KahanSum s;
    for (int j = 0; j < np; ++j) {
        const Point& next = j + 1 < np ? loop[j + 1] : loop[0];
        double d = j + 1 < np ? distance(space, loop[j], next)
                              : distance(space, loop[j], apply(space, twist, next));
        s.add(d * d);
    }
    return s.value() / h_psi;
}

static double layer_energy(const EquivariantGridMap& m, int i) {
    KahanSum s;
    for (int j = 0; j < m.grid.n_psi; ++j) {
        double d = distance(m.space, m.at(i, j), m.at(i + 1, j));
        s.add(d * d);
    }
    return s.value() * m.grid.h_psi / (m.grid.h_t * m.grid.h_t);
}

double discrete_energy(const EquivariantGridMap& m, double t_a, double t_b) {
    int ia = t_index(m.grid, t_a);
    int ib = t_index(m.grid, t_b);
    if (ia > ib) throw std::domain_error("energy window has t_a > t_b");
    KahanSum s;
    for (int i = ia; i < ib; ++i) {
        s.add(layer_energy(m, i) * m.grid.h_t);
        s.add(0.5 * m.grid.h_t * (loop_energy(m, i) + loop_energy(m, i + 1)));
    }
    return s.value();
}

double modified_energy(const EquivariantGridMap& m, double e_rho, double r) {
    if (!(r > 0.0) || r > 1.0)
        throw std::domain_error("radius must lie in (0, 1]");
    double t = -std::log(r);
    int i = t_index(m.grid, t);
    return discrete_energy(m, 0.0, t_of(m.grid, i)) - e_rho * t_of(m.grid, i);
}

std::vector<double> growth_delta(const EquivariantGridMap& m,
                                 const Point& base) {
    std::vector<double> out(m.grid.n_t + 1);
    for (int i = 0; i <= m.grid.n_t; ++i) {
        double best = distance(m.space, m.at(i, 0), base);
        for (int j = 1; j < m.grid.n_psi; ++j)
            best = std::min(best, distance(m.space, m.at(i, j), base));
        out[i] = best;
    }
    return out;
}

EnergyReport energy_report(const EquivariantGridMap& m, double e_rho) {
    EnergyReport rep;
    rep.e_rho = e_rho;
    const int n = m.grid.n_t;
    rep.t.resize(n + 1);
    rep.r.resize(n + 1);
    rep.slice_theta.resize(n + 1);
    rep.slice_t.assign(n + 1, 0.0);
    rep.F.resize(n + 1);
    rep.G.resize(n + 1);
    rep.cumulative.resize(n + 1);
    rep.modified.resize(n + 1);
    for (int i = 0; i <= n; ++i) {
        rep.t[i] = t_of(m.grid, i);
        rep.r[i] = disk_radius(m.grid, i);
        rep.slice_theta[i] = loop_energy(m, i);
        if (i < n) rep.slice_t[i] = layer_energy(m, i);
        rep.F[i] = rep.slice_theta[i] - e_rho;
        rep.G[i] = rep.slice_t[i];
    }
    KahanSum cum;
    rep.cumulative[0] = 0.0;
    rep.modified[0] = 0.0;
    for (int i = 1; i <= n; ++i) {
        cum.add(rep.slice_t[i - 1] * m.grid.h_t);
        cum.add(0.5 * m.grid.h_t * (rep.slice_theta[i - 1] + rep.slice_theta[i]));
        rep.cumulative[i] = cum.value();
        rep.modified[i] = cum.value() - e_rho * rep.t[i];
    }
    return rep;
}

void write_energy_csv(std::ostream& out, const EnergyReport& rep) {
    out << "t,r,slice_theta,slice_t,F,G,cumulative,modified\n";
    for (size_t i = 0; i < rep.t.size(); ++i) {
        out << format_double(rep.t[i]) << "," << format_double(rep.r[i]) << ","
            << format_double(rep.slice_theta[i]) << ","
            << format_double(rep.slice_t[i]) << "," << format_double(rep.F[i])
            << "," << format_double(rep.G[i]) << ","
            << format_double(rep.cumulative[i]) << ","
            << format_double(rep.modified[i]) << "\n";
    }
}

}  // namespace cylharm
