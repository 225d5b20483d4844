#include "cylharm/construct.hpp"

#include <cmath>
#include <stdexcept>

namespace cylharm {

Point GammaFamily::center(double s) const {
    if (profile.semisimple) return *profile.witness;
    return profile.ray(s);
}

Point GammaFamily::eval(double s, double psi) const {
    if (psi < 0.0 || psi >= 2.0 * M_PI + 1e-12)
        throw std::domain_error("psi must lie in [0, 2 pi)");
    Point c = center(s);
    Point ic = apply(space, twist, c);
    return interpolate(space, c, ic, psi / (2.0 * M_PI));
}

GammaFamily make_gamma_family(const ModelSpace& space, const Isometry& twist) {
    GammaFamily fam;
    fam.space = space;
    fam.twist = twist;
    fam.profile = displacement_profile(space, twist);
    return fam;
}

std::vector<Point> sample_gamma(const GammaFamily& fam, double s, int n_psi) {
    std::vector<Point> loop;
    loop.reserve(n_psi);
    for (int j = 0; j < n_psi; ++j)
        loop.push_back(fam.eval(s, 2.0 * M_PI * j / n_psi));
    return loop;
}

EquivariantGridMap prototype_map(const ModelSpace& space, const Isometry& twist,
                                 const CylinderGrid& grid,
                                 const std::vector<Point>& boundary,
                                 double exponent) {
    const double t0 = std::log(2.0);
    if (!(grid.T > t0))
        throw std::domain_error("prototype needs grid depth T > log 2");
    if (!(exponent > 0.0) || !(exponent < 1.0))
        throw std::domain_error("prototype exponent must lie in (0, 1)");
    if (static_cast<int>(boundary.size()) != grid.n_psi)
        throw std::domain_error("boundary loop must have n_psi nodes");
    for (const Point& p : boundary) check_point(space, p);

    GammaFamily fam = make_gamma_family(space, twist);
    std::vector<Point> gamma0 = sample_gamma(fam, 0.0, grid.n_psi);

    EquivariantGridMap m = make_map(space, twist, grid, gamma0[0]);
    for (int i = 0; i <= grid.n_t; ++i) {
        double t = t_of(grid, i);
        if (t >= t0) {
            double s = std::pow(t - t0, exponent);
            for (int j = 0; j < grid.n_psi; ++j)
                m.at(i, j) = fam.eval(s, psi_of(grid, j));
        } else {
            for (int j = 0; j < grid.n_psi; ++j)
                m.at(i, j) = interpolate(space, boundary[j], gamma0[j], t / t0);
        }
    }
    return m;
}

EquivariantGridMap prototype_map(const ModelSpace& space, const Isometry& twist,
                                 const CylinderGrid& grid, double exponent) {
    GammaFamily fam = make_gamma_family(space, twist);
    return prototype_map(space, twist, grid, sample_gamma(fam, 0.0, grid.n_psi),
                         exponent);
}

EquivariantGridMap bridge_map(const ModelSpace& space, const Isometry& twist,
                              const std::vector<Point>& loop0,
                              const std::vector<Point>& loop1, double L,
                              int n_t) {
    if (loop0.size() != loop1.size())
        throw std::domain_error("bridge loops must have equal node counts");
    int n_psi = static_cast<int>(loop0.size());
    CylinderGrid grid = make_grid(L, n_t, n_psi);
    EquivariantGridMap m = make_map(space, twist, grid, loop0[0]);
    for (int i = 0; i <= n_t; ++i) {
        double tau = static_cast<double>(i) / n_t;
        for (int j = 0; j < n_psi; ++j)
            m.at(i, j) = interpolate(space, loop0[j], loop1[j], tau);
    }
    return m;
}

EquivariantGridMap interpolate_maps(const EquivariantGridMap& u0,
                                    const EquivariantGridMap& u1, double s) {
    if (u0.grid.n_t != u1.grid.n_t || u0.grid.n_psi != u1.grid.n_psi ||
        u0.grid.T != u1.grid.T)
        throw std::domain_error("maps live on different grids");
    EquivariantGridMap m = u0;
    for (size_t k = 0; k < m.values.size(); ++k)
        m.values[k] = interpolate(m.space, u0.values[k], u1.values[k], s);
    return m;
}

}  // namespace cylharm
