#include "cylharm/oracles.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

#include <Eigen/Dense>

#include "cylharm/energy.hpp"

namespace cylharm {

// --- seeded sampling ---------------------------------------------------

Point random_point(const ModelSpace& s, Rng& rng, double spread) {
    std::normal_distribution<double> g(0.0, 1.0);
    if (auto* e = std::get_if<Euclidean>(&s.v)) {
        std::vector<double> x(e->dim);
        for (double& c : x) c = spread * g(rng);
        return euc_point(std::move(x));
    }
    if (std::holds_alternative<Hyperbolic>(s.v))
        return hyp_point(spread * g(rng), std::exp(spread * g(rng)));
    if (auto* t = std::get_if<Tree>(&s.v)) {
        const TreeShape& shape = t->shape;
        std::uniform_int_distribution<int> pick(
            0, static_cast<int>(shape.edges.size()) - 1);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        int e = pick(rng);
        return tree_point(e, u(rng) * shape.edges[e].length);
    }
    const auto& p = std::get<Product>(s.v);
    const double f = spread / std::sqrt(2.0);
    return product_point(random_point(p.factors[0], rng, f),
                         random_point(p.factors[1], rng, f));
}

Point sample_near(const ModelSpace& s, const Point& p, double radius,
                  Rng& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    if (std::holds_alternative<Euclidean>(s.v)) {
        auto x = std::get<EucPoint>(p.v).x;
        double f = radius / std::sqrt(static_cast<double>(x.size()));
        for (double& c : x) c += f * g(rng);
        return euc_point(std::move(x));
    }
    if (std::holds_alternative<Hyperbolic>(s.v)) {
        const auto& h = std::get<HypPoint>(p.v);
        double f = radius / std::sqrt(2.0);
        return hyp_point(h.x + f * g(rng) * h.y, h.y * std::exp(f * g(rng)));
    }
    if (std::holds_alternative<Tree>(s.v)) {
        // step toward a random target, clamped to the requested radius
        Point q = random_point(s, rng);
        double d = distance(s, p, q);
        if (d < 1e-15) return p;
        double step = std::min(radius * std::abs(g(rng)), d);
        return interpolate(s, p, q, step / d);
    }
    const auto& ps = std::get<Product>(s.v);
    const auto& pp = std::get<ProductPoint>(p.v);
    const double f = radius / std::sqrt(2.0);
    return product_point(sample_near(ps.factors[0], pp.parts[0], f, rng),
                         sample_near(ps.factors[1], pp.parts[1], f, rng));
}

Point random_point_compatible(const ModelSpace& s, const Isometry& twist,
                              Rng& rng, double spread) {
    std::normal_distribution<double> g(0.0, 1.0);
    if (std::holds_alternative<TreeTranslation>(twist.v)) {
        const TreeShape& shape = std::get<Tree>(s.v).shape;
        return Point{tree_point_at_line_coordinate(shape, spread * g(rng))};
    }
    if (auto* pi = std::get_if<ProdIso>(&twist.v)) {
        const auto& ps = std::get<Product>(s.v);
        const double f = spread / std::sqrt(2.0);
        return product_point(
            random_point_compatible(ps.factors[0], pi->parts[0], rng, f),
            random_point_compatible(ps.factors[1], pi->parts[1], rng, f));
    }
    return random_point(s, rng, spread);
}

Point sample_near_compatible(const ModelSpace& s, const Isometry& twist,
                             const Point& p, double radius, Rng& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    if (std::holds_alternative<TreeTranslation>(twist.v)) {
        const TreeShape& shape = std::get<Tree>(s.v).shape;
        double c = tree_line_coordinate(shape, std::get<TreePoint>(p.v));
        return Point{tree_point_at_line_coordinate(shape, c + radius * g(rng))};
    }
    if (auto* pi = std::get_if<ProdIso>(&twist.v)) {
        const auto& ps = std::get<Product>(s.v);
        const auto& pp = std::get<ProductPoint>(p.v);
        const double f = radius / std::sqrt(2.0);
        return product_point(
            sample_near_compatible(ps.factors[0], pi->parts[0], pp.parts[0], f,
                                   rng),
            sample_near_compatible(ps.factors[1], pi->parts[1], pp.parts[1], f,
                                   rng));
    }
    return sample_near(s, p, radius, rng);
}

// --- flat oracle --------------------------------------------------------

EquivariantGridMap flat_oracle_solve(const ModelSpace& space,
                                     const Isometry& twist,
                                     const CylinderGrid& grid,
                                     const std::vector<Point>& outer,
                                     const std::vector<Point>& inner) {
    const auto* euc = std::get_if<Euclidean>(&space.v);
    const auto* iso = std::get_if<EucIso>(&twist.v);
    if (!euc || !iso)
        throw std::domain_error("flat oracle needs a Euclidean target");
    if ((iso->Q - Eigen::MatrixXd::Identity(euc->dim, euc->dim)).norm() > 1e-12)
        throw std::domain_error("flat oracle supports translation twists only");
    const int nt = grid.n_t, np = grid.n_psi, dim = euc->dim;
    if (static_cast<int>(outer.size()) != np ||
        static_cast<int>(inner.size()) != np)
        throw std::domain_error("boundary loops must have n_psi nodes");

    const double wt = 1.0 / (grid.h_t * grid.h_t);
    const double wp = 1.0 / (grid.h_psi * grid.h_psi);
    using cplx = std::complex<double>;

    auto lin = [&](int i, int j, int d) {
        (void)i;
        return psi_of(grid, j) / (2.0 * M_PI) * iso->b[d];
    };

    // w = u - linear part, periodic across the seam
    std::vector<std::vector<double>> w(
        static_cast<size_t>(nt + 1) * np, std::vector<double>(dim, 0.0));
    auto wat = [&](int i, int j) -> std::vector<double>& {
        return w[static_cast<size_t>(i) * np + j];
    };
    for (int j = 0; j < np; ++j) {
        const auto& o = std::get<EucPoint>(outer[j].v).x;
        const auto& q = std::get<EucPoint>(inner[j].v).x;
        if (static_cast<int>(o.size()) != dim ||
            static_cast<int>(q.size()) != dim)
            throw std::domain_error("boundary point dimension mismatch");
        for (int d = 0; d < dim; ++d) {
            wat(0, j)[d] = o[d] - lin(0, j, d);
            wat(nt, j)[d] = q[d] - lin(nt, j, d);
        }
    }

    std::vector<cplx> bottom(np), top(np), sol((nt + 1));
    std::vector<cplx> diag(nt + 1), rhs(nt + 1);
    for (int d = 0; d < dim; ++d) {
        for (int k = 0; k < np; ++k) {
            cplx b0 = 0.0, bT = 0.0;
            for (int j = 0; j < np; ++j) {
                cplx ph = std::polar(1.0, -2.0 * M_PI * j * k / np);
                b0 += wat(0, j)[d] * ph;
                bT += wat(nt, j)[d] * ph;
            }
            bottom[k] = b0;
            top[k] = bT;
        }
        // per mode k, interior rows solve
        //   wt x_{i-1} + a_k x_i + wt x_{i+1} = 0,
        //   a_k = -2 wt - 2 wp (1 - cos(k h_psi))
        std::vector<std::vector<cplx>> modes(np);
        for (int k = 0; k < np; ++k) {
            double ak = -2.0 * wt - 2.0 * wp * (1.0 - std::cos(k * grid.h_psi));
            std::vector<cplx>& x = modes[k];
            x.assign(nt + 1, 0.0);
            x[0] = bottom[k];
            x[nt] = top[k];
            if (nt > 1) {
                // Thomas on rows 1..nt-1
                std::vector<cplx> c(nt), dd(nt);
                c[1] = wt / ak;
                dd[1] = (-wt * x[0]) / ak;
                for (int i = 2; i < nt; ++i) {
                    cplx denom = ak - wt * c[i - 1];
                    c[i] = wt / denom;
                    cplx r = (i == nt - 1) ? -wt * x[nt] : cplx(0.0);
                    dd[i] = (r - wt * dd[i - 1]) / denom;
                }
                x[nt - 1] = dd[nt - 1];
                for (int i = nt - 2; i >= 1; --i)
                    x[i] = dd[i] - c[i] * x[i + 1];
            }
        }
        for (int i = 1; i < nt; ++i) {
            for (int j = 0; j < np; ++j) {
                cplx acc = 0.0;
                for (int k = 0; k < np; ++k)
                    acc += modes[k][i] * std::polar(1.0, 2.0 * M_PI * j * k / np);
                wat(i, j)[d] = acc.real() / np;
            }
        }
    }

    EquivariantGridMap m = make_map(space, twist, grid, outer[0]);
    for (int i = 0; i <= nt; ++i) {
        for (int j = 0; j < np; ++j) {
            std::vector<double> x(dim);
            for (int d = 0; d < dim; ++d) x[d] = lin(i, j, d) + wat(i, j)[d];
            m.at(i, j) = euc_point(std::move(x));
        }
    }
    return m;
}

// --- displacement minimization ------------------------------------------

double delta_min_oracle(const ModelSpace& space, const Isometry& twist,
                        int starts, int iters, Rng& rng) {
    std::uniform_real_distribution<double> u(0.5, 4.0);
    double best = std::numeric_limits<double>::infinity();
    for (int s = 0; s < starts; ++s) {
        Point p = random_point_compatible(space, twist, rng, u(rng));
        double d = displacement(space, twist, p);
        best = std::min(best, d);
        for (int it = 0; it < iters; ++it) {
            if (d < 1e-15) break;
            p = interpolate(space, p, apply(space, twist, p), 0.5);
            double nd = displacement(space, twist, p);
            if (d - nd < 1e-14 * std::max(1.0, d)) {
                d = std::min(d, nd);
                break;
            }
            d = nd;
        }
        best = std::min(best, d);
    }
    return best;
}

double loop_bound_margin(const ModelSpace& space, const Isometry& twist,
                         int n_psi, int trials, double spread, Rng& rng) {
    double delta = translation_length(space, twist);
    double bound = delta * delta / (2.0 * M_PI);
    double worst = std::numeric_limits<double>::infinity();
    std::vector<Point> loop;
    for (int t = 0; t < trials; ++t) {
        loop.clear();
        for (int j = 0; j < n_psi; ++j)
            loop.push_back(random_point_compatible(space, twist, rng, spread));
        worst = std::min(worst, loop_energy(space, twist, loop) - bound);
    }
    return worst;
}

}  // namespace cylharm
