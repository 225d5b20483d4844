#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "cylharm/energy.hpp"
#include "cylharm/random.hpp"

using namespace cylharm;

namespace {

// ---------------------------------------------------------------- oracles

// straightforward re-summation of the discrete energy, plain loops and
// naive accumulation, written against the documented edge weights only
double energy_oracle(const EquivariantGridMap& m, int ia, int ib) {
    const auto& g = m.grid;
    double acc = 0.0;
    for (int i = ia; i < ib; ++i)
        for (int j = 0; j < g.n_psi; ++j) {
            double d = distance(m.space, m.at(i, j), m.at(i + 1, j));
            acc += (d / g.h_t) * (d / g.h_t) * g.h_t * g.h_psi;
        }
    for (int i = ia; i <= ib; ++i) {
        double w = (i == ia || i == ib) ? 0.5 : 1.0;
        for (int j = 0; j < g.n_psi; ++j) {
            Point nxt = (j + 1 < g.n_psi)
                            ? m.at(i, j + 1)
                            : apply(m.space, m.twist, m.at(i, 0));
            double d = distance(m.space, m.at(i, j), nxt);
            acc += w * (d / g.h_psi) * (d / g.h_psi) * g.h_t * g.h_psi;
        }
    }
    return acc;
}

double loop_energy_oracle(const EquivariantGridMap& m, int i) {
    const auto& g = m.grid;
    double acc = 0.0;
    for (int j = 0; j < g.n_psi; ++j) {
        Point nxt = (j + 1 < g.n_psi) ? m.at(i, j + 1)
                                      : apply(m.space, m.twist, m.at(i, 0));
        double d = distance(m.space, m.at(i, j), nxt);
        acc += d * d / g.h_psi;
    }
    return acc;
}

// ---------------------------------------------------------------- fixtures

std::mt19937_64 test_rng(uint64_t salt) { return std::mt19937_64(6400 + salt); }

struct SpaceCase {
    ModelSpace space;
    Isometry twist;
    Point base;
};

std::vector<SpaceCase> space_cases() {
    std::vector<SpaceCase> out;
    out.push_back({make_euclidean(2), euclidean_translation({1.5, -0.5}),
                   euc_point({0.0, 0.0})});
    out.push_back({make_hyperbolic(), hyperbolic_isometry(2.0, 0.0, 0.0, 0.5),
                   hyp_point(0.0, 1.0)});
    TreeShape shape = parse_tree(
        "vertices 4\nedge 0 1 1.0\nedge 1 2 2.0\nedge 1 3 0.5\nline 0 1\n");
    out.push_back({make_tree(shape), tree_translation(0.8),
                   Point{tree_point_at_line_coordinate(shape, 0.5)}});
    out.push_back({make_product(make_euclidean(1), make_hyperbolic()),
                   product_isometry(euclidean_translation({2.0}),
                                    hyperbolic_isometry(2.0, 0.0, 0.0, 0.5)),
                   product_point(euc_point({0.0}), hyp_point(0.0, 1.0))});
    return out;
}

EquivariantGridMap random_map(const SpaceCase& sc, const CylinderGrid& g,
                              uint64_t seed, double radius) {
    EquivariantGridMap m = make_map(sc.space, sc.twist, g, sc.base);
    Rng rng(seed);
    for (auto& p : m.values)
        p = sample_near_compatible(m.space, m.twist, p, radius, rng);
    return m;
}

}  // namespace

TEST_CASE("discrete energy matches a naive re-summation") {
    CylinderGrid g = make_grid(2.0, 6, 5);
    uint64_t seed = 100;
    for (const auto& sc : space_cases()) {
        EquivariantGridMap m = random_map(sc, g, seed++, 0.6);
        double whole = discrete_energy(m, 0.0, g.T);
        CHECK(whole ==
              doctest::Approx(energy_oracle(m, 0, g.n_t)).epsilon(1e-12));
        double part = discrete_energy(m, t_of(g, 1), t_of(g, 4));
        CHECK(part == doctest::Approx(energy_oracle(m, 1, 4)).epsilon(1e-12));
    }
}

TEST_CASE("energy is exactly additive over adjacent sub annuli") {
    CylinderGrid g = make_grid(3.0, 9, 6);
    uint64_t seed = 200;
    for (const auto& sc : space_cases()) {
        EquivariantGridMap m = random_map(sc, g, seed++, 0.8);
        double whole = discrete_energy(m, 0.0, g.T);
        for (int k = 1; k < g.n_t; ++k) {
            double split = discrete_energy(m, 0.0, t_of(g, k)) +
                           discrete_energy(m, t_of(g, k), g.T);
            CHECK(split == doctest::Approx(whole).epsilon(1e-13));
        }
    }
}

TEST_CASE("loop energy agrees with its naive form and the free overload") {
    CylinderGrid g = make_grid(1.0, 3, 7);
    uint64_t seed = 300;
    for (const auto& sc : space_cases()) {
        EquivariantGridMap m = random_map(sc, g, seed++, 0.5);
        for (int i = 0; i <= g.n_t; ++i) {
            double le = loop_energy(m, i);
            CHECK(le ==
                  doctest::Approx(loop_energy_oracle(m, i)).epsilon(1e-13));
            std::vector<Point> row;
            for (int j = 0; j < g.n_psi; ++j) row.push_back(m.at(i, j));
            CHECK(loop_energy(m.space, m.twist, row) ==
                  doctest::Approx(le).epsilon(1e-13));
        }
    }
}

TEST_CASE("twisted loop energy is bounded below by delta squared over 2 pi") {
    // chords of an equivariant loop concatenate from p to twist p, so by
    // Cauchy-Schwarz the discrete loop energy is at least delta^2 / (2 pi);
    // this needs no discretization allowance
    uint64_t seed = 400;
    for (const auto& sc : space_cases()) {
        double delta = translation_length(sc.space, sc.twist);
        double bound = delta * delta / (2.0 * M_PI);
        Rng rng(seed++);
        for (int rep = 0; rep < 50; ++rep) {
            int n = 3 + static_cast<int>(rng() % 12);
            std::vector<Point> loop;
            Point p = random_point_compatible(sc.space, sc.twist, rng, 1.5);
            for (int j = 0; j < n; ++j) {
                loop.push_back(p);
                p = sample_near_compatible(sc.space, sc.twist, p, 0.7, rng);
            }
            double le = loop_energy(sc.space, sc.twist, loop);
            CHECK(le >= bound - 1e-12 * (1.0 + le + bound));
        }
    }
}

TEST_CASE("helical flat map attains the loop bound and linear growth exactly") {
    // u(t, psi) = psi delta / (2 pi) in Euclidean(1) is equivariant for the
    // translation by delta; every angular chord has the same length, so each
    // loop attains delta^2/(2 pi) and E[0, t] grows exactly linearly
    double delta = 2.0 * M_PI;
    ModelSpace s = make_euclidean(1);
    Isometry tw = euclidean_translation({delta});
    CylinderGrid g = make_grid(5.0, 10, 8);
    EquivariantGridMap m = make_map(s, tw, g, euc_point({0.0}));
    for (int i = 0; i <= g.n_t; ++i)
        for (int j = 0; j < g.n_psi; ++j)
            m.at(i, j) = euc_point({psi_of(g, j) * delta / (2.0 * M_PI)});
    double erho = e_rho(s, tw);
    CHECK(erho == doctest::Approx(delta * delta / (2.0 * M_PI)).epsilon(1e-14));
    for (int i = 0; i <= g.n_t; ++i)
        CHECK(loop_energy(m, i) == doctest::Approx(erho).epsilon(1e-13));
    for (int i = 1; i <= g.n_t; ++i) {
        double t = t_of(g, i);
        CHECK(discrete_energy(m, 0.0, t) ==
              doctest::Approx(erho * t).epsilon(1e-13));
        CHECK(modified_energy(m, erho, disk_radius(g, i)) ==
              doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("modified energy subtracts the linear term at the stated radius") {
    CylinderGrid g = make_grid(2.5, 5, 6);
    uint64_t seed = 500;
    for (const auto& sc : space_cases()) {
        EquivariantGridMap m = random_map(sc, g, seed++, 0.4);
        double erho = e_rho(sc.space, sc.twist);
        for (int i = 1; i <= g.n_t; ++i) {
            double t = t_of(g, i);
            double expect = discrete_energy(m, 0.0, t) - erho * t;
            CHECK(modified_energy(m, erho, std::exp(-t)) ==
                  doctest::Approx(expect).epsilon(1e-12));
        }
    }
}

TEST_CASE("growth delta is the slice minimum of the distance to the base") {
    CylinderGrid g = make_grid(1.5, 4, 5);
    uint64_t seed = 600;
    for (const auto& sc : space_cases()) {
        EquivariantGridMap m = random_map(sc, g, seed++, 0.9);
        std::vector<double> d = growth_delta(m, sc.base);
        REQUIRE(static_cast<int>(d.size()) == g.n_t + 1);
        for (int i = 0; i <= g.n_t; ++i) {
            double want = std::numeric_limits<double>::infinity();
            for (int j = 0; j < g.n_psi; ++j)
                want = std::min(want, distance(m.space, m.at(i, j), sc.base));
            CHECK(d[i] == doctest::Approx(want).epsilon(1e-14));
        }
    }
}

TEST_CASE("energy report rows are consistent with the primitive quantities") {
    CylinderGrid g = make_grid(3.0, 6, 5);
    SpaceCase sc = space_cases()[1];
    EquivariantGridMap m = random_map(sc, g, 700, 0.5);
    double erho = e_rho(sc.space, sc.twist);
    EnergyReport rep = energy_report(m, erho);
    REQUIRE(static_cast<int>(rep.t.size()) == g.n_t + 1);
    CHECK(rep.e_rho == erho);
    for (int i = 0; i <= g.n_t; ++i) {
        CHECK(rep.t[i] == doctest::Approx(t_of(g, i)).epsilon(1e-15));
        CHECK(rep.r[i] == doctest::Approx(std::exp(-rep.t[i])).epsilon(1e-14));
        CHECK(rep.slice_theta[i] ==
              doctest::Approx(loop_energy(m, i)).epsilon(1e-13));
        CHECK(rep.F[i] ==
              doctest::Approx(rep.slice_theta[i] - erho).epsilon(1e-13));
        CHECK(rep.G[i] == rep.slice_t[i]);
        CHECK(rep.modified[i] ==
              doctest::Approx(rep.cumulative[i] - erho * rep.t[i])
                  .epsilon(1e-12));
        if (i > 0)
            CHECK(rep.cumulative[i] ==
                  doctest::Approx(discrete_energy(m, 0.0, rep.t[i]))
                      .epsilon(1e-12));
    }
    CHECK(rep.cumulative[0] == 0.0);
    CHECK(rep.slice_t[g.n_t] == 0.0);
    // both slice columns are densities per unit t-length: the cumulative
    // increment over a layer is h_t times the axial density plus trapezoid
    // shares of the two angular densities
    for (int i = 0; i + 1 <= g.n_t; ++i) {
        double inc = rep.cumulative[i + 1] - rep.cumulative[i];
        double angular =
            0.5 * g.h_t * (rep.slice_theta[i] + rep.slice_theta[i + 1]);
        CHECK(rep.slice_t[i] * g.h_t ==
              doctest::Approx(inc - angular).epsilon(1e-11));
    }

    std::ostringstream out;
    write_energy_csv(out, rep);
    std::istringstream in(out.str());
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "t,r,slice_theta,slice_t,F,G,cumulative,modified");
    int rows = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == g.n_t + 1);
}

TEST_CASE("discretization allowance follows the documented formula") {
    CylinderGrid g = make_grid(8.0, 40, 24);
    double expect =
        kTolDiscC * (1.0 / (24.0 * 24.0) + 1.0 / (40.0 * 40.0)) * 8.0 * 3.0;
    CHECK(tol_disc(g, 8.0, 3.0) == doctest::Approx(expect).epsilon(1e-14));
    CHECK(tol_disc(g, 4.0, 3.0) ==
          doctest::Approx(0.5 * expect).epsilon(1e-14));
    CHECK(kTolDiscC > 0.0);
}

TEST_CASE("kahan summation keeps long totals order independent") {
    std::vector<double> xs;
    auto rng = test_rng(1);
    std::uniform_real_distribution<double> mag(-1.0, 1.0);
    for (int k = 0; k < 200000; ++k)
        xs.push_back(std::ldexp(mag(rng), static_cast<int>(rng() % 30)));
    long double exact = 0.0L;
    for (double x : xs) exact += static_cast<long double>(x);
    KahanSum fwd, rev;
    for (size_t k = 0; k < xs.size(); ++k) fwd.add(xs[k]);
    for (size_t k = xs.size(); k-- > 0;) rev.add(xs[k]);
    double scale = std::fabs(static_cast<double>(exact)) + 1.0;
    CHECK(std::fabs(fwd.value() - static_cast<double>(exact)) <=
          1e-12 * scale);
    CHECK(std::fabs(fwd.value() - rev.value()) <= 1e-12 * scale);
}

TEST_CASE("energy windows must sit on grid lines") {
    CylinderGrid g = make_grid(2.0, 4, 5);
    SpaceCase sc = space_cases()[0];
    EquivariantGridMap m = random_map(sc, g, 800, 0.3);
    CHECK_THROWS_AS(discrete_energy(m, 0.0, 1.3), std::domain_error);
    CHECK_THROWS_AS(discrete_energy(m, 0.25, 1.0), std::domain_error);
    CHECK_THROWS_AS(discrete_energy(m, 1.5, 0.5), std::domain_error);
}
