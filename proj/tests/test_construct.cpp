#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "cylharm/construct.hpp"
#include "cylharm/energy.hpp"
#include "cylharm/random.hpp"

using namespace cylharm;

namespace {

// ---------------------------------------------------------------- fixtures

struct SpaceCase {
    std::string label;
    ModelSpace space;
    Isometry twist;
};

std::vector<SpaceCase> semisimple_cases() {
    std::vector<SpaceCase> out;
    out.push_back({"euclidean translation", make_euclidean(2),
                   euclidean_translation({1.5, -0.5})});
    out.push_back({"hyperbolic axial", make_hyperbolic(),
                   hyperbolic_isometry(2.0, 0.0, 0.0, 0.5)});
    TreeShape shape = parse_tree(
        "vertices 4\nedge 0 1 1.0\nedge 1 2 2.0\nedge 1 3 0.5\nline 0 1\n");
    out.push_back({"tree translation", make_tree(shape), tree_translation(0.8)});
    out.push_back({"product mixed",
                   make_product(make_euclidean(1), make_hyperbolic()),
                   product_isometry(euclidean_translation({2.0}),
                                    hyperbolic_isometry(2.0, 0.0, 0.0, 0.5))});
    return out;
}

SpaceCase parabolic_case() {
    return {"hyperbolic parabolic", make_hyperbolic(),
            hyperbolic_isometry(1.0, 1.0, 0.0, 1.0)};
}

std::vector<Point> random_loop(const ModelSpace& s, const Isometry& tw, int n,
                               Rng& rng, double radius) {
    std::vector<Point> loop;
    Point p = random_point_compatible(s, tw, rng, 1.0);
    for (int j = 0; j < n; ++j) {
        loop.push_back(p);
        p = sample_near_compatible(s, tw, p, radius, rng);
    }
    return loop;
}

}  // namespace

TEST_CASE("gamma family evaluates the twisted geodesic through its center") {
    Rng rng(4600);
    std::uniform_real_distribution<double> us(0.0, 5.0);
    std::uniform_real_distribution<double> upsi(0.0, 2.0 * M_PI);
    auto cases = semisimple_cases();
    cases.push_back(parabolic_case());
    for (const auto& sc : cases) {
        GammaFamily fam = make_gamma_family(sc.space, sc.twist);
        for (int rep = 0; rep < 25; ++rep) {
            double s = us(rng);
            double psi = upsi(rng);
            Point c = fam.center(s);
            // oracle: geodesic interpolation toward the twisted center
            Point want = interpolate(sc.space, c, apply(sc.space, sc.twist, c),
                                     psi / (2.0 * M_PI));
            CHECK(distance(sc.space, fam.eval(s, psi), want) <= 1e-12);
        }
        CHECK(distance(sc.space, fam.eval(1.0, 0.0), fam.center(1.0)) == 0.0);
    }
}

TEST_CASE("semisimple centers are constant and realize the translation length") {
    for (const auto& sc : semisimple_cases()) {
        GammaFamily fam = make_gamma_family(sc.space, sc.twist);
        CHECK(fam.profile.semisimple);
        double delta = translation_length(sc.space, sc.twist);
        for (double s : {0.0, 0.7, 3.0, 12.0}) {
            CHECK(distance(sc.space, fam.center(s), fam.center(0.0)) == 0.0);
            CHECK(displacement(sc.space, sc.twist, fam.center(s)) ==
                  doctest::Approx(delta).epsilon(1e-12));
        }
    }
}

TEST_CASE("parabolic centers march along a ray with decaying displacement") {
    SpaceCase sc = parabolic_case();
    GammaFamily fam = make_gamma_family(sc.space, sc.twist);
    CHECK_FALSE(fam.profile.semisimple);
    CHECK(translation_length(sc.space, sc.twist) == 0.0);
    double prev = displacement(sc.space, sc.twist, fam.center(0.0));
    for (double s : {1.0, 2.0, 4.0, 8.0, 16.0}) {
        // the ray is unit speed away from the base point
        CHECK(distance(sc.space, fam.center(0.0), fam.center(s)) ==
              doctest::Approx(s).epsilon(1e-10));
        double disp = displacement(sc.space, sc.twist, fam.center(s));
        CHECK(disp < prev);
        prev = disp;
    }
    CHECK(prev < 1e-3);
}

TEST_CASE("sampled gamma loops attain the sharp loop energy when semisimple") {
    // constant speed chords all have length delta / n, so the discrete loop
    // energy equals delta^2 / (2 pi) exactly, the lower bound
    for (const auto& sc : semisimple_cases()) {
        GammaFamily fam = make_gamma_family(sc.space, sc.twist);
        double erho = e_rho(sc.space, sc.twist);
        for (int n : {4, 9, 24}) {
            std::vector<Point> loop = sample_gamma(fam, 2.0, n);
            REQUIRE(static_cast<int>(loop.size()) == n);
            for (int j = 0; j < n; ++j)
                CHECK(distance(sc.space, loop[j],
                               fam.eval(2.0, 2.0 * M_PI * j / n)) <= 1e-13);
            CHECK(loop_energy(sc.space, sc.twist, loop) ==
                  doctest::Approx(erho).epsilon(1e-12));
        }
    }
}

TEST_CASE("parabolic gamma loop energies decay to the zero energy bound") {
    SpaceCase sc = parabolic_case();
    GammaFamily fam = make_gamma_family(sc.space, sc.twist);
    CHECK(e_rho(sc.space, sc.twist) == 0.0);
    double prev = loop_energy(sc.space, sc.twist, sample_gamma(fam, 0.0, 16));
    CHECK(prev > 0.0);
    for (double s : {1.0, 3.0, 6.0, 10.0}) {
        double le = loop_energy(sc.space, sc.twist, sample_gamma(fam, s, 16));
        CHECK(le < prev);
        prev = le;
    }
    CHECK(prev <= 1e-6);
}

TEST_CASE("prototype map needs room past the collar") {
    SpaceCase sc = semisimple_cases()[1];
    CHECK_THROWS_AS(
        prototype_map(sc.space, sc.twist, make_grid(0.5, 4, 6), 1.0 / 3.0),
        std::domain_error);
    CHECK_THROWS_AS(
        prototype_map(sc.space, sc.twist, make_grid(std::log(2.0), 4, 6),
                      1.0 / 3.0),
        std::domain_error);
}

TEST_CASE("prototype map matches its stated slices") {
    double p = 1.0 / 3.0;
    CylinderGrid g = make_grid(6.0, 24, 8);
    auto cases = semisimple_cases();
    cases.push_back(parabolic_case());
    for (const auto& sc : cases) {
        GammaFamily fam = make_gamma_family(sc.space, sc.twist);
        EquivariantGridMap m = prototype_map(sc.space, sc.twist, g, p);
        check_map(m);
        double lg2 = std::log(2.0);
        for (int i = 0; i <= g.n_t; ++i) {
            double t = t_of(g, i);
            for (int j = 0; j < g.n_psi; ++j) {
                double psi = psi_of(g, j);
                // default boundary is gamma_0, so the collar is constant
                Point want = (t >= lg2)
                                 ? fam.eval(std::pow(t - lg2, p), psi)
                                 : fam.eval(0.0, psi);
                CHECK(distance(sc.space, m.at(i, j), want) <= 1e-12);
            }
        }
    }
}

TEST_CASE("prototype map honors a custom boundary loop across the collar") {
    SpaceCase sc = semisimple_cases()[0];
    CylinderGrid g = make_grid(4.0, 16, 6);
    Rng rng(4700);
    std::vector<Point> boundary =
        random_loop(sc.space, sc.twist, g.n_psi, rng, 0.4);
    EquivariantGridMap m =
        prototype_map(sc.space, sc.twist, g, boundary, 1.0 / 3.0);
    check_map(m);
    GammaFamily fam = make_gamma_family(sc.space, sc.twist);
    double lg2 = std::log(2.0);
    for (int j = 0; j < g.n_psi; ++j)
        CHECK(distance(sc.space, m.at(0, j), boundary[j]) == 0.0);
    for (int i = 0; i <= g.n_t; ++i) {
        double t = t_of(g, i);
        if (t > lg2) break;
        for (int j = 0; j < g.n_psi; ++j) {
            Point want = interpolate(sc.space, boundary[j],
                                     fam.eval(0.0, psi_of(g, j)), t / lg2);
            CHECK(distance(sc.space, m.at(i, j), want) <= 1e-12);
        }
    }
}

TEST_CASE("prototype maps keep the modified energy bounded as depth grows") {
    auto cases = semisimple_cases();
    cases.push_back(parabolic_case());
    for (const auto& sc : cases) {
        double erho = e_rho(sc.space, sc.twist);
        double m4, m10;
        {
            CylinderGrid g = make_grid(4.0, 32, 12);
            EquivariantGridMap m = prototype_map(sc.space, sc.twist, g);
            m4 = discrete_energy(m, 0.0, g.T) - erho * g.T;
        }
        {
            CylinderGrid g = make_grid(10.0, 80, 12);
            EquivariantGridMap m = prototype_map(sc.space, sc.twist, g);
            m10 = discrete_energy(m, 0.0, g.T) - erho * g.T;
        }
        // the tail past t = 4 adds only the decaying ray travel, not another
        // 6 units of linear growth
        CHECK(m10 <= m4 + 1.5);
        CHECK(m10 >= -tol_disc(make_grid(10.0, 80, 12), 10.0,
                               1.0 + erho + m10 * m10));
    }
}

TEST_CASE("bridge maps satisfy the convexity energy estimate") {
    // angular slices interpolate convexly and the radial chords are exactly
    // d_j / n_t, so E(bridge) <= L (E0 + E1) / 2 + (1/L) sum d_j^2 h_psi
    Rng rng(4800);
    std::uniform_real_distribution<double> ul(0.5, 3.0);
    for (const auto& sc : semisimple_cases()) {
        for (int rep = 0; rep < 25; ++rep) {
            int n = 4 + static_cast<int>(rng() % 8);
            std::vector<Point> loop0 =
                random_loop(sc.space, sc.twist, n, rng, 0.6);
            std::vector<Point> loop1 =
                random_loop(sc.space, sc.twist, n, rng, 0.6);
            double L = ul(rng);
            int n_t = 3 + static_cast<int>(rng() % 6);
            EquivariantGridMap b =
                bridge_map(sc.space, sc.twist, loop0, loop1, L, n_t);
            check_map(b);
            double h_psi = 2.0 * M_PI / n;
            for (int j = 0; j < n; ++j) {
                CHECK(distance(sc.space, b.at(0, j), loop0[j]) == 0.0);
                CHECK(distance(sc.space, b.at(n_t, j), loop1[j]) <= 1e-13);
            }
            double cross = 0.0;
            for (int j = 0; j < n; ++j) {
                double d = distance(sc.space, loop0[j], loop1[j]);
                cross += d * d * h_psi;
            }
            double e0 = loop_energy(sc.space, sc.twist, loop0);
            double e1 = loop_energy(sc.space, sc.twist, loop1);
            double bound = L * (e0 + e1) / 2.0 + cross / L;
            double eb = discrete_energy(b, 0.0, L);
            CHECK(eb <= bound + 1e-10 * (1.0 + bound));
        }
    }
}

TEST_CASE("map interpolation is nodewise geodesic and convex in energy") {
    CylinderGrid g = make_grid(2.0, 5, 6);
    Rng rng(4900);
    std::uniform_real_distribution<double> us(0.0, 1.0);
    for (const auto& sc : semisimple_cases()) {
        EquivariantGridMap u0 = make_map(sc.space, sc.twist, g,
                                         random_point_compatible(
                                             sc.space, sc.twist, rng, 1.0));
        EquivariantGridMap u1 = u0;
        for (auto& p : u0.values)
            p = sample_near_compatible(sc.space, sc.twist, p, 0.5, rng);
        for (auto& p : u1.values)
            p = sample_near_compatible(sc.space, sc.twist, p, 0.5, rng);
        double e0 = discrete_energy(u0, 0.0, g.T);
        double e1 = discrete_energy(u1, 0.0, g.T);
        for (int rep = 0; rep < 8; ++rep) {
            double s = us(rng);
            EquivariantGridMap mid = interpolate_maps(u0, u1, s);
            check_map(mid);
            for (int i = 0; i <= g.n_t; ++i)
                for (int j = 0; j < g.n_psi; ++j) {
                    Point want =
                        interpolate(sc.space, u0.at(i, j), u1.at(i, j), s);
                    CHECK(distance(sc.space, mid.at(i, j), want) <= 1e-13);
                }
            double em = discrete_energy(mid, 0.0, g.T);
            double bound = (1.0 - s) * e0 + s * e1;
            CHECK(em <= bound + 1e-10 * (1.0 + bound));
        }
        EquivariantGridMap at0 = interpolate_maps(u0, u1, 0.0);
        EquivariantGridMap at1 = interpolate_maps(u0, u1, 1.0);
        for (size_t k = 0; k < u0.values.size(); ++k) {
            CHECK(distance(sc.space, at0.values[k], u0.values[k]) == 0.0);
            CHECK(distance(sc.space, at1.values[k], u1.values[k]) <= 1e-13);
        }
    }
}
