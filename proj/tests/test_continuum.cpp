#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "pcaf/continuum.hpp"
#include "pcaf/error.hpp"

using namespace pcaf;
using namespace pcaf::continuum;

TEST_SUITE("kernel") {
    TEST_CASE("closed forms match the heat-kernel Laplace transform") {
        std::mt19937_64 rng(17);
        std::uniform_real_distribution<double> radius(0.05, 4.0);
        for (Model m : {Model::BM1D, Model::BM3D}) {
            for (double alpha : {0.5, 1.0, 3.0}) {
                const ResolventKernel g(m, alpha);
                for (int k = 0; k < 5; ++k) {
                    const double r = radius(rng);
                    CHECK(std::abs(g.of_distance(r) - oracle::heat_laplace(dimension(m), alpha, r)) < 1e-6);
                }
            }
        }
    }

    TEST_CASE("box integrals against brute-force midpoint sums") {
        const ResolventKernel g1(Model::BM1D);
        const std::vector<double> x{0.3};
        const Box b{{-0.5}, {1.5}};
        double sum = 0.0;
        const int n = 200000;
        for (int i = 0; i < n; ++i) {
            const double y = -0.5 + (i + 0.5) * 2.0 / n;
            sum += g1.of_distance(std::abs(y - 0.3)) * 2.0 / n;
        }
        CHECK(g1.box_potential(x, b) == doctest::Approx(sum).epsilon(1e-8));

        // 3D: far-apart unit cubes behave like point masses at the centres up to O(size^2 / r^2)
        const ResolventKernel g3(Model::BM3D, 0.1);
        const Box a{{0, 0, 0}, {0.1, 0.1, 0.1}}, c{{2, 0, 0}, {2.1, 0.1, 0.1}};
        const double point = g3.of_distance(2.0) * 1e-6;
        CHECK(g3.box_pair(a, c) == doctest::Approx(point).epsilon(1e-3));
    }

    TEST_CASE("unsupported dimensions are rejected") {
        CHECK_THROWS_AS(model_for_dimension(2), Error);
        CHECK_THROWS_AS(model_from_string("BM2D"), Error);
        const ResolventKernel g(Model::BM1D);
        const std::vector<double> x{0.0, 0.0}, y{1.0};
        CHECK_THROWS_AS(g(x, y), Error);
        CHECK_THROWS_AS(ResolventKernel(Model::BM1D, 0.0), Error);
    }
}

TEST_SUITE("continuum") {
    TEST_CASE("rho of two BM1D atoms in closed form") {
        const ResolventKernel g(Model::BM1D);
        const double c = std::sqrt(2.0);
        const double exact = std::sqrt(2.0 * (1.0 - std::exp(-c)) / c);
        const double r = rho_cont(g, MeasureRep::point({0.0}), MeasureRep::point({1.0}));
        CHECK(r == doctest::Approx(exact).epsilon(1e-12));
        CHECK(r == doctest::Approx(1.0345987528).epsilon(1e-9));
    }

    TEST_CASE("rho of atoms agrees with a birth-death chain") {
        const auto chain = oracle::birth_death(10.0, 2000);
        Eigen::VectorXd mu = Eigen::VectorXd::Zero(2001), nu = mu;
        mu[1000] = 1.0;
        nu[1100] = 1.0;
        const double discrete = oracle::rho(chain, mu, nu);
        const double cont = rho_cont(ResolventKernel(Model::BM1D), MeasureRep::point({0.0}), MeasureRep::point({1.0}));
        CHECK(std::abs(discrete / cont - 1.0) < 0.02);
    }

    TEST_CASE("uniform density self-energy in closed form") {
        // I = int_0^1 int_0^1 e^{-c|x-y|} / c dx dy = (2/c^2)(1 - (1 - e^{-c}) / c)
        const ResolventKernel g(Model::BM1D);
        const double c = std::sqrt(2.0);
        const double exact = 2.0 / (c * c) * (1.0 - (1.0 - std::exp(-c)) / c);
        const auto u = MeasureRep::uniform(Box{{0.0}, {1.0}}, 64);
        CHECK(mutual_energy(g, u, u) == doctest::Approx(exact).epsilon(1e-10));
    }

    TEST_CASE("metric axioms on random mixtures") {
        const ResolventKernel g(Model::BM1D);
        std::mt19937_64 rng(9);
        std::uniform_real_distribution<double> pos(-2.0, 2.0), mass(0.1, 1.0);
        std::vector<MeasureRep> ms;
        for (int k = 0; k < 6; ++k) {
            MeasureRep m = MeasureRep::uniform(Box{{-3.0}, {3.0}}, 30, mass(rng));
            m.atoms.push_back({{pos(rng)}, mass(rng)});
            ms.push_back(m);
        }
        for (const auto& a : ms)
            for (const auto& b : ms) {
                CHECK(std::abs(rho_cont(g, a, b) - rho_cont(g, b, a)) < 1e-12);
                for (const auto& c : ms) CHECK(rho_cont(g, a, c) <= rho_cont(g, a, b) + rho_cont(g, b, c) + 1e-10);
            }
        CHECK(rho_cont(g, ms[0], ms[0]) < 1e-6);
    }

    TEST_CASE("3D atoms have infinite energy") {
        const ResolventKernel g(Model::BM3D);
        const auto p = MeasureRep::point({0.0, 0.0, 0.0});
        CHECK(std::isinf(mutual_energy(g, p, p)));
        try {
            rho_cont(g, p, MeasureRep::point({1.0, 0.0, 0.0}));
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::NotFiniteEnergy);
        }
        const auto cls = classify_measure(g, p, {{0.5, 0.0, 0.0}});
        CHECK_FALSE(cls.smooth);
        CHECK(std::isinf(cls.potential_sup));
        const auto box = MeasureRep::uniform(Box{{0, 0, 0}, {1, 1, 1}}, 6);
        const auto ok = classify_measure(g, box, {{0.5, 0.5, 0.5}});
        CHECK(ok.in_S0);
        CHECK(ok.in_S00);
        CHECK(std::isfinite(ok.energy_integral));
    }

    TEST_CASE("potential of a BM1D atom") {
        // alpha = 2: g(r) = e^{-2 r} / 2
        const ResolventKernel g(Model::BM1D, 2.0);
        const std::vector<double> x{0.5};
        CHECK(potential_at(g, MeasureRep::point({0.0}, 3.0), x) == doctest::Approx(1.5 * std::exp(-1.0)).epsilon(1e-14));
    }

    TEST_CASE("hat integrals and vague gap") {
        const HatFunction h{{0.0}, 1.0};
        CHECK(h.integrate(MeasureRep::uniform(Box{{-1.0}, {1.0}}, 40, 2.0)) == doctest::Approx(1.0).epsilon(1e-12));
        const auto narrow = MeasureRep::uniform(Box{{-1e-3}, {1e-3}}, 4);
        const auto hats = hat_family(Box{{-2.0}, {2.0}}, 33, 0.25);
        CHECK(vague_gap(narrow, MeasureRep::point({0.0}), hats) < 1e-2);
        CHECK(vague_gap(MeasureRep::point({0.0}), MeasureRep::point({1.0})) > 0.5);
    }

    TEST_CASE("measure json round trip and validation") {
        auto m = MeasureRep::uniform(Box{{0.0}, {2.0}}, 5, 1.5);
        m.atoms.push_back({{0.25}, 0.5});
        const auto back = measure_rep_from_json(to_json(m));
        CHECK(to_json(back) == to_json(m));
        auto bad = m;
        bad.atoms[0].mass = -1.0;
        CHECK_THROWS_AS(bad.checked(), Error);
    }

    TEST_CASE("restriction keeps the overlap fraction") {
        const auto m = MeasureRep::uniform(Box{{0.0}, {1.0}}, 4);
        CHECK(m.restricted(Box{{0.0}, {0.6}}).total_mass() == doctest::Approx(0.6).epsilon(1e-14));
    }
}
