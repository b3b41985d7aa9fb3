#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "pcaf/discrete_form.hpp"
#include "pcaf/error.hpp"

using namespace pcaf;
using namespace pcaf::discrete;

namespace {

DiscreteForm path_form(int n, double w, double kill) {
    std::vector<Edge> edges;
    for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, w});
    return DiscreteForm::from_edges(n, edges, Eigen::VectorXd::Constant(n, kill), Eigen::VectorXd::Ones(n));
}

}  // namespace

TEST_SUITE("discrete") {
    TEST_CASE("construction rejects malformed forms") {
        Eigen::MatrixXd w(2, 2);
        w << 0, 1, 0.5, 0;
        CHECK_THROWS_AS(DiscreteForm::build(w, Eigen::VectorXd::Zero(2), Eigen::VectorXd::Ones(2)), Error);
        try {
            DiscreteForm::build(w, Eigen::VectorXd::Zero(2), Eigen::VectorXd::Ones(2));
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::AsymmetricConductance);
        }
        Eigen::MatrixXd s(2, 2);
        s << 0, 1, 1, 0;
        try {
            DiscreteForm::build(s, Eigen::VectorXd::Zero(2), Eigen::VectorXd(Eigen::Vector2d(1.0, 0.0)));
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::NonpositiveBaseMeasure);
        }
        try {
            DiscreteForm::build(s, Eigen::VectorXd(Eigen::Vector2d(-1.0, 0.0)), Eigen::VectorXd::Ones(2));
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::NegativeEntry);
        }
    }

    TEST_CASE("stiffness and rho agree with dense oracle") {
        std::mt19937_64 rng(3);
        for (int trial = 0; trial < 10; ++trial) {
            const int n = 5 + trial * 3;
            const auto form = random_form(rng, n, {0.3, 0.5, 0.5, 2.0});
            const Eigen::MatrixXd diff = form.stiffness_dense(0.7) - oracle::stiffness(form, 0.7);
            CHECK(diff.lpNorm<Eigen::Infinity>() < 1e-14);
            const auto mu = random_measure(rng, n), nu = random_measure(rng, n);
            for (double a : {0.1, 1.0, 10.0}) {
                const double r = rho(form, mu, nu, a), o = oracle::rho(form, mu.masses, nu.masses, a);
                CHECK(std::abs(r - o) <= 1e-11 * std::max(1.0, o));
            }
        }
    }

    TEST_CASE("two-vertex rho in closed form") {
        // w = 1, m = 1, no killing: A_1 = [[2, -1], [-1, 2]], G = [[2, 1], [1, 2]] / 3
        const auto form = path_form(2, 1.0, 0.0);
        const double r = rho(form, DiscreteMeasure{Eigen::Vector2d(1, 0)}, DiscreteMeasure{Eigen::Vector2d(0, 1)});
        CHECK(r == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-14));
    }

    TEST_CASE("capacity matches projected-gradient minimisation") {
        std::mt19937_64 rng(5);
        for (int trial = 0; trial < 6; ++trial) {
            const int n = 6 + 4 * trial;
            const auto form = random_form(rng, n, {0.3, 0.2, 0.5, 2.0});
            std::vector<int> set{0};
            if (trial % 2) set.push_back(n - 1);
            const double cap = capacity(form, set);
            const double pg = oracle::capacity_projected_gradient(form, set);
            CHECK(cap == doctest::Approx(pg).epsilon(1e-9));
            if (set.size() == 1) CHECK(cap * oracle::green(form, 1.0)(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
        }
        const auto form = path_form(3, 1.0, 0.0);
        const std::vector<int> none;
        CHECK_THROWS_AS(capacity(form, none), Error);
    }

    TEST_CASE("potential pairing and resolvent duality") {
        std::mt19937_64 rng(8);
        const auto form = random_form(rng, 30, {0.2, 0.3, 0.5, 2.0});
        const auto mu = random_measure(rng, 30);
        Eigen::VectorXd v = Eigen::VectorXd::Random(30), f = Eigen::VectorXd::Random(30).cwiseAbs();
        for (double a : {0.5, 1.0, 4.0}) {
            const auto u = potential(form, mu, a).values;
            CHECK(std::abs(form.energy(u, v, a) - v.dot(mu.masses)) < 1e-12);
            const Eigen::VectorXd direct = oracle::green(form, a) * form.base_measure().cwiseProduct(f);
            CHECK((resolvent_apply(form, f, a) - direct).lpNorm<Eigen::Infinity>() < 1e-12);
        }
        CHECK_THROWS_AS(potential(form, mu, 0.0), Error);
    }

    TEST_CASE("approximating sequence g_n") {
        std::mt19937_64 rng(12);
        const auto form = random_form(rng, 12, {0.4, 0.0, 0.5, 2.0});
        const auto mu = random_measure(rng, 12);
        const Eigen::VectorXd f = potential(form, mu, 1.0).values;
        for (int n : {1, 10, 100}) {
            const Eigen::VectorXd g = approx_g(form, f, n);
            CHECK(g.minCoeff() > -1e-12);
            // g_n = n (f - n R_{n+1} f) by the dense oracle
            const Eigen::VectorXd rn = oracle::green(form, n + 1.0) * form.base_measure().cwiseProduct(f);
            CHECK((g - n * (f - n * rn)).lpNorm<Eigen::Infinity>() < 1e-9 * n);
        }
    }

    TEST_CASE("revuz rate against spectral oracle") {
        std::mt19937_64 rng(21);
        const auto form = random_form(rng, 15, {0.3, 1.0, 0.5, 2.0});
        const auto mu = random_measure(rng, 15);
        Eigen::VectorXd f = Eigen::VectorXd::Random(15).cwiseAbs();
        const oracle::SpectralRevuz spectral(form, f, mu.masses);
        for (double t : {1.0, 0.1, 1e-3})
            CHECK(revuz_rate(form, f, mu, t) == doctest::Approx(spectral.rate(t)).epsilon(1e-10));
        CHECK(spectral.limit() == doctest::Approx(f.dot(mu.masses)).epsilon(1e-12));
        CHECK_THROWS_AS(revuz_rate(form, f, mu, 0.0), Error);
    }

    TEST_CASE("generator rows of a conservative form sum to zero") {
        std::mt19937_64 rng(1);
        const auto form = random_form(rng, 10);
        const Eigen::MatrixXd l = generator(form);
        CHECK((l * Eigen::VectorXd::Ones(10)).lpNorm<Eigen::Infinity>() < 1e-13);
    }

    TEST_CASE("json round trip") {
        std::mt19937_64 rng(4);
        const auto form = random_form(rng, 8, {0.5, 0.3, 0.5, 2.0});
        const auto back = form_from_json(nlohmann::json::parse(to_json(form)));
        CHECK((back.stiffness_dense(1.0) - form.stiffness_dense(1.0)).lpNorm<Eigen::Infinity>() == 0.0);
        const auto mu = random_measure(rng, 8);
        CHECK((measure_from_json(nlohmann::json::parse(to_json(mu))).masses - mu.masses).norm() == 0.0);
    }
}
