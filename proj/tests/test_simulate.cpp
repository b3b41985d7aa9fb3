#include <cmath>
#include <sstream>

#include "doctest.h"
#include "pcaf/error.hpp"
#include "pcaf/simulate.hpp"

using namespace pcaf;
using namespace pcaf::sim;

TEST_SUITE("simulate") {
    TEST_CASE("paths are deterministic in the seed") {
        const auto a = sample_path(ProcessModel::bm(1), 1.0, 1e-3, 42);
        const auto b = sample_path(ProcessModel::bm(1), 1.0, 1e-3, 42);
        const auto c = sample_path(ProcessModel::bm(1), 1.0, 1e-3, 43);
        CHECK(a.states == b.states);
        CHECK(a.states != c.states);
        CHECK(a.size() == 1001);
        CHECK(a.times.back() == 1.0);
        CHECK(a.states.front() == 0.0);
        CHECK(path_seed(7, 0) != path_seed(7, 1));
        CHECK(path_seed(7, 3) == path_seed(7, 3));
    }

    TEST_CASE("last step is clipped to the horizon") {
        const auto p = sample_path(ProcessModel::bm(3), 0.25, 0.1, 1);
        CHECK(p.times.size() == 4);
        CHECK(p.times.back() == 0.25);
        CHECK(p.states.size() == 12);
    }

    TEST_CASE("Brownian increments have variance dt") {
        const auto p = sample_path(ProcessModel::bm(1), 100.0, 1e-2, 5);
        double s2 = 0.0;
        for (std::size_t k = 1; k < p.size(); ++k) s2 += std::pow(p.states[k] - p.states[k - 1], 2);
        const double var = s2 / (p.size() - 1);
        // relative sd of the estimate is sqrt(2 / 1e4) ~ 1.4%
        CHECK(std::abs(var / 1e-2 - 1.0) < 0.06);
    }

    TEST_CASE("binary dump round trip") {
        const auto p = sample_path(ProcessModel::diffusion(Coefficient{"affine", {0.0, -1.0}}, Coefficient::constant(0.5)),
                                   0.5, 1e-2, 9, {0.3});
        std::stringstream buf;
        write_path(buf, p);
        const auto q = read_path(buf);
        CHECK(q.times == p.times);
        CHECK(q.states == p.states);
        CHECK(q.seed == p.seed);
        CHECK(q.model.name() == p.model.name());
        std::stringstream junk("not a path");
        CHECK_THROWS_AS(read_path(junk), Error);
    }

    TEST_CASE("constant integrands are integrated exactly") {
        const auto p = sample_path(ProcessModel::bm(1), 1.0, 1e-3, 3);
        const auto a = occupation_pcaf(p, ScalarField::constant(2.0));
        CHECK(std::abs(a.values.back() - 2.0) < 1e-12);
        const auto w = occupation_pcaf(p, ScalarField::constant(1.0), 1e6, Weight::Exponential);
        CHECK(std::abs(w.values.back() - (1.0 - std::exp(-1.0))) < 1e-12);
    }

    TEST_CASE("occupation functionals are additive along the path") {
        const auto p = sample_path(ProcessModel::bm(1), 1.0, 1e-3, 13);
        const auto f = ScalarField::power(1.0, 0.25, 1.0);
        const auto whole = occupation_pcaf(p, f);
        const std::size_t k0 = 300, k1 = p.size() - 1;
        const auto tail = occupation_pcaf_window(p, f, k0, k1);
        CHECK(tail.values.front() == 0.0);
        CHECK(whole.values[k1] == doctest::Approx(whole.values[k0] + tail.values.back()).epsilon(1e-12));
        for (std::size_t k = 1; k < whole.values.size(); ++k) CHECK(whole.values[k] >= whole.values[k - 1]);
    }

    TEST_CASE("local time binning conserves time") {
        const auto p = sample_path(ProcessModel::bm(1), 1.0, 1e-4, 11);
        const auto field = local_time_field(p, BinSpec{0.02, -1.0, 1.0, true});
        const auto prof = field.profile(p.size() - 1);
        double total = 0.0;
        for (double v : prof) total += v * field.width();
        CHECK(std::abs(total - 1.0) < 1e-12);
        CHECK(field.bin_of(0.0) == 0);
        CHECK(field.bin_lo(0) == doctest::Approx(-0.01));
        // the measure pairing against Lebesgue mass on the window recovers occupation time
        std::vector<double> masses(field.bin_count(), field.width());
        CHECK(std::abs(measure_pcaf(field, masses).values.back() - 1.0) < 1e-12);
    }

    TEST_CASE("measures outside the bin window are rejected") {
        const auto p = sample_path(ProcessModel::bm(1), 0.01, 1e-4, 1);
        const auto field = local_time_field(p, BinSpec{0.02, -0.1, 0.1, false});
        try {
            bin_masses(field, MeasureRep::point({5.0}));
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::SupportOutsideBins);
        }
    }

    TEST_CASE("error codes") {
        try {
            sample_path(ProcessModel::bm(1), 1.0, 0.0, 1);
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::NonpositiveStep);
        }
        try {
            Coefficient{"polynomial", {0.0, 0.0, 1.0}}.checked();
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::NonLipschitzCoefficient);
        }
        const auto p3 = sample_path(ProcessModel::bm(3), 0.01, 1e-3, 1);
        try {
            local_time_field(p3, BinSpec{});
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::NotOneDimensional);
        }
        const auto a = sample_path(ProcessModel::bm(1), 0.01, 1e-3, 1);
        const auto b = sample_path(ProcessModel::bm(1), 0.01, 2e-3, 1);
        try {
            sup_distance(occupation_pcaf(a, ScalarField::constant(1.0)), occupation_pcaf(b, ScalarField::constant(1.0)),
                         0.01);
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::GridMismatch);
        }
    }

    TEST_CASE("pairwise sum is order fixed") {
        std::vector<double> xs;
        for (int i = 0; i < 1000; ++i) xs.push_back(1.0 / (i + 1.0));
        CHECK(pairwise_sum(xs) == doctest::Approx(7.485470860550345).epsilon(1e-14));
    }

    TEST_CASE("martingale residual vanishes for constants") {
        McConfig cfg;
        cfg.paths = 50;
        cfg.dt = 1e-3;
        const auto rep = martingale_residual(cfg, ScalarField::constant(1.0));
        CHECK(rep.pass);
        for (const auto& c : rep.checkpoints) CHECK(c.max_abs <= 1e-12);
    }

    TEST_CASE("resolvent of a hat in closed form at its peak") {
        // R_1 f(0) = int g(0, y) f(y) dy with g = e^{-sqrt2 |y|} / sqrt2 and the hat of half-width 1
        const double c = std::numbers::sqrt2;
        const double exact = 2.0 / c * ((1.0 / c) - (1.0 - std::exp(-c)) / (c * c));
        const std::vector<double> x{0.0};
        CHECK(resolvent_field(ProcessModel::bm(1), ScalarField::hat(0.0, 1.0), x) == doctest::Approx(exact).epsilon(1e-10));
    }
}
