#include <numbers>

#include "doctest.h"
#include "pcaf/conditions.hpp"
#include "pcaf/error.hpp"

using namespace pcaf;
using namespace pcaf::cond;
using continuum::RadialPiece;
using continuum::RadialRegion;

namespace {

// int_a^b g by composite Simpson with `n` (even) panels.
template <class G>
double simpson(G g, double a, double b, int n = 64) {
    const double h = (b - a) / n;
    double s = g(a) + g(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * g(a + i * h);
    return s * h / 3.0;
}

}  // namespace

TEST_SUITE("radial") {
    TEST_CASE("sphere areas") {
        CHECK(continuum::unit_sphere_area(1) == doctest::Approx(2.0));
        CHECK(continuum::unit_sphere_area(2) == doctest::Approx(2.0 * std::numbers::pi));
        CHECK(continuum::unit_sphere_area(3) == doctest::Approx(4.0 * std::numbers::pi));
    }

    TEST_CASE("region algebra") {
        const auto a = RadialRegion::annulus(1.0, 3.0).minus(RadialRegion::ball(2.0));
        REQUIRE(a.intervals.size() == 1);
        CHECK(a.intervals[0].first == 2.0);
        CHECK(a.intervals[0].second == 3.0);
        CHECK(RadialRegion::ball(1.0).volume(3) == doctest::Approx(4.0 * std::numbers::pi / 3.0));
        CHECK(std::isinf(RadialRegion::exterior(1.0).volume(2)));
    }

    TEST_CASE("series summation") {
        const auto geo = continuum::sum_series([](long j) { return std::pow(0.5, static_cast<double>(j)); }, 1);
        CHECK(geo.value == doctest::Approx(1.0).epsilon(1e-12));
        const auto harmonic = continuum::sum_series([](long j) { return 1.0 / static_cast<double>(j); }, 1);
        CHECK(std::isinf(harmonic.value));
        // sum_{j >= 1} 1 / j^2 = pi^2 / 6; the geometric tail guess is within a percent
        const auto basel = continuum::sum_series([](long j) { return 1.0 / (double(j) * double(j)); }, 1);
        CHECK(basel.value == doctest::Approx(std::numbers::pi * std::numbers::pi / 6.0).epsilon(1e-2));
    }

    TEST_CASE("power integrals in closed form") {
        continuum::RadialDensity f;
        f.pieces.push_back(RadialPiece::power(1.0, -1.0, 0.0, std::numeric_limits<double>::infinity()));
        // d = 2: int_{|x| > n} |x|^-3 dx = 2 pi / n
        for (long n : {4L, 16L, 128L}) {
            const auto v = continuum::radial_power_integral(f, 3.0, RadialRegion::exterior(double(n)), 2);
            CHECK(v.value == doctest::Approx(2.0 * std::numbers::pi / n).epsilon(1e-10));
        }
        // int_{|x| < 1} |x|^-2 dx diverges in d = 2
        CHECK(std::isinf(continuum::radial_power_integral(f, 2.0, RadialRegion::ball(1.0), 2).value));
        CHECK_THROWS_AS(continuum::lp_norm_region(f, 2.0, RadialRegion::ball(1.0), 2), Error);
    }

    TEST_CASE("thin shells keep their mass") {
        // shell {1 < r^2 <= 1 + 1e-9} in d = 2 with f = r^2: mass ~ pi * 1e-9
        const auto p = RadialPiece::thin_shell(1.0, 2.0, 1.0, 1e-9, 2);
        continuum::RadialDensity f;
        f.pieces.push_back(p);
        const auto v = continuum::radial_power_integral(f, 1.0, RadialRegion::everything(), 2);
        CHECK(v.value == doctest::Approx(std::numbers::pi * 1e-9).epsilon(1e-6));
    }
}

TEST_SUITE("conditions") {
    TEST_CASE("sequence classification rules") {
        const std::vector<long> idx{4, 8, 16, 32};
        CHECK(classify_sequence(idx, {1.0, 0.25, 0.0625, 0.015625}) == Verdict::TendsToZero);
        CHECK(classify_sequence(idx, {1.0, 0.5, 0.25, 0.125}) == Verdict::Inconclusive);
        CHECK(classify_sequence(idx, {0.0, 0.0, 0.0, 0.0}) == Verdict::TendsToZero);
        CHECK(classify_sequence(idx, {1.0, 2.0, 4.0, 8.0}) == Verdict::Diverges);
        CHECK(classify_sequence(idx, {1.0, 2.0, 3.0, INFINITY}) == Verdict::Diverges);
        CHECK(classify_sequence(idx, {1.0, 1.01, 0.99, 1.0}) == Verdict::BoundedAway);
        CHECK(classify_sequence(idx, {1.0, 0.1, 1.0, 0.1}) == Verdict::Inconclusive);
        double slope = 0.0;
        CHECK(classify_sequence(idx, {1.0, 0.5, 0.0, 0.0}, &slope) == Verdict::TendsToZero);
        CHECK(std::isinf(slope));
    }

    TEST_CASE("power_beta Ac2 equals C^3 2 pi / n") {
        const auto fam = corpus_example("power_beta", {{"d", 2}, {"beta", 1.0}});
        const auto rep = check_condition(fam, Condition::Ac2, default_indices());
        REQUIRE(rep.values.size() == 3);
        for (std::size_t c = 0; c < 3; ++c)
            for (std::size_t i = 0; i < rep.indices.size(); ++i) {
                const double C = fam.constants[c];
                CHECK(rep.values[c][i] ==
                      doctest::Approx(C * C * C * 2.0 * std::numbers::pi / double(rep.indices[i])).epsilon(1e-9));
            }
        CHECK(rep.verdict == Verdict::TendsToZero);
    }

    TEST_CASE("counterexample_i Ac1 partial sums grow without bound") {
        // d = 2, r = 3: || |x|^-1 ||_{L^3(k < |x| < k+1)} = (2 pi / (k (k + 1)))^{1/3}, a k^{-2/3} series
        const auto fam = corpus_example("counterexample_i", {{"d", 2}});
        double partial = 0.0;
        std::vector<double> checkpoints;
        for (long k = 4; k <= 4 + 4000; ++k) {
            partial += std::cbrt(2.0 * std::numbers::pi / (double(k) * double(k + 1)));
            if (k == 1004 || k == 4004) checkpoints.push_back(partial);
        }
        CHECK(checkpoints[1] > 1.5 * checkpoints[0]);
        const auto rep = check_condition(fam, Condition::Ac1, default_indices());
        CHECK(rep.verdict == Verdict::Diverges);
        CHECK(std::isinf(rep.values[0].back()));
    }

    TEST_CASE("log_singular Ac1 against direct summation") {
        const auto fam = corpus_example("log_singular", {{"d", 2}});
        const std::vector<long> idx{4, 8, 16};
        const auto rep = check_condition(fam, Condition::Ac1, idx);
        for (std::size_t i = 0; i < idx.size(); ++i) {
            double sum = 0.0;
            for (long k = idx[i]; k < 400000; ++k) {
                const double s = std::log(double(k) + 1.0);
                const double e = (-2.0 + 1.0 / s) * s;
                const double mass = simpson([&](double r) { return 2.0 * std::numbers::pi * r * std::pow(r, e); },
                                            double(k), double(k) + 1.0, 16);
                const double vol = std::numbers::pi * (2.0 * k + 1.0);
                sum += std::pow(mass, 1.0 / s) * std::min(1.0, std::pow(vol, 1.0 - 1.0 / s));
            }
            CHECK(rep.values[0][i] == doctest::Approx(sum).epsilon(5e-3));
        }
    }

    TEST_CASE("corpus verdicts") {
        for (const auto* name : {"power_beta", "annulus_spikes", "log_singular", "counterexample_i", "counterexample_ii"}) {
            const auto rep = verify_membership(corpus_example(name));
            CAPTURE(name);
            CHECK(rep.in_A);
            CHECK(rep.local_integrability == "integrable");
            CHECK(rep.summary().find("PASS") != std::string::npos);
        }
        const auto ce1 = verify_membership(corpus_example("counterexample_i"));
        CHECK(ce1.ac1.verdict == Verdict::Diverges);
        CHECK(ce1.ac_branch == "Ac2");
        const auto ce2 = verify_membership(corpus_example("counterexample_ii"));
        CHECK(ce2.ac1.verdict == Verdict::TendsToZero);
        CHECK(ce2.ac2.verdict == Verdict::Diverges);
    }

    TEST_CASE("verdicts are stable under refinement") {
        std::vector<long> idx;
        for (long n = 8; n <= 256; n *= 2) idx.push_back(n);
        for (const auto* name : {"power_beta", "annulus_spikes", "log_singular", "counterexample_i", "counterexample_ii"}) {
            auto fam = corpus_example(name);
            const auto base = verify_membership(fam);
            fam.tail_block = 400;
            const auto fine = verify_membership(fam, idx);
            CAPTURE(name);
            CHECK(fine.in_A == base.in_A);
            CHECK(fine.ac1.verdict == base.ac1.verdict);
            CHECK(fine.ac2.verdict == base.ac2.verdict);
        }
    }

    TEST_CASE("tails decrease in n") {
        const auto rep = check_condition(corpus_example("log_singular"), Condition::Ac2, default_indices());
        for (const auto& row : rep.values)
            for (std::size_t i = 1; i < row.size(); ++i) CHECK(row[i] <= row[i - 1]);
    }

    TEST_CASE("non-integrable singularity is reported") {
        const auto fam = family_from_json({{"d", 2}, {"f", {{"expr", "pow"}, {"beta", 2.0}, {"r_hi", 1.0}}}});
        const auto rep = verify_membership(fam);
        CHECK(rep.local_integrability == "inconclusive-negative");
        CHECK_FALSE(rep.in_A);
    }

    TEST_CASE("Sb and Sc in d = 1 with an atom probe") {
        // f = |x|^{-1/2}, F_n = [-n, n], probe delta_0: Sb(n) = 2 int_n^inf e^{-c x} / c x^{-1/2} dx
        const auto fam = family_from_json({{"d", 1}, {"f", {{"expr", "pow"}, {"beta", 0.5}}}});
        const auto probe = continuum::MeasureRep::point({0.0});
        const std::vector<long> idx{1, 2, 4, 8};
        const auto sb = check_condition(fam, Condition::Sb, idx, &probe);
        const auto sc = check_condition(fam, Condition::Sc, idx, &probe);
        const double c = std::numbers::sqrt2;
        for (std::size_t i = 0; i < idx.size(); ++i) {
            const double n = double(idx[i]);
            const double direct =
                2.0 * simpson([&](double x) { return std::exp(-c * x) / c / std::sqrt(x); }, n, n + 40.0, 20000);
            CHECK(sb.values[0][i] == doctest::Approx(direct).epsilon(1e-6));
            // truncated approximants only remove mass, so the limit f attains the supremum
            CHECK(sc.values[0][i] == doctest::Approx(direct).epsilon(1e-6));
        }
        CHECK(sb.verdict == Verdict::TendsToZero);
    }

    TEST_CASE("error paths") {
        const auto fam2 = corpus_example("power_beta");
        const auto probe = continuum::MeasureRep::point({0.0, 0.0});
        try {
            check_condition(fam2, Condition::Sb, default_indices(), &probe);
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::UnsupportedDimension);
        }
        const auto fam3 = corpus_example("power_beta", {{"d", 3}});
        const auto atom = continuum::MeasureRep::point({0.0, 0.0, 0.0});
        try {
            check_condition(fam3, Condition::Sb, default_indices(), &atom);
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::NotFiniteEnergy);
        }
        CHECK_THROWS_AS(corpus_example("nope"), Error);
        CHECK_THROWS_AS(corpus_example("power_beta", {{"beta", 3.0}}), Error);
    }
}
