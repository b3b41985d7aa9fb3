#pragma once

// Radial densities f(x) = phi(|x|) on R^d and their L^p norms over radial regions.
// A density is a sum of pieces with pairwise disjoint radial supports, possibly
// infinitely many of them (a series indexed by an integer), plus an optional table.

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace pcaf::continuum {

/// Surface area of the unit sphere in R^d (c_1 = 2, c_2 = 2 pi, c_3 = 4 pi).
double unit_sphere_area(int d);

/// coef * r^exponent * (-log r)^log_exponent on (r_lo, r_hi]. A nonzero log_exponent needs r_hi <= 1.
struct RadialPiece {
    double coef = 1.0;
    double exponent = 0.0;
    double log_exponent = 0.0;
    double r_lo = 0.0;
    double r_hi = std::numeric_limits<double>::infinity();
    /// log(r_hi / r_lo), kept separately because thin shells lose it to cancellation.
    double log_span = std::numeric_limits<double>::quiet_NaN();

    static RadialPiece power(double coef, double exponent, double r_lo, double r_hi);
    /// Shell {s_lo < |x|^d <= s_lo + s_width} parametrised by volume coordinate s = r^d.
    static RadialPiece thin_shell(double coef, double exponent, double s_lo, double s_width, int d);

    double value(double r) const;
    bool contains(double r) const { return r > r_lo && r <= r_hi; }
    double span() const;
};

/// Pieces piece(j), j >= first, monotone in j: supports move outward (towards infinity)
/// or inward (towards 0) as j grows.
struct RadialSeries {
    std::function<RadialPiece(long)> piece;
    long first = 1;
    bool outward = true;
    std::string label;
};

/// Piecewise-linear profile through (r_i, v_i), zero outside [r_0, r_last].
struct RadialTable {
    std::vector<double> r;
    std::vector<double> v;
};

struct RadialDensity {
    std::vector<RadialPiece> pieces;
    std::vector<RadialSeries> series;
    std::optional<RadialTable> table;
    std::string description;

    double value(double r) const;
    bool empty() const { return pieces.empty() && series.empty() && !table; }
};

/// Union of disjoint radial intervals [a, b] (b may be +infinity), i.e. balls, annuli, exteriors.
struct RadialRegion {
    std::vector<std::pair<double, double>> intervals;

    static RadialRegion ball(double radius);
    static RadialRegion annulus(double r_in, double r_out);
    static RadialRegion exterior(double radius);
    static RadialRegion everything();
    /// Complement in [0, infinity).
    RadialRegion complement() const;
    RadialRegion intersect(const RadialRegion& other) const;
    RadialRegion minus(const RadialRegion& other) const { return intersect(other.complement()); }
    /// Lebesgue measure of the region in R^d.
    double volume(int d) const;
};

/// Which function of f is integrated: f itself, min(f, level), or (f - level)_+.
enum class Transform { Plain, Capped, Excess };

struct SeriesSum {
    double value = 0.0;      ///< +infinity when the partial sums diverge
    double remainder = 0.0;  ///< extrapolated tail added to the last partial sum
    bool heuristic = false;  ///< the block ratio did not settle below 1; no remainder added
};

/// Sum of term(j), j >= first. Partial sums over block, 2 block and 4 block terms; infinite when
/// both doublings grow the sum by more than 10% and the second block increment is not
/// smaller than the first, otherwise the tail is extrapolated geometrically from the
/// last two block increments.
SeriesSum sum_series(const std::function<double(long)>& term, long first, long block = 200);

struct RadialIntegral {
    double value = 0.0;  ///< int_region T(f)^p dx, may be +infinity
    bool heuristic = false;
};

RadialIntegral radial_power_integral(const RadialDensity& f, double p, const RadialRegion& region, int d,
                                     Transform transform = Transform::Plain,
                                     double level = std::numeric_limits<double>::infinity(), long tail_block = 200);

/// int_region w(|x|) T(f)(x) dx for a continuous weight w (T as above, first power).
/// `tail_block` is the block length handed to sum_series for unbounded series.
RadialIntegral radial_weighted_integral(const RadialDensity& f, const std::function<double(double)>& weight,
                                        const RadialRegion& region, int d, Transform transform = Transform::Plain,
                                        double level = std::numeric_limits<double>::infinity(), long tail_block = 200);

/// (int_region f^p dx)^(1/p). Throws NonintegrableSingularity when the integral diverges.
double lp_norm_region(const RadialDensity& f, double p, const RadialRegion& region, int d);

/// {"expr": "pow", "beta": b [, "coef": c, "r_lo": a, "r_hi": b]} gives coef |x|^{-beta} on (r_lo, r_hi];
/// {"expr": "table", "r": [...], "v": [...]} gives a piecewise-linear profile.
RadialDensity radial_from_json(const nlohmann::json& doc);

}  // namespace pcaf::continuum
