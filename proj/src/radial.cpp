#include "pcaf/radial.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "pcaf/error.hpp"
#include "pcaf/text.hpp"

namespace pcaf::continuum {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// int_lo^hi coef^p r^{e p} r^{d-1} dr, with `span` = log(hi/lo).
double power_plain(double coef, double e, double p, double lo, double hi, double span, int d) {
    if (coef == 0.0 || hi <= lo) return 0.0;
    const double logc = p * std::log(coef);
    const double kappa = e * p + d;
    if (lo == 0.0) {
        if (std::isinf(hi) || kappa <= 0.0) return kInf;
        return std::exp(logc + kappa * std::log(hi)) / kappa;
    }
    if (std::isinf(hi)) {
        if (kappa >= 0.0) return kInf;
        return std::exp(logc + kappa * std::log(lo)) / -kappa;
    }
    if (kappa == 0.0) return std::exp(logc) * span;
    return std::exp(logc + kappa * std::log(lo)) * (std::expm1(kappa * span) / kappa);
}

// int_lo^hi coef^p r^{e p} (-log r)^{lambda p} r^{d-1} dr with hi <= 1, via u = -log r.
double log_power_plain(double coef, double e, double lambda, double p, double lo, double hi, int d) {
    if (coef == 0.0 || hi <= lo) return 0.0;
    if (hi > 1.0) throw Error(ErrorCode::Unsupported, "logarithmic radial piece must live inside the unit ball");
    const double kappa = e * p + d;
    const double s = lambda * p;
    const double u0 = -std::log(hi);
    const double u1 = lo == 0.0 ? kInf : -std::log(lo);
    const double cp = std::pow(coef, p);
    if (u0 == 0.0 && s <= -1.0) return kInf;
    if (kappa == 0.0) {
        if (s == -1.0) return std::isinf(u1) ? kInf : cp * std::log(u1 / u0);
        if (std::isinf(u1)) return s + 1.0 < 0.0 ? cp * -std::pow(u0, s + 1.0) / (s + 1.0) : kInf;
        return cp * (std::pow(u1, s + 1.0) - std::pow(u0, s + 1.0)) / (s + 1.0);
    }
    if (std::isinf(u1)) {
        if (kappa < 0.0) return kInf;
        boost::math::quadrature::exp_sinh<double> integrator;
        const auto f = [&](double v) { return std::exp(-kappa * (u0 + v)) * std::pow(u0 + v, s); };
        return cp * integrator.integrate(f, 0.0, kInf);
    }
    boost::math::quadrature::tanh_sinh<double> integrator;
    const auto f = [&](double u) { return std::exp(-kappa * u) * std::pow(u, s); };
    return cp * integrator.integrate(f, u0, u1);
}

double excess_quadrature(double coef, double e, double level, double p, double lo, double hi, int d) {
    if (hi <= lo) return 0.0;
    boost::math::quadrature::tanh_sinh<double> integrator;
    const auto f = [&](double r) {
        const double v = coef * std::pow(r, e) - level;
        return v > 0.0 ? std::pow(v, p) * std::pow(r, d - 1) : 0.0;
    };
    return integrator.integrate(f, lo, hi);
}

double span_of(const RadialPiece& piece, double lo, double hi) {
    if (lo == piece.r_lo && hi == piece.r_hi) return piece.span();
    return std::log(hi / lo);
}

// Integral over the part of `piece` inside [a, b] (without the sphere constant).
double piece_integral(const RadialPiece& piece, double p, double a, double b, int d, Transform transform,
                      double level) {
    const double lo = std::max(a, piece.r_lo), hi = std::min(b, piece.r_hi);
    if (!(hi > lo) || piece.coef == 0.0) return 0.0;
    if (piece.log_exponent != 0.0) {
        if (transform != Transform::Plain)
            throw Error(ErrorCode::Unsupported, "capped or excess norms of logarithmic pieces");
        return log_power_plain(piece.coef, piece.exponent, piece.log_exponent, p, lo, hi, d);
    }
    const double c = piece.coef, e = piece.exponent;
    const auto plain = [&](double coef, double exponent, double l, double h) {
        if (!(h > l)) return 0.0;
        return power_plain(coef, exponent, p, l, h, span_of(piece, l, h), d);
    };
    switch (transform) {
    case Transform::Plain:
        return plain(c, e, lo, hi);
    case Transform::Capped: {
        if (e == 0.0) return plain(std::min(c, level), 0.0, lo, hi);
        const double rstar = std::pow(level / c, 1.0 / e);
        if (e < 0.0) return plain(level, 0.0, lo, std::min(hi, rstar)) + plain(c, e, std::max(lo, rstar), hi);
        return plain(c, e, lo, std::min(hi, rstar)) + plain(level, 0.0, std::max(lo, rstar), hi);
    }
    case Transform::Excess: {
        if (e == 0.0) return c > level ? plain(c - level, 0.0, lo, hi) : 0.0;
        const double rstar = std::pow(level / c, 1.0 / e);
        const double l = e < 0.0 ? lo : std::max(lo, rstar);
        const double h = e < 0.0 ? std::min(hi, rstar) : hi;
        if (!(h > l)) return 0.0;
        const double whole = plain(c, e, l, h);
        if (std::isinf(whole)) return kInf;
        if (p == 1.0) return std::max(0.0, whole - level * plain(1.0, 0.0, l, h));
        return excess_quadrature(c, e, level, p, l, h, d);
    }
    }
    return 0.0;
}

double table_integral(const RadialTable& t, double p, double a, double b, int d, Transform transform, double level) {
    using gl = boost::math::quadrature::gauss<double, 20>;
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < t.r.size(); ++i) {
        const double r0 = t.r[i], r1 = t.r[i + 1];
        const double lo = std::max(a, r0), hi = std::min(b, r1);
        if (!(hi > lo)) continue;
        const auto v = [&](double r) { return t.v[i] + (t.v[i + 1] - t.v[i]) * (r - r0) / (r1 - r0); };
        const auto g = [&](double r) {
            double x = v(r);
            if (transform == Transform::Capped) x = std::min(x, level);
            if (transform == Transform::Excess) x = std::max(0.0, x - level);
            return std::pow(x, p) * std::pow(r, d - 1);
        };
        // split at the crossing with `level`, where the transformed profile has a kink
        std::vector<double> cuts{lo, hi};
        if (transform != Transform::Plain && t.v[i + 1] != t.v[i]) {
            const double rc = r0 + (level - t.v[i]) * (r1 - r0) / (t.v[i + 1] - t.v[i]);
            if (rc > lo && rc < hi) cuts.insert(cuts.begin() + 1, rc);
        }
        for (std::size_t k = 0; k + 1 < cuts.size(); ++k) sum += gl::integrate(g, cuts[k], cuts[k + 1]);
    }
    return sum;
}

// Smallest j >= first with pred(j) true for a predicate that is false then true; LONG_MAX if never.
long first_true(long first, const std::function<bool(long)>& pred) {
    if (pred(first)) return first;
    long lo = first, step = 1, hi = first + 1;
    while (!pred(hi)) {
        lo = hi;
        if (step > (LONG_MAX >> 3)) return LONG_MAX;
        step *= 2;
        hi = first + step;
    }
    while (hi - lo > 1) {
        const long mid = lo + (hi - lo) / 2;
        if (pred(mid)) hi = mid;
        else lo = mid;
    }
    return hi;
}

RadialIntegral series_sum_over(const RadialSeries& s, double a, double b, const std::function<double(long)>& term,
                               long block) {
    long start, stop;  // inclusive range, stop == LONG_MAX for an unbounded tail
    if (s.outward) {
        start = first_true(s.first, [&](long j) { return s.piece(j).r_hi > a; });
        stop = std::isinf(b) ? LONG_MAX : first_true(s.first, [&](long j) { return s.piece(j).r_lo >= b; }) - 1;
    } else {
        start = first_true(s.first, [&](long j) { return s.piece(j).r_lo < b; });
        stop = a == 0.0 ? LONG_MAX : first_true(s.first, [&](long j) { return s.piece(j).r_hi <= a; }) - 1;
    }
    RadialIntegral out;
    if (start == LONG_MAX || stop < start) return out;
    if (stop == LONG_MAX) {
        const auto sum = sum_series(term, start, block);
        out.value = sum.value;
        out.heuristic = sum.heuristic;
        return out;
    }
    for (long j = start; j <= stop; ++j) {
        out.value += term(j);
        if (std::isinf(out.value)) break;
    }
    return out;
}

RadialIntegral series_integral(const RadialSeries& s, double p, double a, double b, int d, Transform transform,
                               double level, long block) {
    return series_sum_over(
        s, a, b, [&](long j) { return piece_integral(s.piece(j), p, a, b, d, transform, level); }, block);
}

// int over piece \cap [a, b] of w(r) T(piece)(r) r^{d-1} dr by tanh-sinh / exp-sinh quadrature.
double piece_weighted(const RadialPiece& piece, const std::function<double(double)>& weight, double a, double b, int d,
                      Transform transform, double level) {
    const double lo = std::max(a, piece.r_lo), hi = std::min(b, piece.r_hi);
    if (!(hi > lo) || piece.coef == 0.0) return 0.0;
    const auto integrand = [&](double r) {
        double v = piece.value(r > lo ? (r < hi ? r : hi) : std::nextafter(lo, hi));
        if (transform == Transform::Capped) v = std::min(v, level);
        if (transform == Transform::Excess) v = std::max(0.0, v - level);
        return v == 0.0 ? 0.0 : weight(r) * v * std::pow(r, d - 1);
    };
    std::vector<double> cuts{lo, hi};
    if (transform != Transform::Plain && piece.log_exponent == 0.0 && piece.exponent != 0.0) {
        const double rstar = std::pow(level / piece.coef, 1.0 / piece.exponent);
        if (rstar > lo && rstar < hi) cuts.insert(cuts.begin() + 1, rstar);
    }
    double sum = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const double l = cuts[k], h = cuts[k + 1];
        if (std::isinf(h)) {
            boost::math::quadrature::exp_sinh<double> integrator;
            sum += integrator.integrate([&](double v) { return integrand(l + v); }, 0.0, kInf);
        } else {
            boost::math::quadrature::tanh_sinh<double> integrator;
            sum += integrator.integrate(integrand, l, h);
        }
    }
    return sum;
}

}  // namespace

double unit_sphere_area(int d) {
    if (d < 1) throw Error(ErrorCode::UnsupportedDimension, "dimension " + std::to_string(d));
    return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

RadialPiece RadialPiece::power(double coef, double exponent, double r_lo, double r_hi) {
    RadialPiece piece;
    piece.coef = coef;
    piece.exponent = exponent;
    piece.r_lo = r_lo;
    piece.r_hi = r_hi;
    return piece;
}

RadialPiece RadialPiece::thin_shell(double coef, double exponent, double s_lo, double s_width, int d) {
    RadialPiece piece = power(coef, exponent, std::pow(s_lo, 1.0 / d), std::pow(s_lo + s_width, 1.0 / d));
    piece.log_span = std::log1p(s_width / s_lo) / d;
    return piece;
}

double RadialPiece::span() const {
    if (!std::isnan(log_span)) return log_span;
    return std::log(r_hi / r_lo);
}

double RadialPiece::value(double r) const {
    if (!contains(r)) return 0.0;
    double v = coef * std::pow(r, exponent);
    if (log_exponent != 0.0) v *= std::pow(-std::log(r), log_exponent);
    return v;
}

double RadialDensity::value(double r) const {
    double v = 0.0;
    for (const auto& piece : pieces) v += piece.value(r);
    for (const auto& s : series) {
        const long j = s.outward ? first_true(s.first, [&](long k) { return s.piece(k).r_hi >= r; })
                                 : first_true(s.first, [&](long k) { return s.piece(k).r_lo < r; });
        if (j != LONG_MAX) v += s.piece(j).value(r);
    }
    if (table && table->r.size() >= 2 && r >= table->r.front() && r <= table->r.back()) {
        const auto it = std::upper_bound(table->r.begin(), table->r.end(), r);
        const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(it - table->r.begin()), table->r.size() - 1);
        const double r0 = table->r[i - 1], r1 = table->r[i];
        v += table->v[i - 1] + (table->v[i] - table->v[i - 1]) * (r - r0) / (r1 - r0);
    }
    return v;
}

RadialRegion RadialRegion::ball(double radius) { return {{{0.0, radius}}}; }
RadialRegion RadialRegion::annulus(double r_in, double r_out) { return {{{r_in, r_out}}}; }
RadialRegion RadialRegion::exterior(double radius) { return {{{radius, kInf}}}; }
RadialRegion RadialRegion::everything() { return {{{0.0, kInf}}}; }

RadialRegion RadialRegion::complement() const {
    auto sorted = intervals;
    std::sort(sorted.begin(), sorted.end());
    RadialRegion out;
    double cursor = 0.0;
    for (const auto& [a, b] : sorted) {
        if (a > cursor) out.intervals.emplace_back(cursor, a);
        cursor = std::max(cursor, b);
    }
    if (!std::isinf(cursor)) out.intervals.emplace_back(cursor, kInf);
    return out;
}

double RadialRegion::volume(int d) const {
    const double omega = unit_sphere_area(d) / d;
    double v = 0.0;
    for (const auto& [a, b] : intervals) v += omega * (std::pow(b, d) - std::pow(a, d));
    return v;
}

RadialRegion RadialRegion::intersect(const RadialRegion& other) const {
    RadialRegion out;
    for (const auto& [a, b] : intervals)
        for (const auto& [c, e] : other.intervals) {
            const double lo = std::max(a, c), hi = std::min(b, e);
            if (hi > lo) out.intervals.emplace_back(lo, hi);
        }
    std::sort(out.intervals.begin(), out.intervals.end());
    return out;
}

SeriesSum sum_series(const std::function<double(long)>& term, long first, long block) {
    SeriesSum out;
    double partial[3] = {0.0, 0.0, 0.0};
    double s = 0.0;
    long j = first;
    if (block < 1) throw Error(ErrorCode::ConfigInvalid, "tail block must be positive");
    const long counts[3] = {block, 2 * block, 4 * block};
    for (int block = 0; block < 3; ++block) {
        for (; j < first + counts[block]; ++j) {
            s += term(j);
            if (std::isinf(s)) {
                out.value = kInf;
                return out;
            }
        }
        partial[block] = s;
    }
    const double d1 = partial[1] - partial[0], d2 = partial[2] - partial[1];
    if (partial[1] > 1.1 * partial[0] && partial[2] > 1.1 * partial[1] && d2 >= d1) {
        out.value = kInf;
        return out;
    }
    out.value = partial[2];
    if (d2 == 0.0) return out;
    if (d1 > 0.0 && d2 < d1) {
        const double ratio = d2 / d1;
        out.remainder = d2 * ratio / (1.0 - ratio);
        out.value += out.remainder;
    } else {
        out.heuristic = true;
    }
    return out;
}

RadialIntegral radial_power_integral(const RadialDensity& f, double p, const RadialRegion& region, int d,
                                     Transform transform, double level, long tail_block) {
    if (!(p > 0.0)) throw Error(ErrorCode::ConfigInvalid, "exponent p must be positive");
    const double cd = unit_sphere_area(d);
    RadialIntegral out;
    for (const auto& [a, b] : region.intervals) {
        if (!(b > a)) continue;
        for (const auto& piece : f.pieces) out.value += piece_integral(piece, p, a, b, d, transform, level);
        for (const auto& s : f.series) {
            const auto part = series_integral(s, p, a, b, d, transform, level, tail_block);
            out.value += part.value;
            out.heuristic = out.heuristic || part.heuristic;
        }
        if (f.table) out.value += table_integral(*f.table, p, a, b, d, transform, level);
    }
    out.value *= cd;
    return out;
}

RadialIntegral radial_weighted_integral(const RadialDensity& f, const std::function<double(double)>& weight,
                                        const RadialRegion& region, int d, Transform transform, double level,
                                        long tail_block) {
    const double cd = unit_sphere_area(d);
    RadialIntegral out;
    for (const auto& [a, b] : region.intervals) {
        if (!(b > a)) continue;
        for (const auto& piece : f.pieces) out.value += piece_weighted(piece, weight, a, b, d, transform, level);
        for (const auto& s : f.series) {
            const auto part = series_sum_over(
                s, a, b, [&](long j) { return piece_weighted(s.piece(j), weight, a, b, d, transform, level); },
                tail_block);
            out.value += part.value;
            out.heuristic = out.heuristic || part.heuristic;
        }
        if (f.table) {
            using gl = boost::math::quadrature::gauss<double, 20>;
            const auto& t = *f.table;
            for (std::size_t i = 0; i + 1 < t.r.size(); ++i) {
                const double lo = std::max(a, t.r[i]), hi = std::min(b, t.r[i + 1]);
                if (!(hi > lo)) continue;
                out.value += gl::integrate(
                    [&](double r) {
                        double v = t.v[i] + (t.v[i + 1] - t.v[i]) * (r - t.r[i]) / (t.r[i + 1] - t.r[i]);
                        if (transform == Transform::Capped) v = std::min(v, level);
                        if (transform == Transform::Excess) v = std::max(0.0, v - level);
                        return weight(r) * v * std::pow(r, d - 1);
                    },
                    lo, hi);
            }
        }
    }
    out.value *= cd;
    return out;
}

double lp_norm_region(const RadialDensity& f, double p, const RadialRegion& region, int d) {
    if (!(p >= 1.0)) throw Error(ErrorCode::ConfigInvalid, "p must be at least 1, got " + format_real(p));
    const auto integral = radial_power_integral(f, p, region, d);
    if (std::isinf(integral.value))
        throw Error(ErrorCode::NonintegrableSingularity,
                    "integral of f^" + format_real(p) + " over the region diverges" +
                        (f.description.empty() ? std::string() : " (" + f.description + ")"));
    return std::pow(integral.value, 1.0 / p);
}

RadialDensity radial_from_json(const nlohmann::json& doc) {
    const nlohmann::json& node = doc.contains("radial") ? doc.at("radial") : doc;
    const auto expr = node.at("expr").get<std::string>();
    RadialDensity f;
    if (expr == "pow") {
        const double beta = real_from_json(node.at("beta"));
        const double coef = node.contains("coef") ? real_from_json(node.at("coef")) : 1.0;
        const double lo = node.contains("r_lo") ? real_from_json(node.at("r_lo")) : 0.0;
        const double hi = node.contains("r_hi") ? real_from_json(node.at("r_hi")) : kInf;
        if (coef < 0.0) throw Error(ErrorCode::NegativeEntry, "radial coefficient " + format_real(coef));
        f.pieces.push_back(RadialPiece::power(coef, -beta, lo, hi));
        f.description = "|x|^-" + format_real(beta);
    } else if (expr == "table") {
        RadialTable t{node.at("r").get<std::vector<double>>(), node.at("v").get<std::vector<double>>()};
        if (t.r.size() != t.v.size() || t.r.size() < 2)
            throw Error(ErrorCode::ConfigInvalid, "radial table needs matching r and v with at least two nodes");
        for (std::size_t i = 0; i < t.r.size(); ++i) {
            if (t.v[i] < 0.0) throw Error(ErrorCode::NegativeEntry, "radial table value " + std::to_string(i));
            if (i > 0 && !(t.r[i] > t.r[i - 1])) throw Error(ErrorCode::ConfigInvalid, "radial table nodes must increase");
        }
        if (t.r.front() < 0.0) throw Error(ErrorCode::ConfigInvalid, "radial table starts below 0");
        f.table = std::move(t);
        f.description = "table";
    } else if (expr == "sum") {
        for (const auto& term : node.at("terms")) {
            auto part = radial_from_json(term);
            f.pieces.insert(f.pieces.end(), part.pieces.begin(), part.pieces.end());
            if (part.table) {
                if (f.table) throw Error(ErrorCode::ConfigInvalid, "at most one radial table per density");
                f.table = part.table;
            }
        }
        f.description = "sum";
    } else {
        throw Error(ErrorCode::ConfigInvalid, "unknown radial expr '" + expr + "'");
    }
    return f;
}

}  // namespace pcaf::continuum
