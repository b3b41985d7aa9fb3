#include "pcaf/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>

#include "pcaf/error.hpp"
#include "pcaf/text.hpp"

namespace pcaf::cond {

using continuum::RadialIntegral;
using continuum::RadialPiece;
using continuum::RadialSeries;
using continuum::Transform;
using continuum::radial_power_integral;
using continuum::radial_weighted_integral;
using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

json jreal(double x) { return std::isfinite(x) ? json(x) : json(format_real(x)); }

json jreals(const std::vector<double>& xs) {
    json out = json::array();
    for (double x : xs) out.push_back(jreal(x));
    return out;
}

// (int)^{1/s}, keeping 0 and infinity.
double norm_from(double integral, double s) {
    if (integral == 0.0 || std::isinf(integral)) return integral;
    return std::pow(integral, 1.0 / s);
}

// C^s * integral, evaluated in logs.
double scaled(double integral, double c, double s) {
    if (integral == 0.0 || std::isinf(integral)) return integral;
    return std::exp(s * std::log(c) + std::log(integral));
}

// 1 ^ m^{1 - 1/s}.
double measure_factor(double m, double s) {
    if (s == 1.0) return 1.0;
    if (std::isinf(m)) return 1.0;
    return std::min(1.0, std::pow(m, 1.0 - 1.0 / s));
}

// Spherical mean over |x| = r of the 1-resolvent kernel g(x, y), |y| = s.
double shell_kernel(int d, double r, double s) {
    const double c = std::numbers::sqrt2;
    if (d == 1) return (std::exp(-c * std::abs(r - s)) + std::exp(-c * (r + s))) / (2.0 * c);
    const double lo = std::min(r, s), hi = std::max(r, s);
    if (hi == 0.0) return kInf;
    if (lo == 0.0) return std::exp(-c * hi) / (2.0 * std::numbers::pi * hi);
    return -std::exp(-c * (hi - lo)) * std::expm1(-2.0 * c * lo) / (4.0 * std::numbers::pi * r * s * c);
}

// Probe reduced to (|y|, mass) pairs: atoms exactly, grid cells by a 3-point Gauss tensor rule.
std::vector<std::pair<double, double>> radial_masses(const MeasureRep& nu) {
    std::vector<std::pair<double, double>> out;
    for (const auto& a : nu.atoms) {
        double s2 = 0.0;
        for (double v : a.x) s2 += v * v;
        out.emplace_back(std::sqrt(s2), a.mass);
    }
    if (nu.density) {
        const auto& g = *nu.density;
        const int d = g.dim();
        const double node = std::sqrt(0.6);
        const double xs[3] = {-node, 0.0, node};
        const double ws[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
        const auto width = g.cell_width();
        for (std::size_t i = 0; i < g.cell_count(); ++i) {
            if (g.values[i] == 0.0) continue;
            const double mass = g.values[i] * g.cell_volume();
            const auto centre = g.cell_center(i);
            int total = 1;
            for (int a = 0; a < d; ++a) total *= 3;
            for (int t = 0; t < total; ++t) {
                double s2 = 0.0, w = 1.0;
                for (int a = 0, rest = t; a < d; ++a, rest /= 3) {
                    const double y = centre[a] + 0.5 * width[a] * xs[rest % 3];
                    s2 += y * y;
                    w *= ws[rest % 3];
                }
                out.emplace_back(std::sqrt(s2), mass * w);
            }
        }
    }
    return out;
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double den = n * sxx - sx * sx;
    return den == 0.0 ? 0.0 : (n * sxy - sx * sy) / den;
}

void require_indices(const std::vector<long>& indices) {
    if (indices.empty()) throw Error(ErrorCode::ConfigInvalid, "index list is empty");
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] < 1) throw Error(ErrorCode::ConfigInvalid, "indices must be positive");
        if (i > 0 && indices[i] <= indices[i - 1]) throw Error(ErrorCode::ConfigInvalid, "indices must increase");
    }
}

// sum_{k >= n} norm_{s_k}(g on Gamma_k) (1 ^ m(Gamma_k)^{1 - 1/s_k}).
RadialIntegral tail_sum(const DensityFamily& fam, long n, const Exponents& s,
                        const std::function<RadialIntegral(double, const RadialRegion&)>& integral) {
    bool heuristic = false;
    const auto term = [&](long k) {
        const auto g = fam.gamma(k);
        const double sk = s(k);
        const auto part = integral(sk, g);
        heuristic = heuristic || part.heuristic;
        const double v = norm_from(part.value, sk);
        return v == 0.0 ? 0.0 : v * measure_factor(g.volume(fam.d), sk);
    };
    const auto sum = continuum::sum_series(term, n, fam.tail_block);
    return {sum.value, heuristic || sum.heuristic};
}

}  // namespace

RadialRegion Nest::operator()(long n, int d) const {
    const double x = static_cast<double>(n);
    if (kind == "ball") return RadialRegion::ball(scale * std::pow(x, power));
    if (kind == "annulus") return RadialRegion::annulus(std::pow(1.0 / x, 1.0 / d), std::pow(x, 1.0 / d));
    throw Error(ErrorCode::UnsupportedRegion, "nest kind '" + kind + "'");
}

json Nest::to_json() const { return {{"kind", kind}, {"scale", jreal(scale)}, {"power", jreal(power)}}; }

Nest Nest::from_json(const json& doc) {
    Nest out;
    out.kind = doc.value("kind", std::string("ball"));
    if (out.kind != "ball" && out.kind != "annulus") throw Error(ErrorCode::UnsupportedRegion, "nest kind '" + out.kind + "'");
    if (doc.contains("scale")) out.scale = real_from_json(doc.at("scale"));
    if (doc.contains("power")) out.power = real_from_json(doc.at("power"));
    if (!(out.scale > 0.0) || !(out.power > 0.0)) throw Error(ErrorCode::ConfigInvalid, "nest scale and power must be positive");
    return out;
}

double Exponents::operator()(long n) const {
    if (kind == "constant") return value;
    if (kind == "log") return std::log(static_cast<double>(n) + shift);
    if (kind == "parity_log") return n % 2 == 0 ? std::log(static_cast<double>(n) + shift) : value;
    throw Error(ErrorCode::ConfigInvalid, "exponent kind '" + kind + "'");
}

json Exponents::to_json() const { return {{"kind", kind}, {"value", jreal(value)}, {"shift", jreal(shift)}}; }

Exponents Exponents::from_json(const json& doc) {
    Exponents out;
    if (doc.is_number()) {
        out.value = doc.get<double>();
        return out;
    }
    out.kind = doc.value("kind", std::string("constant"));
    if (doc.contains("value")) out.value = real_from_json(doc.at("value"));
    if (doc.contains("shift")) out.shift = real_from_json(doc.at("shift"));
    if (out.kind != "constant" && out.kind != "log" && out.kind != "parity_log")
        throw Error(ErrorCode::ConfigInvalid, "exponent kind '" + out.kind + "'");
    return out;
}

RadialIntegral DensityFamily::approximant_integral(long n, double s, const RadialRegion& region) const {
    if (approximant == Approximant::Truncate)
        return radial_power_integral(f, s, region.intersect(F(n)), d, Transform::Plain, kInf, tail_block);
    return radial_power_integral(f, s, region, d, Transform::Capped, static_cast<double>(n), tail_block);
}

const DensityFamily& DensityFamily::checked(const std::vector<long>& indices) const {
    if (d < 1) throw Error(ErrorCode::ConfigInvalid, "dimension must be positive");
    for (long n : indices) {
        for (const auto* e : {&p, &q, &r})
            if (!((*e)(n) >= 1.0)) throw Error(ErrorCode::ConfigInvalid, "exponents must be at least 1");
        const auto a = F(n), b = F(n + 1);
        if (!a.minus(b).intervals.empty()) throw Error(ErrorCode::ConfigInvalid, "nest is not increasing");
    }
    for (double c : constants)
        if (!(c > 1.0)) throw Error(ErrorCode::ConfigInvalid, "constants C must exceed 1");
    return *this;
}

json DensityFamily::to_json() const {
    json out{{"name", name},
             {"params", params},
             {"d", d},
             {"f", f.description},
             {"approximant", approximant == Approximant::Truncate ? "truncate" : "cap"},
             {"nest", nest.to_json()},
             {"p", p.to_json()},
             {"q", q.to_json()},
             {"r", r.to_json()},
             {"constants", jreals(constants)},
             {"tail_block", tail_block}};
    return out;
}

std::string to_string(Condition c) {
    switch (c) {
    case Condition::Aa: return "Aa";
    case Condition::Ab1: return "Ab1";
    case Condition::Ab2: return "Ab2";
    case Condition::Ac1: return "Ac1";
    case Condition::Ac2: return "Ac2";
    case Condition::Sb: return "Sb";
    case Condition::Sc: return "Sc";
    }
    return "?";
}

std::string to_string(Verdict v) {
    switch (v) {
    case Verdict::TendsToZero: return "tends-to-zero";
    case Verdict::BoundedAway: return "bounded-away";
    case Verdict::Diverges: return "diverges";
    case Verdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

Condition condition_from_string(const std::string& s) {
    for (auto c : {Condition::Aa, Condition::Ab1, Condition::Ab2, Condition::Ac1, Condition::Ac2, Condition::Sb,
                   Condition::Sc})
        if (to_string(c) == s) return c;
    throw Error(ErrorCode::ConfigInvalid, "unknown condition '" + s + "'");
}

Verdict classify_sequence(const std::vector<long>& indices, const std::vector<double>& values, double* slope) {
    if (indices.size() != values.size() || values.empty())
        throw Error(ErrorCode::DimensionMismatch, "indices and values differ in length");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < values.size(); ++i)
        if (values[i] > 0.0 && std::isfinite(values[i])) {
            lx.push_back(std::log(static_cast<double>(indices[i])));
            ly.push_back(std::log(values[i]));
        }
    const double first = values.front(), last = values.back();
    double s = lx.size() >= 2 ? least_squares_slope(lx, ly) : 0.0;
    if (last == 0.0 && !lx.empty()) s = -kInf;
    if (slope) *slope = s;

    const std::size_t m = values.size();
    const std::size_t tail = m >= 3 ? m - 3 : 0;
    for (std::size_t i = tail; i < m; ++i)
        if (std::isinf(values[i])) return Verdict::Diverges;
    if (std::all_of(values.begin(), values.end(), [](double v) { return v == 0.0; })) return Verdict::TendsToZero;
    if (last < 0.1 * first && s < -0.2) return Verdict::TendsToZero;
    if (m >= 3 && values[m - 2] >= values[m - 3] && values[m - 1] >= values[m - 2] &&
        values[m - 1] > 1.1 * values[m - 3])
        return Verdict::Diverges;
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    if (std::abs(s) <= 0.05 && *lo > 0.0 && *hi <= 2.0 * *lo) return Verdict::BoundedAway;
    return Verdict::Inconclusive;
}

json ConditionReport::to_json() const {
    json rows = json::array();
    for (std::size_t i = 0; i < values.size(); ++i) {
        json row{{"values", jreals(values[i])}, {"slope", jreal(slopes[i])}, {"verdict", to_string(row_verdicts[i])}};
        if (!constants.empty()) row["C"] = jreal(constants[i]);
        rows.push_back(row);
    }
    return {{"condition", to_string(which)},
            {"indices", indices},
            {"rows", rows},
            {"heuristic", heuristic},
            {"verdict", to_string(verdict)},
            {"note", note}};
}

std::vector<long> default_indices() { return {4, 8, 16, 32, 64, 128}; }

ConditionReport check_condition(const DensityFamily& fam, Condition which, const std::vector<long>& indices,
                                const MeasureRep* probe) {
    require_indices(indices);
    fam.checked(indices);
    ConditionReport rep;
    rep.which = which;
    rep.indices = indices;
    rep.heuristic.assign(indices.size(), false);
    const bool scaled_condition = which == Condition::Ab2 || which == Condition::Ac2;
    if (scaled_condition) rep.constants = fam.constants;
    const std::size_t rows = scaled_condition ? fam.constants.size() : 1;
    rep.values.assign(rows, std::vector<double>(indices.size(), 0.0));

    std::function<double(double)> weight;
    if (which == Condition::Sb || which == Condition::Sc) {
        if (!probe) throw Error(ErrorCode::ConfigInvalid, "conditions Sb and Sc need a probe measure");
        probe->checked();
        if (probe->dim != fam.d) throw Error(ErrorCode::DimensionMismatch, "probe and family dimensions differ");
        if (fam.d != 1 && fam.d != 3) throw Error(ErrorCode::UnsupportedDimension, "Sb and Sc need d = 1 or d = 3");
        if (fam.d == 3 && probe->has_atoms())
            throw Error(ErrorCode::NotFiniteEnergy, "atoms in R^3 have unbounded potential");
        auto masses = radial_masses(*probe);
        weight = [masses = std::move(masses), d = fam.d](double r) {
            double sum = 0.0;
            for (const auto& [s, m] : masses) sum += m * shell_kernel(d, r, s);
            return sum;
        };
    }

    for (std::size_t i = 0; i < indices.size(); ++i) {
        const long n = indices[i];
        const auto Fn = fam.F(n);
        const auto outside = Fn.complement();
        switch (which) {
        case Condition::Aa: {
            // With truncation f - f_n vanishes on F_n, so the integral has an empty domain.
            if (fam.approximant == Approximant::Truncate) {
                rep.values[0][i] = 0.0;
            } else {
                const double pn = fam.p(n);
                const auto part = radial_power_integral(fam.f, pn, Fn, fam.d, Transform::Excess, static_cast<double>(n),
                                                        fam.tail_block);
                rep.values[0][i] = norm_from(part.value, pn);
                rep.heuristic[i] = part.heuristic;
            }
            break;
        }
        case Condition::Ab1: {
            const auto part = tail_sum(fam, n, fam.q, [&](double s, const RadialRegion& g) {
                return fam.approximant_integral(n, s, g);
            });
            rep.values[0][i] = part.value;
            rep.heuristic[i] = part.heuristic;
            break;
        }
        case Condition::Ac1: {
            const auto part = tail_sum(fam, n, fam.r, [&](double s, const RadialRegion& g) {
                return radial_power_integral(fam.f, s, g, fam.d, Transform::Plain, kInf, fam.tail_block);
            });
            rep.values[0][i] = part.value;
            rep.heuristic[i] = part.heuristic;
            break;
        }
        case Condition::Ab2:
        case Condition::Ac2: {
            const bool b = which == Condition::Ab2;
            const double s = b ? fam.q(n) : fam.r(n);
            const auto part = b ? fam.approximant_integral(n, s, outside)
                                : radial_power_integral(fam.f, s, outside, fam.d, Transform::Plain, kInf, fam.tail_block);
            for (std::size_t c = 0; c < rows; ++c) rep.values[c][i] = scaled(part.value, fam.constants[c], s);
            rep.heuristic[i] = part.heuristic;
            break;
        }
        case Condition::Sb: {
            const auto part = radial_weighted_integral(fam.f, weight, outside, fam.d, Transform::Plain, kInf, fam.tail_block);
            rep.values[0][i] = part.value;
            rep.heuristic[i] = part.heuristic;
            break;
        }
        case Condition::Sc: {
            // sup over the sampled approximants and their limit f
            auto best = radial_weighted_integral(fam.f, weight, outside, fam.d, Transform::Plain, kInf, fam.tail_block);
            for (long m : indices) {
                const auto part = fam.approximant == Approximant::Truncate
                                      ? radial_weighted_integral(fam.f, weight, outside.intersect(fam.F(m)), fam.d,
                                                                 Transform::Plain, kInf, fam.tail_block)
                                      : radial_weighted_integral(fam.f, weight, outside, fam.d, Transform::Capped,
                                                                 static_cast<double>(m), fam.tail_block);
                best.value = std::max(best.value, part.value);
                best.heuristic = best.heuristic || part.heuristic;
            }
            rep.values[0][i] = best.value;
            rep.heuristic[i] = best.heuristic;
            break;
        }
        }
    }

    rep.slopes.resize(rows);
    rep.row_verdicts.resize(rows);
    bool all_zero_trend = true;
    for (std::size_t c = 0; c < rows; ++c) {
        rep.row_verdicts[c] = classify_sequence(indices, rep.values[c], &rep.slopes[c]);
        all_zero_trend = all_zero_trend && rep.row_verdicts[c] == Verdict::TendsToZero;
    }
    if (all_zero_trend) {
        rep.verdict = Verdict::TendsToZero;
    } else {
        rep.verdict = Verdict::Inconclusive;
        for (auto v : rep.row_verdicts)
            if (v != Verdict::TendsToZero) {
                rep.verdict = v;
                break;
            }
    }
    if (scaled_condition) rep.note = "pass requires every probed C";
    if (std::any_of(rep.heuristic.begin(), rep.heuristic.end(), [](bool h) { return h; }))
        rep.note += std::string(rep.note.empty() ? "" : "; ") + "some tail sums are uncertified";
    return rep;
}

DensityFamily corpus_example(const std::string& name, const json& params) {
    DensityFamily fam;
    fam.name = name;
    fam.params = params;
    fam.d = params.value("d", 2);
    if (fam.d < 1) throw Error(ErrorCode::ConfigInvalid, "dimension must be positive");
    const double d = fam.d;
    if (name == "power_beta") {
        const double beta = params.contains("beta") ? real_from_json(params.at("beta")) : 1.0;
        if (!(beta > 0.0 && beta < d)) throw Error(ErrorCode::ConfigInvalid, "power_beta needs 0 < beta < d");
        fam.f.pieces.push_back(RadialPiece::power(1.0, -beta, 0.0, kInf));
        fam.f.description = "|x|^-" + format_real(beta);
        fam.r.value = (d + 1.0) / beta;
        fam.params["beta"] = beta;
    } else if (name == "annulus_spikes") {
        const double a = params.contains("a") ? real_from_json(params.at("a")) : 1.0;
        const double b = params.contains("b") ? real_from_json(params.at("b")) : 1.0;
        if (!(a >= 1.0 && b >= 1.0)) throw Error(ErrorCode::ConfigInvalid, "annulus_spikes needs a, b >= 1");
        const int di = fam.d;
        fam.f.series.push_back(RadialSeries{[a, di](long j) {
                                                const double x = static_cast<double>(j);
                                                return RadialPiece::thin_shell(1.0, -di * a, 1.0 / x,
                                                                               std::pow(x, -2.0 * a - 2.0), di);
                                            },
                                            2, false, "inner spikes"});
        fam.f.series.push_back(RadialSeries{[b, di](long j) {
                                                const double x = static_cast<double>(j);
                                                const double w = std::pow(x, -2.0 * b - 2.0);
                                                return RadialPiece::thin_shell(1.0, di * b, x - w, w, di);
                                            },
                                            2, true, "outer spikes"});
        fam.f.description = "inner and outer shell spikes";
        fam.nest.kind = "annulus";
        fam.r.value = 2.0;
        fam.params["a"] = a;
        fam.params["b"] = b;
    } else if (name == "log_singular") {
        const int di = fam.d;
        fam.f.pieces.push_back(RadialPiece{1.0, -d, -2.0, 0.0, std::exp(-1.0)});
        fam.f.series.push_back(RadialSeries{[di](long j) {
                                                const double x = static_cast<double>(j);
                                                return RadialPiece::power(1.0, -di + 1.0 / std::log(x + 1.0), x, x + 1.0);
                                            },
                                            1, true, "unit shells"});
        fam.f.description = "|x|^-d (log|x|)^-2 near 0 plus shell powers";
        fam.r.kind = "log";
    } else if (name == "counterexample_i") {
        fam.f.pieces.push_back(RadialPiece::power(1.0, -1.0, 1.0, kInf));
        fam.f.description = "|x|^-1 on |x| >= 1";
        fam.r.value = d + 1.0;
    } else if (name == "counterexample_ii") {
        const double delta = params.contains("delta") ? real_from_json(params.at("delta")) : 2.0;
        if (!(delta > 1.0)) throw Error(ErrorCode::ConfigInvalid, "counterexample_ii needs delta > 1");
        const int di = fam.d;
        fam.f.series.push_back(RadialSeries{[di](long k) {
                                                const double x = 2.0 * k - 1.0;
                                                return RadialPiece::thin_shell(1.0, di, x, std::pow(x, -3.0), di);
                                            },
                                            1, true, "odd spikes"});
        fam.f.series.push_back(RadialSeries{[di, delta](long k) {
                                                const double x = 2.0 * k;
                                                return RadialPiece::thin_shell(
                                                    1.0, -di, x, std::pow(x, -delta * std::log(x + 2.0)), di);
                                            },
                                            1, true, "even spikes"});
        fam.f.description = "alternating shell spikes";
        fam.nest.power = 1.0 / d;
        fam.r.kind = "parity_log";
        fam.r.value = 1.0;
        fam.params["delta"] = delta;
    } else {
        throw Error(ErrorCode::ConfigInvalid, "unknown corpus example '" + name + "'");
    }
    fam.params["d"] = fam.d;
    return fam;
}

DensityFamily family_from_json(const json& doc) {
    DensityFamily fam;
    if (doc.contains("corpus")) {
        fam = corpus_example(doc.at("corpus").get<std::string>(), doc.value("params", json::object()));
    } else {
        fam.name = doc.value("name", std::string("custom"));
        fam.d = doc.value("d", 2);
        fam.f = continuum::radial_from_json(doc.at("f"));
        if (doc.contains("nest")) fam.nest = Nest::from_json(doc.at("nest"));
        if (doc.contains("p")) fam.p = Exponents::from_json(doc.at("p"));
        if (doc.contains("q")) fam.q = Exponents::from_json(doc.at("q"));
        if (doc.contains("r")) fam.r = Exponents::from_json(doc.at("r"));
        const auto approx = doc.value("approximant", std::string("truncate"));
        if (approx == "truncate") fam.approximant = Approximant::Truncate;
        else if (approx == "cap") fam.approximant = Approximant::Cap;
        else throw Error(ErrorCode::ConfigInvalid, "approximant must be truncate or cap");
    }
    if (doc.contains("tail_block")) fam.tail_block = doc.at("tail_block").get<long>();
    if (doc.contains("constants")) {
        fam.constants.clear();
        for (const auto& c : doc.at("constants")) fam.constants.push_back(real_from_json(c));
    }
    return fam;
}

json MembershipReport::to_json() const {
    return {{"family", family},
            {"indices", indices},
            {"Aa", aa.to_json()},
            {"Ab1", ab1.to_json()},
            {"Ab2", ab2.to_json()},
            {"Ac1", ac1.to_json()},
            {"Ac2", ac2.to_json()},
            {"Ab", {{"verdict", to_string(ab)}, {"branch", ab_branch}}},
            {"Ac", {{"verdict", to_string(ac)}, {"branch", ac_branch}}},
            {"in_A", in_A},
            {"local_mass", jreals(local_mass)},
            {"local_integrability", local_integrability}};
}

std::string MembershipReport::summary() const {
    std::string out = "family: " + family + "\n";
    for (const auto* r : {&aa, &ab1, &ab2, &ac1, &ac2}) out += to_string(r->which) + ": " + to_string(r->verdict) + "\n";
    out += "Ab: " + to_string(ab) + " (branch " + ab_branch + ")\n";
    out += "Ac: " + to_string(ac) + " (branch " + ac_branch + ")\n";
    out += "local integrability: " + local_integrability + "\n";
    out += std::string("\xF0\x9D\x94\x84: ") + (in_A ? "PASS" : "FAIL") + "\n";
    return out;
}

MembershipReport verify_membership(const DensityFamily& fam, const std::vector<long>& indices) {
    MembershipReport rep;
    rep.family = fam.name;
    rep.indices = indices;
    rep.aa = check_condition(fam, Condition::Aa, indices);
    rep.ab1 = check_condition(fam, Condition::Ab1, indices);
    rep.ab2 = check_condition(fam, Condition::Ab2, indices);
    rep.ac1 = check_condition(fam, Condition::Ac1, indices);
    rep.ac2 = check_condition(fam, Condition::Ac2, indices);
    const auto best_of = [](const ConditionReport& one, const ConditionReport& two, const std::string& a,
                            const std::string& b, Verdict& verdict, std::string& branch) {
        const bool p1 = one.verdict == Verdict::TendsToZero, p2 = two.verdict == Verdict::TendsToZero;
        branch = p1 && p2 ? a + "+" + b : p1 ? a : p2 ? b : "none";
        verdict = p1 || p2 ? Verdict::TendsToZero : one.verdict;
    };
    best_of(rep.ab1, rep.ab2, "Ab1", "Ab2", rep.ab, rep.ab_branch);
    best_of(rep.ac1, rep.ac2, "Ac1", "Ac2", rep.ac, rep.ac_branch);
    rep.in_A = rep.aa.verdict == Verdict::TendsToZero && rep.ab == Verdict::TendsToZero && rep.ac == Verdict::TendsToZero;
    bool integrable = true;
    for (long n : indices) {
        const double m = radial_power_integral(fam.f, 1.0, fam.F(n), fam.d, Transform::Plain, kInf, fam.tail_block).value;
        rep.local_mass.push_back(m);
        integrable = integrable && std::isfinite(m);
    }
    rep.local_integrability = integrable ? "integrable" : "inconclusive-negative";
    if (!integrable) rep.in_A = false;
    return rep;
}

}  // namespace pcaf::cond
