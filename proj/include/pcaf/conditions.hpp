#pragma once

// Numeric checks of the approximation conditions (Aa), (Ab1), (Ab2), (Ac1), (Ac2) and of
// the potential tail conditions (Sb), (Sc) for radial densities on R^d.

#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pcaf/measure.hpp"
#include "pcaf/radial.hpp"

namespace pcaf::cond {

using continuum::MeasureRep;
using continuum::RadialDensity;
using continuum::RadialRegion;

/// f_n = f 1_{F_n} (Truncate) or f_n = min(f, n) (Cap).
enum class Approximant { Truncate, Cap };

/// F_n as a radial region: ball of radius a n^s, or annulus [(1/n)^{1/d}, n^{1/d}].
struct Nest {
    std::string kind = "ball";  ///< "ball" or "annulus"
    double scale = 1.0;
    double power = 1.0;

    RadialRegion operator()(long n, int d) const;
    nlohmann::json to_json() const;
    static Nest from_json(const nlohmann::json& doc);
};

/// Exponent sequence: constant, log(n + shift), or by parity (even / odd rules).
struct Exponents {
    std::string kind = "constant";  ///< "constant", "log", "parity_log"
    double value = 1.0;             ///< constant value, or the odd-index value for parity_log
    double shift = 1.0;             ///< log(n + shift)

    double operator()(long n) const;
    nlohmann::json to_json() const;
    static Exponents from_json(const nlohmann::json& doc);
};

struct DensityFamily {
    std::string name;
    nlohmann::json params;
    int d = 2;
    RadialDensity f;
    Approximant approximant = Approximant::Truncate;
    Nest nest;
    Exponents p, q, r;
    std::vector<double> constants{1.1, 2.0, 10.0};
    long tail_block = 200;  ///< block length of every tail sum (see sum_series)

    RadialRegion F(long n) const { return nest(n, d); }
    /// Gamma_k = F_{k+1} \ F_k.
    RadialRegion gamma(long k) const { return F(k + 1).minus(F(k)); }
    /// int_region (f_n)^s dx.
    continuum::RadialIntegral approximant_integral(long n, double s, const RadialRegion& region) const;
    /// Throws ConfigInvalid on exponents below 1 or a nest that is not increasing.
    const DensityFamily& checked(const std::vector<long>& indices) const;
    nlohmann::json to_json() const;
};

enum class Condition { Aa, Ab1, Ab2, Ac1, Ac2, Sb, Sc };
enum class Verdict { TendsToZero, BoundedAway, Diverges, Inconclusive };

std::string to_string(Condition c);
std::string to_string(Verdict v);
Condition condition_from_string(const std::string& s);

/// Classification of a sampled sequence v(n_i):
///   diverges       one of the last three values is infinite, or the last three increase
///                  monotonically by more than 10% overall;
///   tends-to-zero  all values vanish, or last < 0.1 first and the log-log slope < -0.2;
///   bounded-away   |slope| <= 0.05 and max / min <= 2;
///   inconclusive   otherwise.
/// The slope is the least-squares fit over the positive finite values, and -infinity when
/// the sequence reaches exactly zero after a positive value.
Verdict classify_sequence(const std::vector<long>& indices, const std::vector<double>& values, double* slope = nullptr);

struct ConditionReport {
    Condition which = Condition::Aa;
    std::vector<long> indices;
    std::vector<double> constants;               ///< C values (Ab2, Ac2), empty otherwise
    std::vector<std::vector<double>> values;     ///< one row per C, or a single row
    std::vector<double> slopes;
    std::vector<Verdict> row_verdicts;
    std::vector<bool> heuristic;                 ///< per index: a tail sum was not certified
    Verdict verdict = Verdict::Inconclusive;     ///< tends-to-zero only if every row does
    std::string note;

    nlohmann::json to_json() const;
};

std::vector<long> default_indices();

/// Sb: int_{F_k^c} U nu f dx at k = indices; Sc: sup_n int_{F_k^c} U nu f_n dx (n over
/// the indices and the limit f). U nu is the 1-resolvent potential of the probe, averaged
/// over spheres (d = 1 or 3).
ConditionReport check_condition(const DensityFamily& family, Condition which, const std::vector<long>& indices,
                                const MeasureRep* probe = nullptr);

DensityFamily corpus_example(const std::string& name, const nlohmann::json& params = nlohmann::json::object());
DensityFamily family_from_json(const nlohmann::json& doc);

struct MembershipReport {
    std::string family;
    ConditionReport aa, ab1, ab2, ac1, ac2;
    Verdict ab = Verdict::Inconclusive, ac = Verdict::Inconclusive;
    std::string ab_branch, ac_branch;  ///< passing branch, or "none"
    bool in_A = false;
    std::vector<long> indices;
    std::vector<double> local_mass;    ///< int_{F_n} f dx
    std::string local_integrability;   ///< "integrable" or "inconclusive-negative"

    nlohmann::json to_json() const;
    std::string summary() const;
};

MembershipReport verify_membership(const DensityFamily& family, const std::vector<long>& indices = default_indices());

}  // namespace pcaf::cond
