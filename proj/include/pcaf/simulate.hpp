#pragma once

// Path sampling and additive-functional estimators for Brownian motion (d = 1, 3)
// and Lipschitz one-dimensional diffusions.

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "pcaf/measure.hpp"

namespace pcaf::sim {

using continuum::MeasureRep;

/// splitmix64 finaliser; path_seed(master, i) is the sub-seed of path i.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t path_seed(std::uint64_t master, std::uint64_t index);

/// Worker count from PCAF_LAB_THREADS (default 1, at least 1).
int worker_count();

/// Declarative coefficient for a one-dimensional SDE.
///   constant   {a}            a
///   affine     {a, b}         a + b x
///   sine       {a, b, w, ph}  a + b sin(w x + ph)
///   polynomial {c0, c1, ...}  sum c_k x^k, degree <= 1 after trimming zeros
struct Coefficient {
    std::string kind = "constant";
    std::vector<double> params{0.0};

    double operator()(double x) const;
    /// Throws NonLipschitzCoefficient / ConfigInvalid.
    const Coefficient& checked() const;
    nlohmann::json to_json() const;
    static Coefficient from_json(const nlohmann::json& doc);
    static Coefficient constant(double a) { return {"constant", {a}}; }
};

enum class ModelKind { BM1D, BM3D, Diffusion1D };

struct ProcessModel {
    ModelKind kind = ModelKind::BM1D;
    Coefficient drift = Coefficient::constant(0.0);
    Coefficient volatility = Coefficient::constant(1.0);

    int dim() const { return kind == ModelKind::BM3D ? 3 : 1; }
    std::string name() const;
    nlohmann::json to_json() const;
    static ProcessModel from_json(const nlohmann::json& doc);
    static ProcessModel bm(int d);
    static ProcessModel diffusion(Coefficient drift, Coefficient volatility);
};

struct PathSample {
    ProcessModel model;
    double horizon = 0.0;
    double dt = 0.0;
    std::uint64_t seed = 0;
    std::vector<double> times;
    std::vector<double> states;  ///< row k holds X_{t_k}, dim() entries per row

    int dim() const { return model.dim(); }
    std::size_t size() const { return times.size(); }
    std::span<const double> state(std::size_t k) const {
        return {states.data() + k * static_cast<std::size_t>(dim()), static_cast<std::size_t>(dim())};
    }
};

/// Grid t_k = k dt with the last time clipped to T. Brownian increments are exact
/// N(0, dt) draws; Diffusion1D uses Euler-Maruyama. Deterministic in `seed`.
PathSample sample_path(const ProcessModel& model, double horizon, double dt, std::uint64_t seed,
                       std::vector<double> start = {});

/// Binary dump: magic "PCAFPATH", model name, dt, T, seed, point count, dimension,
/// then times and states as little-endian 64-bit floats.
void write_path(std::ostream& out, const PathSample& path);
PathSample read_path(std::istream& in);

/// Nonnegative functions of the state used as PCAF integrands.
///   constant  {value}
///   power     {coef, beta, radius}     coef |x|^{-beta} on |x| <= radius
///   hat       {center..., half_width, height}
///   indicator {lo..., hi...}           1 on the box
/// `cap` is applied after evaluation: min(f(x), cap).
struct ScalarField {
    std::string kind = "constant";
    std::vector<double> params{0.0};
    double cap = std::numeric_limits<double>::infinity();

    double operator()(std::span<const double> x) const;
    double base(std::span<const double> x) const;
    ScalarField capped(double level) const;
    const ScalarField& checked(int dim) const;
    std::string describe() const;
    nlohmann::json to_json() const;
    static ScalarField from_json(const nlohmann::json& doc);
    static ScalarField constant(double value) { return {"constant", {value}}; }
    static ScalarField power(double coef, double beta, double radius) { return {"power", {coef, beta, radius}}; }
    static ScalarField hat(double center, double half_width, double height = 1.0) {
        return {"hat", {center, half_width, height}};
    }
};

/// R_1 f(x) for Brownian motion on the line (constant fields for every model).
double resolvent_field(const ProcessModel& model, const ScalarField& f, std::span<const double> x);

struct PcafTrajectory {
    std::vector<double> times;
    std::vector<double> values;
    std::string provenance;
};

enum class Weight { None, Exponential };

/// Trapezoidal A_t = int_0^t w(s) min(f(X_s), f_cap) ds. The exponential weight e^{-s}
/// is integrated exactly on each step, so constant integrands are exact. A grid state at
/// which f is infinite (a path sitting exactly on a singularity, e.g. X_0 = 0) is
/// skipped: its step takes the value at the other endpoint.
PcafTrajectory occupation_pcaf(const PathSample& path, const ScalarField& f, double f_cap = 1e6,
                               Weight weight = Weight::None);
/// Same functional restricted to the window [t_{k0}, t_{k1}], started from 0.
PcafTrajectory occupation_pcaf_window(const PathSample& path, const ScalarField& f, std::size_t k0, std::size_t k1,
                                      double f_cap = 1e6, Weight weight = Weight::None);

/// Uniform bins [e_j, e_{j+1}), e_j = -width/2 + j width, so the origin is a bin centre.
/// Requested window [lo, hi] is snapped outward to bin edges; with widen set the window
/// is also extended to cover the path.
struct BinSpec {
    double width = 0.0;  ///< 0 selects 10 sqrt(dt)
    double lo = -1.0;
    double hi = 1.0;
    bool widen = true;
};

/// Occupation density of a one-dimensional path: each step [t_k, t_{k+1}] puts dt/2 into
/// the bin of X_{t_k} and dt/2 into the bin of X_{t_{k+1}}.
class LocalTimeField {
public:
    LocalTimeField(const PathSample& path, BinSpec bins);

    double width() const { return width_; }
    long first_bin() const { return first_; }
    long bin_count() const { return count_; }
    double bin_lo(long j) const { return width_ * (static_cast<double>(j) - 0.5); }
    double bin_hi(long j) const { return width_ * (static_cast<double>(j) + 0.5); }
    double window_lo() const { return bin_lo(first_); }
    double window_hi() const { return bin_lo(first_ + count_); }
    long bin_of(double x) const;
    const std::vector<double>& times() const { return times_; }

    /// l(t_k, bin j) = occupation time of bin j up to t_k divided by the width.
    double value(std::size_t k, long j) const;
    /// l(t_k, j) for every bin at one time.
    std::vector<double> profile(std::size_t k) const;
    /// l(t_k, j) for every grid time in one bin.
    std::vector<double> trajectory(long j) const;
    /// Bin index of each grid state.
    const std::vector<long>& assignment() const { return bin_; }

private:
    std::vector<double> times_;
    std::vector<long> bin_;
    double width_;
    long first_;
    long count_;
};

LocalTimeField local_time_field(const PathSample& path, BinSpec bins);

/// Mass of mu in each bin of the field's window. Throws SupportOutsideBins when mu
/// charges the complement of the window.
std::vector<double> bin_masses(const LocalTimeField& field, const MeasureRep& mu);

/// A_t = sum_j l(t, j) mu(bin_j); O(number of grid times).
PcafTrajectory measure_pcaf(const LocalTimeField& field, const MeasureRep& mu);
PcafTrajectory measure_pcaf(const LocalTimeField& field, const std::vector<double>& masses);

/// max over grid times t <= T of |a_t - b_t|; throws GridMismatch unless the grids agree.
double sup_distance(const PcafTrajectory& a, const PcafTrajectory& b, double horizon);

/// Fixed-order pairwise sum; the result does not depend on how work was split.
double pairwise_sum(std::span<const double> xs);

/// One family member: a density integrated along the path, or a measure paired with
/// the local-time field.
struct Member {
    std::optional<ScalarField> density;
    std::optional<MeasureRep> measure;
    std::string label;
};

struct McConfig {
    ProcessModel model;
    double horizon = 1.0;
    double dt = 1e-3;
    long paths = 1000;
    std::uint64_t seed = 1;
    double f_cap = 1e6;
    BinSpec bins;
};

struct McRow {
    int n = 0;
    double mean = 0.0;
    double std_error = 0.0;
    double p90 = 0.0;
    double p90_std_error = 0.0;
    /// stderr of the per-path difference to the previous index (0 for the first row).
    double diff_std_error = 0.0;
    long paths = 0;
    std::uint64_t seed = 0;
};

struct McReport {
    std::vector<McRow> rows;
    double slope = 0.0;  ///< least-squares slope of log mean against log n over positive means
    bool strictly_decreasing = false;  ///< each drop exceeds 2 paired standard errors
    bool decreasing_unpaired = false;  ///< each drop exceeds 2 max(stderr) of the two means
    bool all_zero = false;
};

/// Common random numbers: every index sees the same ensemble of paths.
McReport mc_convergence(const McConfig& config, const Member& reference, const std::vector<int>& indices,
                        const std::vector<Member>& members);

struct MartingaleCheckpoint {
    double t = 0.0;
    double mean = 0.0;
    double std_error = 0.0;
    double max_abs = 0.0;
    bool pass = false;  ///< |mean| <= 3 stderr, or |mean| <= 1e-12 when the residual is deterministic
};

struct MartingaleReport {
    std::vector<MartingaleCheckpoint> checkpoints;
    bool pass = false;
};

/// M(t) - M(0) with M(t) = int_0^t e^{-s} f(X_s) ds + e^{-t} R_1 f(X_t), at T/4, T/2, T.
MartingaleReport martingale_residual(const McConfig& config, const ScalarField& f);

}  // namespace pcaf::sim
