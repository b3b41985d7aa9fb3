#include "pcaf/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <thread>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "pcaf/error.hpp"
#include "pcaf/kernel.hpp"
#include "pcaf/text.hpp"

namespace pcaf::sim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double norm(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

std::vector<double> params_from_json(const nlohmann::json& doc) {
    std::vector<double> out;
    for (const auto& v : doc) out.push_back(real_from_json(v));
    return out;
}

// Runs body(i) for i in [0, n) on up to worker_count() threads, contiguous chunks per thread.
template <class Body>
void parallel_for(long n, Body&& body) {
    const long workers = std::max(1L, std::min<long>(worker_count(), n));
    if (workers == 1) {
        for (long i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    for (long w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (long i = n * w / workers; i < n * (w + 1) / workers; ++i) body(i);
            } catch (...) {
                errors[static_cast<std::size_t>(w)] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

struct Moments {
    double mean = 0.0;
    double std_error = 0.0;
};

Moments moments(std::span<const double> xs) {
    Moments m;
    const auto n = static_cast<double>(xs.size());
    if (xs.empty()) return m;
    m.mean = pairwise_sum(xs) / n;
    if (xs.size() < 2) return m;
    std::vector<double> sq(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) sq[i] = (xs[i] - m.mean) * (xs[i] - m.mean);
    m.std_error = std::sqrt(pairwise_sum(sq) / (n - 1.0) / n);
    return m;
}

double quantile90(std::vector<double> xs) {
    if (xs.empty()) return 0.0;
    std::sort(xs.begin(), xs.end());
    const auto rank = static_cast<std::size_t>(std::ceil(0.9 * static_cast<double>(xs.size())));
    return xs[std::max<std::size_t>(rank, 1) - 1];
}

// `base` holds uncapped evaluations; a state where f is infinite is a removable point
// and its step uses the value at the other endpoint.
PcafTrajectory accumulate(const std::vector<double>& times, const std::vector<double>& base, double cap,
                          Weight weight, std::size_t k0, std::size_t k1) {
    PcafTrajectory out;
    out.times.assign(times.begin() + static_cast<long>(k0), times.begin() + static_cast<long>(k1) + 1);
    out.values.assign(out.times.size(), 0.0);
    double a = 0.0;
    for (std::size_t k = k0; k < k1; ++k) {
        const double h = times[k + 1] - times[k];
        const double mass = weight == Weight::None ? h : std::exp(-times[k]) * -std::expm1(-h);
        double f0 = std::min(base[k], cap), f1 = std::min(base[k + 1], cap);
        if (std::isinf(base[k]) && !std::isinf(base[k + 1])) f0 = f1;
        if (std::isinf(base[k + 1]) && !std::isinf(base[k])) f1 = f0;
        a += 0.5 * (f0 + f1) * mass;
        out.values[k - k0 + 1] = a;
    }
    return out;
}

std::vector<double> evaluate_along(const PathSample& path, const ScalarField& f) {
    std::vector<double> v(path.size());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = f.base(path.state(k));
    return v;
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t path_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

int worker_count() {
    const char* env = std::getenv("PCAF_LAB_THREADS");
    if (!env || !*env) return 1;
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end == env || n < 1) return 1;
    return static_cast<int>(std::min(n, 256L));
}

// ---------------------------------------------------------------- coefficients

double Coefficient::operator()(double x) const {
    if (kind == "constant") return params[0];
    if (kind == "affine") return params[0] + params[1] * x;
    if (kind == "sine") return params[0] + params[1] * std::sin(params[2] * x + params[3]);
    double v = 0.0;
    for (std::size_t k = params.size(); k-- > 0;) v = v * x + params[k];
    return v;
}

const Coefficient& Coefficient::checked() const {
    const std::map<std::string, std::size_t> arity{{"constant", 1}, {"affine", 2}, {"sine", 4}};
    if (kind == "polynomial") {
        if (params.empty()) throw Error(ErrorCode::ConfigInvalid, "polynomial coefficient needs at least one term");
        for (std::size_t k = 2; k < params.size(); ++k)
            if (params[k] != 0.0)
                throw Error(ErrorCode::NonLipschitzCoefficient,
                            "polynomial of degree " + std::to_string(k) + " is not globally Lipschitz");
    } else {
        const auto it = arity.find(kind);
        if (it == arity.end()) throw Error(ErrorCode::ConfigInvalid, "unknown coefficient kind '" + kind + "'");
        if (params.size() != it->second)
            throw Error(ErrorCode::ConfigInvalid, kind + " coefficient takes " + std::to_string(it->second) + " parameters");
    }
    for (double p : params)
        if (!std::isfinite(p)) throw Error(ErrorCode::ConfigInvalid, "coefficient parameters must be finite");
    return *this;
}

nlohmann::json Coefficient::to_json() const { return {{"kind", kind}, {"params", params}}; }

Coefficient Coefficient::from_json(const nlohmann::json& doc) {
    if (doc.is_number()) return constant(doc.get<double>());
    Coefficient c{doc.at("kind").get<std::string>(), params_from_json(doc.at("params"))};
    c.checked();
    return c;
}

std::string ProcessModel::name() const {
    switch (kind) {
    case ModelKind::BM1D: return "BM1D";
    case ModelKind::BM3D: return "BM3D";
    case ModelKind::Diffusion1D: return "Diffusion1D";
    }
    return "?";
}

nlohmann::json ProcessModel::to_json() const {
    nlohmann::json doc{{"kind", name()}};
    if (kind == ModelKind::Diffusion1D) {
        doc["drift"] = drift.to_json();
        doc["volatility"] = volatility.to_json();
    }
    return doc;
}

ProcessModel ProcessModel::from_json(const nlohmann::json& doc) {
    const std::string kind = doc.is_string() ? doc.get<std::string>() : doc.at("kind").get<std::string>();
    if (kind == "BM1D") return bm(1);
    if (kind == "BM3D") return bm(3);
    if (kind == "Diffusion1D")
        return diffusion(Coefficient::from_json(doc.at("drift")), Coefficient::from_json(doc.at("volatility")));
    throw Error(ErrorCode::ConfigInvalid, "unknown model '" + kind + "'");
}

ProcessModel ProcessModel::bm(int d) {
    if (d != 1 && d != 3) throw Error(ErrorCode::UnsupportedDimension, "Brownian motion in dimension " + std::to_string(d));
    ProcessModel m;
    m.kind = d == 1 ? ModelKind::BM1D : ModelKind::BM3D;
    return m;
}

ProcessModel ProcessModel::diffusion(Coefficient drift, Coefficient volatility) {
    drift.checked();
    volatility.checked();
    ProcessModel m;
    m.kind = ModelKind::Diffusion1D;
    m.drift = std::move(drift);
    m.volatility = std::move(volatility);
    return m;
}

// ---------------------------------------------------------------- paths

PathSample sample_path(const ProcessModel& model, double horizon, double dt, std::uint64_t seed,
                       std::vector<double> start) {
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw Error(ErrorCode::NonpositiveStep, "horizon T = " + format_real(horizon));
    if (!(dt > 0.0) || dt > horizon) throw Error(ErrorCode::NonpositiveStep, "step dt = " + format_real(dt) + " for T = " + format_real(horizon));
    const int d = model.dim();
    if (start.empty()) start.assign(static_cast<std::size_t>(d), 0.0);
    if (static_cast<int>(start.size()) != d) throw Error(ErrorCode::DimensionMismatch, "start point dimension");

    const auto steps = static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
    PathSample path;
    path.model = model;
    path.horizon = horizon;
    path.dt = dt;
    path.seed = seed;
    path.times.resize(steps + 1);
    for (std::size_t k = 0; k < steps; ++k) path.times[k] = static_cast<double>(k) * dt;
    path.times[steps] = horizon;
    path.states.resize((steps + 1) * static_cast<std::size_t>(d));
    std::copy(start.begin(), start.end(), path.states.begin());

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    double* x = path.states.data();
    for (std::size_t k = 0; k < steps; ++k) {
        const double h = path.times[k + 1] - path.times[k];
        const double sq = std::sqrt(h);
        double* next = x + d;
        if (model.kind == ModelKind::Diffusion1D) {
            next[0] = x[0] + model.drift(x[0]) * h + model.volatility(x[0]) * sq * normal(rng);
        } else {
            for (int i = 0; i < d; ++i) next[i] = x[i] + sq * normal(rng);
        }
        x = next;
    }
    return path;
}

void write_path(std::ostream& out, const PathSample& path) {
    const auto put_u64 = [&](std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); };
    const auto put_f64 = [&](double v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); };
    out.write("PCAFPATH", 8);
    const std::string model = path.model.to_json().dump();
    put_u64(model.size());
    out.write(model.data(), static_cast<std::streamsize>(model.size()));
    put_f64(path.dt);
    put_f64(path.horizon);
    put_u64(path.seed);
    put_u64(path.size());
    put_u64(static_cast<std::uint64_t>(path.dim()));
    for (double t : path.times) put_f64(t);
    for (double x : path.states) put_f64(x);
    if (!out) throw Error(ErrorCode::IoFailure, "writing path dump");
}

PathSample read_path(std::istream& in) {
    const auto get_u64 = [&] {
        std::uint64_t v = 0;
        in.read(reinterpret_cast<char*>(&v), sizeof v);
        return v;
    };
    const auto get_f64 = [&] {
        double v = 0;
        in.read(reinterpret_cast<char*>(&v), sizeof v);
        return v;
    };
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, "PCAFPATH", 8) != 0) throw Error(ErrorCode::IoFailure, "not a path dump");
    std::string model(get_u64(), '\0');
    in.read(model.data(), static_cast<std::streamsize>(model.size()));
    PathSample path;
    path.model = ProcessModel::from_json(nlohmann::json::parse(model));
    path.dt = get_f64();
    path.horizon = get_f64();
    path.seed = get_u64();
    const auto n = get_u64();
    const auto d = get_u64();
    if (static_cast<int>(d) != path.dim()) throw Error(ErrorCode::IoFailure, "dimension in dump does not match model");
    path.times.resize(n);
    path.states.resize(n * d);
    for (auto& t : path.times) t = get_f64();
    for (auto& x : path.states) x = get_f64();
    if (!in) throw Error(ErrorCode::IoFailure, "truncated path dump");
    return path;
}

// ---------------------------------------------------------------- integrands

double ScalarField::base(std::span<const double> x) const {
    if (kind == "constant") return params[0];
    if (kind == "power") {
        const double r = norm(x);
        if (r > params[2]) return 0.0;
        return r == 0.0 ? kInf : params[0] * std::pow(r, -params[1]);
    }
    if (kind == "hat") {
        const std::size_t d = x.size();
        const double h = params[d], height = params[d + 1];
        double v = height;
        for (std::size_t i = 0; i < d; ++i) v *= std::max(0.0, 1.0 - std::abs(x[i] - params[i]) / h);
        return v;
    }
    if (kind == "indicator") {
        const std::size_t d = x.size();
        for (std::size_t i = 0; i < d; ++i)
            if (x[i] < params[i] || x[i] > params[d + i]) return 0.0;
        return 1.0;
    }
    throw Error(ErrorCode::ConfigInvalid, "unknown field kind '" + kind + "'");
}

double ScalarField::operator()(std::span<const double> x) const { return std::min(base(x), cap); }

ScalarField ScalarField::capped(double level) const {
    ScalarField f = *this;
    f.cap = std::min(cap, level);
    return f;
}

const ScalarField& ScalarField::checked(int dim) const {
    const auto need = [&](std::size_t n) {
        if (params.size() != n)
            throw Error(ErrorCode::ConfigInvalid, kind + " field takes " + std::to_string(n) + " parameters in dimension " +
                                                      std::to_string(dim));
    };
    const auto d = static_cast<std::size_t>(dim);
    if (kind == "constant") need(1);
    else if (kind == "power") need(3);
    else if (kind == "hat") need(d + 2);
    else if (kind == "indicator") need(2 * d);
    else throw Error(ErrorCode::ConfigInvalid, "unknown field kind '" + kind + "'");
    if (kind == "constant" && params[0] < 0.0) throw Error(ErrorCode::NegativeEntry, "constant field is negative");
    if (kind == "power" && (params[0] < 0.0 || !(params[2] > 0.0)))
        throw Error(ErrorCode::ConfigInvalid, "power field needs coef >= 0 and radius > 0");
    if (kind == "hat" && (!(params[d] > 0.0) || params[d + 1] < 0.0))
        throw Error(ErrorCode::ConfigInvalid, "hat field needs half_width > 0 and height >= 0");
    if (cap < 0.0) throw Error(ErrorCode::ConfigInvalid, "cap must be nonnegative");
    return *this;
}

std::string ScalarField::describe() const {
    std::string s = kind + "(";
    for (std::size_t i = 0; i < params.size(); ++i) s += (i ? "," : "") + format_real(params[i]);
    s += ")";
    if (std::isfinite(cap)) s += " capped at " + format_real(cap);
    return s;
}

nlohmann::json ScalarField::to_json() const {
    nlohmann::json doc{{"kind", kind}, {"params", params}};
    if (std::isfinite(cap)) doc["cap"] = cap;
    return doc;
}

ScalarField ScalarField::from_json(const nlohmann::json& doc) {
    ScalarField f{doc.at("kind").get<std::string>(), params_from_json(doc.at("params"))};
    if (doc.contains("cap")) f.cap = real_from_json(doc.at("cap"));
    return f;
}

double resolvent_field(const ProcessModel& model, const ScalarField& f, std::span<const double> x) {
    if (f.kind == "constant") return std::min(f.params[0], f.cap);
    if (model.kind != ModelKind::BM1D)
        throw Error(ErrorCode::Unsupported, "R_1 f for non-constant f is only available for BM1D");
    const double x0 = x[0];
    const double c = std::numbers::sqrt2;
    const auto g = [&](double y) { return std::exp(-c * std::abs(x0 - y)) / c; };
    const auto fy = [&](double y) {
        const double v[1] = {y};
        return f(std::span<const double>(v, 1));
    };
    std::vector<double> cuts;
    if (f.kind == "power") {
        const double radius = f.params[2];
        cuts = {-radius, 0.0, radius};
        if (std::isfinite(f.cap) && f.cap > 0.0 && f.params[0] > 0.0) {
            const double rstar = std::pow(f.params[0] / f.cap, 1.0 / f.params[1]);
            if (rstar < radius) {
                cuts.push_back(-rstar);
                cuts.push_back(rstar);
            }
        }
    } else if (f.kind == "hat") {
        const double m = f.params[0], h = f.params[1];
        cuts = {m - h, m, m + h};
        if (std::isfinite(f.cap)) {
            // min(height (1 - |y - m|/h), cap) has kinks where the hat crosses the cap
            const double height = f.params[2];
            if (f.cap < height) {
                cuts.push_back(m - h * (1.0 - f.cap / height));
                cuts.push_back(m + h * (1.0 - f.cap / height));
            }
        }
    } else if (f.kind == "indicator") {
        cuts = {f.params[0], f.params[1]};
    } else {
        throw Error(ErrorCode::ConfigInvalid, "unknown field kind '" + f.kind + "'");
    }
    if (x0 > cuts.front() && x0 < cuts.back()) cuts.push_back(x0);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    boost::math::quadrature::tanh_sinh<double> integrator;
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double a = cuts[i], b = cuts[i + 1];
        sum += integrator.integrate([&](double y) { return g(y) * fy(y); }, a, b);
    }
    return sum;
}

// ---------------------------------------------------------------- additive functionals

PcafTrajectory occupation_pcaf(const PathSample& path, const ScalarField& f, double f_cap, Weight weight) {
    return occupation_pcaf_window(path, f, 0, path.size() - 1, f_cap, weight);
}

PcafTrajectory occupation_pcaf_window(const PathSample& path, const ScalarField& f, std::size_t k0, std::size_t k1,
                                      double f_cap, Weight weight) {
    if (k0 > k1 || k1 >= path.size()) throw Error(ErrorCode::GridMismatch, "window outside the path grid");
    if (!(f_cap > 0.0)) throw Error(ErrorCode::ConfigInvalid, "f_cap must be positive");
    f.checked(path.dim());
    auto out = accumulate(path.times, evaluate_along(path, f), std::min(f.cap, f_cap), weight, k0, k1);
    out.provenance = std::string(weight == Weight::None ? "int " : "int e^-s ") + f.describe() + " ds";
    return out;
}

LocalTimeField::LocalTimeField(const PathSample& path, BinSpec bins) : times_(path.times) {
    if (path.dim() != 1) throw Error(ErrorCode::NotOneDimensional, "local time needs a one-dimensional model, got " + path.model.name());
    width_ = bins.width > 0.0 ? bins.width : 10.0 * std::sqrt(path.dt);
    if (!(bins.hi >= bins.lo)) throw Error(ErrorCode::ConfigInvalid, "bin window has hi < lo");
    bin_.resize(path.size());
    long lo = bin_of(bins.lo), hi = bin_of(bins.hi);
    for (std::size_t k = 0; k < path.size(); ++k) {
        bin_[k] = bin_of(path.states[k]);
        if (bins.widen) {
            lo = std::min(lo, bin_[k]);
            hi = std::max(hi, bin_[k]);
        }
    }
    first_ = lo;
    count_ = hi - lo + 1;
}

long LocalTimeField::bin_of(double x) const { return static_cast<long>(std::floor(x / width_ + 0.5)); }

double LocalTimeField::value(std::size_t k, long j) const {
    double occ = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double h = 0.5 * (times_[i + 1] - times_[i]);
        if (bin_[i] == j) occ += h;
        if (bin_[i + 1] == j) occ += h;
    }
    return occ / width_;
}

std::vector<double> LocalTimeField::profile(std::size_t k) const {
    std::vector<double> occ(static_cast<std::size_t>(count_), 0.0);
    const auto slot = [&](long j) -> double* {
        if (j < first_ || j >= first_ + count_) return nullptr;
        return &occ[static_cast<std::size_t>(j - first_)];
    };
    for (std::size_t i = 0; i < k; ++i) {
        const double h = 0.5 * (times_[i + 1] - times_[i]);
        if (double* s = slot(bin_[i])) *s += h;
        if (double* s = slot(bin_[i + 1])) *s += h;
    }
    for (double& v : occ) v /= width_;
    return occ;
}

std::vector<double> LocalTimeField::trajectory(long j) const {
    std::vector<double> out(times_.size(), 0.0);
    double occ = 0.0;
    for (std::size_t i = 0; i + 1 < times_.size(); ++i) {
        const double h = 0.5 * (times_[i + 1] - times_[i]);
        if (bin_[i] == j) occ += h;
        if (bin_[i + 1] == j) occ += h;
        out[i + 1] = occ / width_;
    }
    return out;
}

LocalTimeField local_time_field(const PathSample& path, BinSpec bins) { return LocalTimeField(path, bins); }

std::vector<double> bin_masses(const LocalTimeField& field, const MeasureRep& mu) {
    if (mu.dim != 1) throw Error(ErrorCode::NotOneDimensional, "measure must be one-dimensional");
    std::vector<double> m(static_cast<std::size_t>(field.bin_count()), 0.0);
    const double lo = field.window_lo(), hi = field.window_hi();
    const double tol = 1e-12 * std::max(1.0, mu.total_mass());
    for (const auto& a : mu.atoms) {
        if (a.mass == 0.0) continue;
        const long j = field.bin_of(a.x[0]);
        if (j < field.first_bin() || j >= field.first_bin() + field.bin_count())
            throw Error(ErrorCode::SupportOutsideBins, "atom at " + format_real(a.x[0]) + " outside the window [" +
                                                           format_real(lo) + ", " + format_real(hi) + ")");
        m[static_cast<std::size_t>(j - field.first_bin())] += a.mass;
    }
    if (mu.density) {
        const auto& g = *mu.density;
        double outside = 0.0;
        for (std::size_t c = 0; c < g.values.size(); ++c) {
            const double v = g.values[c];
            if (v == 0.0) continue;
            const auto cell = g.cell(c);
            const double a = cell.lo[0], b = cell.hi[0];
            outside += v * (std::max(0.0, std::min(b, lo) - a) + std::max(0.0, b - std::max(a, hi)));
            const long j0 = std::max(field.first_bin(), field.bin_of(std::max(a, lo)));
            const long j1 = std::min(field.first_bin() + field.bin_count() - 1, field.bin_of(std::min(b, hi)));
            for (long j = j0; j <= j1; ++j) {
                const double overlap = std::min(b, field.bin_hi(j)) - std::max(a, field.bin_lo(j));
                if (overlap > 0.0) m[static_cast<std::size_t>(j - field.first_bin())] += v * overlap;
            }
        }
        if (outside > tol)
            throw Error(ErrorCode::SupportOutsideBins, "density puts mass " + format_real(outside) + " outside the window [" +
                                                           format_real(lo) + ", " + format_real(hi) + ")");
    }
    return m;
}

PcafTrajectory measure_pcaf(const LocalTimeField& field, const std::vector<double>& masses) {
    if (static_cast<long>(masses.size()) != field.bin_count())
        throw Error(ErrorCode::DimensionMismatch, "bin masses do not match the field");
    const auto& t = field.times();
    const auto& bin = field.assignment();
    PcafTrajectory out;
    out.times = t;
    out.values.assign(t.size(), 0.0);
    const auto mass_of = [&](long j) {
        const long i = j - field.first_bin();
        return i >= 0 && i < field.bin_count() ? masses[static_cast<std::size_t>(i)] : 0.0;
    };
    double a = 0.0;
    for (std::size_t k = 0; k + 1 < t.size(); ++k) {
        a += 0.5 * (t[k + 1] - t[k]) * (mass_of(bin[k]) + mass_of(bin[k + 1])) / field.width();
        out.values[k + 1] = a;
    }
    out.provenance = "sum_j l(t, j) mu(bin_j)";
    return out;
}

PcafTrajectory measure_pcaf(const LocalTimeField& field, const MeasureRep& mu) {
    return measure_pcaf(field, bin_masses(field, mu));
}

double sup_distance(const PcafTrajectory& a, const PcafTrajectory& b, double horizon) {
    if (a.times.size() != b.times.size()) throw Error(ErrorCode::GridMismatch, "trajectories have different lengths");
    double d = 0.0;
    for (std::size_t k = 0; k < a.times.size(); ++k) {
        if (a.times[k] != b.times[k]) throw Error(ErrorCode::GridMismatch, "time grids differ at index " + std::to_string(k));
        if (a.times[k] > horizon) break;
        d = std::max(d, std::abs(a.values[k] - b.values[k]));
    }
    return d;
}

double pairwise_sum(std::span<const double> xs) {
    if (xs.size() <= 8) {
        double s = 0.0;
        for (double x : xs) s += x;
        return s;
    }
    const std::size_t half = xs.size() / 2;
    return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

// ---------------------------------------------------------------- ensembles

McReport mc_convergence(const McConfig& config, const Member& reference, const std::vector<int>& indices,
                        const std::vector<Member>& members) {
    if (config.paths < 1) throw Error(ErrorCode::ConfigInvalid, "paths must be positive");
    if (indices.size() != members.size()) throw Error(ErrorCode::DimensionMismatch, "one member per index");
    const auto check_member = [&](const Member& m) {
        if (m.density.has_value() == m.measure.has_value())
            throw Error(ErrorCode::ConfigInvalid, "member '" + m.label + "' needs exactly one of density / measure");
        if (m.density) m.density->checked(config.model.dim());
        if (m.measure && config.model.dim() != 1)
            throw Error(ErrorCode::NotOneDimensional, "measure members need a one-dimensional model");
    };
    check_member(reference);
    for (const auto& m : members) check_member(m);

    const std::size_t M = members.size();
    const auto paths = static_cast<std::size_t>(config.paths);
    std::vector<double> dist(paths * M, 0.0);

    parallel_for(config.paths, [&](long i) {
        const auto path = sample_path(config.model, config.horizon, config.dt, path_seed(config.seed, static_cast<std::uint64_t>(i)));
        std::optional<LocalTimeField> field;
        // base evaluations shared by members that differ from each other only by their cap
        std::map<std::string, std::vector<double>> base_cache;
        const auto trajectory = [&](const Member& m) {
            if (m.measure) {
                if (!field) field.emplace(path, config.bins);
                return measure_pcaf(*field, *m.measure);
            }
            ScalarField uncapped = *m.density;
            uncapped.cap = kInf;
            const auto key = uncapped.to_json().dump();
            auto it = base_cache.find(key);
            if (it == base_cache.end()) it = base_cache.emplace(key, evaluate_along(path, uncapped)).first;
            return accumulate(path.times, it->second, std::min(m.density->cap, config.f_cap), Weight::None, 0,
                              path.size() - 1);
        };
        const auto ref = trajectory(reference);
        for (std::size_t m = 0; m < M; ++m)
            dist[static_cast<std::size_t>(i) * M + m] = sup_distance(trajectory(members[m]), ref, config.horizon);
    });

    McReport report;
    std::vector<double> column(paths), diff(paths);
    std::vector<double> prev;
    for (std::size_t m = 0; m < M; ++m) {
        for (std::size_t i = 0; i < paths; ++i) column[i] = dist[i * M + m];
        McRow row;
        row.n = indices[m];
        const auto mo = moments(column);
        row.mean = mo.mean;
        row.std_error = mo.std_error;
        row.p90 = quantile90(column);
        // spread of the 90th percentile over ten equal batches of paths
        if (paths >= 100) {
            std::vector<double> batch_q;
            for (std::size_t b = 0; b < 10; ++b)
                batch_q.push_back(quantile90(std::vector<double>(column.begin() + static_cast<long>(paths * b / 10),
                                                                 column.begin() + static_cast<long>(paths * (b + 1) / 10))));
            row.p90_std_error = moments(batch_q).std_error;
        }
        if (!prev.empty()) {
            for (std::size_t i = 0; i < paths; ++i) diff[i] = prev[i] - column[i];
            row.diff_std_error = moments(diff).std_error;
        }
        row.paths = config.paths;
        row.seed = config.seed;
        report.rows.push_back(row);
        prev = column;
    }

    report.all_zero = std::all_of(report.rows.begin(), report.rows.end(), [](const McRow& r) { return r.mean == 0.0; });
    std::vector<double> lx, ly;
    for (const auto& r : report.rows)
        if (r.mean > 0.0 && r.n > 0) {
            lx.push_back(std::log(static_cast<double>(r.n)));
            ly.push_back(std::log(r.mean));
        }
    if (lx.size() >= 2) {
        const double mx = pairwise_sum(lx) / static_cast<double>(lx.size());
        const double my = pairwise_sum(ly) / static_cast<double>(ly.size());
        double sxy = 0.0, sxx = 0.0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            sxy += (lx[i] - mx) * (ly[i] - my);
            sxx += (lx[i] - mx) * (lx[i] - mx);
        }
        report.slope = sxx > 0.0 ? sxy / sxx : 0.0;
    }
    report.strictly_decreasing = report.rows.size() >= 2;
    report.decreasing_unpaired = report.rows.size() >= 2;
    for (std::size_t k = 1; k < report.rows.size(); ++k) {
        const auto& a = report.rows[k - 1];
        const auto& b = report.rows[k];
        const double drop = a.mean - b.mean;
        report.strictly_decreasing = report.strictly_decreasing && drop > 0.0 && drop > 2.0 * b.diff_std_error;
        report.decreasing_unpaired =
            report.decreasing_unpaired && drop > 0.0 && drop > 2.0 * std::max(a.std_error, b.std_error);
    }
    return report;
}

MartingaleReport martingale_residual(const McConfig& config, const ScalarField& f) {
    if (config.paths < 1) throw Error(ErrorCode::ConfigInvalid, "paths must be positive");
    f.checked(config.model.dim());
    const auto paths = static_cast<std::size_t>(config.paths);
    const double checkpoints[3] = {config.horizon / 4.0, config.horizon / 2.0, config.horizon};
    std::vector<double> residual(paths * 3, 0.0);

    parallel_for(config.paths, [&](long i) {
        const auto path = sample_path(config.model, config.horizon, config.dt, path_seed(config.seed, static_cast<std::uint64_t>(i)));
        const auto a = occupation_pcaf(path, f, config.f_cap, Weight::Exponential);
        const double m0 = resolvent_field(config.model, f, path.state(0));
        for (int c = 0; c < 3; ++c) {
            const auto k = static_cast<std::size_t>(
                std::lower_bound(path.times.begin(), path.times.end(), checkpoints[c] - 1e-12) - path.times.begin());
            const double mt = a.values[k] + std::exp(-path.times[k]) * resolvent_field(config.model, f, path.state(k));
            residual[static_cast<std::size_t>(i) * 3 + static_cast<std::size_t>(c)] = mt - m0;
        }
    });

    MartingaleReport report;
    report.pass = true;
    std::vector<double> column(paths);
    for (int c = 0; c < 3; ++c) {
        double max_abs = 0.0;
        for (std::size_t i = 0; i < paths; ++i) {
            column[i] = residual[i * 3 + static_cast<std::size_t>(c)];
            max_abs = std::max(max_abs, std::abs(column[i]));
        }
        const auto mo = moments(column);
        MartingaleCheckpoint cp;
        cp.t = checkpoints[c];
        cp.mean = mo.mean;
        cp.std_error = mo.std_error;
        cp.max_abs = max_abs;
        cp.pass = max_abs <= 1e-12 ? true : std::abs(mo.mean) <= 3.0 * mo.std_error;
        report.pass = report.pass && cp.pass;
        report.checkpoints.push_back(cp);
    }
    return report;
}

}  // namespace pcaf::sim
