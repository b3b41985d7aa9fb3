#include "pcaf/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <sstream>

#include "pcaf/conditions.hpp"
#include "pcaf/continuum.hpp"
#include "pcaf/discrete_form.hpp"
#include "pcaf/error.hpp"
#include "pcaf/simulate.hpp"
#include "pcaf/text.hpp"

namespace pcaf::lab {

using nlohmann::json;

namespace {

constexpr const char* kSeedSplit =
    "path i of master seed s uses splitmix64(splitmix64(s) ^ splitmix64(i + 0x632be59bd9b4e019)) to seed mt19937_64";

// Reads parameters with defaults written back into the node, so the echoed config is complete.
class Params {
public:
    Params(json& node, std::string path) : node_(node), path_(std::move(path)) {
        if (!node_.is_object()) throw Error(ErrorCode::ConfigInvalid, where("") + "must be an object");
    }

    json& get(const std::string& key, json fallback) {
        if (!node_.contains(key)) node_[key] = std::move(fallback);
        return node_[key];
    }
    json& require(const std::string& key) {
        if (!node_.contains(key)) fail(key, "is required");
        return node_[key];
    }
    bool has(const std::string& key) const { return node_.contains(key); }

    double real(const std::string& key, double fallback) {
        auto& v = get(key, fallback);
        if (!v.is_number() && !v.is_string()) fail(key, "must be a number");
        try {
            return real_from_json(v);
        } catch (const std::exception&) {
            fail(key, "must be a number");
        }
    }
    long integer(const std::string& key, long fallback) {
        auto& v = get(key, fallback);
        if (!v.is_number_integer()) fail(key, "must be an integer");
        return v.get<long>();
    }
    bool flag(const std::string& key, bool fallback) {
        auto& v = get(key, fallback);
        if (!v.is_boolean()) fail(key, "must be a boolean");
        return v.get<bool>();
    }
    std::string text(const std::string& key, const std::string& fallback) {
        auto& v = get(key, fallback);
        if (!v.is_string()) fail(key, "must be a string");
        return v.get<std::string>();
    }
    std::vector<long> integers(const std::string& key, std::vector<long> fallback) {
        auto& v = get(key, fallback);
        if (!v.is_array()) fail(key, "must be an array of integers");
        std::vector<long> out;
        for (const auto& x : v) {
            if (!x.is_number_integer()) fail(key, "must be an array of integers");
            out.push_back(x.get<long>());
        }
        return out;
    }
    std::vector<double> reals(const std::string& key, std::vector<double> fallback) {
        auto& v = get(key, fallback);
        if (!v.is_array()) fail(key, "must be an array of numbers");
        std::vector<double> out;
        for (const auto& x : v) {
            if (!x.is_number()) fail(key, "must be an array of numbers");
            out.push_back(x.get<double>());
        }
        return out;
    }
    Params child(const std::string& key, json fallback = json::object()) { return {get(key, std::move(fallback)), where_key(key)}; }

    std::string where_key(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    [[noreturn]] void fail(const std::string& key, const std::string& message) const {
        throw Error(ErrorCode::ConfigInvalid, where(key) + message);
    }

private:
    std::string where(const std::string& key) const {
        const auto p = key.empty() ? path_ : where_key(key);
        return p.empty() ? "" : p + ": ";
    }
    json& node_;
    std::string path_;
};

// Runs one scenario step; module errors keep their code and gain the step name.
template <class F>
auto step(const std::string& name, F&& body) {
    try {
        return body();
    } catch (const Error& e) {
        const std::string what = e.what();
        const auto prefix = std::string(to_string(e.code())) + ": ";
        throw Error(e.code(), "step '" + name + "': " + (what.rfind(prefix, 0) == 0 ? what.substr(prefix.size()) : what));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigInvalid, "step '" + name + "': " + e.what());
    }
}

std::string cell(double x) { return format_real(x); }
std::string cell(long x) { return std::to_string(x); }
std::string cell(std::uint64_t x) { return std::to_string(x); }
std::string cell(bool x) { return x ? "true" : "false"; }

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

void check_tolerance(ScenarioResult& out, const std::string& name, double worst, double tol) {
    out.assertions.push_back({name, worst <= tol, "max " + cell(worst) + " <= " + cell(tol)});
}

std::vector<std::uint64_t> seeds_of(json& config) {
    if (!config.contains("seeds")) config["seeds"] = json::array({1});
    const auto& s = config["seeds"];
    if (!s.is_array() || s.empty()) throw Error(ErrorCode::ConfigInvalid, "seeds: must be a nonempty array");
    std::vector<std::uint64_t> out;
    for (const auto& x : s) {
        if (!x.is_number_integer() || x.get<long long>() < 0) throw Error(ErrorCode::ConfigInvalid, "seeds: entries must be nonnegative integers");
        out.push_back(x.get<std::uint64_t>());
    }
    return out;
}

// ---------------------------------------------------------------- oracle-suite

void run_oracle(ScenarioResult& out, Params p, const std::vector<std::uint64_t>& seeds) {
    const long forms = p.integer("forms", 20);
    const long vmin = p.integer("min_vertices", 5), vmax = p.integer("max_vertices", 50);
    const double edge_probability = p.real("edge_probability", 0.3);
    const double max_killing = p.real("max_killing", 0.0);
    const auto alphas = p.reals("alphas", {0.1, 0.5, 2.0, 10.0});
    auto tol = p.child("tolerances");
    const double tol_metric = tol.real("metric", 1e-10), tol_pairing = tol.real("pairing", 1e-9);
    const double tol_duality = tol.real("duality", 1e-10), tol_capacity = tol.real("capacity", 1e-8);
    if (forms < 0) p.fail("forms", "must be nonnegative");
    if (vmin < 2 || vmax < vmin) p.fail("min_vertices", "need 2 <= min_vertices <= max_vertices");
    for (double a : alphas)
        if (!(a > 0.0)) p.fail("alphas", "entries must be positive");

    Table t{"", {"seed", "form", "vertices", "symmetry", "identity", "triangle", "equivalence", "pairing", "duality", "capacity"}, {}};
    double worst[7] = {0, 0, 0, 0, 0, 0, 0};
    for (auto seed : seeds)
        for (long i = 0; i < forms; ++i) {
            std::mt19937_64 rng(sim::path_seed(seed, static_cast<std::uint64_t>(i)));
            const int n = std::uniform_int_distribution<int>(static_cast<int>(vmin), static_cast<int>(vmax))(rng);
            const auto form = step("random form", [&] {
                return discrete::random_form(rng, n, {edge_probability, max_killing, 0.5, 2.0});
            });
            const auto mu = discrete::random_measure(rng, n), nu = discrete::random_measure(rng, n),
                       la = discrete::random_measure(rng, n);
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            Eigen::VectorXd v(n), f(n);
            for (int k = 0; k < n; ++k) v[k] = unit(rng);
            for (int k = 0; k < n; ++k) f[k] = unit(rng);
            const int y = std::uniform_int_distribution<int>(0, n - 1)(rng);

            double r[7];
            step("metric axioms", [&] {
                const double mn = discrete::rho(form, mu, nu), nm = discrete::rho(form, nu, mu);
                const double ml = discrete::rho(form, mu, la), nl = discrete::rho(form, nu, la);
                r[0] = std::abs(mn - nm);
                r[1] = discrete::rho(form, mu, mu);
                r[2] = std::max(0.0, ml - mn - nl);
                r[3] = 0.0;
                for (double a : alphas) {
                    const double ra = discrete::rho(form, mu, nu, a);
                    const double lower = std::sqrt(1.0 / std::max(a, 1.0)) * mn;
                    const double upper = std::sqrt(std::max(1.0 / a, 1.0)) * mn;
                    r[3] = std::max(r[3], std::max(lower - ra, ra - upper) / std::max(mn, 1e-300));
                }
                r[3] = std::max(r[3], 0.0);
                return 0;
            });
            step("potential identities", [&] {
                const auto u = discrete::potential(form, mu, 1.0).values;
                const double direct = v.dot(mu.masses);
                r[4] = std::abs(form.energy(u, v, 1.0) - direct) / std::max(1.0, std::abs(direct));
                const auto rf = discrete::resolvent_apply(form, f, 1.0);
                const auto unu = discrete::potential(form, nu, 1.0).values;
                const double lhs = nu.masses.dot(rf), rhs = form.base_measure().cwiseProduct(f).dot(unu);
                r[5] = std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs));
                discrete::DiscreteMeasure delta = discrete::DiscreteMeasure::zero(n);
                delta.masses[y] = 1.0;
                const double g = discrete::potential(form, delta, 1.0).values[y];
                const int set[1] = {y};
                r[6] = std::abs(discrete::capacity(form, set) * g - 1.0);
                return 0;
            });
            std::vector<std::string> row{cell(seed), cell(i), cell(static_cast<long>(n))};
            for (int k = 0; k < 7; ++k) {
                row.push_back(cell(r[k]));
                worst[k] = std::max(worst[k], r[k]);
            }
            t.rows.push_back(std::move(row));
        }
    out.tables.push_back(std::move(t));
    check_tolerance(out, "rho symmetry", worst[0], tol_metric);
    check_tolerance(out, "rho identity", worst[1], tol_metric);
    check_tolerance(out, "rho triangle inequality", worst[2], tol_metric);
    check_tolerance(out, "rho_alpha equivalence bounds (relative)", worst[3], tol_metric);
    check_tolerance(out, "pairing E_1(U_1 mu, v) = int v dmu (relative)", worst[4], tol_pairing);
    check_tolerance(out, "duality nu^T R_1 f = (M f)^T U_1 nu (relative)", worst[5], tol_duality);
    check_tolerance(out, "point capacity Cap({y}) g_1(y, y) = 1", worst[6], tol_capacity);
    out.report = {{"forms", forms * static_cast<long>(seeds.size())},
                  {"worst", {{"symmetry", worst[0]}, {"identity", worst[1]}, {"triangle", worst[2]},
                             {"equivalence", worst[3]}, {"pairing", worst[4]}, {"duality", worst[5]},
                             {"capacity", worst[6]}}}};
}

// ---------------------------------------------------------------- metric

void run_metric(ScenarioResult& out, Params p) {
    const std::string model = p.text("model", "BM1D");
    const double alpha = p.real("alpha", 1.0);
    if (!(alpha > 0.0)) p.fail("alpha", "must be positive");
    const double tol = p.real("tolerance", 1e-10);
    std::vector<std::string> names;
    std::vector<std::vector<double>> dist;

    if (model == "discrete") {
        const auto form = step("read form", [&] { return discrete::form_from_json(p.require("form")); });
        auto& ms = p.require("measures");
        if (!ms.is_array()) p.fail("measures", "must be an array");
        std::vector<discrete::DiscreteMeasure> measures;
        for (std::size_t i = 0; i < ms.size(); ++i) {
            names.push_back(ms[i].value("name", "m" + std::to_string(i)));
            measures.push_back(step("read measure " + names.back(), [&] { return discrete::measure_from_json(ms[i]); }));
        }
        dist.assign(measures.size(), std::vector<double>(measures.size()));
        step("rho table", [&] {
            for (std::size_t i = 0; i < measures.size(); ++i)
                for (std::size_t j = 0; j < measures.size(); ++j) dist[i][j] = discrete::rho(form, measures[i], measures[j], alpha);
            return 0;
        });
    } else {
        const continuum::ResolventKernel kernel(step("model", [&] { return continuum::model_from_string(model); }), alpha);
        auto& ms = p.get("measures", json::array({{{"name", "delta0"}, {"measure", {{"dim", 1}, {"atoms", {{0.0, 1.0}}}}}},
                                                  {{"name", "delta1"}, {"measure", {{"dim", 1}, {"atoms", {{1.0, 1.0}}}}}}}));
        if (!ms.is_array()) p.fail("measures", "must be an array");
        std::vector<continuum::MeasureRep> measures;
        for (std::size_t i = 0; i < ms.size(); ++i) {
            if (!ms[i].contains("measure")) p.fail("measures", "entry " + std::to_string(i) + " lacks 'measure'");
            names.push_back(ms[i].value("name", "m" + std::to_string(i)));
            measures.push_back(step("read measure " + names.back(), [&] {
                auto m = continuum::measure_rep_from_json(ms[i].at("measure"));
                m.checked();
                if (m.dim != kernel.dim()) throw Error(ErrorCode::DimensionMismatch, "measure dimension differs from model");
                return m;
            }));
        }
        dist.assign(measures.size(), std::vector<double>(measures.size()));
        step("rho table", [&] {
            for (std::size_t i = 0; i < measures.size(); ++i)
                for (std::size_t j = 0; j < measures.size(); ++j) dist[i][j] = continuum::rho_cont(kernel, measures[i], measures[j]);
            return 0;
        });
    }

    Table t{"", {"i", "j", "name_i", "name_j", "rho"}, {}};
    const std::size_t m = names.size();
    double sym = 0, ident = 0, tri = 0;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            t.rows.push_back({cell(static_cast<long>(i)), cell(static_cast<long>(j)), csv_field(names[i]), csv_field(names[j]), cell(dist[i][j])});
            sym = std::max(sym, std::abs(dist[i][j] - dist[j][i]));
            if (i == j) ident = std::max(ident, dist[i][i]);
            for (std::size_t k = 0; k < m; ++k) tri = std::max(tri, dist[i][k] - dist[i][j] - dist[j][k]);
        }
    out.tables.push_back(std::move(t));
    check_tolerance(out, "rho symmetry", sym, tol);
    check_tolerance(out, "rho identity", ident, tol);
    check_tolerance(out, "rho triangle inequality", std::max(tri, 0.0), tol);
    json matrix = json::array();
    for (const auto& row : dist) matrix.push_back(row);
    out.report = {{"names", names}, {"rho", matrix}, {"alpha", alpha}, {"model", model}};
}

// ---------------------------------------------------------------- classify

void run_classify(ScenarioResult& out, Params p) {
    const std::string model = p.text("model", "BM1D");
    const double alpha = p.real("alpha", 1.0);
    if (!(alpha > 0.0)) p.fail("alpha", "must be positive");
    const continuum::ResolventKernel kernel(step("model", [&] { return continuum::model_from_string(model); }), alpha);
    const int d = kernel.dim();
    const auto mu = step("read measure", [&] {
        auto m = continuum::measure_rep_from_json(p.get("measure", {{"dim", d}, {"atoms", {std::vector<double>(d + 1, 0.0)}}}));
        m.checked();
        if (m.dim != d) throw Error(ErrorCode::DimensionMismatch, "measure dimension differs from model");
        return m;
    });
    auto grid = p.child("probe_grid");
    const double lo = grid.real("lo", -2.0), hi = grid.real("hi", 2.0);
    const long count = grid.integer("count", d == 1 ? 81 : 9);
    if (count < 1 || !(hi >= lo)) grid.fail("count", "need count >= 1 and lo <= hi");
    std::vector<std::vector<double>> probes;
    long total = 1;
    for (int a = 0; a < d; ++a) total *= count;
    for (long t = 0; t < total; ++t) {
        std::vector<double> x(d);
        for (long a = 0, rest = t; a < d; ++a, rest /= count)
            x[a] = count == 1 ? lo : lo + (hi - lo) * static_cast<double>(rest % count) / static_cast<double>(count - 1);
        probes.push_back(std::move(x));
    }
    const auto cls = step("classify", [&] { return continuum::classify_measure(kernel, mu, probes); });
    out.tables.push_back({"",
                          {"model", "in_S0", "in_S00", "smooth", "energy_integral", "potential_sup", "total_mass"},
                          {{model, cell(cls.in_S0), cell(cls.in_S00), cell(cls.smooth), cell(cls.energy_integral),
                            cell(cls.potential_sup), cell(cls.total_mass)}}});
    out.report = {{"in_S0", cls.in_S0},
                  {"in_S00", cls.in_S00},
                  {"smooth", cls.smooth},
                  {"energy_integral", cls.energy_integral},
                  {"potential_sup", cls.potential_sup},
                  {"total_mass", cls.total_mass},
                  {"probes", static_cast<long>(probes.size())}};
    auto expect = p.child("expect");
    for (const char* key : {"in_S0", "in_S00", "smooth"}) {
        if (!expect.has(key)) continue;
        const bool want = expect.flag(key, false);
        const bool got = out.report[key].get<bool>();
        out.assertions.push_back({std::string(key) + " == " + cell(want), got == want, "computed " + cell(got)});
    }
}

// ---------------------------------------------------------------- shared Monte Carlo settings

sim::McConfig mc_settings(Params& p) {
    sim::McConfig c;
    c.model = step("model", [&] { return sim::ProcessModel::from_json(p.get("model", "BM1D")); });
    c.horizon = p.real("horizon", 1.0);
    c.dt = p.real("dt", 1e-3);
    c.paths = p.integer("paths", 1000);
    c.f_cap = p.real("f_cap", 1e6);
    if (!(c.horizon > 0.0)) p.fail("horizon", "must be positive");
    if (!(c.dt > 0.0)) p.fail("dt", "must be positive");
    if (c.paths < 1) p.fail("paths", "must be positive");
    if (!(c.f_cap > 0.0)) p.fail("f_cap", "must be positive");
    return c;
}

// rho(f_n dx, f dx) for f = coef |x|^{-beta} 1_{[-radius, radius]}, f_n = min(f, n): the energy
// of (f - n)_+, on a grid with exact cell masses.
double cap_energy_gap(double coef, double beta, double radius, double n, int cells) {
    const double rstar = std::min(radius, std::pow(coef / n, 1.0 / beta));
    if (!(rstar > 0.0)) return 0.0;
    const auto primitive = [&](double x) { return coef * std::pow(x, 1.0 - beta) / (1.0 - beta) - n * x; };
    const auto mass = [&](const continuum::Box& b) {
        const double a = std::abs(b.lo[0]), c = std::abs(b.hi[0]);
        const double lo = std::min(a, c), hi = std::max(a, c);
        return std::max(0.0, primitive(std::min(hi, rstar)) - primitive(std::min(lo, rstar)));
    };
    const auto h = continuum::MeasureRep::from_cell_masses(continuum::Box{{-rstar}, {rstar}}, {cells}, mass);
    const continuum::ResolventKernel kernel(continuum::Model::BM1D, 1.0);
    return std::sqrt(std::max(0.0, continuum::mutual_energy(kernel, h, h)));
}

// ---------------------------------------------------------------- mc-convergence

void run_mc(ScenarioResult& out, Params p, const std::vector<std::uint64_t>& seeds) {
    auto config = mc_settings(p);
    auto fam = p.child("family");
    const std::string kind = fam.text("kind", "density_cap");
    const auto indices_long = fam.integers("indices", {2, 8, 32, 128});
    std::vector<int> indices;
    for (long n : indices_long) {
        if (n < 1) fam.fail("indices", "entries must be positive");
        if (!indices.empty() && n <= indices.back()) fam.fail("indices", "must increase");
        indices.push_back(static_cast<int>(n));
    }
    if (indices.empty()) fam.fail("indices", "must be nonempty");

    sim::Member reference;
    std::vector<sim::Member> members;
    double coef = 0, beta = 0, radius = 0;
    if (kind == "density_cap") {
        coef = fam.real("coef", 1.0);
        beta = fam.real("beta", 0.25);
        radius = fam.real("radius", 1.0);
        if (!(coef > 0.0) || !(beta > 0.0) || !(radius > 0.0)) fam.fail("beta", "coef, beta and radius must be positive");
        reference.density = sim::ScalarField::power(coef, beta, radius);
        reference.label = "f";
        for (int n : indices) members.push_back({reference.density->capped(n), std::nullopt, "min(f," + std::to_string(n) + ")"});
    } else if (kind == "uniform_to_atom") {
        if (config.model.dim() != 1) fam.fail("kind", "uniform_to_atom needs a one-dimensional model");
        reference.measure = continuum::MeasureRep::point({0.0});
        reference.label = "delta0";
        for (int n : indices)
            members.push_back({std::nullopt, continuum::MeasureRep::uniform(continuum::Box{{-1.0 / n}, {1.0 / n}}, 1),
                               "uniform[-1/" + std::to_string(n) + ",1/" + std::to_string(n) + "]"});
    } else {
        fam.fail("kind", "must be density_cap or uniform_to_atom");
    }
    auto bins = p.child("bins");
    config.bins.width = bins.real("width", kind == "uniform_to_atom" ? 0.02 : 0.0);
    config.bins.lo = bins.real("lo", -1.0);
    config.bins.hi = bins.real("hi", 1.0);
    config.bins.widen = bins.flag("widen", true);
    if (config.bins.width < 0.0) bins.fail("width", "must be nonnegative");

    Table t{"", {"n", "mean_sup_dist", "stderr", "p90", "paths", "seed", "p90_stderr", "diff_stderr"}, {}};
    json runs = json::array();
    for (auto seed : seeds) {
        config.seed = seed;
        const auto rep = step("ensemble seed " + std::to_string(seed), [&] { return sim::mc_convergence(config, reference, indices, members); });
        Curve mean{"mean seed=" + std::to_string(seed), {}, {}, {}}, p90{"p90 seed=" + std::to_string(seed), {}, {}, {}};
        json rows = json::array();
        for (const auto& r : rep.rows) {
            t.rows.push_back({cell(static_cast<long>(r.n)), cell(r.mean), cell(r.std_error), cell(r.p90), cell(r.paths),
                              cell(r.seed), cell(r.p90_std_error), cell(r.diff_std_error)});
            mean.x.push_back(r.n);
            mean.y.push_back(r.mean);
            mean.yerr.push_back(r.std_error);
            p90.x.push_back(r.n);
            p90.y.push_back(r.p90);
            p90.yerr.push_back(r.p90_std_error);
            rows.push_back({{"n", r.n}, {"mean", r.mean}, {"stderr", r.std_error}, {"p90", r.p90},
                            {"p90_stderr", r.p90_std_error}, {"diff_stderr", r.diff_std_error}, {"paths", r.paths}, {"seed", r.seed}});
        }
        out.curves.push_back(std::move(mean));
        out.curves.push_back(std::move(p90));
        runs.push_back({{"seed", seed}, {"rows", rows}, {"slope", rep.slope}, {"strictly_decreasing", rep.strictly_decreasing},
                        {"decreasing_unpaired", rep.decreasing_unpaired}, {"all_zero", rep.all_zero}});
        const std::string tag = "seed " + std::to_string(seed) + ": ";
        out.assertions.push_back({tag + "mean sup-distance strictly decreasing by > 2 paired stderr", rep.strictly_decreasing,
                                  "unpaired check " + cell(rep.decreasing_unpaired)});
        out.assertions.push_back({tag + "log-log slope negative", rep.slope < 0.0, "slope " + cell(rep.slope)});
    }
    out.tables.push_back(std::move(t));
    out.report = {{"family", kind}, {"runs", runs}};

    if (kind == "density_cap" && config.model.kind == sim::ModelKind::BM1D) {
        const long cells = p.integer("energy_cells", 400);
        if (cells < 2) p.fail("energy_cells", "must be at least 2");
        Table e{"energy", {"n", "rho_energy"}, {}};
        Curve curve{"rho(f_n dx, f dx)", {}, {}, {}};
        bool decreasing = true;
        double previous = std::numeric_limits<double>::infinity();
        json rows = json::array();
        for (int n : indices) {
            const double r = step("energy gap", [&] { return cap_energy_gap(coef, beta, radius, n, static_cast<int>(cells)); });
            e.rows.push_back({cell(static_cast<long>(n)), cell(r)});
            curve.x.push_back(n);
            curve.y.push_back(r);
            curve.yerr.push_back(0.0);
            rows.push_back({{"n", n}, {"rho_energy", r}});
            decreasing = decreasing && r < previous;
            previous = r;
        }
        out.tables.push_back(std::move(e));
        out.curves.push_back(std::move(curve));
        out.report["energy"] = rows;
        out.assertions.push_back({"rho(f_n dx, f dx) strictly decreasing", decreasing, "see energy table"});
    }
}

// ---------------------------------------------------------------- martingale

void run_martingale(ScenarioResult& out, Params p, const std::vector<std::uint64_t>& seeds) {
    auto config = mc_settings(p);
    const auto field = step("field", [&] {
        auto f = sim::ScalarField::from_json(p.get("field", sim::ScalarField::hat(0.0, 0.5).to_json()));
        f.checked(config.model.dim());
        return f;
    });
    Table t{"", {"seed", "t", "mean", "stderr", "max_abs", "pass"}, {}};
    json runs = json::array();
    for (auto seed : seeds) {
        config.seed = seed;
        const auto rep = step("residual seed " + std::to_string(seed), [&] { return sim::martingale_residual(config, field); });
        Curve curve{"residual seed=" + std::to_string(seed), {}, {}, {}};
        json rows = json::array();
        for (const auto& c : rep.checkpoints) {
            t.rows.push_back({cell(seed), cell(c.t), cell(c.mean), cell(c.std_error), cell(c.max_abs), cell(c.pass)});
            curve.x.push_back(c.t);
            curve.y.push_back(c.mean);
            curve.yerr.push_back(c.std_error);
            rows.push_back({{"t", c.t}, {"mean", c.mean}, {"stderr", c.std_error}, {"max_abs", c.max_abs}, {"pass", c.pass}});
        }
        out.curves.push_back(std::move(curve));
        runs.push_back({{"seed", seed}, {"checkpoints", rows}, {"pass", rep.pass}});
        out.assertions.push_back({"seed " + std::to_string(seed) + ": residual mean within 3 stderr at every checkpoint",
                                  rep.pass, "see checkpoint rows"});
    }
    out.tables.push_back(std::move(t));
    out.report = {{"field", field.describe()}, {"runs", runs}};
}

// ---------------------------------------------------------------- conditions

void add_condition_rows(Table& t, const cond::ConditionReport& r) {
    for (std::size_t c = 0; c < r.values.size(); ++c)
        for (std::size_t i = 0; i < r.indices.size(); ++i)
            t.rows.push_back({cond::to_string(r.which), r.constants.empty() ? "" : cell(r.constants[c]), cell(r.indices[i]),
                              cell(r.values[c][i]), cell(static_cast<bool>(r.heuristic[i])), cond::to_string(r.row_verdicts[c])});
}

void run_conditions(ScenarioResult& out, Params p) {
    auto& family_doc = p.get("family", {{"corpus", "power_beta"}, {"params", {{"d", 2}, {"beta", 1.0}}}});
    const auto family = step("family", [&] { return cond::family_from_json(family_doc); });
    if (family_doc.contains("corpus")) family_doc["params"] = family.params;
    family_doc["constants"] = family.constants;
    family_doc["tail_block"] = family.tail_block;
    const auto indices = p.integers("indices", cond::default_indices());
    const std::string mode = p.text("mode", "membership");
    Table t{"", {"condition", "C", "n", "value", "heuristic", "verdict"}, {}};

    auto expect = p.child("expect", family_doc.contains("corpus") ? json{{"in_A", true}} : json::object());
    std::map<std::string, std::string> verdicts;
    if (mode == "membership") {
        const auto rep = step("verify membership", [&] { return cond::verify_membership(family, indices); });
        for (const auto* r : {&rep.aa, &rep.ab1, &rep.ab2, &rep.ac1, &rep.ac2}) {
            add_condition_rows(t, *r);
            verdicts[cond::to_string(r->which)] = cond::to_string(r->verdict);
        }
        Table local{"local", {"n", "local_mass"}, {}};
        for (std::size_t i = 0; i < rep.indices.size(); ++i) local.rows.push_back({cell(rep.indices[i]), cell(rep.local_mass[i])});
        out.tables.push_back(std::move(t));
        out.tables.push_back(std::move(local));
        out.report = rep.to_json();
        std::istringstream lines(rep.summary());
        for (std::string line; std::getline(lines, line);) out.notes.push_back(line);
        if (expect.has("in_A")) {
            const bool want = expect.flag("in_A", true);
            out.assertions.push_back({"membership == " + cell(want), rep.in_A == want, "computed " + cell(rep.in_A)});
        }
        for (const char* key : {"Ab_branch", "Ac_branch"}) {
            if (!expect.has(key)) continue;
            const auto want = expect.text(key, "");
            const auto& got = std::string(key) == "Ab_branch" ? rep.ab_branch : rep.ac_branch;
            out.assertions.push_back({std::string(key) + " == " + want, got == want, "computed " + got});
        }
    } else if (mode == "conditions") {
        auto& list = p.get("conditions", json::array({"Aa", "Ab1", "Ab2", "Ac1", "Ac2"}));
        if (!list.is_array()) p.fail("conditions", "must be an array of condition names");
        std::optional<continuum::MeasureRep> probe;
        json reports = json::array();
        for (const auto& name : list) {
            if (!name.is_string()) p.fail("conditions", "must be an array of condition names");
            const auto which = step("condition name", [&] { return cond::condition_from_string(name.get<std::string>()); });
            if ((which == cond::Condition::Sb || which == cond::Condition::Sc) && !probe) {
                json fallback = family.d == 1 ? json{{"dim", 1}, {"atoms", {{0.0, 1.0}}}}
                                              : to_json(continuum::MeasureRep::uniform(
                                                    continuum::Box{std::vector<double>(family.d, -0.5), std::vector<double>(family.d, 0.5)}, 4));
                probe = step("probe", [&] { return continuum::measure_rep_from_json(p.get("probe", fallback)); });
            }
            const auto rep = step("check " + name.get<std::string>(), [&] {
                return cond::check_condition(family, which, indices, probe ? &*probe : nullptr);
            });
            add_condition_rows(t, rep);
            reports.push_back(rep.to_json());
            verdicts[cond::to_string(which)] = cond::to_string(rep.verdict);
            out.notes.push_back(cond::to_string(which) + ": " + cond::to_string(rep.verdict));
        }
        out.tables.push_back(std::move(t));
        out.report = {{"family", family.to_json()}, {"reports", reports}};
    } else {
        p.fail("mode", "must be membership or conditions");
    }
    for (const auto& [key, got] : verdicts) {
        if (!expect.has(key)) continue;
        const auto want = expect.text(key, "");
        out.assertions.push_back({key + " verdict == " + want, got == want, "computed " + got});
    }
    out.report["family_definition"] = family.to_json();
}

}  // namespace

bool ScenarioResult::passed() const {
    return std::all_of(assertions.begin(), assertions.end(), [](const Assertion& a) { return a.pass; });
}

std::string ScenarioResult::summary() const {
    std::string s = "pcaf-lab " + kind + "\n";
    for (const auto& n : notes) s += n + "\n";
    for (const auto& a : assertions) s += std::string(a.pass ? "[PASS] " : "[FAIL] ") + a.name + " (" + a.detail + ")\n";
    s += std::string("result: ") + (passed() ? "PASS" : "FAIL") + "\n";
    return s;
}

const std::vector<std::string>& scenario_kinds() {
    static const std::vector<std::string> kinds{"oracle-suite", "metric", "classify", "mc-convergence", "conditions", "martingale"};
    return kinds;
}

std::string kind_for_command(const std::string& command) {
    if (command == "oracle") return "oracle-suite";
    if (command == "mc") return "mc-convergence";
    for (const auto& k : scenario_kinds())
        if (k == command) return k;
    throw Error(ErrorCode::ConfigInvalid, "unknown subcommand '" + command + "'");
}

void apply_override(json& config, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw Error(ErrorCode::ConfigInvalid, "--set expects key=value, got '" + assignment + "'");
    const std::string key = assignment.substr(0, eq), text = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(text);
    } catch (const json::exception&) {
        value = text;
    }
    json* node = &config;
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) throw Error(ErrorCode::ConfigInvalid, "--set key '" + key + "' has an empty component");
        if (!node->is_object()) throw Error(ErrorCode::ConfigInvalid, "--set key '" + key + "' descends into a non-object");
        if (dot == std::string::npos) {
            (*node)[part] = value;
            return;
        }
        node = &(*node)[part];
        if (node->is_null()) *node = json::object();
        start = dot + 1;
    }
}

ScenarioResult run_scenario(const json& input) {
    if (!input.is_object()) throw Error(ErrorCode::ConfigInvalid, "config must be a JSON object");
    ScenarioResult out;
    out.config = input;
    auto& config = out.config;
    if (!config.contains("kind") || !config["kind"].is_string()) throw Error(ErrorCode::ConfigInvalid, "kind: is required");
    out.kind = config["kind"].get<std::string>();
    if (std::find(scenario_kinds().begin(), scenario_kinds().end(), out.kind) == scenario_kinds().end())
        throw Error(ErrorCode::ConfigInvalid, "kind: unknown scenario kind '" + out.kind + "'");
    const auto seeds = seeds_of(config);
    config["seed_split"] = kSeedSplit;
    if (!config.contains("output")) config["output"] = "pcaf-lab-out/" + out.kind;
    if (!config["output"].is_string()) throw Error(ErrorCode::ConfigInvalid, "output: must be a string");
    if (!config.contains("formats")) config["formats"] = json::array({"csv", "json", "plotdata"});
    if (!config.contains("parameters")) config["parameters"] = json::object();
    Params p(config["parameters"], "parameters");

    if (out.kind == "oracle-suite") run_oracle(out, p, seeds);
    else if (out.kind == "metric") run_metric(out, p);
    else if (out.kind == "classify") run_classify(out, p);
    else if (out.kind == "mc-convergence") run_mc(out, p, seeds);
    else if (out.kind == "conditions") run_conditions(out, p);
    else run_martingale(out, p, seeds);
    return out;
}

std::vector<std::string> emit_report(const ScenarioResult& result, const std::string& format, const std::string& prefix) {
    std::vector<std::string> files;
    const auto open = [&](const std::string& name) {
        std::ofstream f(name, std::ios::binary);
        if (!f) throw Error(ErrorCode::IoFailure, "cannot write '" + name + "'");
        files.push_back(name);
        return f;
    };
    if (format == "csv") {
        if (result.tables.empty()) open(prefix + ".csv");
        for (const auto& t : result.tables) {
            auto f = open(prefix + (t.name.empty() ? "" : "." + t.name) + ".csv");
            for (std::size_t i = 0; i < t.columns.size(); ++i) f << (i ? "," : "") << csv_field(t.columns[i]);
            f << "\n";
            for (const auto& row : t.rows) {
                for (std::size_t i = 0; i < row.size(); ++i) f << (i ? "," : "") << row[i];
                f << "\n";
            }
        }
    } else if (format == "json") {
        auto f = open(prefix + ".json");
        json doc{{"kind", result.kind}, {"report", result.report}, {"pass", result.passed()}};
        json asserts = json::array();
        for (const auto& a : result.assertions) asserts.push_back({{"name", a.name}, {"pass", a.pass}, {"detail", a.detail}});
        doc["assertions"] = asserts;
        f << dump_json(doc) << "\n";
    } else if (format == "plotdata") {
        auto f = open(prefix + ".plot.dat");
        for (std::size_t c = 0; c < result.curves.size(); ++c) {
            const auto& curve = result.curves[c];
            if (c) f << "\n\n";
            f << "# curve " << curve.name << "\n# x y yerr\n";
            for (std::size_t i = 0; i < curve.x.size(); ++i)
                f << format_real(curve.x[i]) << " " << format_real(curve.y[i]) << " " << format_real(curve.yerr[i]) << "\n";
        }
    } else {
        throw Error(ErrorCode::UnsupportedFormat, "report format '" + format + "'");
    }
    return files;
}

std::vector<std::string> write_artifacts(const ScenarioResult& result) {
    const std::string prefix = result.config.at("output").get<std::string>();
    const auto parent = std::filesystem::path(prefix).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::vector<std::string> files;
    {
        std::ofstream f(prefix + ".config.json", std::ios::binary);
        if (!f) throw Error(ErrorCode::IoFailure, "cannot write '" + prefix + ".config.json'");
        f << dump_json(result.config) << "\n";
        files.push_back(prefix + ".config.json");
    }
    const auto& formats = result.config.at("formats");
    if (!formats.is_array()) throw Error(ErrorCode::ConfigInvalid, "formats: must be an array");
    for (const auto& fmt : formats) {
        if (!fmt.is_string()) throw Error(ErrorCode::ConfigInvalid, "formats: entries must be strings");
        const auto written = emit_report(result, fmt.get<std::string>(), prefix);
        files.insert(files.end(), written.begin(), written.end());
    }
    std::ofstream f(prefix + ".summary.txt", std::ios::binary);
    if (!f) throw Error(ErrorCode::IoFailure, "cannot write '" + prefix + ".summary.txt'");
    f << result.summary();
    files.push_back(prefix + ".summary.txt");
    return files;
}

}  // namespace pcaf::lab
