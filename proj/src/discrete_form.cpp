#include "pcaf/discrete_form.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "pcaf/error.hpp"
#include "pcaf/text.hpp"

namespace pcaf::discrete {

namespace {

void require_alpha(double alpha) {
    if (!(alpha > 0.0) || !std::isfinite(alpha))
        throw Error(ErrorCode::NonpositiveAlpha, "alpha = " + format_real(alpha));
}

void validate_vertex_vectors(int n, const Eigen::VectorXd& killing, const Eigen::VectorXd& base) {
    if (killing.size() != n || base.size() != n) {
        std::ostringstream os;
        os << "expected " << n << " vertices, got killing " << killing.size() << ", m " << base.size();
        throw Error(ErrorCode::DimensionMismatch, os.str());
    }
    for (int i = 0; i < n; ++i) {
        if (!(killing[i] >= 0.0) || !std::isfinite(killing[i]))
            throw Error(ErrorCode::NegativeEntry, "killing[" + std::to_string(i) + "] = " + format_real(killing[i]));
        if (!(base[i] > 0.0) || !std::isfinite(base[i]))
            throw Error(ErrorCode::NonpositiveBaseMeasure, "m[" + std::to_string(i) + "] = " + format_real(base[i]));
    }
}

}  // namespace

DiscreteForm DiscreteForm::build(const Eigen::MatrixXd& conductance, const Eigen::VectorXd& killing,
                                 const Eigen::VectorXd& base_measure) {
    const auto n = static_cast<int>(conductance.rows());
    if (conductance.cols() != n) throw Error(ErrorCode::DimensionMismatch, "conductance matrix is not square");
    validate_vertex_vectors(n, killing, base_measure);

    std::vector<Edge> edges;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double w = conductance(i, j);
            if (!(w >= 0.0) || !std::isfinite(w))
                throw Error(ErrorCode::NegativeEntry,
                            "w[" + std::to_string(i) + "][" + std::to_string(j) + "] = " + format_real(w));
            if (j > i) {
                if (w != conductance(j, i))
                    throw Error(ErrorCode::AsymmetricConductance,
                                "w[" + std::to_string(i) + "][" + std::to_string(j) + "] = " + format_real(w) +
                                    " but w[" + std::to_string(j) + "][" + std::to_string(i) +
                                    "] = " + format_real(conductance(j, i)));
                if (w > 0.0) edges.push_back({i, j, w});
            }
        }
    }
    // Self-loops carry no energy; the diagonal is ignored.
    return from_edges(n, edges, killing, base_measure);
}

DiscreteForm DiscreteForm::from_edges(int vertex_count, const std::vector<Edge>& edges,
                                      const Eigen::VectorXd& killing, const Eigen::VectorXd& base_measure) {
    if (vertex_count <= 0) throw Error(ErrorCode::DimensionMismatch, "vertex count must be positive");
    validate_vertex_vectors(vertex_count, killing, base_measure);

    std::vector<Eigen::Triplet<double>> triplets;
    std::set<std::pair<int, int>> seen;
    for (const auto& e : edges) {
        if (e.i < 0 || e.j < 0 || e.i >= vertex_count || e.j >= vertex_count)
            throw Error(ErrorCode::DimensionMismatch,
                        "edge (" + std::to_string(e.i) + "," + std::to_string(e.j) + ") out of range");
        if (!(e.weight >= 0.0) || !std::isfinite(e.weight))
            throw Error(ErrorCode::NegativeEntry, "edge (" + std::to_string(e.i) + "," + std::to_string(e.j) +
                                                      ") weight " + format_real(e.weight));
        if (e.i == e.j || e.weight == 0.0) continue;
        const auto key = std::minmax(e.i, e.j);
        if (!seen.insert(key).second)
            throw Error(ErrorCode::AsymmetricConductance, "edge (" + std::to_string(key.first) + "," +
                                                              std::to_string(key.second) + ") listed twice");
        triplets.emplace_back(e.i, e.j, e.weight);
        triplets.emplace_back(e.j, e.i, e.weight);
    }

    DiscreteForm form;
    form.conductance_.resize(vertex_count, vertex_count);
    form.conductance_.setFromTriplets(triplets.begin(), triplets.end());
    form.conductance_.makeCompressed();
    form.killing_ = killing;
    form.base_measure_ = base_measure;
    return form;
}

std::vector<Edge> DiscreteForm::edges() const {
    std::vector<Edge> out;
    for (int col = 0; col < conductance_.outerSize(); ++col)
        for (Eigen::SparseMatrix<double>::InnerIterator it(conductance_, col); it; ++it)
            if (it.row() < it.col()) out.push_back({static_cast<int>(it.row()), static_cast<int>(it.col()), it.value()});
    std::sort(out.begin(), out.end(), [](const Edge& a, const Edge& b) { return std::tie(a.i, a.j) < std::tie(b.i, b.j); });
    return out;
}

Eigen::SparseMatrix<double> DiscreteForm::stiffness(double alpha) const {
    const int n = vertex_count();
    std::vector<Eigen::Triplet<double>> triplets;
    Eigen::VectorXd diag = killing_ + alpha * base_measure_;
    for (int col = 0; col < conductance_.outerSize(); ++col) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(conductance_, col); it; ++it) {
            triplets.emplace_back(static_cast<int>(it.row()), col, -it.value());
            diag[col] += it.value();
        }
    }
    for (int i = 0; i < n; ++i) triplets.emplace_back(i, i, diag[i]);
    Eigen::SparseMatrix<double> a(n, n);
    a.setFromTriplets(triplets.begin(), triplets.end());
    a.makeCompressed();
    return a;
}

double DiscreteForm::energy(const Eigen::VectorXd& u, const Eigen::VectorXd& v, double alpha) const {
    if (u.size() != vertex_count() || v.size() != vertex_count())
        throw Error(ErrorCode::DimensionMismatch, "energy: vector length differs from vertex count");
    return u.dot(stiffness(alpha) * v);
}

DiscreteMeasure DiscreteMeasure::checked(Eigen::VectorXd masses) {
    for (Eigen::Index i = 0; i < masses.size(); ++i)
        if (!(masses[i] >= 0.0) || !std::isfinite(masses[i]))
            throw Error(ErrorCode::NegativeEntry, "mass[" + std::to_string(i) + "] = " + format_real(masses[i]));
    return {std::move(masses)};
}

StiffnessSolver::StiffnessSolver(const DiscreteForm& form, double alpha) : alpha_(alpha) {
    require_alpha(alpha);
    matrix_ = form.stiffness(alpha);
    llt_.compute(matrix_);
    if (llt_.info() != Eigen::Success) {
        const Eigen::VectorXd d = matrix_.diagonal();
        throw Error(ErrorCode::SolverFailure,
                    "Cholesky failed; diagonal ratio " + format_real(d.maxCoeff() / d.minCoeff()));
    }
}

Eigen::VectorXd StiffnessSolver::solve(const Eigen::VectorXd& rhs) const {
    if (rhs.size() != matrix_.rows()) throw Error(ErrorCode::DimensionMismatch, "right-hand side length");
    Eigen::VectorXd x = llt_.solve(rhs);
    Eigen::VectorXd r = rhs - matrix_ * x;
    const double scale = std::max(rhs.norm(), std::numeric_limits<double>::min());
    if (r.norm() > 1e-12 * scale) {
        x += llt_.solve(r);  // one step of iterative refinement
        r = rhs - matrix_ * x;
    }
    if (!x.allFinite() || r.norm() > 1e-10 * scale) {
        const Eigen::VectorXd d = matrix_.diagonal();
        throw Error(ErrorCode::SolverFailure, "residual " + format_real(r.norm()) + " for rhs norm " +
                                                  format_real(rhs.norm()) + "; diagonal ratio " +
                                                  format_real(d.maxCoeff() / d.minCoeff()));
    }
    return x;
}

PotentialVector potential(const DiscreteForm& form, const DiscreteMeasure& mu, double alpha) {
    require_alpha(alpha);
    if (mu.masses.size() != form.vertex_count())
        throw Error(ErrorCode::DimensionMismatch, "measure length differs from vertex count");
    return {StiffnessSolver(form, alpha).solve(mu.masses), alpha};
}

double rho(const DiscreteForm& form, const DiscreteMeasure& mu, const DiscreteMeasure& nu, double alpha) {
    require_alpha(alpha);
    if (mu.masses.size() != form.vertex_count() || nu.masses.size() != form.vertex_count())
        throw Error(ErrorCode::DimensionMismatch, "measure length differs from vertex count");
    const Eigen::VectorXd diff = mu.masses - nu.masses;
    if (diff.isZero(0.0)) return 0.0;
    const Eigen::VectorXd u = StiffnessSolver(form, alpha).solve(diff);
    return std::sqrt(std::max(0.0, diff.dot(u)));
}

Eigen::VectorXd resolvent_apply(const DiscreteForm& form, const Eigen::VectorXd& f, double alpha) {
    require_alpha(alpha);
    if (f.size() != form.vertex_count()) throw Error(ErrorCode::DimensionMismatch, "function length");
    return StiffnessSolver(form, alpha).solve(form.base_measure().cwiseProduct(f));
}

Eigen::VectorXd approx_g(const DiscreteForm& form, const Eigen::VectorXd& f, int n) {
    if (n < 1) throw Error(ErrorCode::DimensionMismatch, "approx_g index must be >= 1");
    const double nd = n;
    return nd * (f - nd * resolvent_apply(form, f, nd + 1.0));
}

double capacity(const DiscreteForm& form, std::span<const int> set) {
    if (set.empty()) throw Error(ErrorCode::EmptySet, "capacity of the empty set");
    const int n = form.vertex_count();
    std::vector<char> in_set(static_cast<std::size_t>(n), 0);
    for (int v : set) {
        if (v < 0 || v >= n) throw Error(ErrorCode::DimensionMismatch, "vertex " + std::to_string(v) + " out of range");
        in_set[static_cast<std::size_t>(v)] = 1;
    }
    std::vector<int> free_index(static_cast<std::size_t>(n), -1);
    int free_count = 0;
    for (int i = 0; i < n; ++i)
        if (!in_set[static_cast<std::size_t>(i)]) free_index[static_cast<std::size_t>(i)] = free_count++;

    const Eigen::SparseMatrix<double> a = form.stiffness(1.0);
    Eigen::VectorXd u = Eigen::VectorXd::Ones(n);
    if (free_count > 0) {
        // A_FF u_F = -A_FB 1_B
        std::vector<Eigen::Triplet<double>> triplets;
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(free_count);
        for (int col = 0; col < a.outerSize(); ++col) {
            for (Eigen::SparseMatrix<double>::InnerIterator it(a, col); it; ++it) {
                const int fr = free_index[static_cast<std::size_t>(it.row())];
                const int fc = free_index[static_cast<std::size_t>(col)];
                if (fr < 0) continue;
                if (fc >= 0)
                    triplets.emplace_back(fr, fc, it.value());
                else
                    rhs[fr] -= it.value();
            }
        }
        Eigen::SparseMatrix<double> aff(free_count, free_count);
        aff.setFromTriplets(triplets.begin(), triplets.end());
        Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(aff);
        if (llt.info() != Eigen::Success) throw Error(ErrorCode::SolverFailure, "capacity: Cholesky failed");
        const Eigen::VectorXd uf = llt.solve(rhs);
        for (int i = 0; i < n; ++i)
            if (free_index[static_cast<std::size_t>(i)] >= 0) u[i] = uf[free_index[static_cast<std::size_t>(i)]];
    }
    return u.dot(a * u);
}

Eigen::MatrixXd generator(const DiscreteForm& form) {
    const Eigen::MatrixXd a0 = form.stiffness_dense(0.0);
    return -(form.base_measure().cwiseInverse().asDiagonal() * a0);
}

double revuz_rate(const DiscreteForm& form, const Eigen::VectorXd& f, const DiscreteMeasure& mu, double t) {
    if (!(t > 0.0) || !std::isfinite(t)) throw Error(ErrorCode::NonpositiveTime, "t = " + format_real(t));
    const int n = form.vertex_count();
    if (f.size() != n || mu.masses.size() != n) throw Error(ErrorCode::DimensionMismatch, "revuz_rate inputs");

    // exp(t [[L, I], [0, 0]]) carries int_0^t e^{sL} ds in its upper-right block.
    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    block.topLeftCorner(n, n) = t * generator(form);
    block.topRightCorner(n, n) = t * Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd e = block.exp();
    const Eigen::VectorXd density = mu.masses.cwiseQuotient(form.base_measure());
    const Eigen::VectorXd integrand = f.cwiseProduct(density);
    return form.base_measure().dot(e.topRightCorner(n, n) * integrand) / t;
}

DiscreteForm random_form(std::mt19937_64& rng, int vertex_count, const RandomFormOptions& options) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Edge> edges;
    for (int i = 0; i < vertex_count; ++i)
        for (int j = i + 1; j < vertex_count; ++j)
            if (unit(rng) < options.edge_probability) edges.push_back({i, j, 1.0 - unit(rng)});
    Eigen::VectorXd killing(vertex_count), base(vertex_count);
    for (int i = 0; i < vertex_count; ++i) {
        killing[i] = options.max_killing * unit(rng);
        base[i] = options.max_base - (options.max_base - options.min_base) * unit(rng);
    }
    return DiscreteForm::from_edges(vertex_count, edges, killing, base);
}

DiscreteMeasure random_measure(std::mt19937_64& rng, int vertex_count, double sparsity) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Eigen::VectorXd masses(vertex_count);
    for (int i = 0; i < vertex_count; ++i) {
        const double keep = unit(rng);
        const double value = unit(rng);
        masses[i] = keep < sparsity ? 0.0 : value;
    }
    return {masses};
}

std::string to_json(const DiscreteForm& form) {
    std::string out = "{\"vertices\": " + std::to_string(form.vertex_count()) + ", \"edges\": [";
    bool first = true;
    for (const auto& e : form.edges()) {
        if (!first) out += ", ";
        first = false;
        out += "[" + std::to_string(e.i) + ", " + std::to_string(e.j) + ", " + format_real(e.weight) + "]";
    }
    const auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    out += "], \"killing\": " + json_real_array(vec(form.killing()));
    out += ", \"m\": " + json_real_array(vec(form.base_measure())) + "}";
    return out;
}

std::string to_json(const DiscreteMeasure& measure) {
    return "{\"masses\": " +
           json_real_array(std::vector<double>(measure.masses.data(), measure.masses.data() + measure.masses.size())) +
           "}";
}

namespace {

Eigen::VectorXd vector_field(const nlohmann::json& doc, const char* key) {
    if (!doc.contains(key) || !doc[key].is_array())
        throw Error(ErrorCode::ConfigInvalid, std::string("missing array field '") + key + "'");
    const auto& arr = doc[key];
    Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
    for (std::size_t i = 0; i < arr.size(); ++i) v[static_cast<Eigen::Index>(i)] = real_from_json(arr[i]);
    return v;
}

}  // namespace

DiscreteForm form_from_json(const nlohmann::json& doc) {
    if (!doc.contains("vertices") || !doc["vertices"].is_number_integer())
        throw Error(ErrorCode::ConfigInvalid, "form needs integer 'vertices'");
    const int n = doc["vertices"].get<int>();
    std::vector<Edge> edges;
    if (doc.contains("edges")) {
        for (const auto& e : doc["edges"]) {
            if (!e.is_array() || e.size() != 3) throw Error(ErrorCode::ConfigInvalid, "edge must be [i, j, w]");
            edges.push_back({e[0].get<int>(), e[1].get<int>(), real_from_json(e[2])});
        }
    }
    const Eigen::VectorXd killing = doc.contains("killing") ? vector_field(doc, "killing") : Eigen::VectorXd::Zero(n);
    return DiscreteForm::from_edges(n, edges, killing, vector_field(doc, "m"));
}

DiscreteMeasure measure_from_json(const nlohmann::json& doc) {
    return DiscreteMeasure::checked(vector_field(doc, "masses"));
}

}  // namespace pcaf::discrete
