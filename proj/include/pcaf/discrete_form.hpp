#pragma once

// Finite-state symmetric Dirichlet forms and their exact potential theory.
//
// A form on vertices {0..N-1} is given by symmetric conductances w_ij >= 0,
// killing k_i >= 0 and a base measure m_i > 0:
//
//   E(u,v)   = 1/2 sum_{i!=j} w_ij (u_i - u_j)(v_i - v_j) + sum_i k_i u_i v_i
//   E_a(u,v) = E(u,v) + a sum_i m_i u_i v_i = u^T A_a v
//
// Everything below is direct linear algebra on A_a, which is what makes this
// module usable as ground truth for the continuum and Monte-Carlo code.

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "json.hpp"

namespace pcaf::discrete {

struct Edge {
    int i = 0;
    int j = 0;
    double weight = 0.0;
};

class DiscreteForm {
public:
    /// Validates and builds a form from a dense conductance matrix.
    static DiscreteForm build(const Eigen::MatrixXd& conductance, const Eigen::VectorXd& killing,
                              const Eigen::VectorXd& base_measure);
    /// Same, from an edge list; (i,j) and (j,i) denote the same edge.
    static DiscreteForm from_edges(int vertex_count, const std::vector<Edge>& edges,
                                   const Eigen::VectorXd& killing, const Eigen::VectorXd& base_measure);

    int vertex_count() const noexcept { return static_cast<int>(base_measure_.size()); }
    const Eigen::SparseMatrix<double>& conductance() const noexcept { return conductance_; }
    const Eigen::VectorXd& killing() const noexcept { return killing_; }
    const Eigen::VectorXd& base_measure() const noexcept { return base_measure_; }

    /// Upper-triangular edge list (i < j), ordered by (i, j).
    std::vector<Edge> edges() const;

    /// A_alpha with E_alpha(u,v) = u^T A_alpha v. alpha = 0 gives the form E itself.
    Eigen::SparseMatrix<double> stiffness(double alpha) const;
    Eigen::MatrixXd stiffness_dense(double alpha) const { return Eigen::MatrixXd(stiffness(alpha)); }

    double energy(const Eigen::VectorXd& u, const Eigen::VectorXd& v, double alpha) const;

    bool conservative() const { return killing_.isZero(0.0); }

private:
    DiscreteForm() = default;

    Eigen::SparseMatrix<double> conductance_;
    Eigen::VectorXd killing_;
    Eigen::VectorXd base_measure_;
};

/// Nonnegative point masses, one per vertex.
struct DiscreteMeasure {
    Eigen::VectorXd masses;

    static DiscreteMeasure checked(Eigen::VectorXd masses);
    static DiscreteMeasure zero(int n) { return {Eigen::VectorXd::Zero(n)}; }
    double total() const { return masses.sum(); }
};

struct PotentialVector {
    Eigen::VectorXd values;
    double alpha = 1.0;
};

/// Cholesky factorization of A_alpha, reusable across right-hand sides.
class StiffnessSolver {
public:
    StiffnessSolver(const DiscreteForm& form, double alpha);

    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
    double alpha() const noexcept { return alpha_; }

private:
    Eigen::SparseMatrix<double> matrix_;
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt_;
    double alpha_;
};

PotentialVector potential(const DiscreteForm& form, const DiscreteMeasure& mu, double alpha);

/// rho_alpha(mu, nu) = ||U_a mu - U_a nu||_{E_a}; alpha = 1 is the metric rho.
double rho(const DiscreteForm& form, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
           double alpha = 1.0);

/// R_alpha f = A_alpha^{-1} M f.
Eigen::VectorXd resolvent_apply(const DiscreteForm& form, const Eigen::VectorXd& f, double alpha);

/// g_n = n (f - n R_{n+1} f), for f a 1-potential.
Eigen::VectorXd approx_g(const DiscreteForm& form, const Eigen::VectorXd& f, int n);

/// 1-capacity of a vertex set via the E_1-harmonic extension of 1_B.
double capacity(const DiscreteForm& form, std::span<const int> set);

/// (1/t) sum_i m_i E_i[ int_0^t f(X_s) dA_s ] for the PCAF A_s = int_0^s (mu/m)(X_u) du,
/// computed from the matrix exponential of the generator.
double revuz_rate(const DiscreteForm& form, const Eigen::VectorXd& f, const DiscreteMeasure& mu,
                  double t);

/// Generator L = -M^{-1} A_0 of the associated Markov chain.
Eigen::MatrixXd generator(const DiscreteForm& form);

struct RandomFormOptions {
    double edge_probability = 0.3;
    double max_killing = 0.0;     // k_i ~ uniform[0, max_killing]
    double min_base = 0.5;        // m_i ~ uniform(min_base, max_base]
    double max_base = 2.0;
};

/// Erdos-Renyi conductances with weights uniform(0,1].
DiscreteForm random_form(std::mt19937_64& rng, int vertex_count, const RandomFormOptions& options = {});
DiscreteMeasure random_measure(std::mt19937_64& rng, int vertex_count, double sparsity = 0.0);

// JSON: {"vertices": N, "edges": [[i,j,w],...], "killing": [...], "m": [...]}, {"masses": [...]}.
std::string to_json(const DiscreteForm& form);
std::string to_json(const DiscreteMeasure& measure);
DiscreteForm form_from_json(const nlohmann::json& doc);
DiscreteMeasure measure_from_json(const nlohmann::json& doc);

}  // namespace pcaf::discrete
