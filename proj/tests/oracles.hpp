#pragma once

// Reference computations used by the tests. Each one takes a route that is independent of
// the library code it checks: dense inverses assembled from raw conductances, projected
// gradient for capacities, eigen-decompositions for semigroups, plain trapezoid sums for
// Laplace transforms, and direct summation for series.

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "pcaf/discrete_form.hpp"

namespace oracle {

/// A_alpha = diag(sum_j w_ij + k_i + alpha m_i) - W, assembled entry by entry.
inline Eigen::MatrixXd stiffness(const pcaf::discrete::DiscreteForm& form, double alpha) {
    const int n = form.vertex_count();
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    for (const auto& e : form.edges()) {
        w(e.i, e.j) += e.weight;
        w(e.j, e.i) += e.weight;
    }
    Eigen::MatrixXd a = -w;
    for (int i = 0; i < n; ++i) a(i, i) = w.row(i).sum() + form.killing()[i] + alpha * form.base_measure()[i];
    return a;
}

/// G_alpha = A_alpha^{-1} by full-pivot LU; G(x, y) is the resolvent density w.r.t. m times m.
inline Eigen::MatrixXd green(const pcaf::discrete::DiscreteForm& form, double alpha) {
    return stiffness(form, alpha).fullPivLu().inverse();
}

inline double rho(const pcaf::discrete::DiscreteForm& form, const Eigen::VectorXd& mu, const Eigen::VectorXd& nu,
                  double alpha = 1.0) {
    const Eigen::VectorXd d = mu - nu;
    return std::sqrt(std::max(0.0, d.dot(green(form, alpha) * d)));
}

/// Cap(B) = min { E_1(u, u) : u >= 1 on B } by accelerated projected gradient.
inline double capacity_projected_gradient(const pcaf::discrete::DiscreteForm& form, const std::vector<int>& set,
                                          int iterations = 200000) {
    const Eigen::MatrixXd a = stiffness(form, 1.0);
    const double lipschitz = 2.0 * Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(a).eigenvalues().maxCoeff();
    const int n = form.vertex_count();
    std::vector<bool> in_set(n, false);
    for (int y : set) in_set[y] = true;
    const auto project = [&](Eigen::VectorXd& u) {
        for (int i = 0; i < n; ++i)
            if (in_set[i]) u[i] = std::max(u[i], 1.0);
    };
    Eigen::VectorXd u = Eigen::VectorXd::Zero(n), z = u;
    project(u);
    z = u;
    double t = 1.0;
    for (int k = 0; k < iterations; ++k) {
        Eigen::VectorXd next = z - (2.0 / lipschitz) * (a * z);
        project(next);
        const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        const double change = (next - u).lpNorm<Eigen::Infinity>();
        z = next + ((t - 1.0) / tn) * (next - u);
        u = next;
        t = tn;
        if (change < 1e-16) break;
    }
    return u.dot(a * u);
}

/// (1/t) int_0^t m^T e^{sL} h ds with h = f mu / m and L = -M^{-1} A_0, from the eigen-
/// decomposition of the symmetrised generator M^{1/2} L M^{-1/2}.
struct SpectralRevuz {
    Eigen::VectorXd a, b, lambda;  // m^T e^{sL} h = sum_k a_k b_k e^{s lambda_k}

    SpectralRevuz(const pcaf::discrete::DiscreteForm& form, const Eigen::VectorXd& f, const Eigen::VectorXd& mu) {
        const Eigen::VectorXd m = form.base_measure();
        const Eigen::VectorXd sq = m.cwiseSqrt();
        const Eigen::MatrixXd a0 = stiffness(form, 0.0);
        const Eigen::MatrixXd s = -(sq.cwiseInverse().asDiagonal() * a0 * sq.cwiseInverse().asDiagonal());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (s + s.transpose()));
        const Eigen::VectorXd h = f.cwiseProduct(mu).cwiseQuotient(m);
        lambda = eig.eigenvalues();
        a = eig.eigenvectors().transpose() * sq;                    // Q^T M^{1/2} 1
        b = eig.eigenvectors().transpose() * sq.cwiseProduct(h);    // Q^T M^{1/2} h
    }
    double limit() const { return a.dot(b); }
    double rate(double t) const {
        double sum = 0.0;
        for (int k = 0; k < lambda.size(); ++k) {
            const double x = lambda[k] * t;
            const double phi = std::abs(x) < 1e-8 ? 1.0 + x / 2.0 : std::expm1(x) / x;
            sum += a[k] * b[k] * phi;
        }
        return sum;
    }
    /// |d/dt rate(t)| at 0 = |m^T L h| / 2.
    double slope_constant() const { return 0.5 * std::abs(a.cwiseProduct(b).dot(lambda)); }
};

/// int_0^infty e^{-alpha t} p_t(r) dt for Brownian motion (generator Laplacian / 2) in R^d,
/// by a trapezoid sum in u = log t on [-60, 8].
inline double heat_laplace(int d, double alpha, double r) {
    const double h = 0.004;
    double sum = 0.0;
    for (double u = -60.0; u <= 8.0; u += h) {
        const double t = std::exp(u);
        const double p = std::pow(2.0 * std::numbers::pi * t, -0.5 * d) * std::exp(-r * r / (2.0 * t));
        sum += std::exp(-alpha * t) * p * t;
    }
    return sum * h;
}

/// Birth-death chain on nodes x_i = -half + i h (i = 0..cells): edge weight 1 / (2h), node
/// mass h (h/2 at the ends). It discretizes E(u, u) = 1/2 int |u'|^2 dx.
inline pcaf::discrete::DiscreteForm birth_death(double half, int cells) {
    const double h = 2.0 * half / cells;
    std::vector<pcaf::discrete::Edge> edges;
    for (int i = 0; i < cells; ++i) edges.push_back({i, i + 1, 1.0 / (2.0 * h)});
    Eigen::VectorXd m = Eigen::VectorXd::Constant(cells + 1, h);
    m[0] = m[cells] = h / 2.0;
    return pcaf::discrete::DiscreteForm::from_edges(cells + 1, edges, Eigen::VectorXd::Zero(cells + 1), m);
}

}  // namespace oracle
