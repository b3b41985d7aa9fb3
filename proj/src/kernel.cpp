#include "pcaf/kernel.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>

#include "pcaf/error.hpp"
#include "pcaf/text.hpp"

namespace pcaf::continuum {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Three-point Gauss-Legendre rule on [-1, 1].
constexpr std::array<double, 3> kGl3Nodes{-0.7745966692414834, 0.0, 0.7745966692414834};
constexpr std::array<double, 3> kGl3Weights{5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};

// (e^{-x} + x - 1), accurate for small x >= 0.
double exp_remainder(double x) {
    if (x < 1e-2) {
        // x^2/2 - x^3/6 + x^4/24 - ...
        double term = x * x / 2.0, sum = 0.0;
        for (int k = 3; k < 12; ++k) {
            sum += term;
            term *= -x / k;
        }
        return sum;
    }
    return std::expm1(-x) + x;
}

double distance_to_box(std::span<const double> x, const Box& box) {
    double s = 0.0;
    for (int i = 0; i < box.dim(); ++i) {
        const double d = std::max({box.lo[i] - x[i], 0.0, x[i] - box.hi[i]});
        s += d * d;
    }
    return std::sqrt(s);
}

double box_gap(const Box& a, const Box& b) {
    double s = 0.0;
    for (int i = 0; i < a.dim(); ++i) {
        const double d = std::max({b.lo[i] - a.hi[i], 0.0, a.lo[i] - b.hi[i]});
        s += d * d;
    }
    return std::sqrt(s);
}

double diameter(const Box& b) {
    double s = 0.0;
    for (int i = 0; i < b.dim(); ++i) s += (b.hi[i] - b.lo[i]) * (b.hi[i] - b.lo[i]);
    return std::sqrt(s);
}

// Second antiderivative of the N(0, t) density with the linear part z/2 removed
// (even in z); the four-term combination below does not see linear parts.
double gaussian_psi(double z, double sigma) {
    const double u = z / sigma;
    const double phi = std::exp(-0.5 * u * u) / std::sqrt(kTwoPi);
    const double centered_cdf = 0.5 * std::erf(u / std::numbers::sqrt2);
    return z * centered_cdf + sigma * phi;
}

// int_{[a0,a1]} int_{[b0,b1]} p_t(x - y) dy dx
double interval_pair_heat(double a0, double a1, double b0, double b1, double sigma) {
    return gaussian_psi(a1 - b0, sigma) + gaussian_psi(a0 - b1, sigma) - gaussian_psi(a0 - b0, sigma) -
           gaussian_psi(a1 - b1, sigma);
}

}  // namespace

int dimension(Model model) { return model == Model::BM1D ? 1 : 3; }

std::string_view to_string(Model model) { return model == Model::BM1D ? "BM1D" : "BM3D"; }

Model model_from_string(std::string_view name) {
    std::string upper(name);
    std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
    if (upper == "BM1D") return Model::BM1D;
    if (upper == "BM3D") return Model::BM3D;
    throw Error(ErrorCode::UnsupportedDimension, "model '" + std::string(name) + "' (only BM1D and BM3D)");
}

Model model_for_dimension(int d) {
    if (d == 1) return Model::BM1D;
    if (d == 3) return Model::BM3D;
    throw Error(ErrorCode::UnsupportedDimension, "dimension " + std::to_string(d) + " (only 1 and 3)");
}

double Box::volume() const {
    double v = 1.0;
    for (int i = 0; i < dim(); ++i) v *= std::max(0.0, hi[i] - lo[i]);
    return v;
}

bool Box::contains(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != dim()) return false;
    for (int i = 0; i < dim(); ++i)
        if (x[i] < lo[i] || x[i] > hi[i]) return false;
    return true;
}

double Box::overlap_volume(const Box& other) const {
    if (other.dim() != dim()) throw Error(ErrorCode::DimensionMismatch, "box dimensions differ");
    double v = 1.0;
    for (int i = 0; i < dim(); ++i) v *= std::max(0.0, std::min(hi[i], other.hi[i]) - std::max(lo[i], other.lo[i]));
    return v;
}

ResolventKernel::ResolventKernel(Model model, double alpha) : model_(model), alpha_(alpha) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw Error(ErrorCode::NonpositiveAlpha, "alpha = " + format_real(alpha));
    rate_ = std::sqrt(2.0 * alpha);
}

double ResolventKernel::of_distance(double r) const {
    if (model_ == Model::BM1D) return std::exp(-rate_ * r) / rate_;
    if (r == 0.0) return kInf;
    return std::exp(-rate_ * r) / (kTwoPi * r);
}

double ResolventKernel::operator()(std::span<const double> x, std::span<const double> y) const {
    const auto d = static_cast<std::size_t>(dim());
    if (x.size() != d || y.size() != d)
        throw Error(ErrorCode::DimensionMismatch, std::string(to_string(model_)) + " expects points of dimension " +
                                                      std::to_string(d));
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
    return of_distance(std::sqrt(s));
}

double kernel_eval(const ResolventKernel& kernel, std::span<const double> x, std::span<const double> y) {
    return kernel(x, y);
}

double ResolventKernel::box_potential(std::span<const double> x, const Box& box) const {
    if (static_cast<int>(x.size()) != dim() || box.dim() != dim())
        throw Error(ErrorCode::DimensionMismatch, "box_potential: dimension differs from kernel");
    if (box.volume() == 0.0) return 0.0;
    if (model_ == Model::BM1D) {
        const double c = rate_, a = box.lo[0], b = box.hi[0], p = x[0];
        const double scale = 1.0 / (c * c);
        if (p <= a) return scale * std::exp(-c * (a - p)) * -std::expm1(-c * (b - a));
        if (p >= b) return scale * std::exp(-c * (p - b)) * -std::expm1(-c * (b - a));
        return scale * (-std::expm1(-c * (p - a)) - std::expm1(-c * (b - p)));
    }
    return box_potential_3d(x, box);
}

// Divergence theorem: int_B F(|y-x|) dy = sum_faces h_face int_face Phi(|y-x|) dS with
// Phi(r) = r^{-3} int_0^r F(s) s^2 ds and h the signed distance to the face plane
// (positive on the interior side). For F = g the radial part of the face integral
// in polar coordinates about the foot of the perpendicular is elementary:
//   int_{|h|}^{R} Phi(r) r dr = (T(|h|) - T(R)) / (2 pi c^2),  T(r) = (1 - e^{-cr}) / r,
// leaving one smooth angular integral per corner rectangle.
double ResolventKernel::box_potential_3d(std::span<const double> x, const Box& box) const {
    const double dist = distance_to_box(x, box);
    const double diam = diameter(box);
    if (dist >= 3.0 * diam) {
        double sum = 0.0;
        std::array<double, 3> y{};
        const std::array<double, 3> half{(box.hi[0] - box.lo[0]) / 2, (box.hi[1] - box.lo[1]) / 2,
                                         (box.hi[2] - box.lo[2]) / 2};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                for (int k = 0; k < 3; ++k) {
                    y[0] = box.lo[0] + half[0] * (1 + kGl3Nodes[i]);
                    y[1] = box.lo[1] + half[1] * (1 + kGl3Nodes[j]);
                    y[2] = box.lo[2] + half[2] * (1 + kGl3Nodes[k]);
                    sum += kGl3Weights[i] * kGl3Weights[j] * kGl3Weights[k] * (*this)(x, y);
                }
        return sum * half[0] * half[1] * half[2];
    }

    const double c = rate_;
    const auto t_of = [c](double r) { return r == 0.0 ? c : -std::expm1(-c * r) / r; };
    const double norm = 1.0 / (kTwoPi * c * c);

    double total = 0.0;
    for (int axis = 0; axis < 3; ++axis) {
        const int u_axis = (axis + 1) % 3, v_axis = (axis + 2) % 3;
        for (int side = 0; side < 2; ++side) {
            const double h = side == 0 ? x[axis] - box.lo[axis] : box.hi[axis] - x[axis];
            if (h == 0.0) continue;
            const double abs_h = std::abs(h);
            const double t_h = t_of(abs_h);
            // Corner rectangle [0,a]x[0,b] anchored at the foot point.
            const auto corner = [&](double a, double b) {
                if (a == 0.0 || b == 0.0) return 0.0;
                const double sign = (a > 0) == (b > 0) ? 1.0 : -1.0;
                a = std::abs(a);
                b = std::abs(b);
                const double split = std::atan2(b, a);
                const auto radial = [&](double reach) {
                    return t_h - t_of(std::sqrt(abs_h * abs_h + reach * reach));
                };
                using gl = boost::math::quadrature::gauss<double, 20>;
                const double first = gl::integrate([&](double phi) { return radial(a / std::cos(phi)); }, 0.0, split);
                const double second =
                    gl::integrate([&](double phi) { return radial(b / std::sin(phi)); }, split, std::numbers::pi / 2);
                return sign * (first + second);
            };
            const double u0 = box.lo[u_axis] - x[u_axis], u1 = box.hi[u_axis] - x[u_axis];
            const double v0 = box.lo[v_axis] - x[v_axis], v1 = box.hi[v_axis] - x[v_axis];
            const double face = corner(u1, v1) - corner(u0, v1) - corner(u1, v0) + corner(u0, v0);
            total += h * norm * face;
        }
    }
    return total;
}

double ResolventKernel::box_pair(const Box& a, const Box& b) const {
    if (a.dim() != dim() || b.dim() != dim()) throw Error(ErrorCode::DimensionMismatch, "box_pair: dimension");
    if (a.volume() == 0.0 || b.volume() == 0.0) return 0.0;
    if (model_ == Model::BM1D) {
        const double c = rate_;
        const double a0 = a.lo[0], a1 = a.hi[0], b0 = b.lo[0], b1 = b.hi[0];
        if (a1 <= b0 || b1 <= a0) {
            const double gap = a1 <= b0 ? b0 - a1 : a0 - b1;
            return std::exp(-c * gap) * std::expm1(-c * (a1 - a0)) * std::expm1(-c * (b1 - b0)) / (c * c * c);
        }
        // Psi(s) = (e^{-c|s|} + c|s| - 1) / c^2 has Psi'' = e^{-c|s|}.
        const auto psi = [c](double s) { return exp_remainder(c * std::abs(s)) / (c * c); };
        return (psi(a1 - b0) + psi(a0 - b1) - psi(a0 - b0) - psi(a1 - b1)) / c;
    }
    const double separation = box_gap(a, b);
    if (separation >= 3.0 * std::max(diameter(a), diameter(b))) return box_pair_3d_far(a, b);
    return box_pair_3d_near(a, b);
}

// int_0^inf e^{-alpha t} prod_i J_i(t) dt with J_i the one-dimensional heat-kernel
// interval pairing; smooth in t, so exp-sinh quadrature converges quickly even for
// coincident or touching cells.
double ResolventKernel::box_pair_3d_near(const Box& a, const Box& b) const {
    const double alpha = alpha_;
    const auto integrand = [&](double t) {
        if (!(t > 0.0)) return 0.0;
        const double sigma = std::sqrt(t);
        double prod = std::exp(-alpha * t);
        for (int i = 0; i < 3; ++i) prod *= interval_pair_heat(a.lo[i], a.hi[i], b.lo[i], b.hi[i], sigma);
        return prod;
    };
    boost::math::quadrature::exp_sinh<double> integrator;
    double error = 0.0;
    return integrator.integrate(integrand, 1e-12, &error);
}

double ResolventKernel::box_pair_3d_far(const Box& a, const Box& b) const {
    std::array<std::array<double, 3>, 27> pa{}, pb{};
    std::array<double, 27> wa{}, wb{};
    const auto fill = [](const Box& box, std::array<std::array<double, 3>, 27>& pts, std::array<double, 27>& w) {
        int idx = 0;
        const double vol = box.volume() / 8.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                for (int k = 0; k < 3; ++k, ++idx) {
                    const std::array<int, 3> n{i, j, k};
                    for (int ax = 0; ax < 3; ++ax)
                        pts[idx][ax] = box.lo[ax] + (box.hi[ax] - box.lo[ax]) / 2 * (1 + kGl3Nodes[n[ax]]);
                    w[idx] = kGl3Weights[i] * kGl3Weights[j] * kGl3Weights[k] * vol;
                }
    };
    fill(a, pa, wa);
    fill(b, pb, wb);
    double sum = 0.0;
    for (int i = 0; i < 27; ++i)
        for (int j = 0; j < 27; ++j) sum += wa[i] * wb[j] * (*this)(pa[i], pb[j]);
    return sum;
}

}  // namespace pcaf::continuum
