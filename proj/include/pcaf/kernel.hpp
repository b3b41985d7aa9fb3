#pragma once

// Resolvent kernels of Brownian motion (generator 1/2 Laplacian) on R^1 and R^3:
//
//   BM1D: g_a(x,y) = (2a)^{-1/2} exp(-sqrt(2a)|x-y|)
//   BM3D: g_a(x,y) = exp(-sqrt(2a)|x-y|) / (2 pi |x-y|)
//
// plus the cell integrals that energy quadrature is built on.

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pcaf::continuum {

enum class Model { BM1D, BM3D };

int dimension(Model model);
std::string_view to_string(Model model);
/// Accepts "BM1D" / "BM3D" (any case); anything else is UnsupportedDimension.
Model model_from_string(std::string_view name);
/// d = 1 or 3; other dimensions have no elementary kernel and are rejected.
Model model_for_dimension(int d);

/// Axis-aligned box [lo, hi] in R^d.
struct Box {
    std::vector<double> lo;
    std::vector<double> hi;

    int dim() const { return static_cast<int>(lo.size()); }
    double volume() const;
    bool contains(std::span<const double> x) const;
    /// Overlap volume with another box of the same dimension (0 if disjoint).
    double overlap_volume(const Box& other) const;
};

class ResolventKernel {
public:
    ResolventKernel(Model model, double alpha = 1.0);

    Model model() const noexcept { return model_; }
    double alpha() const noexcept { return alpha_; }
    int dim() const noexcept { return dimension(model_); }
    /// sqrt(2 alpha), the exponential decay rate.
    double rate() const noexcept { return rate_; }

    /// g as a function of r = |x - y|; +infinity at r = 0 for BM3D.
    double of_distance(double r) const;
    /// Throws DimensionMismatch unless both points have the model's dimension.
    double operator()(std::span<const double> x, std::span<const double> y) const;

    /// int_box g(x, y) dy, exact up to rounding in 1D, semi-analytic in 3D.
    double box_potential(std::span<const double> x, const Box& box) const;
    /// int_a int_b g(x, y) dy dx.
    double box_pair(const Box& a, const Box& b) const;

private:
    double box_potential_3d(std::span<const double> x, const Box& box) const;
    double box_pair_3d_near(const Box& a, const Box& b) const;
    double box_pair_3d_far(const Box& a, const Box& b) const;

    Model model_;
    double alpha_;
    double rate_;
};

double kernel_eval(const ResolventKernel& kernel, std::span<const double> x, std::span<const double> y);

}  // namespace pcaf::continuum
