#pragma once

// Energy integrals, the metric rho and potentials for measures on R^1 / R^3
// under the Brownian resolvent kernel.

#include <span>
#include <vector>

#include "pcaf/kernel.hpp"
#include "pcaf/measure.hpp"

namespace pcaf::continuum {

/// I(mu, nu) = double integral of g_alpha against mu x nu. +infinity when a BM3D atom
/// meets an atom of the other measure at the same point.
double mutual_energy(const ResolventKernel& kernel, const MeasureRep& mu, const MeasureRep& nu);

/// sqrt(I(mu,mu) - 2 I(mu,nu) + I(nu,nu)), evaluated as the energy of the signed
/// difference when both densities share one grid. Round-off down to -1e-12 is clamped to 0.
/// Throws NotFiniteEnergy when either self-energy is infinite.
double rho_cont(const ResolventKernel& kernel, const MeasureRep& mu, const MeasureRep& nu);

/// U_alpha mu(x) = int g_alpha(x, y) mu(dy); +infinity at a BM3D atom.
double potential_at(const ResolventKernel& kernel, const MeasureRep& mu, std::span<const double> x);

struct MeasureClass {
    bool in_S0 = false;
    bool in_S00 = false;
    bool smooth = false;
    double energy_integral = 0.0;  ///< may be +infinity
    double potential_sup = 0.0;    ///< may be +infinity
    double total_mass = 0.0;
};

/// Classifies mu. The potential supremum is the maximum over the probe points and the
/// atom locations; a BM3D atom makes it infinite and the measure non-smooth (points are polar).
MeasureClass classify_measure(const ResolventKernel& kernel, const MeasureRep& mu,
                              const std::vector<std::vector<double>>& probe_grid);

/// Tensor-product hat prod_i (1 - |x_i - c_i| / h)_+ with support [c - h, c + h]^d.
struct HatFunction {
    std::vector<double> center;
    double half_width = 1.0;

    double operator()(std::span<const double> x) const;
    Box support() const;
    /// Exact integral against mu (piecewise-linear hat against piecewise-constant density).
    double integrate(const MeasureRep& mu) const;
};

/// Hats of half-width `half_width` centred on a uniform grid of `per_axis` points per axis of `window`.
std::vector<HatFunction> hat_family(const Box& window, int per_axis, double half_width);

/// max over the family of |int phi dmu - int phi dnu|.
double vague_gap(const MeasureRep& mu, const MeasureRep& nu, const std::vector<HatFunction>& tests);
/// Default family: hats at two scales on a 33-per-axis grid over the joint support (padded).
double vague_gap(const MeasureRep& mu, const MeasureRep& nu);

/// (sum over cells of value^p * overlap volume with region)^(1/p) for a grid density.
double lp_norm_grid(const GridDensity& f, double p, const Box& region);

}  // namespace pcaf::continuum
