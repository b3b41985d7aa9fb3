#include "pcaf/continuum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pcaf/error.hpp"

namespace pcaf::continuum {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_dim(const ResolventKernel& kernel, const MeasureRep& mu, const char* what) {
    if (mu.dim != kernel.dim())
        throw Error(ErrorCode::DimensionMismatch, std::string(what) + " has dimension " + std::to_string(mu.dim) +
                                                      " but the kernel is " + std::string(to_string(kernel.model())));
}

// Signed version of MeasureRep used for differences of measures.
struct Signed {
    std::vector<Atom> atoms;  // masses may be negative
    const GridDensity* grid = nullptr;
    std::vector<double> values;  // signed cell values on *grid
};

Signed as_signed(const MeasureRep& mu) {
    Signed s;
    for (const auto& a : mu.atoms)
        if (a.mass != 0.0) s.atoms.push_back(a);
    if (mu.density) {
        s.grid = &*mu.density;
        s.values = mu.density->values;
    }
    return s;
}

double atom_pairs(const ResolventKernel& kernel, const std::vector<Atom>& a, const std::vector<Atom>& b) {
    double sum = 0.0;
    for (const auto& p : a) {
        double row = 0.0;
        for (const auto& q : b) {
            const double g = kernel(p.x, q.x);
            if (std::isinf(g)) return p.mass * q.mass > 0 ? kInf : -kInf;
            row += q.mass * g;
        }
        sum += p.mass * row;
    }
    return sum;
}

double grid_potential(const ResolventKernel& kernel, const GridDensity& g, const std::vector<double>& values,
                      std::span<const double> x) {
    double sum = 0.0;
    for (std::size_t c = 0; c < values.size(); ++c)
        if (values[c] != 0.0) sum += values[c] * kernel.box_potential(x, g.cell(c));
    return sum;
}

double atoms_grid(const ResolventKernel& kernel, const std::vector<Atom>& atoms, const GridDensity& g,
                  const std::vector<double>& values) {
    double sum = 0.0;
    for (const auto& a : atoms) sum += a.mass * grid_potential(kernel, g, values, a.x);
    return sum;
}

// Both densities on the same grid: the cell-pair integral depends only on the
// absolute index offset along each axis, so one table of prod(n_i) entries suffices.
double grid_pairs_aligned(const ResolventKernel& kernel, const GridDensity& g, const std::vector<double>& va,
                          const std::vector<double>& vb) {
    const int d = g.dim();
    const auto w = g.cell_width();
    const std::size_t n = g.cell_count();
    std::vector<std::size_t> stride(static_cast<std::size_t>(d), 1);
    for (int i = d - 2; i >= 0; --i) stride[i] = stride[i + 1] * static_cast<std::size_t>(g.cells[i + 1]);

    Box origin{g.box.lo, g.box.lo};
    for (int i = 0; i < d; ++i) origin.hi[i] = g.box.lo[i] + w[i];
    std::vector<double> table(n);
    for (std::size_t o = 0; o < n; ++o) {
        const auto off = g.cell_index(o);
        Box shifted = origin;
        for (int i = 0; i < d; ++i) {
            shifted.lo[i] += off[i] * w[i];
            shifted.hi[i] += off[i] * w[i];
        }
        table[o] = kernel.box_pair(origin, shifted);
    }

    std::vector<std::size_t> nz_a, nz_b;
    for (std::size_t c = 0; c < n; ++c) {
        if (va[c] != 0.0) nz_a.push_back(c);
        if (vb[c] != 0.0) nz_b.push_back(c);
    }
    std::vector<std::vector<int>> idx(n);
    for (std::size_t c : nz_a) idx[c] = g.cell_index(c);
    for (std::size_t c : nz_b)
        if (idx[c].empty()) idx[c] = g.cell_index(c);

    double sum = 0.0;
    for (std::size_t a : nz_a) {
        double row = 0.0;
        const auto& ia = idx[a];
        for (std::size_t b : nz_b) {
            const auto& ib = idx[b];
            std::size_t o = 0;
            for (int i = 0; i < d; ++i) o += static_cast<std::size_t>(std::abs(ia[i] - ib[i])) * stride[i];
            row += vb[b] * table[o];
        }
        sum += va[a] * row;
    }
    return sum;
}

double grid_pairs(const ResolventKernel& kernel, const GridDensity& ga, const std::vector<double>& va,
                  const GridDensity& gb, const std::vector<double>& vb) {
    if (ga.same_geometry(gb)) return grid_pairs_aligned(kernel, ga, va, vb);
    double sum = 0.0;
    for (std::size_t a = 0; a < va.size(); ++a) {
        if (va[a] == 0.0) continue;
        const Box ca = ga.cell(a);
        double row = 0.0;
        for (std::size_t b = 0; b < vb.size(); ++b)
            if (vb[b] != 0.0) row += vb[b] * kernel.box_pair(ca, gb.cell(b));
        sum += va[a] * row;
    }
    return sum;
}

double bilinear(const ResolventKernel& kernel, const Signed& a, const Signed& b) {
    double sum = atom_pairs(kernel, a.atoms, b.atoms);
    if (std::isinf(sum)) return sum;
    if (b.grid) sum += atoms_grid(kernel, a.atoms, *b.grid, b.values);
    if (a.grid) sum += atoms_grid(kernel, b.atoms, *a.grid, a.values);
    if (a.grid && b.grid) sum += grid_pairs(kernel, *a.grid, a.values, *b.grid, b.values);
    return sum;
}

double hat_antiderivative(double s) {
    if (s <= -1.0) return 0.0;
    if (s <= 0.0) return 0.5 * (1.0 + s) * (1.0 + s);
    if (s <= 1.0) return 1.0 - 0.5 * (1.0 - s) * (1.0 - s);
    return 1.0;
}

}  // namespace

double mutual_energy(const ResolventKernel& kernel, const MeasureRep& mu, const MeasureRep& nu) {
    require_dim(kernel, mu, "mu");
    require_dim(kernel, nu, "nu");
    return bilinear(kernel, as_signed(mu), as_signed(nu));
}

double rho_cont(const ResolventKernel& kernel, const MeasureRep& mu, const MeasureRep& nu) {
    require_dim(kernel, mu, "mu");
    require_dim(kernel, nu, "nu");
    const Signed sm = as_signed(mu), sn = as_signed(nu);
    const double imm = bilinear(kernel, sm, sm);
    const double inn = bilinear(kernel, sn, sn);
    if (std::isinf(imm) || std::isinf(inn))
        throw Error(ErrorCode::NotFiniteEnergy, std::string(std::isinf(imm) ? "mu" : "nu") + " has infinite self-energy");

    double rho2;
    const bool shared_grid = !mu.density || !nu.density || mu.density->same_geometry(*nu.density);
    if (shared_grid) {
        Signed diff;
        diff.atoms = sm.atoms;
        for (auto a : sn.atoms) {
            a.mass = -a.mass;
            diff.atoms.push_back(std::move(a));
        }
        if (mu.density || nu.density) {
            diff.grid = mu.density ? &*mu.density : &*nu.density;
            diff.values.assign(diff.grid->cell_count(), 0.0);
            for (std::size_t c = 0; c < diff.values.size(); ++c)
                diff.values[c] = (mu.density ? sm.values[c] : 0.0) - (nu.density ? sn.values[c] : 0.0);
        }
        rho2 = bilinear(kernel, diff, diff);
    } else {
        rho2 = imm - 2.0 * bilinear(kernel, sm, sn) + inn;
    }
    if (rho2 < 0.0) {
        if (rho2 >= -1e-12) return 0.0;
        throw Error(ErrorCode::NumericalInconsistency, "negative squared distance " + std::to_string(rho2));
    }
    return std::sqrt(rho2);
}

double potential_at(const ResolventKernel& kernel, const MeasureRep& mu, std::span<const double> x) {
    require_dim(kernel, mu, "mu");
    if (static_cast<int>(x.size()) != kernel.dim()) throw Error(ErrorCode::DimensionMismatch, "probe point dimension");
    double sum = 0.0;
    for (const auto& a : mu.atoms) {
        if (a.mass == 0.0) continue;
        sum += a.mass * kernel(x, a.x);
    }
    if (mu.density) sum += grid_potential(kernel, *mu.density, mu.density->values, x);
    return sum;
}

MeasureClass classify_measure(const ResolventKernel& kernel, const MeasureRep& mu,
                              const std::vector<std::vector<double>>& probe_grid) {
    require_dim(kernel, mu, "mu");
    if (probe_grid.empty()) throw Error(ErrorCode::EmptySet, "probe grid is empty");
    MeasureClass out;
    out.total_mass = mu.total_mass();
    out.energy_integral = mutual_energy(kernel, mu, mu);
    out.in_S0 = std::isfinite(out.energy_integral);
    const bool polar_atoms = kernel.model() == Model::BM3D && mu.has_atoms();
    out.smooth = !polar_atoms;
    if (polar_atoms) {
        out.potential_sup = kInf;
    } else {
        double sup = 0.0;
        for (const auto& x : probe_grid) sup = std::max(sup, potential_at(kernel, mu, x));
        for (const auto& a : mu.atoms)
            if (a.mass > 0.0) sup = std::max(sup, potential_at(kernel, mu, a.x));
        out.potential_sup = sup;
    }
    out.in_S00 = out.in_S0 && std::isfinite(out.total_mass) && std::isfinite(out.potential_sup);
    return out;
}

double HatFunction::operator()(std::span<const double> x) const {
    double v = 1.0;
    for (std::size_t i = 0; i < center.size(); ++i) v *= std::max(0.0, 1.0 - std::abs(x[i] - center[i]) / half_width);
    return v;
}

Box HatFunction::support() const {
    Box b{center, center};
    for (std::size_t i = 0; i < center.size(); ++i) {
        b.lo[i] -= half_width;
        b.hi[i] += half_width;
    }
    return b;
}

double HatFunction::integrate(const MeasureRep& mu) const {
    if (static_cast<int>(center.size()) != mu.dim) throw Error(ErrorCode::DimensionMismatch, "hat and measure dimensions differ");
    double sum = 0.0;
    for (const auto& a : mu.atoms) sum += a.mass * (*this)(a.x);
    if (mu.density) {
        const auto& g = *mu.density;
        const Box supp = support();
        for (std::size_t c = 0; c < g.values.size(); ++c) {
            if (g.values[c] == 0.0) continue;
            const Box cell = g.cell(c);
            if (cell.overlap_volume(supp) == 0.0) continue;
            double v = g.values[c];
            for (std::size_t i = 0; i < center.size(); ++i)
                v *= half_width * (hat_antiderivative((cell.hi[i] - center[i]) / half_width) -
                                   hat_antiderivative((cell.lo[i] - center[i]) / half_width));
            sum += v;
        }
    }
    return sum;
}

std::vector<HatFunction> hat_family(const Box& window, int per_axis, double half_width) {
    const int d = window.dim();
    std::vector<HatFunction> out;
    std::size_t total = 1;
    for (int i = 0; i < d; ++i) total *= static_cast<std::size_t>(per_axis);
    for (std::size_t flat = 0; flat < total; ++flat) {
        HatFunction h{std::vector<double>(static_cast<std::size_t>(d)), half_width};
        std::size_t rest = flat;
        for (int i = d - 1; i >= 0; --i) {
            const int k = static_cast<int>(rest % static_cast<std::size_t>(per_axis));
            rest /= static_cast<std::size_t>(per_axis);
            h.center[i] = per_axis == 1 ? 0.5 * (window.lo[i] + window.hi[i])
                                        : window.lo[i] + (window.hi[i] - window.lo[i]) * k / (per_axis - 1);
        }
        out.push_back(std::move(h));
    }
    return out;
}

double vague_gap(const MeasureRep& mu, const MeasureRep& nu, const std::vector<HatFunction>& tests) {
    if (mu.dim != nu.dim) throw Error(ErrorCode::DimensionMismatch, "measures of different dimension");
    double gap = 0.0;
    for (const auto& phi : tests) gap = std::max(gap, std::abs(phi.integrate(mu) - phi.integrate(nu)));
    return gap;
}

double vague_gap(const MeasureRep& mu, const MeasureRep& nu) {
    if (mu.dim != nu.dim) throw Error(ErrorCode::DimensionMismatch, "measures of different dimension");
    const int d = mu.dim;
    Box window{std::vector<double>(static_cast<std::size_t>(d), kInf), std::vector<double>(static_cast<std::size_t>(d), -kInf)};
    const auto extend = [&](const std::vector<double>& lo, const std::vector<double>& hi) {
        for (int i = 0; i < d; ++i) {
            window.lo[i] = std::min(window.lo[i], lo[i]);
            window.hi[i] = std::max(window.hi[i], hi[i]);
        }
    };
    for (const auto* m : {&mu, &nu}) {
        for (const auto& a : m->atoms) extend(a.x, a.x);
        if (m->density) extend(m->density->box.lo, m->density->box.hi);
    }
    if (!std::isfinite(window.lo[0])) return 0.0;
    double span = 0.0;
    for (int i = 0; i < d; ++i) span = std::max(span, window.hi[i] - window.lo[i]);
    const double pad = std::max(0.5, 0.1 * span);
    for (int i = 0; i < d; ++i) {
        window.lo[i] -= pad;
        window.hi[i] += pad;
    }
    const int per_axis = d == 1 ? 33 : 9;
    double spacing = 0.0;
    for (int i = 0; i < d; ++i) spacing = std::max(spacing, (window.hi[i] - window.lo[i]) / (per_axis - 1));
    auto tests = hat_family(window, per_axis, spacing);
    auto wide = hat_family(window, per_axis, 4.0 * spacing);
    tests.insert(tests.end(), wide.begin(), wide.end());
    return vague_gap(mu, nu, tests);
}

double lp_norm_grid(const GridDensity& f, double p, const Box& region) {
    if (!(p >= 1.0)) throw Error(ErrorCode::ConfigInvalid, "p must be at least 1");
    if (region.dim() != f.dim()) throw Error(ErrorCode::DimensionMismatch, "region and density dimensions differ");
    double sum = 0.0;
    for (std::size_t c = 0; c < f.values.size(); ++c) {
        if (f.values[c] == 0.0) continue;
        sum += std::pow(f.values[c], p) * f.cell(c).overlap_volume(region);
    }
    return std::pow(sum, 1.0 / p);
}

}  // namespace pcaf::continuum
