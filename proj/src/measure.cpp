#include "pcaf/measure.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pcaf/error.hpp"
#include "pcaf/text.hpp"

namespace pcaf::continuum {

std::size_t GridDensity::cell_count() const {
    std::size_t n = 1;
    for (int c : cells) n *= static_cast<std::size_t>(c);
    return n;
}

std::vector<double> GridDensity::cell_width() const {
    std::vector<double> w(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) w[i] = (box.hi[i] - box.lo[i]) / cells[i];
    return w;
}

double GridDensity::cell_volume() const {
    double v = 1.0;
    for (double w : cell_width()) v *= w;
    return v;
}

std::vector<int> GridDensity::cell_index(std::size_t flat) const {
    std::vector<int> idx(cells.size());
    for (int i = static_cast<int>(cells.size()) - 1; i >= 0; --i) {
        idx[i] = static_cast<int>(flat % static_cast<std::size_t>(cells[i]));
        flat /= static_cast<std::size_t>(cells[i]);
    }
    return idx;
}

Box GridDensity::cell(std::size_t flat) const {
    const auto idx = cell_index(flat);
    const auto w = cell_width();
    Box b{std::vector<double>(idx.size()), std::vector<double>(idx.size())};
    for (std::size_t i = 0; i < idx.size(); ++i) {
        b.lo[i] = box.lo[i] + w[i] * idx[i];
        // the last cell ends exactly on the box boundary
        b.hi[i] = idx[i] + 1 == cells[i] ? box.hi[i] : box.lo[i] + w[i] * (idx[i] + 1);
    }
    return b;
}

std::vector<double> GridDensity::cell_center(std::size_t flat) const {
    const Box b = cell(flat);
    std::vector<double> c(b.lo.size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = 0.5 * (b.lo[i] + b.hi[i]);
    return c;
}

double GridDensity::mass() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s * cell_volume();
}

bool GridDensity::same_geometry(const GridDensity& other) const {
    return box.lo == other.box.lo && box.hi == other.box.hi && cells == other.cells;
}

MeasureRep MeasureRep::zero(int dim) {
    MeasureRep m;
    m.dim = dim;
    return m;
}

MeasureRep MeasureRep::point(std::vector<double> x, double mass) {
    MeasureRep m;
    m.dim = static_cast<int>(x.size());
    m.atoms.push_back({std::move(x), mass});
    m.checked();
    return m;
}

MeasureRep MeasureRep::uniform(const Box& box, int cells_per_axis, double total_mass) {
    MeasureRep m;
    m.dim = box.dim();
    GridDensity g{box, std::vector<int>(static_cast<std::size_t>(box.dim()), cells_per_axis), {}};
    g.values.assign(g.cell_count(), total_mass / box.volume());
    m.density = std::move(g);
    m.checked();
    return m;
}

MeasureRep MeasureRep::from_cell_masses(const Box& box, std::vector<int> cells,
                                        const std::function<double(const Box&)>& cell_mass) {
    MeasureRep m;
    m.dim = box.dim();
    GridDensity g{box, std::move(cells), {}};
    g.values.resize(g.cell_count());
    for (std::size_t c = 0; c < g.values.size(); ++c) {
        const Box b = g.cell(c);
        g.values[c] = cell_mass(b) / b.volume();
    }
    m.density = std::move(g);
    m.checked();
    return m;
}

double MeasureRep::total_mass() const {
    double s = 0.0;
    for (const auto& a : atoms) s += a.mass;
    if (density) s += density->mass();
    return s;
}

bool MeasureRep::has_atoms() const {
    return std::any_of(atoms.begin(), atoms.end(), [](const Atom& a) { return a.mass > 0.0; });
}

MeasureRep MeasureRep::restricted(const Box& f) const {
    if (f.dim() != dim) throw Error(ErrorCode::DimensionMismatch, "restriction box has dimension " + std::to_string(f.dim()));
    MeasureRep out = zero(dim);
    for (const auto& a : atoms)
        if (f.contains(a.x)) out.atoms.push_back(a);
    if (density) {
        GridDensity g = *density;
        for (std::size_t c = 0; c < g.values.size(); ++c) {
            if (g.values[c] == 0.0) continue;
            const Box b = g.cell(c);
            g.values[c] *= b.overlap_volume(f) / b.volume();
        }
        out.density = std::move(g);
    }
    return out;
}

const MeasureRep& MeasureRep::checked() const {
    if (dim < 1) throw Error(ErrorCode::ConfigInvalid, "measure dimension must be positive");
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        if (static_cast<int>(atoms[i].x.size()) != dim)
            throw Error(ErrorCode::DimensionMismatch, "atom " + std::to_string(i) + " has dimension " +
                                                          std::to_string(atoms[i].x.size()));
        if (!(atoms[i].mass >= 0.0) || !std::isfinite(atoms[i].mass))
            throw Error(ErrorCode::NegativeEntry, "atom " + std::to_string(i) + " mass " + format_real(atoms[i].mass));
    }
    if (density) {
        const auto& g = *density;
        if (g.dim() != dim || static_cast<int>(g.box.hi.size()) != dim || static_cast<int>(g.cells.size()) != dim)
            throw Error(ErrorCode::DimensionMismatch, "density grid does not have dimension " + std::to_string(dim));
        for (int i = 0; i < dim; ++i) {
            if (!(g.box.hi[i] > g.box.lo[i])) throw Error(ErrorCode::ConfigInvalid, "density box is empty along axis " + std::to_string(i));
            if (g.cells[i] < 1) throw Error(ErrorCode::ConfigInvalid, "density cells must be positive");
        }
        if (g.values.size() != g.cell_count())
            throw Error(ErrorCode::DimensionMismatch, "density has " + std::to_string(g.values.size()) + " values for " +
                                                          std::to_string(g.cell_count()) + " cells");
        for (std::size_t i = 0; i < g.values.size(); ++i)
            if (!(g.values[i] >= 0.0) || !std::isfinite(g.values[i]))
                throw Error(ErrorCode::NegativeEntry, "density value " + std::to_string(i) + " = " + format_real(g.values[i]));
    }
    return *this;
}

nlohmann::json to_json(const MeasureRep& mu) {
    nlohmann::json doc;
    doc["dim"] = mu.dim;
    doc["atoms"] = nlohmann::json::array();
    for (const auto& a : mu.atoms) {
        auto row = nlohmann::json::array();
        for (double x : a.x) row.push_back(x);
        row.push_back(a.mass);
        doc["atoms"].push_back(row);
    }
    if (mu.density) {
        const auto& g = *mu.density;
        auto box = nlohmann::json::array();
        for (double x : g.box.lo) box.push_back(x);
        for (double x : g.box.hi) box.push_back(x);
        doc["density"] = {{"box", box}, {"cells", g.cells}, {"values", g.values}};
    }
    return doc;
}

MeasureRep measure_rep_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw Error(ErrorCode::ConfigInvalid, "measure must be a JSON object");
    int dim = -1;
    if (doc.contains("dim")) dim = doc.at("dim").get<int>();
    MeasureRep mu;
    if (doc.contains("atoms")) {
        for (const auto& row : doc.at("atoms")) {
            if (!row.is_array() || row.size() < 2) throw Error(ErrorCode::ConfigInvalid, "atom rows are [x..., mass]");
            Atom a;
            for (std::size_t i = 0; i + 1 < row.size(); ++i) a.x.push_back(real_from_json(row[i]));
            a.mass = real_from_json(row.back());
            if (dim < 0) dim = static_cast<int>(a.x.size());
            mu.atoms.push_back(std::move(a));
        }
    }
    if (doc.contains("density") && !doc.at("density").is_null()) {
        const auto& d = doc.at("density");
        const auto& box = d.at("box");
        if (!box.is_array() || box.size() % 2 != 0 || box.empty())
            throw Error(ErrorCode::ConfigInvalid, "density.box must be [lo..., hi...]");
        GridDensity g;
        const std::size_t n = box.size() / 2;
        for (std::size_t i = 0; i < n; ++i) {
            g.box.lo.push_back(real_from_json(box[i]));
            g.box.hi.push_back(real_from_json(box[i + n]));
        }
        g.cells = d.at("cells").get<std::vector<int>>();
        for (const auto& v : d.at("values")) g.values.push_back(real_from_json(v));
        if (dim < 0) dim = static_cast<int>(n);
        mu.density = std::move(g);
    }
    if (dim < 0) throw Error(ErrorCode::ConfigInvalid, "measure dimension cannot be inferred; give \"dim\"");
    mu.dim = dim;
    mu.checked();
    return mu;
}

}  // namespace pcaf::continuum
