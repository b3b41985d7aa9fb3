#pragma once

// Finite measures on R^d as atoms plus a piecewise-constant density on a uniform grid.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"
#include "pcaf/kernel.hpp"

namespace pcaf::continuum {

struct Atom {
    std::vector<double> x;
    double mass = 0.0;
};

/// Density constant on each cell of a uniform grid over `box`; values are
/// densities (mass per unit volume), row-major with the last axis fastest.
struct GridDensity {
    Box box;
    std::vector<int> cells;
    std::vector<double> values;

    int dim() const { return box.dim(); }
    std::size_t cell_count() const;
    std::vector<double> cell_width() const;
    double cell_volume() const;
    std::vector<int> cell_index(std::size_t flat) const;
    Box cell(std::size_t flat) const;
    std::vector<double> cell_center(std::size_t flat) const;
    double mass() const;
    /// Same box and cell counts.
    bool same_geometry(const GridDensity& other) const;
};

struct MeasureRep {
    int dim = 1;
    std::vector<Atom> atoms;
    std::optional<GridDensity> density;

    static MeasureRep zero(int dim);
    static MeasureRep point(std::vector<double> x, double mass = 1.0);
    /// Uniform total mass over `box` on a grid with `cells_per_axis` cells per axis.
    static MeasureRep uniform(const Box& box, int cells_per_axis, double total_mass = 1.0);
    /// Grid density whose cell values are cell_mass(cell) / volume(cell), so cell masses are exact.
    static MeasureRep from_cell_masses(const Box& box, std::vector<int> cells,
                                       const std::function<double(const Box&)>& cell_mass);

    double total_mass() const;
    bool has_atoms() const;
    /// 1_F mu. Atoms are kept when inside F; a cell that straddles the boundary of F keeps
    /// the fraction of its mass proportional to its overlap volume.
    MeasureRep restricted(const Box& f) const;
    /// Throws NegativeEntry / DimensionMismatch / ConfigInvalid on malformed content.
    const MeasureRep& checked() const;
};

/// {"dim": d, "atoms": [[x..., mass], ...], "density": {"box": [lo..., hi...], "cells": [n...], "values": [...]}}
nlohmann::json to_json(const MeasureRep& mu);
/// Inverse of to_json; "dim" may be omitted when atoms or a density determine it.
MeasureRep measure_rep_from_json(const nlohmann::json& doc);

}  // namespace pcaf::continuum
