#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cylharm/isometry.hpp"
#include "cylharm/spaces.hpp"

namespace cylharm {

// Uniform grid on the cylinder [0, T] x S^1.  t increases toward the
// puncture; the matching punctured-disk radius is r = e^{-t}.  Nodes are
// (t_i, psi_j) with t_i = i T / n_t and psi_j = 2 pi j / n_psi.
struct CylinderGrid {
    double T = 1.0;
    int n_t = 2;
    int n_psi = 3;
    double h_t = 0.5;
    double h_psi = 0.0;
};

CylinderGrid make_grid(double T, int n_t, int n_psi);

double t_of(const CylinderGrid& g, int i);
double psi_of(const CylinderGrid& g, int j);
double disk_radius(const CylinderGrid& g, int i);  // e^{-t_i}

// index of the grid line at t; throws std::domain_error if t does not lie on
// one (within 1e-9 relative)
int t_index(const CylinderGrid& g, double t);

enum class Dir { t_minus, t_plus, psi_minus, psi_plus };

// One fundamental period of an equivariant map.  Only columns 0..n_psi-1 are
// stored; the +psi neighbor of column n_psi-1 is twist applied to column 0,
// and the -psi neighbor of column 0 is twist^{-1} applied to column n_psi-1.
struct EquivariantGridMap {
    ModelSpace space;
    Isometry twist;
    Isometry twist_inv;
    CylinderGrid grid;
    std::vector<Point> values;

    Point& at(int i, int j) {
        return values[static_cast<size_t>(i) * grid.n_psi + j];
    }
    const Point& at(int i, int j) const {
        return values[static_cast<size_t>(i) * grid.n_psi + j];
    }
};

EquivariantGridMap make_map(ModelSpace space, Isometry twist,
                            CylinderGrid grid, const Point& fill);

// nullopt past the t ends; the boundary marker is a value, not an error
std::optional<Point> neighbor(const EquivariantGridMap& m, int i, int j,
                              Dir dir);

// validates every node encoding against the space
void check_map(const EquivariantGridMap& m);

// Flat text format, one node per line, doubles printed with 17 significant
// digits so that save/load round-trips bit for bit.
std::string map_to_text(const EquivariantGridMap& m);
EquivariantGridMap map_from_text(const std::string& text);
void save_map(const EquivariantGridMap& m, const std::string& path);
EquivariantGridMap load_map(const std::string& path);

}  // namespace cylharm
