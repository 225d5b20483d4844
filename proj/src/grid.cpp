#include "cylharm/grid.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "cylharm/serialize.hpp"

namespace cylharm {

CylinderGrid make_grid(double T, int n_t, int n_psi) {
    if (!(T > 0.0) || !std::isfinite(T))
        throw std::domain_error("grid depth T must be positive and finite");
    if (n_t < 2) throw std::domain_error("need at least 2 steps in t");
    if (n_psi < 3) throw std::domain_error("need at least 3 steps in psi");
    CylinderGrid g;
    g.T = T;
    g.n_t = n_t;
    g.n_psi = n_psi;
    g.h_t = T / n_t;
    g.h_psi = 2.0 * M_PI / n_psi;
    return g;
}

double t_of(const CylinderGrid& g, int i) { return g.T * i / g.n_t; }

double psi_of(const CylinderGrid& g, int j) { return 2.0 * M_PI * j / g.n_psi; }

double disk_radius(const CylinderGrid& g, int i) { return std::exp(-t_of(g, i)); }

int t_index(const CylinderGrid& g, double t) {
    int i = static_cast<int>(std::lround(t / g.h_t));
    if (i < 0 || i > g.n_t || std::abs(t - t_of(g, i)) > 1e-9 * std::max(1.0, g.T))
        throw std::domain_error("t does not lie on a grid line");
    return i;
}

EquivariantGridMap make_map(ModelSpace space, Isometry twist,
                            CylinderGrid grid, const Point& fill) {
    check_isometry(space, twist);
    check_point(space, fill);
    EquivariantGridMap m;
    m.space = std::move(space);
    m.twist_inv = inverse(m.space, twist);
    m.twist = std::move(twist);
    m.grid = grid;
    m.values.assign(static_cast<size_t>(grid.n_t + 1) * grid.n_psi, fill);
    return m;
}

std::optional<Point> neighbor(const EquivariantGridMap& m, int i, int j,
                              Dir dir) {
    const int np = m.grid.n_psi;
    switch (dir) {
        case Dir::t_minus:
            if (i == 0) return std::nullopt;
            return m.at(i - 1, j);
        case Dir::t_plus:
            if (i == m.grid.n_t) return std::nullopt;
            return m.at(i + 1, j);
        case Dir::psi_minus:
            if (j == 0) return apply(m.space, m.twist_inv, m.at(i, np - 1));
            return m.at(i, j - 1);
        case Dir::psi_plus:
            if (j == np - 1) return apply(m.space, m.twist, m.at(i, 0));
            return m.at(i, j + 1);
    }
    throw std::logic_error("bad direction");
}

void check_map(const EquivariantGridMap& m) {
    if (m.values.size() != static_cast<size_t>(m.grid.n_t + 1) * m.grid.n_psi)
        throw std::domain_error("map value array has wrong size");
    for (const Point& p : m.values) check_point(m.space, p);
}

std::string map_to_text(const EquivariantGridMap& m) {
    std::ostringstream out;
    out << "cylmap 1\n";
    out << "space " << space_to_json(m.space).dump() << "\n";
    out << "twist " << isometry_to_json(m.twist).dump() << "\n";
    out << "grid " << format_double(m.grid.T) << " " << m.grid.n_t << " "
        << m.grid.n_psi << "\n";
    std::vector<double> flat;
    for (int i = 0; i <= m.grid.n_t; ++i) {
        for (int j = 0; j < m.grid.n_psi; ++j) {
            flat.clear();
            point_to_flat(m.space, m.at(i, j), flat);
            for (size_t k = 0; k < flat.size(); ++k)
                out << (k ? " " : "") << format_double(flat[k]);
            out << "\n";
        }
    }
    return out.str();
}

EquivariantGridMap map_from_text(const std::string& text) {
    std::istringstream in(text);
    std::string line;

    auto expect_line = [&](const char* what) {
        if (!std::getline(in, line))
            throw std::runtime_error(std::string("map file ended before ") + what);
    };

    expect_line("magic");
    if (line != "cylmap 1")
        throw std::runtime_error("not a cylmap file (bad magic line)");

    expect_line("space header");
    if (line.rfind("space ", 0) != 0)
        throw std::runtime_error("expected 'space' header");
    ModelSpace space = space_from_json(nlohmann::json::parse(line.substr(6)));

    expect_line("twist header");
    if (line.rfind("twist ", 0) != 0)
        throw std::runtime_error("expected 'twist' header");
    Isometry twist =
        isometry_from_json(nlohmann::json::parse(line.substr(6)), space);

    expect_line("grid header");
    std::istringstream gl(line);
    std::string tag;
    double T;
    int n_t, n_psi;
    if (!(gl >> tag >> T >> n_t >> n_psi) || tag != "grid")
        throw std::runtime_error("expected 'grid T n_t n_psi' header");

    CylinderGrid grid = make_grid(T, n_t, n_psi);
    const size_t n_nodes = static_cast<size_t>(n_t + 1) * n_psi;
    const size_t stride = point_flat_size(space);
    std::vector<double> flat(n_nodes * stride);
    for (double& x : flat) {
        if (!(in >> x)) throw std::runtime_error("map node data truncated");
    }

    EquivariantGridMap m;
    m.space = std::move(space);
    m.twist_inv = inverse(m.space, twist);
    m.twist = std::move(twist);
    m.grid = grid;
    m.values.reserve(n_nodes);
    size_t pos = 0;
    for (size_t k = 0; k < n_nodes; ++k)
        m.values.push_back(point_from_flat(m.space, flat, pos));
    check_map(m);
    return m;
}

void save_map(const EquivariantGridMap& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << map_to_text(m);
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

EquivariantGridMap load_map(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return map_from_text(buf.str());
}

}  // namespace cylharm
