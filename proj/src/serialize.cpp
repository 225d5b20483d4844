#include "cylharm/serialize.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include <Eigen/Dense>

namespace cylharm {

using nlohmann::json;

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

json space_to_json(const ModelSpace& s) {
    json j;
    if (auto* e = std::get_if<Euclidean>(&s.v)) {
        j["kind"] = "euclidean";
        j["dim"] = e->dim;
    } else if (std::holds_alternative<Hyperbolic>(s.v)) {
        j["kind"] = "hyperbolic";
    } else if (auto* t = std::get_if<Tree>(&s.v)) {
        j["kind"] = "tree";
        j["vertices"] = t->shape.n_vertices;
        json edges = json::array();
        for (const auto& e : t->shape.edges)
            edges.push_back(json::array({e.a, e.b, e.length}));
        j["edges"] = edges;
        j["line"] = t->shape.line;
    } else {
        const auto& p = std::get<Product>(s.v);
        j["kind"] = "product";
        j["left"] = space_to_json(p.factors[0]);
        j["right"] = space_to_json(p.factors[1]);
    }
    return j;
}

ModelSpace space_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "euclidean") return make_euclidean(j.at("dim").get<int>());
    if (kind == "hyperbolic") return make_hyperbolic();
    if (kind == "tree") {
        TreeShape shape;
        shape.n_vertices = j.at("vertices").get<int>();
        for (const auto& e : j.at("edges")) {
            if (!e.is_array() || e.size() != 3)
                throw std::runtime_error("tree edge entries must be [a, b, length]");
            shape.edges.push_back(
                {e[0].get<int>(), e[1].get<int>(), e[2].get<double>()});
        }
        if (j.contains("line"))
            shape.line = j.at("line").get<std::vector<int>>();
        shape.finalize();
        return make_tree(std::move(shape));
    }
    if (kind == "product")
        return make_product(space_from_json(j.at("left")),
                            space_from_json(j.at("right")));
    throw std::runtime_error("unknown space kind '" + kind + "'");
}

json isometry_to_json(const Isometry& iso) {
    json j;
    if (auto* e = std::get_if<EucIso>(&iso.v)) {
        j["kind"] = "euclidean";
        json rows = json::array();
        for (int r = 0; r < e->Q.rows(); ++r) {
            json row = json::array();
            for (int c = 0; c < e->Q.cols(); ++c) row.push_back(e->Q(r, c));
            rows.push_back(row);
        }
        j["rotation"] = rows;
        j["translation"] =
            std::vector<double>(e->b.data(), e->b.data() + e->b.size());
    } else if (auto* h = std::get_if<HypIso>(&iso.v)) {
        j["kind"] = "hyperbolic";
        j["matrix"] = {{h->a, h->b}, {h->c, h->d}};
    } else if (auto* t = std::get_if<TreeTranslation>(&iso.v)) {
        j["kind"] = "tree_translation";
        j["length"] = t->length;
    } else if (auto* el = std::get_if<TreeElliptic>(&iso.v)) {
        j["kind"] = "tree_elliptic";
        j["fixed_vertex"] = el->fixed_vertex;
        j["vertex_map"] = el->vertex_map;
    } else {
        const auto& p = std::get<ProdIso>(iso.v);
        j["kind"] = "product";
        j["left"] = isometry_to_json(p.parts[0]);
        j["right"] = isometry_to_json(p.parts[1]);
    }
    return j;
}

static Isometry isometry_from_json_raw(const json& j, const ModelSpace& s) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "euclidean") {
        const auto* e = std::get_if<Euclidean>(&s.v);
        if (!e) throw std::runtime_error("euclidean isometry on non-euclidean space");
        const auto& rows = j.at("rotation");
        Eigen::MatrixXd Q(e->dim, e->dim);
        if (static_cast<int>(rows.size()) != e->dim)
            throw std::runtime_error("rotation matrix has wrong size");
        for (int r = 0; r < e->dim; ++r) {
            if (static_cast<int>(rows[r].size()) != e->dim)
                throw std::runtime_error("rotation matrix has wrong size");
            for (int c = 0; c < e->dim; ++c) Q(r, c) = rows[r][c].get<double>();
        }
        auto bt = j.at("translation").get<std::vector<double>>();
        if (static_cast<int>(bt.size()) != e->dim)
            throw std::runtime_error("translation vector has wrong size");
        Eigen::VectorXd b = Eigen::Map<Eigen::VectorXd>(bt.data(), e->dim);
        return euclidean_isometry(std::move(Q), std::move(b));
    }
    if (kind == "hyperbolic") {
        const auto& m = j.at("matrix");
        if (!std::holds_alternative<Hyperbolic>(s.v))
            throw std::runtime_error("hyperbolic isometry on non-hyperbolic space");
        return hyperbolic_isometry(m[0][0].get<double>(), m[0][1].get<double>(),
                                   m[1][0].get<double>(), m[1][1].get<double>());
    }
    if (kind == "tree_translation")
        return tree_translation(j.at("length").get<double>());
    if (kind == "tree_elliptic")
        return tree_elliptic(j.at("fixed_vertex").get<int>(),
                             j.at("vertex_map").get<std::vector<int>>());
    if (kind == "product") {
        const auto* p = std::get_if<Product>(&s.v);
        if (!p) throw std::runtime_error("product isometry on non-product space");
        return product_isometry(isometry_from_json_raw(j.at("left"), p->factors[0]),
                                isometry_from_json_raw(j.at("right"), p->factors[1]));
    }
    throw std::runtime_error("unknown isometry kind '" + kind + "'");
}

Isometry isometry_from_json(const json& j, const ModelSpace& s) {
    Isometry iso = isometry_from_json_raw(j, s);
    check_isometry(s, iso);
    return iso;
}

size_t point_flat_size(const ModelSpace& s) {
    if (auto* e = std::get_if<Euclidean>(&s.v)) return e->dim;
    if (std::holds_alternative<Hyperbolic>(s.v)) return 2;
    if (std::holds_alternative<Tree>(s.v)) return 2;
    const auto& p = std::get<Product>(s.v);
    return point_flat_size(p.factors[0]) + point_flat_size(p.factors[1]);
}

void point_to_flat(const ModelSpace& s, const Point& p,
                   std::vector<double>& out) {
    if (std::holds_alternative<Euclidean>(s.v)) {
        const auto& x = std::get<EucPoint>(p.v).x;
        out.insert(out.end(), x.begin(), x.end());
    } else if (std::holds_alternative<Hyperbolic>(s.v)) {
        const auto& h = std::get<HypPoint>(p.v);
        out.push_back(h.x);
        out.push_back(h.y);
    } else if (std::holds_alternative<Tree>(s.v)) {
        const auto& t = std::get<TreePoint>(p.v);
        out.push_back(static_cast<double>(t.edge));
        out.push_back(t.offset);
    } else {
        const auto& ps = std::get<Product>(s.v);
        const auto& pp = std::get<ProductPoint>(p.v);
        point_to_flat(ps.factors[0], pp.parts[0], out);
        point_to_flat(ps.factors[1], pp.parts[1], out);
    }
}

Point point_from_flat(const ModelSpace& s, const std::vector<double>& in,
                      size_t& pos) {
    const size_t need = point_flat_size(s);
    if (pos + need > in.size())
        throw std::runtime_error("point data truncated");
    if (auto* e = std::get_if<Euclidean>(&s.v)) {
        std::vector<double> x(in.begin() + pos, in.begin() + pos + e->dim);
        pos += e->dim;
        return euc_point(std::move(x));
    }
    if (std::holds_alternative<Hyperbolic>(s.v)) {
        Point p = hyp_point(in[pos], in[pos + 1]);
        pos += 2;
        return p;
    }
    if (std::holds_alternative<Tree>(s.v)) {
        double eid = in[pos];
        Point p = tree_point(static_cast<int>(eid), in[pos + 1]);
        pos += 2;
        return p;
    }
    const auto& ps = std::get<Product>(s.v);
    Point l = point_from_flat(ps.factors[0], in, pos);
    Point r = point_from_flat(ps.factors[1], in, pos);
    return product_point(std::move(l), std::move(r));
}

}  // namespace cylharm
