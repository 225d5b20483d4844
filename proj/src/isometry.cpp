#include "cylharm/isometry.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace cylharm {

namespace {

constexpr double kTraceTol = 1e-12;

[[noreturn]] void bad_iso(const std::string& what) {
    throw std::domain_error("isometry: " + what);
}

const TreeShape& tree_shape(const ModelSpace& space) {
    const Tree* t = std::get_if<Tree>(&space.v);
    if (!t) bad_iso("tree isometry on a non-tree space");
    return t->shape;
}

// edge between u and v, -1 if absent
int find_edge(const TreeShape& shape, int u, int v) {
    for (int e : shape.incident[u]) {
        const TreeShape::Edge& ed = shape.edges[e];
        if ((ed.a == u && ed.b == v) || (ed.a == v && ed.b == u)) return e;
    }
    return -1;
}

double hyp_trace(const HypIso& h) { return h.a + h.d; }

}  // namespace

Isometry euclidean_isometry(Eigen::MatrixXd Q, Eigen::VectorXd b) {
    return Isometry{EucIso{std::move(Q), std::move(b)}};
}

Isometry euclidean_translation(const std::vector<double>& b) {
    int n = static_cast<int>(b.size());
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = b[i];
    return Isometry{EucIso{Eigen::MatrixXd::Identity(n, n), std::move(v)}};
}

Isometry hyperbolic_isometry(double a, double b, double c, double d) {
    double det = a * d - b * c;
    if (!(det > 0.0) || !std::isfinite(det))
        bad_iso("half-plane matrix needs positive determinant");
    double s = 1.0 / std::sqrt(det);
    return Isometry{HypIso{a * s, b * s, c * s, d * s}};
}

Isometry tree_translation(double length) {
    if (length == 0.0 || !std::isfinite(length))
        bad_iso("tree translation needs a nonzero finite length");
    return Isometry{TreeTranslation{length}};
}

Isometry tree_elliptic(int fixed_vertex, std::vector<int> vertex_map) {
    return Isometry{TreeElliptic{fixed_vertex, std::move(vertex_map)}};
}

Isometry product_isometry(Isometry left, Isometry right) {
    ProdIso p;
    p.parts.push_back(std::move(left));
    p.parts.push_back(std::move(right));
    return Isometry{std::move(p)};
}

Isometry identity_isometry(const ModelSpace& space) {
    if (const Euclidean* e = std::get_if<Euclidean>(&space.v))
        return Isometry{EucIso{Eigen::MatrixXd::Identity(e->dim, e->dim),
                               Eigen::VectorXd::Zero(e->dim)}};
    if (std::holds_alternative<Hyperbolic>(space.v))
        return Isometry{HypIso{}};
    if (const Tree* t = std::get_if<Tree>(&space.v)) {
        std::vector<int> id(t->shape.n_vertices);
        for (int i = 0; i < t->shape.n_vertices; ++i) id[i] = i;
        return Isometry{TreeElliptic{0, std::move(id)}};
    }
    const Product& pr = std::get<Product>(space.v);
    return product_isometry(identity_isometry(pr.factors[0]),
                            identity_isometry(pr.factors[1]));
}

void check_isometry(const ModelSpace& space, const Isometry& iso) {
    if (const EucIso* e = std::get_if<EucIso>(&iso.v)) {
        const Euclidean* sp = std::get_if<Euclidean>(&space.v);
        if (!sp) bad_iso("euclidean isometry on a non-euclidean space");
        if (e->Q.rows() != sp->dim || e->Q.cols() != sp->dim ||
            e->b.size() != sp->dim)
            bad_iso("euclidean isometry dimension mismatch");
        double err = (e->Q.transpose() * e->Q -
                      Eigen::MatrixXd::Identity(sp->dim, sp->dim))
                         .cwiseAbs()
                         .maxCoeff();
        if (err > 1e-10) bad_iso("matrix is not orthogonal");
        return;
    }
    if (const HypIso* h = std::get_if<HypIso>(&iso.v)) {
        if (!std::holds_alternative<Hyperbolic>(space.v))
            bad_iso("half-plane isometry on a non-hyperbolic space");
        if (std::fabs(h->a * h->d - h->b * h->c - 1.0) > 1e-10)
            bad_iso("half-plane matrix must have determinant 1");
        return;
    }
    if (const TreeTranslation* t = std::get_if<TreeTranslation>(&iso.v)) {
        const TreeShape& shape = tree_shape(space);
        if (!shape.has_line())
            bad_iso("tree translation needs a designated line");
        if (t->length == 0.0) bad_iso("tree translation length is zero");
        return;
    }
    if (const TreeElliptic* el = std::get_if<TreeElliptic>(&iso.v)) {
        const TreeShape& shape = tree_shape(space);
        const int V = shape.n_vertices;
        if (static_cast<int>(el->vertex_map.size()) != V)
            bad_iso("vertex map size mismatch");
        std::vector<char> hit(V, 0);
        for (int v : el->vertex_map) {
            if (v < 0 || v >= V || hit[v]) bad_iso("vertex map is not a bijection");
            hit[v] = 1;
        }
        if (el->fixed_vertex < 0 || el->fixed_vertex >= V ||
            el->vertex_map[el->fixed_vertex] != el->fixed_vertex)
            bad_iso("designated vertex is not fixed");
        for (const TreeShape::Edge& ed : shape.edges) {
            int e = find_edge(shape, el->vertex_map[ed.a], el->vertex_map[ed.b]);
            if (e < 0 || std::fabs(shape.edges[e].length - ed.length) > 1e-12)
                bad_iso("vertex map does not preserve the edge structure");
        }
        return;
    }
    const ProdIso& pi = std::get<ProdIso>(iso.v);
    const Product* pr = std::get_if<Product>(&space.v);
    if (!pr || pi.parts.size() != pr->factors.size())
        bad_iso("product isometry arity mismatch");
    for (size_t i = 0; i < pi.parts.size(); ++i)
        check_isometry(pr->factors[i], pi.parts[i]);
}

Point apply(const ModelSpace& space, const Isometry& iso, const Point& p) {
    if (const EucIso* e = std::get_if<EucIso>(&iso.v)) {
        const auto& x = std::get<EucPoint>(p.v).x;
        Eigen::VectorXd v(x.size());
        for (size_t i = 0; i < x.size(); ++i) v[i] = x[i];
        Eigen::VectorXd r = e->Q * v + e->b;
        return euc_point(std::vector<double>(r.data(), r.data() + r.size()));
    }
    if (const HypIso* h = std::get_if<HypIso>(&iso.v)) {
        const HypPoint& hp = std::get<HypPoint>(p.v);
        std::complex<double> z(hp.x, hp.y);
        std::complex<double> w = (h->a * z + h->b) / (h->c * z + h->d);
        return hyp_point(w.real(), w.imag());
    }
    if (const TreeTranslation* t = std::get_if<TreeTranslation>(&iso.v)) {
        const TreeShape& shape = tree_shape(space);
        const TreePoint& tp = std::get<TreePoint>(p.v);
        if (!tree_point_on_line(shape, tp))
            throw std::domain_error(
                "tree translation applied off the designated line");
        double s = tree_line_coordinate(shape, tp);
        return Point{tree_point_at_line_coordinate(shape, s + t->length)};
    }
    if (const TreeElliptic* el = std::get_if<TreeElliptic>(&iso.v)) {
        const TreeShape& shape = tree_shape(space);
        const TreePoint& tp = std::get<TreePoint>(p.v);
        if (tp.edge == kRayNeg || tp.edge == kRayPos)
            throw std::domain_error(
                "elliptic tree isometry does not act on the extension rays");
        const TreeShape::Edge& ed = shape.edges[tp.edge];
        int ia = el->vertex_map[ed.a];
        int ib = el->vertex_map[ed.b];
        int e = find_edge(shape, ia, ib);
        if (e < 0) throw std::domain_error("vertex map is not an automorphism");
        double off =
            shape.edges[e].a == ia ? tp.offset : shape.edges[e].length - tp.offset;
        return canonical_point(space, tree_point(e, off));
    }
    const ProdIso& pi = std::get<ProdIso>(iso.v);
    const Product& pr = std::get<Product>(space.v);
    const auto& parts = std::get<ProductPoint>(p.v).parts;
    ProductPoint out;
    for (size_t i = 0; i < pi.parts.size(); ++i)
        out.parts.push_back(apply(pr.factors[i], pi.parts[i], parts[i]));
    return Point{std::move(out)};
}

Isometry inverse(const ModelSpace& space, const Isometry& iso) {
    if (const EucIso* e = std::get_if<EucIso>(&iso.v)) {
        Eigen::MatrixXd Qt = e->Q.transpose();
        return Isometry{EucIso{Qt, -(Qt * e->b)}};
    }
    if (const HypIso* h = std::get_if<HypIso>(&iso.v))
        return Isometry{HypIso{h->d, -h->b, -h->c, h->a}};
    if (const TreeTranslation* t = std::get_if<TreeTranslation>(&iso.v))
        return Isometry{TreeTranslation{-t->length}};
    if (const TreeElliptic* el = std::get_if<TreeElliptic>(&iso.v)) {
        std::vector<int> inv(el->vertex_map.size());
        for (size_t i = 0; i < el->vertex_map.size(); ++i)
            inv[el->vertex_map[i]] = static_cast<int>(i);
        return Isometry{TreeElliptic{el->fixed_vertex, std::move(inv)}};
    }
    const ProdIso& pi = std::get<ProdIso>(iso.v);
    const Product& pr = std::get<Product>(space.v);
    return product_isometry(inverse(pr.factors[0], pi.parts[0]),
                            inverse(pr.factors[1], pi.parts[1]));
}

double displacement(const ModelSpace& space, const Isometry& iso,
                    const Point& p) {
    return distance(space, apply(space, iso, p), p);
}

double translation_length(const ModelSpace& space, const Isometry& iso) {
    if (const EucIso* e = std::get_if<EucIso>(&iso.v)) {
        int n = static_cast<int>(e->Q.rows());
        Eigen::MatrixXd A = e->Q - Eigen::MatrixXd::Identity(n, n);
        Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
        lu.setThreshold(1e-10);
        Eigen::MatrixXd K = lu.kernel();  // fixed directions of Q
        if (lu.rank() == n) return 0.0;
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(K);
        Eigen::MatrixXd Kth =
            qr.householderQ() * Eigen::MatrixXd::Identity(n, K.cols());
        return (Kth.transpose() * e->b).norm();
    }
    if (const HypIso* h = std::get_if<HypIso>(&iso.v)) {
        double tr = std::fabs(hyp_trace(*h));
        if (tr <= 2.0 + kTraceTol) return 0.0;
        return 2.0 * std::acosh(tr / 2.0);
    }
    if (const TreeTranslation* t = std::get_if<TreeTranslation>(&iso.v)) {
        (void)tree_shape(space);
        return std::fabs(t->length);
    }
    if (std::holds_alternative<TreeElliptic>(iso.v)) return 0.0;
    const ProdIso& pi = std::get<ProdIso>(iso.v);
    const Product& pr = std::get<Product>(space.v);
    double s = 0.0;
    for (size_t i = 0; i < pi.parts.size(); ++i) {
        double d = translation_length(pr.factors[i], pi.parts[i]);
        s += d * d;
    }
    return std::sqrt(s);
}

double e_rho(const ModelSpace& space, const Isometry& iso) {
    double d = translation_length(space, iso);
    return d * d / (2.0 * std::numbers::pi);
}

namespace {

// least-squares fit of log(excess) = log b - a s, then b inflated so the bound
// holds at every sample
void fit_decay(const ModelSpace& space, const Isometry& iso,
               DisplacementProfile& prof) {
    const double d2ref = prof.delta * prof.delta;
    const bool mult = prof.delta > 1e-12;
    prof.variant = mult ? BoundVariant::multiplicative : BoundVariant::additive;

    std::vector<double> ss, ee;
    double max_excess = 0.0;
    for (double s = 0.0; s <= prof.fit_range + 1e-9; s += 0.5) {
        double d = displacement(space, iso, prof.ray(s));
        double excess = d * d - d2ref;
        if (mult) excess /= d2ref;
        excess = std::max(excess, 0.0);
        max_excess = std::max(max_excess, excess);
        ss.push_back(s);
        ee.push_back(excess);
    }
    if (max_excess <= 1e-12) {  // displacement already flat along the ray
        prof.decay_a = 1.0;
        prof.decay_b = 0.0;
        return;
    }
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < ss.size(); ++i) {
        if (ee[i] <= 1e-14 * max_excess) continue;
        double y = std::log(ee[i]);
        sw += 1.0;
        sx += ss[i];
        sy += y;
        sxx += ss[i] * ss[i];
        sxy += ss[i] * y;
    }
    double denom = sw * sxx - sx * sx;
    double slope = denom > 0.0 ? (sw * sxy - sx * sy) / denom : 0.0;
    if (slope >= -1e-9) {  // no decay along the ray
        prof.condition_b_violated = true;
        prof.decay_a = 1e-9;
        prof.decay_b = max_excess * 2.0;
        return;
    }
    prof.decay_a = -slope;
    double b = 0.0;
    for (size_t i = 0; i < ss.size(); ++i)
        b = std::max(b, ee[i] * std::exp(prof.decay_a * ss[i]));
    prof.decay_b = b * (1.0 + 1e-9) + 1e-15;
}

}  // namespace

double profile_bound(const DisplacementProfile& prof, double s) {
    double d2 = prof.delta * prof.delta;
    double tail = prof.decay_b * std::exp(-prof.decay_a * s);
    switch (prof.variant) {
        case BoundVariant::multiplicative:
            return d2 * (1.0 + tail);
        case BoundVariant::additive:
            return d2 + tail;
        default:
            return d2;
    }
}

DisplacementProfile displacement_profile(const ModelSpace& space,
                                         const Isometry& iso) {
    check_isometry(space, iso);
    DisplacementProfile prof;
    prof.delta = translation_length(space, iso);

    if (const EucIso* e = std::get_if<EucIso>(&iso.v)) {
        int n = static_cast<int>(e->Q.rows());
        Eigen::MatrixXd A = e->Q - Eigen::MatrixXd::Identity(n, n);
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
        Eigen::VectorXd x = cod.solve(-e->b);
        prof.witness =
            euc_point(std::vector<double>(x.data(), x.data() + x.size()));
        prof.variant = BoundVariant::multiplicative;
        return prof;
    }

    if (const HypIso* h = std::get_if<HypIso>(&iso.v)) {
        double tr = hyp_trace(*h);
        if (std::fabs(tr) > 2.0 + kTraceTol) {
            // axis through the two real fixed points
            if (std::fabs(h->c) > 1e-14) {
                double disc = std::sqrt(tr * tr - 4.0);
                double x1 = (h->a - h->d + disc) / (2.0 * h->c);
                double x2 = (h->a - h->d - disc) / (2.0 * h->c);
                prof.witness =
                    hyp_point(0.5 * (x1 + x2), 0.5 * std::fabs(x1 - x2));
            } else {
                prof.witness = hyp_point(h->b / (h->d - h->a), 1.0);
            }
            prof.variant = BoundVariant::multiplicative;
            return prof;
        }
        if (std::fabs(tr) < 2.0 - kTraceTol) {  // elliptic fixed point
            double im = std::sqrt(4.0 - tr * tr) / (2.0 * std::fabs(h->c));
            double re = (h->a - h->d) / (2.0 * h->c);
            prof.witness = hyp_point(re, im);
            prof.variant = BoundVariant::multiplicative;
            return prof;
        }
        bool is_identity = std::fabs(h->b) < 1e-14 &&
                           std::fabs(h->c) < 1e-14 &&
                           std::fabs(h->a - h->d) < 1e-14;
        if (is_identity) {
            prof.witness = hyp_point(0.0, 1.0);
            prof.variant = BoundVariant::multiplicative;
            return prof;
        }
        // parabolic: translation length 0, never attained; escape along the
        // vertical ray into the fixed boundary point
        prof.semisimple = false;
        if (std::fabs(h->c) > 1e-14) {
            double xf = (h->a - h->d) / (2.0 * h->c);
            prof.ray = [xf](double s) { return hyp_point(xf, std::exp(-s)); };
        } else {
            prof.ray = [](double s) { return hyp_point(0.0, std::exp(s)); };
        }
        fit_decay(space, iso, prof);
        return prof;
    }

    if (std::get_if<TreeTranslation>(&iso.v)) {
        const TreeShape& shape = tree_shape(space);
        prof.witness = Point{tree_point_at_line_coordinate(shape, 0.0)};
        prof.variant = BoundVariant::multiplicative;
        return prof;
    }

    if (const TreeElliptic* el = std::get_if<TreeElliptic>(&iso.v)) {
        const TreeShape& shape = tree_shape(space);
        int e = shape.incident[el->fixed_vertex].front();
        prof.witness = canonical_point(
            space, tree_point(e, shape.edges[e].a == el->fixed_vertex
                                     ? 0.0
                                     : shape.edges[e].length));
        prof.variant = BoundVariant::multiplicative;
        return prof;
    }

    const ProdIso& pi = std::get<ProdIso>(iso.v);
    const Product& pr = std::get<Product>(space.v);
    std::vector<DisplacementProfile> parts;
    int moving = 0;
    for (size_t i = 0; i < pi.parts.size(); ++i) {
        parts.push_back(displacement_profile(pr.factors[i], pi.parts[i]));
        if (!parts.back().semisimple) ++moving;
    }
    if (moving == 0) {
        ProductPoint w;
        for (auto& part : parts) w.parts.push_back(*part.witness);
        prof.witness = Point{std::move(w)};
        prof.variant = BoundVariant::multiplicative;
        return prof;
    }
    // split the speed evenly over the escaping factors, park the rest
    prof.semisimple = false;
    double share = 1.0 / std::sqrt(static_cast<double>(moving));
    prof.ray = [parts, share](double s) {
        ProductPoint out;
        for (const auto& part : parts)
            out.parts.push_back(part.semisimple ? *part.witness
                                                : part.ray(share * s));
        return Point{std::move(out)};
    };
    fit_decay(space, iso, prof);
    return prof;
}

}  // namespace cylharm
