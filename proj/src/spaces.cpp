#include "cylharm/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace cylharm {

namespace {

[[noreturn]] void bad_point(const std::string& what) {
    throw std::domain_error("point: " + what);
}

// --- hyperbolic plane via the Minkowski hyperboloid --------------------------
//
// (x, y) in the upper half-plane maps to X with <X,X> = -1, X0 > 0, where
// <U,V> = -U0 V0 + U1 V1 + U2 V2.  Geodesics are sinh-weighted combinations,
// which is better conditioned than circle-center constructions when the two
// points share an x coordinate almost exactly.

struct HVec {
    double t, x, y;
};

HVec operator+(HVec u, HVec v) { return {u.t + v.t, u.x + v.x, u.y + v.y}; }
HVec operator*(double s, HVec v) { return {s * v.t, s * v.x, s * v.y}; }

double mink(const HVec& u, const HVec& v) {
    return -u.t * v.t + u.x * v.x + u.y * v.y;
}

HVec to_hyperboloid(const HypPoint& p) {
    double n = p.x * p.x + p.y * p.y;
    return {(n + 1.0) / (2.0 * p.y), (n - 1.0) / (2.0 * p.y), p.x / p.y};
}

HypPoint from_hyperboloid(const HVec& v) {
    double denom = v.t - v.x;
    if (denom <= 0.0) bad_point("hyperboloid point left the sheet");
    return {v.y / denom, 1.0 / denom};
}

double hyp_dist(const HypPoint& p, const HypPoint& q) {
    double dx = p.x - q.x;
    double dy = p.y - q.y;
    double s = std::sqrt((dx * dx + dy * dy) / (4.0 * p.y * q.y));
    return 2.0 * std::asinh(s);
}

double sinhc(double x) {  // sinh(x)/x
    return std::fabs(x) < 1e-6 ? 1.0 + x * x / 6.0 : std::sinh(x) / x;
}

HVec normalize_sheet(HVec v) {
    double n = -mink(v, v);
    if (n <= 0.0) bad_point("hyperboloid normalization failed");
    return (1.0 / std::sqrt(n)) * v;
}

HypPoint hyp_interpolate(const HypPoint& p, const HypPoint& q, double t) {
    double d = hyp_dist(p, q);
    if (d < 1e-14) return p;
    // work in the frame that moves p to (0, 1); there the combination
    // g = A X + B Y has g.t - g.x = A + B / v, a sum of positive terms, so
    // the chart coordinates come out of pure products and stay accurate even
    // when the endpoints are dozens of units apart
    double u = (q.x - p.x) / p.y;
    double v = q.y / p.y;
    auto ratio = [d](double a) {  // sinh(a d) / sinh(d), overflow free
        return std::exp((a - 1.0) * d) * (-std::expm1(-2.0 * a * d)) /
               (-std::expm1(-2.0 * d));
    };
    double A = ratio(1.0 - t);
    double B = ratio(t);
    double denom = A + B / v;
    double x1 = (B * (u / v)) / denom;
    double y1 = 1.0 / denom;
    return {p.x + p.y * x1, p.y * y1};
}

// tangent vectors at X are Minkowski-orthogonal to X
HVec hyp_log(const HVec& X, const HypPoint& xp, const HypPoint& yp) {
    double d = hyp_dist(xp, yp);
    if (d < 1e-15) return {0.0, 0.0, 0.0};
    HVec Y = to_hyperboloid(yp);
    double c = std::cosh(d);
    return (1.0 / sinhc(d)) * (Y + (-c) * X);
}

HVec hyp_exp(const HVec& X, const HVec& V) {
    double n2 = mink(V, V);
    if (n2 <= 0.0) return X;
    double n = std::sqrt(n2);
    HVec g = std::cosh(n) * X + sinhc(n) * V;
    return normalize_sheet(g);
}

HypPoint hyp_barycenter(const std::vector<std::pair<HypPoint, double>>& pts,
                        double tol, const HypPoint* guess) {
    double W = 0.0;
    for (const auto& [p, w] : pts) W += w;
    if (!(W > 0.0)) bad_point("barycenter needs positive total weight");

    HVec X{0.0, 0.0, 0.0};
    if (guess) {
        X = to_hyperboloid(*guess);
    } else {
        for (const auto& [p, w] : pts) X = X + (w / W) * to_hyperboloid(p);
        X = normalize_sheet(X);
    }
    HypPoint x = from_hyperboloid(X);

    auto objective = [&](const HypPoint& at) {
        double f = 0.0;
        for (const auto& [p, w] : pts) {
            double d = hyp_dist(at, p);
            f += w * d * d;
        }
        return f;
    };

    double f = objective(x);
    for (int it = 0; it < 600; ++it) {
        HVec m{0.0, 0.0, 0.0};
        double kappa = 0.0;
        for (const auto& [p, w] : pts) {
            m = m + (w / W) * hyp_log(X, x, p);
            double d = hyp_dist(x, p);
            kappa += (w / W) * (d < 1e-8 ? 1.0 : d / std::tanh(d));
        }
        double g2 = mink(m, m);
        double gnorm = g2 > 0.0 ? std::sqrt(g2) : 0.0;
        if (gnorm <= tol) return x;
        // The hessian of the mean of half squared distances has eigenvalues
        // in [1, kappa] with kappa the weighted mean of d coth d, so the
        // plain fixed-point step (step 1) overshoots and cycles once the
        // points sit more than a couple of units apart.  2 / (1 + kappa) is
        // the optimal fixed step for that eigenvalue range and tends to the
        // fixed-point step as the spread shrinks.
        double step = 2.0 / (1.0 + kappa);
        bool moved = false;
        for (int half = 0; half < 60; ++half) {
            HVec Xn = hyp_exp(X, step * m);
            HypPoint xn = from_hyperboloid(Xn);
            double fn = objective(xn);
            // armijo descent for gradient -2 W m, with an absolute allowance
            // for roundoff in the objective; plain non-increase is not
            // enough, it lets the iteration hop around the minimum forever
            if (fn <= f - 0.2 * W * step * g2 + 1e-15 * (1.0 + std::fabs(f))) {
                X = Xn;
                x = xn;
                f = fn;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved)
            throw std::runtime_error(
                "hyperbolic barycenter: line search stalled, |grad| = " +
                std::to_string(gnorm));
    }
    throw std::runtime_error("hyperbolic barycenter: no convergence to tol");
}

const Euclidean* as_euclidean(const ModelSpace& s) {
    return std::get_if<Euclidean>(&s.v);
}

}  // namespace

ModelSpace make_euclidean(int dim) {
    if (dim < 1) throw std::domain_error("euclidean dimension must be >= 1");
    return ModelSpace{Euclidean{dim}};
}

ModelSpace make_hyperbolic() { return ModelSpace{Hyperbolic{}}; }

ModelSpace make_tree(TreeShape shape) {
    if (shape.vdist.empty()) shape.finalize();
    return ModelSpace{Tree{std::move(shape)}};
}

ModelSpace make_product(ModelSpace left, ModelSpace right) {
    Product p;
    p.factors.push_back(std::move(left));
    p.factors.push_back(std::move(right));
    return ModelSpace{std::move(p)};
}

std::string describe(const ModelSpace& space) {
    return std::visit(
        [](const auto& s) -> std::string {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Euclidean>) {
                return "euclidean(" + std::to_string(s.dim) + ")";
            } else if constexpr (std::is_same_v<T, Hyperbolic>) {
                return "hyperbolic";
            } else if constexpr (std::is_same_v<T, Tree>) {
                return "tree(" + std::to_string(s.shape.n_vertices) +
                       " vertices)";
            } else {
                return "product(" + describe(s.factors[0]) + ", " +
                       describe(s.factors[1]) + ")";
            }
        },
        space.v);
}

Point euc_point(std::vector<double> x) { return Point{EucPoint{std::move(x)}}; }
Point hyp_point(double x, double y) { return Point{HypPoint{x, y}}; }
Point tree_point(int edge, double offset) {
    return Point{TreePoint{edge, offset}};
}
Point product_point(Point left, Point right) {
    ProductPoint p;
    p.parts.push_back(std::move(left));
    p.parts.push_back(std::move(right));
    return Point{std::move(p)};
}

namespace tree_ops {
void check(const TreeShape&, const TreePoint&);
double dist(const TreeShape&, const TreePoint&, const TreePoint&);
TreePoint canonical(const TreeShape&, TreePoint);
TreePoint walk(const TreeShape&, const TreePoint&, const TreePoint&, double);
TreePoint barycenter(const TreeShape&,
                     const std::vector<std::pair<TreePoint, double>>&);
}  // namespace tree_ops

void check_point(const ModelSpace& space, const Point& p) {
    if (const Euclidean* e = as_euclidean(space)) {
        const EucPoint* ep = std::get_if<EucPoint>(&p.v);
        if (!ep) bad_point("expected a euclidean point");
        if (static_cast<int>(ep->x.size()) != e->dim)
            bad_point("euclidean dimension mismatch");
        for (double c : ep->x)
            if (!std::isfinite(c)) bad_point("non-finite coordinate");
        return;
    }
    if (std::holds_alternative<Hyperbolic>(space.v)) {
        const HypPoint* hp = std::get_if<HypPoint>(&p.v);
        if (!hp) bad_point("expected a half-plane point");
        if (!std::isfinite(hp->x) || !std::isfinite(hp->y) || hp->y <= 0.0)
            bad_point("half-plane point needs finite x and y > 0");
        return;
    }
    if (const Tree* t = std::get_if<Tree>(&space.v)) {
        const TreePoint* tp = std::get_if<TreePoint>(&p.v);
        if (!tp) bad_point("expected a tree point");
        tree_ops::check(t->shape, *tp);
        return;
    }
    const Product& pr = std::get<Product>(space.v);
    const ProductPoint* pp = std::get_if<ProductPoint>(&p.v);
    if (!pp || pp->parts.size() != pr.factors.size())
        bad_point("product point arity mismatch");
    for (size_t i = 0; i < pr.factors.size(); ++i)
        check_point(pr.factors[i], pp->parts[i]);
}

double distance(const ModelSpace& space, const Point& p, const Point& q) {
    if (as_euclidean(space)) {
        const auto& a = std::get<EucPoint>(p.v).x;
        const auto& b = std::get<EucPoint>(q.v).x;
        double s = 0.0;
        for (size_t i = 0; i < a.size(); ++i) {
            double d = a[i] - b[i];
            s += d * d;
        }
        return std::sqrt(s);
    }
    if (std::holds_alternative<Hyperbolic>(space.v))
        return hyp_dist(std::get<HypPoint>(p.v), std::get<HypPoint>(q.v));
    if (const Tree* t = std::get_if<Tree>(&space.v))
        return tree_ops::dist(t->shape, std::get<TreePoint>(p.v),
                              std::get<TreePoint>(q.v));
    const Product& pr = std::get<Product>(space.v);
    const auto& pa = std::get<ProductPoint>(p.v).parts;
    const auto& qa = std::get<ProductPoint>(q.v).parts;
    double s = 0.0;
    for (size_t i = 0; i < pr.factors.size(); ++i) {
        double d = distance(pr.factors[i], pa[i], qa[i]);
        s += d * d;
    }
    return std::sqrt(s);
}

Point interpolate(const ModelSpace& space, const Point& p, const Point& q,
                  double t) {
    if (t < -1e-12 || t > 1.0 + 1e-12)
        throw std::domain_error("interpolate: t outside [0,1]");
    t = std::clamp(t, 0.0, 1.0);
    if (as_euclidean(space)) {
        const auto& a = std::get<EucPoint>(p.v).x;
        const auto& b = std::get<EucPoint>(q.v).x;
        std::vector<double> r(a.size());
        for (size_t i = 0; i < a.size(); ++i)
            r[i] = (1.0 - t) * a[i] + t * b[i];
        return euc_point(std::move(r));
    }
    if (std::holds_alternative<Hyperbolic>(space.v))
        return Point{hyp_interpolate(std::get<HypPoint>(p.v),
                                     std::get<HypPoint>(q.v), t)};
    if (const Tree* tr = std::get_if<Tree>(&space.v)) {
        const TreePoint& a = std::get<TreePoint>(p.v);
        const TreePoint& b = std::get<TreePoint>(q.v);
        double d = tree_ops::dist(tr->shape, a, b);
        return Point{tree_ops::walk(tr->shape, a, b, t * d)};
    }
    const Product& pr = std::get<Product>(space.v);
    const auto& pa = std::get<ProductPoint>(p.v).parts;
    const auto& qa = std::get<ProductPoint>(q.v).parts;
    ProductPoint out;
    for (size_t i = 0; i < pr.factors.size(); ++i)
        out.parts.push_back(interpolate(pr.factors[i], pa[i], qa[i], t));
    return Point{std::move(out)};
}

double cat0_residual(const ModelSpace& space, const Point& p, const Point& q,
                     const Point& r, double t) {
    Point qt = interpolate(space, q, r, t);
    double dpq = distance(space, p, q);
    double dpr = distance(space, p, r);
    double dqr = distance(space, q, r);
    double dqt = distance(space, p, qt);
    return (1.0 - t) * dpq * dpq + t * dpr * dpr - t * (1.0 - t) * dqr * dqr -
           dqt * dqt;
}

namespace {

Point barycenter_impl(const ModelSpace& space,
                      const std::vector<WeightedPoint>& pts, double tol,
                      const Point* guess) {
    if (pts.empty()) throw std::domain_error("barycenter of nothing");
    double W = 0.0;
    for (const auto& wp : pts) {
        if (wp.w < 0.0) throw std::domain_error("negative barycenter weight");
        W += wp.w;
    }
    if (!(W > 0.0)) throw std::domain_error("barycenter needs positive weight");

    if (as_euclidean(space)) {
        size_t dim = std::get<EucPoint>(pts[0].p.v).x.size();
        std::vector<double> r(dim, 0.0);
        for (const auto& wp : pts) {
            const auto& a = std::get<EucPoint>(wp.p.v).x;
            for (size_t i = 0; i < dim; ++i) r[i] += (wp.w / W) * a[i];
        }
        return euc_point(std::move(r));
    }
    if (std::holds_alternative<Hyperbolic>(space.v)) {
        std::vector<std::pair<HypPoint, double>> hp;
        hp.reserve(pts.size());
        for (const auto& wp : pts)
            hp.emplace_back(std::get<HypPoint>(wp.p.v), wp.w);
        const HypPoint* g =
            guess ? std::get_if<HypPoint>(&guess->v) : nullptr;
        return Point{hyp_barycenter(hp, tol, g)};
    }
    if (const Tree* t = std::get_if<Tree>(&space.v)) {
        std::vector<std::pair<TreePoint, double>> tp;
        tp.reserve(pts.size());
        for (const auto& wp : pts)
            tp.emplace_back(std::get<TreePoint>(wp.p.v), wp.w);
        return Point{tree_ops::barycenter(t->shape, tp)};
    }
    const Product& pr = std::get<Product>(space.v);
    ProductPoint out;
    for (size_t i = 0; i < pr.factors.size(); ++i) {
        std::vector<WeightedPoint> part;
        part.reserve(pts.size());
        for (const auto& wp : pts)
            part.push_back({std::get<ProductPoint>(wp.p.v).parts[i], wp.w});
        const Point* g = nullptr;
        if (guess) g = &std::get<ProductPoint>(guess->v).parts[i];
        out.parts.push_back(barycenter_impl(pr.factors[i], part, tol, g));
    }
    return Point{std::move(out)};
}

}  // namespace

Point weighted_barycenter(const ModelSpace& space,
                          const std::vector<WeightedPoint>& pts, double tol) {
    return barycenter_impl(space, pts, tol, nullptr);
}

// used by the sweep loop: warm starts cut the hyperbolic iteration count
Point weighted_barycenter_from(const ModelSpace& space,
                               const std::vector<WeightedPoint>& pts,
                               double tol, const Point& guess) {
    return barycenter_impl(space, pts, tol, &guess);
}

Point canonical_point(const ModelSpace& space, const Point& p) {
    if (const Tree* t = std::get_if<Tree>(&space.v))
        return Point{
            tree_ops::canonical(t->shape, std::get<TreePoint>(p.v))};
    if (const Product* pr = std::get_if<Product>(&space.v)) {
        const auto& parts = std::get<ProductPoint>(p.v).parts;
        ProductPoint out;
        for (size_t i = 0; i < pr->factors.size(); ++i)
            out.parts.push_back(canonical_point(pr->factors[i], parts[i]));
        return Point{std::move(out)};
    }
    return p;
}

bool points_equal(const ModelSpace& space, const Point& p, const Point& q,
                  double tol) {
    return distance(space, p, q) <= tol;
}

}  // namespace cylharm
