#pragma once

#include <string>
#include <variant>
#include <vector>

namespace cylharm {

// Finite metric tree, optionally with a designated bi-infinite line used as an
// isometry axis.  The line is an ordered edge path; the model space extends the
// two ends of that path by infinite rays, so the line-union-rays subspace is a
// copy of R inside the tree.
struct TreeShape {
    struct Edge {
        int a = 0;
        int b = 0;
        double length = 0.0;
    };

    int n_vertices = 0;
    std::vector<Edge> edges;
    std::vector<int> line;  // edge ids forming a simple path, may be empty

    // filled by finalize(); do not set by hand
    std::vector<double> vdist;          // n_vertices * n_vertices, row-major
    std::vector<int> next_hop;          // first edge on the path u -> v, -1 on diagonal
    std::vector<std::vector<int>> incident;  // incident edge ids, ascending
    std::vector<int> line_vertices;     // vertex path along the line, size line.size()+1
    std::vector<double> line_coord;     // per vertex: coordinate on the line, NaN if off it

    void finalize();  // validates (connected, acyclic, line is a path), builds tables
    double edge_length(int e) const { return edges[e].length; }
    bool has_line() const { return !line.empty(); }
    double line_total_length() const;
    double vertex_distance(int u, int v) const { return vdist[u * n_vertices + v]; }
};

// Text format, one directive per line; '#' starts a comment.  See
// docs/tree_format.md for the grammar.
TreeShape parse_tree(const std::string& text);
TreeShape load_tree_file(const std::string& path);

struct ModelSpace;

struct Euclidean {
    int dim = 1;
};
struct Hyperbolic {};  // upper half-plane, metric (dx^2+dy^2)/y^2
struct Tree {
    TreeShape shape;
};
struct Product {
    std::vector<ModelSpace> factors;  // exactly two
};

struct ModelSpace {
    std::variant<Euclidean, Hyperbolic, Tree, Product> v;
};

ModelSpace make_euclidean(int dim);
ModelSpace make_hyperbolic();
ModelSpace make_tree(TreeShape shape);
ModelSpace make_product(ModelSpace left, ModelSpace right);

std::string describe(const ModelSpace& space);

// Points.  Tree points live on an edge (offset in [0, length]) or on one of the
// two extension rays of the designated line (offset >= 0, measured away from
// the anchor vertex).
constexpr int kRayNeg = -1;  // extends the line before its first vertex
constexpr int kRayPos = -2;  // extends the line past its last vertex

struct EucPoint {
    std::vector<double> x;
};
struct HypPoint {
    double x = 0.0;
    double y = 1.0;
};
struct TreePoint {
    int edge = 0;
    double offset = 0.0;
};

struct Point;

struct ProductPoint {
    std::vector<Point> parts;
};

struct Point {
    std::variant<EucPoint, HypPoint, TreePoint, ProductPoint> v;
};

Point euc_point(std::vector<double> x);
Point hyp_point(double x, double y);
Point tree_point(int edge, double offset);
Point product_point(Point left, Point right);

// Throws std::domain_error on encodings that do not belong to the space
// (dimension mismatch, y <= 0, offset outside the edge, ray without a line).
void check_point(const ModelSpace& space, const Point& p);

double distance(const ModelSpace& space, const Point& p, const Point& q);

// The unique constant-speed geodesic point (1-t)p + t q, t in [0,1].
Point interpolate(const ModelSpace& space, const Point& p, const Point& q, double t);

// Comparison-quadruple slack at (p; q, r) with q_t = (1-t)q + t r:
//   (1-t) d^2(p,q) + t d^2(p,r) - t(1-t) d^2(q,r) - d^2(p, q_t).
// Nonnegative in any NPC space; identically zero in the flat case.
double cat0_residual(const ModelSpace& space, const Point& p, const Point& q,
                     const Point& r, double t);

struct WeightedPoint {
    Point p;
    double w = 1.0;
};

// Minimizer of sum w_k d^2(x, p_k).  Euclidean/tree/product cases are exact;
// the hyperbolic case iterates a damped fixed point until the gradient norm
// (per unit total weight) drops below tol.  Throws std::runtime_error if the
// iteration fails to reach tol.
Point weighted_barycenter(const ModelSpace& space,
                          const std::vector<WeightedPoint>& pts, double tol);

// Same, but seeds the hyperbolic iteration at `guess`.
Point weighted_barycenter_from(const ModelSpace& space,
                               const std::vector<WeightedPoint>& pts,
                               double tol, const Point& guess);

// Canonical form: tree offsets snapped to vertices, vertex encodings use the
// lowest incident edge id.  Other spaces pass through unchanged.
Point canonical_point(const ModelSpace& space, const Point& p);

bool points_equal(const ModelSpace& space, const Point& p, const Point& q,
                  double tol);

// Tree helpers shared by the isometry layer.
bool tree_point_on_line(const TreeShape& shape, const TreePoint& p);
double tree_line_coordinate(const TreeShape& shape, const TreePoint& p);
TreePoint tree_point_at_line_coordinate(const TreeShape& shape, double s);

}  // namespace cylharm
