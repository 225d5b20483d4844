#include "cylharm/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace cylharm {

namespace {

constexpr double kSnap = 1e-12;

[[noreturn]] void bad_tree(const std::string& what) {
    throw std::domain_error("tree: " + what);
}

}  // namespace

void TreeShape::finalize() {
    if (n_vertices <= 0) bad_tree("need at least one vertex");
    const int V = n_vertices;
    const int E = static_cast<int>(edges.size());
    if (E != V - 1) bad_tree("edge count must be n_vertices - 1");

    incident.assign(V, {});
    for (int e = 0; e < E; ++e) {
        const Edge& ed = edges[e];
        if (ed.a < 0 || ed.a >= V || ed.b < 0 || ed.b >= V || ed.a == ed.b)
            bad_tree("edge endpoints out of range");
        if (!(ed.length > 0.0) || !std::isfinite(ed.length))
            bad_tree("edge length must be positive and finite");
        incident[ed.a].push_back(e);
        incident[ed.b].push_back(e);
    }
    for (auto& inc : incident) std::sort(inc.begin(), inc.end());

    // distances and first-hop table by search from every root
    vdist.assign(static_cast<size_t>(V) * V, 0.0);
    next_hop.assign(static_cast<size_t>(V) * V, -1);
    std::vector<char> seen(V);
    for (int root = 0; root < V; ++root) {
        std::fill(seen.begin(), seen.end(), 0);
        seen[root] = 1;
        std::deque<int> queue{root};
        int reached = 1;
        while (!queue.empty()) {
            int u = queue.front();
            queue.pop_front();
            for (int e : incident[u]) {
                int w = edges[e].a == u ? edges[e].b : edges[e].a;
                if (seen[w]) continue;
                seen[w] = 1;
                ++reached;
                vdist[root * V + w] = vdist[root * V + u] + edges[e].length;
                next_hop[root * V + w] =
                    u == root ? e : next_hop[root * V + u];
                queue.push_back(w);
            }
        }
        if (reached != V) bad_tree("graph is not connected");
    }

    line_vertices.clear();
    line_coord.assign(V, std::numeric_limits<double>::quiet_NaN());
    if (!line.empty()) {
        for (int e : line)
            if (e < 0 || e >= E) bad_tree("line refers to unknown edge");
        // orient the path; a single edge keeps its stored orientation
        int v0;
        if (line.size() == 1) {
            v0 = edges[line[0]].a;
        } else {
            const Edge& e0 = edges[line[0]];
            const Edge& e1 = edges[line[1]];
            bool a_shared = e0.a == e1.a || e0.a == e1.b;
            bool b_shared = e0.b == e1.a || e0.b == e1.b;
            if (a_shared == b_shared) bad_tree("line edges do not chain");
            v0 = a_shared ? e0.b : e0.a;
        }
        line_vertices.push_back(v0);
        double coord = 0.0;
        line_coord[v0] = 0.0;
        int cur = v0;
        for (int e : line) {
            const Edge& ed = edges[e];
            int nxt;
            if (ed.a == cur) nxt = ed.b;
            else if (ed.b == cur) nxt = ed.a;
            else bad_tree("line edges do not form a path");
            coord += ed.length;
            if (!std::isnan(line_coord[nxt])) bad_tree("line revisits a vertex");
            line_coord[nxt] = coord;
            line_vertices.push_back(nxt);
            cur = nxt;
        }
    }
}

double TreeShape::line_total_length() const {
    double s = 0.0;
    for (int e : line) s += edges[e].length;
    return s;
}

TreeShape parse_tree(const std::string& text) {
    TreeShape shape;
    std::istringstream in(text);
    std::string raw;
    bool have_vertices = false;
    bool have_line = false;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        auto hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        std::istringstream ls(raw);
        std::string word;
        if (!(ls >> word)) continue;
        auto fail = [&](const std::string& what) {
            bad_tree(what + " (line " + std::to_string(lineno) + ")");
        };
        if (word == "vertices") {
            if (have_vertices) fail("duplicate vertices directive");
            if (!(ls >> shape.n_vertices)) fail("vertices needs a count");
            have_vertices = true;
        } else if (word == "edge") {
            TreeShape::Edge e;
            if (!(ls >> e.a >> e.b >> e.length)) fail("edge needs: a b length");
            shape.edges.push_back(e);
        } else if (word == "line") {
            if (have_line) fail("duplicate line directive");
            int id;
            while (ls >> id) shape.line.push_back(id);
            if (shape.line.empty()) fail("line needs edge ids");
            have_line = true;
        } else {
            fail("unknown directive '" + word + "'");
        }
    }
    if (!have_vertices) bad_tree("missing vertices directive");
    shape.finalize();
    return shape;
}

TreeShape load_tree_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) bad_tree("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_tree(buf.str());
}

// --- point helpers ----------------------------------------------------------

namespace tree_ops {

void check(const TreeShape& shape, const TreePoint& p) {
    if (p.edge == kRayNeg || p.edge == kRayPos) {
        if (!shape.has_line())
            bad_tree("ray point on a tree without a designated line");
        if (p.offset < -kSnap || !std::isfinite(p.offset))
            bad_tree("ray offset must be nonnegative");
        return;
    }
    if (p.edge < 0 || p.edge >= static_cast<int>(shape.edges.size()))
        bad_tree("edge id out of range");
    double len = shape.edge_length(p.edge);
    if (p.offset < -kSnap || p.offset > len + kSnap || !std::isfinite(p.offset))
        bad_tree("offset outside the edge");
}

int ray_anchor(const TreeShape& shape, int ray) {
    return ray == kRayNeg ? shape.line_vertices.front()
                          : shape.line_vertices.back();
}

// point is exactly a vertex?  returns vertex id or -1
int at_vertex(const TreeShape& shape, const TreePoint& p) {
    if (p.edge == kRayNeg || p.edge == kRayPos)
        return p.offset <= kSnap ? ray_anchor(shape, p.edge) : -1;
    double len = shape.edge_length(p.edge);
    if (p.offset <= kSnap) return shape.edges[p.edge].a;
    if (p.offset >= len - kSnap) return shape.edges[p.edge].b;
    return -1;
}

double dist_to_vertex(const TreeShape& shape, const TreePoint& p, int v) {
    if (p.edge == kRayNeg || p.edge == kRayPos)
        return p.offset + shape.vertex_distance(ray_anchor(shape, p.edge), v);
    const TreeShape::Edge& e = shape.edges[p.edge];
    return std::min(p.offset + shape.vertex_distance(e.a, v),
                    e.length - p.offset + shape.vertex_distance(e.b, v));
}

double dist(const TreeShape& shape, const TreePoint& p, const TreePoint& q) {
    if (p.edge == q.edge) return std::fabs(p.offset - q.offset);
    if (p.edge == kRayNeg || p.edge == kRayPos)
        return p.offset + dist_to_vertex(shape, q, ray_anchor(shape, p.edge));
    if (q.edge == kRayNeg || q.edge == kRayPos)
        return q.offset + dist_to_vertex(shape, p, ray_anchor(shape, q.edge));
    const TreeShape::Edge& ep = shape.edges[p.edge];
    const TreeShape::Edge& eq = shape.edges[q.edge];
    double best = p.offset + shape.vertex_distance(ep.a, eq.a) + q.offset;
    best = std::min(best, p.offset + shape.vertex_distance(ep.a, eq.b) +
                              eq.length - q.offset);
    best = std::min(best, ep.length - p.offset +
                              shape.vertex_distance(ep.b, eq.a) + q.offset);
    best = std::min(best, ep.length - p.offset +
                              shape.vertex_distance(ep.b, eq.b) + eq.length -
                              q.offset);
    return best;
}

TreePoint canonical(const TreeShape& shape, TreePoint p) {
    int v = at_vertex(shape, p);
    if (v < 0) {
        if (p.edge >= 0) {
            p.offset = std::clamp(p.offset, 0.0, shape.edge_length(p.edge));
        } else if (p.offset < 0.0) {
            p.offset = 0.0;
        }
        return p;
    }
    int e = shape.incident[v].front();
    return shape.edges[e].a == v ? TreePoint{e, 0.0}
                                 : TreePoint{e, shape.edge_length(e)};
}

// walk from p toward q by arclength s (0 <= s <= dist(p,q))
TreePoint walk(const TreeShape& shape, const TreePoint& p, const TreePoint& q,
               double s) {
    double total = dist(shape, p, q);
    if (total <= 0.0 || s <= 0.0) return canonical(shape, p);
    if (s >= total) return canonical(shape, q);
    if (p.edge == q.edge) {
        double dir = q.offset > p.offset ? 1.0 : -1.0;
        return canonical(shape, {p.edge, p.offset + dir * s});
    }

    struct Route {
        int vertex;
        double leg;  // distance from the point to this exit vertex
    };
    auto routes = [&](const TreePoint& pt) {
        std::vector<Route> r;
        if (pt.edge == kRayNeg || pt.edge == kRayPos) {
            r.push_back({ray_anchor(shape, pt.edge), pt.offset});
        } else {
            const TreeShape::Edge& e = shape.edges[pt.edge];
            r.push_back({e.a, pt.offset});
            r.push_back({e.b, e.length - pt.offset});
        }
        return r;
    };

    int exit_v = -1, entry_v = -1;
    double exit_leg = 0.0, entry_leg = 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (const Route& rp : routes(p)) {
        for (const Route& rq : routes(q)) {
            double len =
                rp.leg + shape.vertex_distance(rp.vertex, rq.vertex) + rq.leg;
            if (len < best - kSnap) {
                best = len;
                exit_v = rp.vertex;
                exit_leg = rp.leg;
                entry_v = rq.vertex;
                entry_leg = rq.leg;
            }
        }
    }

    if (s <= exit_leg) {
        // still on p's edge or ray, moving toward exit_v
        if (p.edge == kRayNeg || p.edge == kRayPos)
            return canonical(shape, {p.edge, p.offset - s});
        const TreeShape::Edge& e = shape.edges[p.edge];
        double off = exit_v == e.a ? p.offset - s : p.offset + s;
        return canonical(shape, {p.edge, off});
    }
    double rem = s - exit_leg;
    int u = exit_v;
    const int V = shape.n_vertices;
    while (u != entry_v) {
        int e = shape.next_hop[u * V + entry_v];
        const TreeShape::Edge& ed = shape.edges[e];
        if (rem <= ed.length + kSnap && rem >= -kSnap) {
            double off = ed.a == u ? rem : ed.length - rem;
            if (rem <= ed.length)
                return canonical(shape, {e, off});
        }
        rem -= ed.length;
        u = ed.a == u ? ed.b : ed.a;
    }
    // past entry_v: remaining distance rem goes onto q's edge or ray
    if (q.edge == kRayNeg || q.edge == kRayPos)
        return canonical(shape, {q.edge, rem});
    const TreeShape::Edge& e = shape.edges[q.edge];
    double off = entry_v == e.a ? rem : e.length - rem;
    (void)entry_leg;
    return canonical(shape, {q.edge, off});
}

// exact weighted barycenter: scan every edge (and ray segment) and minimize the
// piecewise quadratic objective on it
TreePoint barycenter(const TreeShape& shape,
                     const std::vector<std::pair<TreePoint, double>>& pts) {
    struct Affine {
        double sign;  // d(x(o), p_k) = sign * o + c on a subinterval
        double c;
    };
    double best_val = std::numeric_limits<double>::infinity();
    TreePoint best_pt{0, 0.0};

    auto scan_segment = [&](int edge_id, double seg_len, auto dist_fn) {
        // breakpoints where some d_k switches branch
        std::vector<double> cuts{0.0, seg_len};
        for (const auto& [pk, wk] : pts) {
            (void)wk;
            cuts.push_back(std::clamp(dist_fn(pk).first, 0.0, seg_len));
        }
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
        for (size_t i = 0; i + 1 < cuts.size(); ++i) {
            double lo = cuts[i], hi = cuts[i + 1];
            double mid = 0.5 * (lo + hi);
            // f(o) = sum w (sign*o + c)^2 on [lo, hi]
            double W = 0.0, B = 0.0;
            for (const auto& [pk, wk] : pts) {
                Affine af = dist_fn(pk).second(mid);
                W += wk;
                B += wk * af.sign * af.c;
            }
            double o = W > 0.0 ? std::clamp(-B / W, lo, hi) : mid;
            double f = 0.0;
            for (const auto& [pk, wk] : pts) {
                Affine af = dist_fn(pk).second(mid);
                double d = af.sign * o + af.c;
                f += wk * d * d;
            }
            if (f < best_val) {
                best_val = f;
                best_pt = {edge_id, o};
            }
        }
    };

    for (int e = 0; e < static_cast<int>(shape.edges.size()); ++e) {
        const TreeShape::Edge& ed = shape.edges[e];
        auto dist_fn = [&](const TreePoint& pk) {
            // returns (branch cut, affine-at lambda)
            double cut, dA, dB;
            if (pk.edge == e) {
                cut = pk.offset;
                dA = pk.offset;  // unused
                dB = 0.0;
            } else {
                dA = dist_to_vertex(shape, pk, ed.a);
                dB = dist_to_vertex(shape, pk, ed.b);
                cut = 0.5 * (ed.length + dB - dA);
            }
            auto affine = [&, cut, dA, dB, pk, e2 = e,
                           len = ed.length](double at) -> Affine {
                if (pk.edge == e2) {
                    return at < pk.offset ? Affine{-1.0, pk.offset}
                                          : Affine{1.0, -pk.offset};
                }
                return at < cut ? Affine{1.0, dA} : Affine{-1.0, len + dB};
            };
            return std::make_pair(cut, affine);
        };
        scan_segment(e, ed.length, dist_fn);
    }

    if (shape.has_line()) {
        for (int ray : {kRayNeg, kRayPos}) {
            int anchor = ray_anchor(shape, ray);
            double reach = 0.0;
            for (const auto& [pk, wk] : pts) {
                (void)wk;
                reach = std::max(reach, dist_to_vertex(shape, pk, anchor));
                if (pk.edge == ray) reach = std::max(reach, pk.offset);
            }
            auto dist_fn = [&, ray, anchor](const TreePoint& pk) {
                double cut =
                    pk.edge == ray ? pk.offset : 0.0;
                double base = pk.edge == ray
                                  ? pk.offset
                                  : dist_to_vertex(shape, pk, anchor);
                auto affine = [cut, base, same = pk.edge == ray](
                                  double at) -> Affine {
                    if (same)
                        return at < cut ? Affine{-1.0, base}
                                        : Affine{1.0, -base};
                    (void)at;
                    return Affine{1.0, base};
                };
                return std::make_pair(cut, affine);
            };
            scan_segment(ray, reach + 1.0, dist_fn);
        }
    }
    return canonical(shape, best_pt);
}

}  // namespace tree_ops

bool tree_point_on_line(const TreeShape& shape, const TreePoint& p) {
    if (!shape.has_line()) return false;
    if (p.edge == kRayNeg || p.edge == kRayPos) return true;
    int v = tree_ops::at_vertex(shape, p);
    if (v >= 0) return !std::isnan(shape.line_coord[v]);
    return std::find(shape.line.begin(), shape.line.end(), p.edge) !=
           shape.line.end();
}

double tree_line_coordinate(const TreeShape& shape, const TreePoint& p) {
    if (!shape.has_line()) bad_tree("no designated line");
    if (p.edge == kRayNeg) return -p.offset;
    if (p.edge == kRayPos) return shape.line_total_length() + p.offset;
    int v = tree_ops::at_vertex(shape, p);
    if (v >= 0) {
        double c = shape.line_coord[v];
        if (std::isnan(c)) bad_tree("point is not on the designated line");
        return c;
    }
    // interior point: locate the edge along the path
    double acc = 0.0;
    int cur = shape.line_vertices.front();
    for (int e : shape.line) {
        const TreeShape::Edge& ed = shape.edges[e];
        if (e == p.edge) {
            double along = ed.a == cur ? p.offset : ed.length - p.offset;
            return acc + along;
        }
        acc += ed.length;
        cur = ed.a == cur ? ed.b : ed.a;
    }
    bad_tree("point is not on the designated line");
}

TreePoint tree_point_at_line_coordinate(const TreeShape& shape, double s) {
    if (!shape.has_line()) bad_tree("no designated line");
    if (s < 0.0) return {kRayNeg, -s};
    double total = shape.line_total_length();
    if (s > total) return {kRayPos, s - total};
    double acc = 0.0;
    int cur = shape.line_vertices.front();
    for (int e : shape.line) {
        const TreeShape::Edge& ed = shape.edges[e];
        if (s <= acc + ed.length) {
            double along = s - acc;
            double off = ed.a == cur ? along : ed.length - along;
            return tree_ops::canonical(shape, {e, off});
        }
        acc += ed.length;
        cur = ed.a == cur ? ed.b : ed.a;
    }
    return tree_ops::canonical(
        shape, {shape.line.back(),
                shape.edges[shape.line.back()].a == cur
                    ? 0.0
                    : shape.edges[shape.line.back()].length});
}

}  // namespace cylharm
