#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "cylharm/spaces.hpp"

namespace cylharm {

struct EucIso {
    Eigen::MatrixXd Q;  // orthogonal
    Eigen::VectorXd b;
};

struct HypIso {  // z -> (az+b)/(cz+d) on the upper half-plane, det = 1
    double a = 1.0, b = 0.0, c = 0.0, d = 1.0;
};

struct TreeTranslation {  // shift by `length` along the designated line
    double length = 1.0;  // signed; translation_length reports |length|
};

struct TreeElliptic {  // automorphism fixing a vertex
    int fixed_vertex = 0;
    std::vector<int> vertex_map;
};

struct Isometry;

struct ProdIso {
    std::vector<Isometry> parts;  // exactly two
};

struct Isometry {
    std::variant<EucIso, HypIso, TreeTranslation, TreeElliptic, ProdIso> v;
};

Isometry euclidean_isometry(Eigen::MatrixXd Q, Eigen::VectorXd b);
Isometry euclidean_translation(const std::vector<double>& b);
// entries are normalized so the determinant becomes 1; det <= 0 is an error
Isometry hyperbolic_isometry(double a, double b, double c, double d);
Isometry tree_translation(double length);
Isometry tree_elliptic(int fixed_vertex, std::vector<int> vertex_map);
Isometry product_isometry(Isometry left, Isometry right);
Isometry identity_isometry(const ModelSpace& space);

// Validates shape and isometry axioms (orthogonality, arity, tree automorphism
// conditions); throws std::domain_error.
void check_isometry(const ModelSpace& space, const Isometry& iso);

Point apply(const ModelSpace& space, const Isometry& iso, const Point& p);
Isometry inverse(const ModelSpace& space, const Isometry& iso);

// d(I p, p)
double displacement(const ModelSpace& space, const Isometry& iso,
                    const Point& p);

// inf_P d(I P, P), closed form per target
double translation_length(const ModelSpace& space, const Isometry& iso);

// translation_length^2 / (2 pi)
double e_rho(const ModelSpace& space, const Isometry& iso);

enum class BoundVariant { none, multiplicative, additive };

// How the displacement function behaves at infinity.  Semisimple isometries
// attain their translation length at `witness`.  Otherwise `ray` is a unit
// speed geodesic ray along which the squared displacement approaches delta^2,
// certified for s in [0, fit_range] by
//   multiplicative:  d^2(I c(s), c(s)) <= delta^2 (1 + decay_b e^{-decay_a s})
//   additive:        d^2(I c(s), c(s)) <= delta^2 + decay_b e^{-decay_a s}
// The additive variant is the only meaningful one when delta = 0.
struct DisplacementProfile {
    double delta = 0.0;
    bool semisimple = true;
    std::optional<Point> witness;
    std::function<Point(double)> ray;  // null when semisimple
    double decay_a = 0.0;
    double decay_b = 0.0;
    BoundVariant variant = BoundVariant::none;
    double fit_range = 30.0;
    bool condition_b_violated = false;  // decay fit failed; reported, not thrown
};

DisplacementProfile displacement_profile(const ModelSpace& space,
                                         const Isometry& iso);

// Value of the certified bound at ray parameter s.
double profile_bound(const DisplacementProfile& prof, double s);

}  // namespace cylharm
