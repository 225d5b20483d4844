#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "cylharm/isometry.hpp"
#include "cylharm/spaces.hpp"

namespace cylharm {

nlohmann::json space_to_json(const ModelSpace& s);
ModelSpace space_from_json(const nlohmann::json& j);

nlohmann::json isometry_to_json(const Isometry& iso);
Isometry isometry_from_json(const nlohmann::json& j, const ModelSpace& s);

// flat double encoding of points, fixed width per space
size_t point_flat_size(const ModelSpace& s);
void point_to_flat(const ModelSpace& s, const Point& p,
                   std::vector<double>& out);
Point point_from_flat(const ModelSpace& s, const std::vector<double>& in,
                      size_t& pos);

// 17 significant digits; strtod reads this back exactly
std::string format_double(double x);

}  // namespace cylharm
