#pragma once

#include <string>
#include <vector>

#include "graphxain/explainer.hpp"

namespace graphxain {

// DOT graph for an explanation view: the target node is filled, edge pen
// width grows with the mask weight and the weight is the edge label.
// Node and edge order follow the view, so output is deterministic.
std::string to_dot(const ExplanationView& view, const std::vector<std::string>& node_labels);

// JSON array of {feature, importance}, descending importance.
std::string importance_json(const ExplanationView& view);

} // namespace graphxain
