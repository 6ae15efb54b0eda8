#include "graphxain/render.hpp"

#include <cstdio>
#include <map>
#include <sstream>

#include <json.hpp>

#include "graphxain/errors.hpp"
#include "graphxain/narrative.hpp"

namespace graphxain {

namespace {

std::string dot_quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    out += "\"";
    return out;
}

std::string pen_width(double weight) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", 0.5 + 4.5 * weight);
    return buf;
}

} // namespace

std::string to_dot(const ExplanationView& view, const std::vector<std::string>& node_labels) {
    if (node_labels.size() != view.nodes.size()) {
        throw ValidationError("to_dot: node labels must parallel view nodes");
    }
    std::map<std::uint32_t, std::string> label_of;
    for (std::size_t i = 0; i < view.nodes.size(); ++i) label_of[view.nodes[i]] = node_labels[i];

    std::ostringstream out;
    out << "graph explanation {\n";
    out << "  node [shape=circle, fontsize=10];\n";
    for (std::size_t i = 0; i < view.nodes.size(); ++i) {
        out << "  " << dot_quote(node_labels[i]);
        if (view.nodes[i] == view.target) {
            out << " [style=filled, fillcolor=gold, penwidth=2.0]";
        }
        out << ";\n";
    }
    for (const auto& [u, v, w] : view.edges) {
        out << "  " << dot_quote(label_of.at(u)) << " -- " << dot_quote(label_of.at(v))
            << " [penwidth=" << pen_width(w) << ", label=" << dot_quote(format_value(w))
            << "];\n";
    }
    out << "}\n";
    return out.str();
}

std::string importance_json(const ExplanationView& view) {
    nlohmann::ordered_json arr = nlohmann::json::array();
    for (const auto& [name, weight] : view.features) {
        nlohmann::ordered_json f;
        f["feature"] = name;
        f["importance"] = weight;
        arr.push_back(std::move(f));
    }
    return arr.dump(2) + "\n";
}

} // namespace graphxain
