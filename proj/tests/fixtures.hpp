#pragma once

// Shared synthetic fixtures for the unit and acceptance suites.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "graphxain/explainer.hpp"
#include "graphxain/gcn.hpp"
#include "graphxain/graph.hpp"
#include "graphxain/narrative.hpp"
#include "graphxain/rng.hpp"

namespace fixtures {

using namespace graphxain;

// Random connected-ish graph for oracle checks; retries seeds until every
// node keeps a neighbor so preprocessing drops nothing.
inline Graph random_graph(std::size_t n, std::size_t f, double edge_prob, std::uint64_t seed) {
    for (std::uint64_t attempt = 0;; ++attempt) {
        Rng rng(seed + attempt * 7919);
        std::vector<RawNode> nodes(n);
        std::vector<std::string> names;
        for (std::size_t c = 0; c < f; ++c) names.push_back("f_" + std::to_string(c));
        for (std::size_t i = 0; i < n; ++i) {
            nodes[i].id = std::to_string(i);
            nodes[i].label = rng.uniform() < 0.5 ? 0 : 1;
            for (std::size_t c = 0; c < f; ++c) nodes[i].features.push_back(rng.normal());
        }
        std::vector<std::pair<std::string, std::string>> edges;
        for (std::size_t u = 0; u < n; ++u) {
            for (std::size_t v = u + 1; v < n; ++v) {
                if (rng.uniform() < edge_prob) {
                    edges.emplace_back(std::to_string(u), std::to_string(v));
                }
            }
        }
        std::vector<bool> touched(n, false);
        for (const auto& [a, b] : edges) {
            touched[std::stoul(a)] = true;
            touched[std::stoul(b)] = true;
        }
        bool all = true;
        for (bool t : touched) all = all && t;
        if (!all || edges.empty()) continue;
        return build_graph(std::move(nodes), std::move(names), edges);
    }
}

// Two planted communities; labels equal community; feature column
// `planted_feature` carries community + N(0, sigma^2), the rest pure noise.
// Nodes losing every edge are reconnected within their community so the
// fixture keeps exactly n nodes.
inline Graph planted_graph(std::size_t n, double p_in, double p_out, double sigma,
                           std::size_t num_features, std::size_t planted_feature,
                           std::uint64_t seed) {
    Rng rng(seed);
    const std::size_t half = n / 2;
    std::vector<RawNode> nodes(n);
    std::vector<std::string> names;
    for (std::size_t c = 0; c < num_features; ++c) names.push_back("f_" + std::to_string(c));
    for (std::size_t i = 0; i < n; ++i) {
        const int community = i < half ? 0 : 1;
        nodes[i].id = std::to_string(i);
        nodes[i].label = community;
        for (std::size_t c = 0; c < num_features; ++c) {
            if (c == planted_feature) {
                nodes[i].features.push_back(static_cast<double>(community) + sigma * rng.normal());
            } else {
                nodes[i].features.push_back(rng.normal());
            }
        }
    }
    std::vector<std::pair<std::string, std::string>> edges;
    std::vector<std::size_t> degree(n, 0);
    for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t v = u + 1; v < n; ++v) {
            const bool same = (u < half) == (v < half);
            if (rng.uniform() < (same ? p_in : p_out)) {
                edges.emplace_back(std::to_string(u), std::to_string(v));
                ++degree[u];
                ++degree[v];
            }
        }
    }
    for (std::size_t u = 0; u < n; ++u) {
        if (degree[u] == 0) {
            const std::size_t v = u < half ? (u + 1) % half : half + (u + 1 - half) % (n - half);
            edges.emplace_back(std::to_string(u), std::to_string(v));
        }
    }
    return build_graph(std::move(nodes), std::move(names), edges);
}

// Random parameters without training, for forward/gradient oracles.
inline GcnModel random_model(const Graph& g, std::size_t hidden, std::uint64_t seed,
                             double scale = 0.5) {
    Rng rng(seed);
    GcnModel m;
    m.num_features = g.num_features;
    m.hidden = hidden;
    m.feature_names = g.feature_names;
    m.w1 = Mat(g.num_features, hidden);
    for (double& v : m.w1.a) v = scale * rng.normal();
    m.b1.resize(hidden);
    for (double& v : m.b1) v = scale * rng.normal();
    m.w2.resize(hidden);
    for (double& v : m.w2) v = scale * rng.normal();
    m.b2 = scale * rng.normal();
    m.config.hidden = hidden;
    return m;
}

inline void write_file(const std::filesystem::path& p, const std::string& content) {
    std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    out << content;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return content;
}

// Hand-built explanation whose 7-node view is disconnected: a light path
// from the target and a heavy far clique that outranks it; node 8 bridges
// them but only enters the view at k = 9.
inline Explanation disconnected_at_7_explanation() {
    Explanation e;
    e.target = 0;
    for (std::uint32_t v = 0; v <= 8; ++v) e.computation_nodes.push_back(v);
    auto add = [&](std::uint32_t u, std::uint32_t v, double w) {
        e.masked_edges.emplace_back(u, v);
        e.edge_weights.push_back(w);
    };
    add(0, 1, 0.90);
    add(0, 2, 0.80);
    add(3, 4, 0.95);
    add(3, 5, 0.90);
    add(4, 5, 0.95);
    add(5, 6, 0.85);
    add(6, 7, 0.90);
    add(3, 7, 0.80);
    add(2, 8, 0.30);
    add(3, 8, 0.25);
    e.feature_weights = {0.9, 0.5, 0.1};
    e.feature_names = {"f_0", "f_1", "f_2"};
    e.prediction = 0.75;
    e.predicted_label = 1;
    e.loss_trace = {1.0, 0.5};
    return e;
}

// A small fixed bundle for the prompt/description golden files.
inline PromptBundle golden_bundle() {
    PromptBundle b;
    b.dataset_description =
        "Players from a professional basketball season, linked when they follow each other on "
        "social media. The model predicts whether a player earns above the league median salary.";
    b.target_id = "57";
    b.target_features = {{"f_points", 17.25}, {"f_games", 71.0}, {"f_age", 29.0}};
    b.target_edges = {"12", "31", "140"};
    b.prediction = 0.87213451;
    b.predicted_label = 1;
    b.subgraph_nodes = {
        {"57", {{"f_points", 17.25}, {"f_games", 71.0}, {"f_age", 29.0}}},
        {"12", {{"f_points", 22.5}, {"f_games", 80.0}, {"f_age", 27.0}}},
        {"31", {{"f_points", 9.125}, {"f_games", 64.0}, {"f_age", 31.0}}},
    };
    b.subgraph_edges = {{"57", "12", 0.91240001}, {"57", "31", 0.63450001}};
    b.feature_importances = {{"f_points", 0.93120001}, {"f_games", 0.77010001},
                             {"f_age", 0.41230001}};
    return b;
}

} // namespace fixtures
