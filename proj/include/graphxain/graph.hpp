#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "graphxain/dense.hpp"

namespace graphxain {

// Immutable node-attributed undirected graph after preprocessing:
// edges canonical (u < v), deduplicated, no self-loops, no isolated nodes,
// node indices dense. `node_ids` maps dense index -> external id.
struct Graph {
    std::size_t num_nodes = 0;
    std::size_t num_features = 0;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges; // sorted, u < v
    std::vector<double> features;                               // num_nodes x num_features, row-major
    std::vector<std::string> feature_names;
    std::vector<int> labels;                                    // {0, 1}
    std::vector<std::string> node_ids;
    std::vector<std::vector<std::uint32_t>> neighbors;          // sorted adjacency lists

    double feature_at(std::size_t node, std::size_t f) const {
        return features[node * num_features + f];
    }

    Mat feature_matrix() const;

    // Dense index for an external id; throws ValidationError if unknown.
    std::uint32_t index_of(const std::string& external_id) const;
};

struct RawNode {
    std::string id;
    int label = 0;
    std::vector<double> features;
};

// Shared preprocessing behind ingest() and the synthetic fixtures:
// symmetrize, drop self-loops, dedup, remove isolated nodes, reindex densely.
Graph build_graph(std::vector<RawNode> nodes,
                  std::vector<std::string> feature_names,
                  const std::vector<std::pair<std::string, std::string>>& edge_ids);

// nodes CSV: header `id,label,<feature columns...>`; edges CSV: header `src,dst`.
Graph ingest(const std::filesystem::path& nodes_csv, const std::filesystem::path& edges_csv);

// Writes the graph back in the exact ingest format; ingest(write(g)) == g.
void write_canonical_csv(const Graph& g,
                         const std::filesystem::path& nodes_csv,
                         const std::filesystem::path& edges_csv);

// Byte-stable canonical JSON document {edges, feature_names, labels, nodes}.
std::string to_canonical_json(const Graph& g);
Graph graph_from_canonical_json(const std::string& text);

// index -> external id sidecar, written next to pipeline artifacts.
std::string id_map_json(const Graph& g);

// Disjoint, exhaustive 60/20/20 node split; remainder goes to train.
struct SplitMasks {
    std::vector<std::uint32_t> train;
    std::vector<std::uint32_t> val;
    std::vector<std::uint32_t> test;
    std::uint64_t seed = 0;
};

SplitMasks split(const Graph& g, std::uint64_t seed);

// CSR of the symmetric normalized operator D~^{-1/2} (A + I) D~^{-1/2},
// where D~ counts the self-loop. Column indices sorted within each row.
struct NormalizedAdjacency {
    std::size_t n = 0;
    std::vector<std::size_t> row_ptr;
    std::vector<std::uint32_t> col;
    std::vector<double> val;

    // Value at (i, j), 0 if not stored; binary search over the row.
    double at(std::uint32_t i, std::uint32_t j) const;
    bool has(std::uint32_t i, std::uint32_t j) const;
};

NormalizedAdjacency normalize(const Graph& g);

// Nodes within shortest-path distance <= k of `node`, in BFS discovery order
// (neighbors visited in ascending id order); starts with `node` itself.
std::vector<std::uint32_t> khop_neighborhood(const Graph& g, std::uint32_t node, unsigned k);

} // namespace graphxain
