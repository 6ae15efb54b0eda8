#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "graphxain/gcn.hpp"
#include "graphxain/graph.hpp"

namespace graphxain {

struct ExplainerConfig {
    std::size_t epochs = 200;
    double learning_rate = 0.01;
    double size_weight_edge = 0.005;      // sum of edge mask values
    double entropy_weight_edge = 1.0;     // mean edge mask entropy
    double size_weight_feature = 1.0;     // mean of feature mask values
    double entropy_weight_feature = 0.1;  // mean feature mask entropy
    std::uint64_t seed = 42;

    void validate() const;
};

// Mask logits are optimized over the target's 2-hop computation subgraph:
// its nodes plus every graph edge with both endpoints inside it.
struct MaskDomain {
    std::uint32_t target = 0;
    std::vector<std::uint32_t> computation_nodes;              // BFS order, target first
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges; // canonical u < v, sorted
};

MaskDomain mask_domain(const Graph& g, std::uint32_t target);

struct Explanation {
    std::uint32_t target = 0;
    std::vector<std::uint32_t> computation_nodes;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> masked_edges;
    std::vector<double> edge_weights;      // sigmoid of final logits, parallel to masked_edges
    std::vector<double> feature_weights;   // length num_features
    std::vector<std::string> feature_names;
    double prediction = 0.0;               // unmasked model output, recorded before optimization
    int predicted_label = 0;
    std::vector<double> loss_trace;        // loss at the parameters entering each epoch
    double ce_initial = 0.0;
    double ce_final = 0.0;
};

// How incident edge weights aggregate into a node importance for truncation.
enum class NodeAggregation { sum, max };

struct ExplanationView {
    std::uint32_t target = 0;
    double prediction = 0.0;
    int predicted_label = 0;
    std::vector<std::uint32_t> nodes; // target first, then by descending importance
    std::vector<std::tuple<std::uint32_t, std::uint32_t, double>> edges; // induced, u < v, sorted
    std::vector<std::pair<std::string, double>> features; // top-m, descending weight
    bool connected = false;
    std::size_t k_used = 0;
};

// Masked forward value at the target: adjacency entries for domain edges are
// scaled by sigmoid(edge logit) symmetrically, self-loops stay unmasked, and
// feature columns are scaled by sigmoid(feature logit) for every node.
double masked_forward(const GcnModel& model, const Graph& g, const NormalizedAdjacency& adj,
                      const MaskDomain& domain, std::span<const double> edge_logits,
                      std::span<const double> feature_logits);
double masked_forward(const GcnModel& model, const Graph& g, std::uint32_t target,
                      std::span<const double> edge_logits,
                      std::span<const double> feature_logits);

// Target logit plus its analytic derivatives with respect to every mask
// logit; this is the differentiable core the explainer optimizes.
struct MaskedTargetEval {
    double logit = 0.0;
    double probability = 0.0;
    std::vector<double> d_logit_d_edge;
    std::vector<double> d_logit_d_feature;
};

MaskedTargetEval masked_target_eval(const GcnModel& model, const Graph& g,
                                    const NormalizedAdjacency& adj, const MaskDomain& domain,
                                    std::span<const double> edge_logits,
                                    std::span<const double> feature_logits);

// Cross-entropy of the masked prediction against the model's own predicted
// label, plus the size and entropy regularizers (edge size is a sum, feature
// size a mean, matching the reference defaults the config mirrors).
double explainer_loss(double masked_probability, int predicted_label,
                      std::span<const double> edge_logits,
                      std::span<const double> feature_logits,
                      const ExplainerConfig& cfg);

Explanation explain(const GcnModel& model, const Graph& g, const NormalizedAdjacency& adj,
                    std::uint32_t target, const ExplainerConfig& cfg);
Explanation explain(const GcnModel& model, const Graph& g, std::uint32_t target,
                    const ExplainerConfig& cfg);

ExplanationView truncate(const Explanation& expl, std::size_t k, std::size_t m,
                         NodeAggregation aggregation = NodeAggregation::sum);

// Smallest k in [k_start, k_max] whose truncated view is connected; falls back
// to the k_max view (connected = false) when none is.
ExplanationView expand_to_connected(const Explanation& expl, std::size_t k_start,
                                    std::size_t k_max, std::size_t m,
                                    NodeAggregation aggregation = NodeAggregation::sum);

std::string explanation_to_json(const Explanation& expl);
Explanation explanation_from_json(const std::string& text);

std::string view_to_json(const ExplanationView& view, const std::vector<std::string>& node_labels);

struct LoadedView {
    ExplanationView view;
    std::vector<std::string> node_labels; // external ids parallel to view.nodes
};
LoadedView view_from_json(const std::string& text);

} // namespace graphxain
