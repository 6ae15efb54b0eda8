#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "graphxain/chat_client.hpp"
#include "graphxain/explainer.hpp"
#include "graphxain/graph.hpp"

namespace graphxain {

struct NodeFacts {
    std::string id;
    std::vector<std::pair<std::string, double>> features;
};

struct WeightedEdgeFact {
    std::string u;
    std::string v;
    double weight = 0.0;
};

// Everything the prompt template consumes; numeric values are rendered at
// 4 significant digits only when the prompt is built.
struct PromptBundle {
    std::string dataset_description;
    std::string target_id;
    std::vector<std::pair<std::string, double>> target_features;
    std::vector<std::string> target_edges; // neighbor external ids
    double prediction = 0.0;
    int predicted_label = 0;
    std::vector<NodeFacts> subgraph_nodes;
    std::vector<WeightedEdgeFact> subgraph_edges;
    std::vector<std::pair<std::string, double>> feature_importances;
};

// 4 significant digits, the fixed rendering used everywhere a number enters
// prompt or description text.
std::string format_value(double v);

// Embedded copy of templates/graphxain_prompt_v1.txt (a test pins equality).
const std::string& prompt_template_v1();
std::string prompt_template_v1_hash();

std::string sha256_hex(std::string_view bytes);

// Renders the versioned template; byte-deterministic for a given bundle.
std::string build_prompt(const PromptBundle& bundle);
std::string build_prompt(const PromptBundle& bundle, const std::string& template_text);

PromptBundle make_bundle(const Graph& g, const ExplanationView& view,
                         const std::string& dataset_description);

struct NarrativeResult {
    std::string text;
    std::string kind; // "narrative" | "description"
    std::string provider;
    std::string model_name;
    std::string prompt_hash;   // digest of the exact prompt bytes sent
    std::string template_hash;
    std::string created_at;    // ISO 8601 UTC
    std::size_t retry_count = 0;
    std::optional<TokenUsage> token_usage;
};

std::string narrative_result_to_json(const NarrativeResult& r);

NarrativeResult generate_narrative(const std::string& prompt, const ProviderConfig& cfg,
                                   ChatTransport transport = nullptr);

// Deterministic template text, no LLM: a prediction sentence, the top
// features with values and importances, the influential connections with
// weights. Context-free by construction; contains no causal connectives.
NarrativeResult generate_description(const ExplanationView& view, double prediction,
                                     const std::string& target_id,
                                     const std::vector<std::pair<std::string, double>>& target_features,
                                     const std::vector<std::string>& node_labels);

// Tokens that would turn a description into a narrative; descriptions are
// tested to contain none of them.
const std::vector<std::string>& causal_connective_denylist();

// Numeric tokens (fixed boundary rules) used by the hallucination guard.
std::vector<std::string> extract_numeric_tokens(const std::string& text);

struct StructureReport {
    int paragraph_count = 0;
    bool paragraphs_ok = false;     // >= 2 paragraphs
    bool mentions_target = false;
    bool mentions_feature = false;  // at least one top feature name
    bool mentions_neighbor = false; // at least one neighbor/subgraph id (vacuous if none)
    std::vector<std::string> unknown_numbers; // numeric tokens absent from the prompt
    bool hallucination_free = false;

    bool all_ok() const {
        return paragraphs_ok && mentions_target && mentions_feature && mentions_neighbor &&
               hallucination_free;
    }
};

StructureReport validate_narrative_structure(const std::string& text, const std::string& prompt,
                                             const PromptBundle& bundle);

std::string structure_report_to_json(const StructureReport& r);

// The deterministic completion the mock transport returns; exposed so tests
// can pin its behavior directly.
std::string mock_completion(const std::string& user_prompt);

} // namespace graphxain
