#include "graphxain/narrative.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>
#include <openssl/evp.h>

#include "graphxain/errors.hpp"

namespace graphxain {

std::string format_value(double v) {
    if (v == 0.0) v = 0.0; // normalize -0
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

std::string sha256_hex(std::string_view bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("sha256 digest failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 0xf]);
    }
    return out;
}

// Kept byte-identical with templates/graphxain_prompt_v1.txt; a test pins it.
const std::string& prompt_template_v1() {
    static const std::string tpl = R"TPL(You are an expert analyst who explains the predictions of graph machine learning models to non-expert readers. Write a narrative explanation: a coherent story that connects the evidence below through cause-and-effect reasoning. Use only the facts provided; do not invent numbers, names, or relationships. Address a reader with no machine learning background.

## Dataset
{{dataset_description}}

## Target node
Node {{target_id}}.
Feature values:
{{target_features}}
Connections:
{{target_edges}}

## Model prediction
{{prediction}}

## Explanatory subgraph
Nodes and their feature values:
{{subgraph_nodes}}
Weighted edges (higher weight means more influence on the prediction):
{{subgraph_edges}}

## Feature importance
{{feature_importances}}

## Output instructions
Write a single coherent story with an introduction, a body, and a conclusion. Do not use bullet lists or headings. Explain how the connections and feature values combined to produce the model's prediction, in plain language, so that the reader understands what led the model to its conclusion.
)TPL";
    return tpl;
}

std::string prompt_template_v1_hash() { return sha256_hex(prompt_template_v1()); }

namespace {

constexpr const char* kSystemMessage =
    "You are a careful assistant that turns model explanation data into faithful, "
    "reader-friendly text.";

constexpr const char* kDescriptionTemplateId = "graphxain-description-v1";

std::string render_template(const std::string& tpl,
                            const std::map<std::string, std::string>& values) {
    std::string out = tpl;
    for (const auto& [key, value] : values) {
        const std::string needle = "{{" + key + "}}";
        std::size_t pos = 0;
        while ((pos = out.find(needle, pos)) != std::string::npos) {
            out.replace(pos, needle.size(), value);
            pos += value.size();
        }
    }
    if (out.find("{{") != std::string::npos) {
        throw Error("prompt template has an unbound placeholder");
    }
    return out;
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

std::string feature_lines(const std::vector<std::pair<std::string, double>>& features) {
    if (features.empty()) return "(none)";
    std::vector<std::string> lines;
    lines.reserve(features.size());
    for (const auto& [name, value] : features) {
        lines.push_back("- " + name + ": " + format_value(value));
    }
    return join(lines, "\n");
}

std::string iso8601_utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

bool is_token_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

// Word-boundary containment; boundaries are non-alphanumeric, non-underscore.
bool contains_word(const std::string& text, const std::string& word) {
    if (word.empty()) return false;
    std::size_t pos = 0;
    while ((pos = text.find(word, pos)) != std::string::npos) {
        const bool left_ok = pos == 0 || !is_token_char(text[pos - 1]);
        const std::size_t end = pos + word.size();
        const bool right_ok = end == text.size() || !is_token_char(text[end]);
        if (left_ok && right_ok) return true;
        ++pos;
    }
    return false;
}

} // namespace

std::string build_prompt(const PromptBundle& bundle, const std::string& template_text) {
    if (bundle.dataset_description.empty()) {
        throw ValidationError("prompt bundle needs a dataset description");
    }
    std::set<std::string> subgraph_ids;
    for (const auto& n : bundle.subgraph_nodes) subgraph_ids.insert(n.id);
    for (const auto& e : bundle.subgraph_edges) {
        if (!subgraph_ids.count(e.u) || !subgraph_ids.count(e.v)) {
            throw ValidationError("subgraph edge names node '" +
                                  (subgraph_ids.count(e.u) ? e.v : e.u) +
                                  "' missing from the node-feature section");
        }
    }

    std::map<std::string, std::string> values;
    values["dataset_description"] = bundle.dataset_description;
    values["target_id"] = bundle.target_id;
    values["target_features"] = feature_lines(bundle.target_features);
    values["target_edges"] = bundle.target_edges.empty() ? "(none)" : join(bundle.target_edges, ", ");
    values["prediction"] = "The model predicts label " + std::to_string(bundle.predicted_label) +
                           " for node " + bundle.target_id + " with probability " +
                           format_value(bundle.prediction) + ".";

    std::vector<std::string> node_lines;
    for (const auto& n : bundle.subgraph_nodes) {
        std::vector<std::string> facts;
        facts.reserve(n.features.size());
        for (const auto& [name, value] : n.features) {
            facts.push_back(name + "=" + format_value(value));
        }
        node_lines.push_back("- Node " + n.id + (facts.empty() ? "" : ": " + join(facts, ", ")));
    }
    values["subgraph_nodes"] = node_lines.empty() ? "(none)" : join(node_lines, "\n");

    std::vector<std::string> edge_lines;
    for (const auto& e : bundle.subgraph_edges) {
        edge_lines.push_back("- " + e.u + " -- " + e.v + " (weight " + format_value(e.weight) + ")");
    }
    values["subgraph_edges"] = edge_lines.empty() ? "(none)" : join(edge_lines, "\n");

    std::vector<std::string> imp_lines;
    for (const auto& [name, value] : bundle.feature_importances) {
        imp_lines.push_back("- " + name + ": " + format_value(value));
    }
    values["feature_importances"] = imp_lines.empty() ? "(none)" : join(imp_lines, "\n");

    return render_template(template_text, values);
}

std::string build_prompt(const PromptBundle& bundle) {
    return build_prompt(bundle, prompt_template_v1());
}

PromptBundle make_bundle(const Graph& g, const ExplanationView& view,
                         const std::string& dataset_description) {
    PromptBundle b;
    b.dataset_description = dataset_description;
    b.target_id = g.node_ids.at(view.target);
    b.prediction = view.prediction;
    b.predicted_label = view.predicted_label;
    b.feature_importances = view.features;

    std::map<std::string, std::size_t> feature_index;
    for (std::size_t f = 0; f < g.feature_names.size(); ++f) {
        feature_index[g.feature_names[f]] = f;
    }
    // The same top-m feature columns are shown for every subgraph node,
    // the target included.
    auto facts_for = [&](std::uint32_t node) {
        std::vector<std::pair<std::string, double>> facts;
        for (const auto& [name, weight] : view.features) {
            (void)weight;
            auto it = feature_index.find(name);
            if (it == feature_index.end()) {
                throw ValidationError("view names unknown feature '" + name + "'");
            }
            facts.emplace_back(name, g.feature_at(node, it->second));
        }
        return facts;
    };
    b.target_features = facts_for(view.target);
    for (std::uint32_t nb : g.neighbors.at(view.target)) {
        b.target_edges.push_back(g.node_ids.at(nb));
    }
    for (std::uint32_t node : view.nodes) {
        b.subgraph_nodes.push_back({g.node_ids.at(node), facts_for(node)});
    }
    for (const auto& [u, v, w] : view.edges) {
        b.subgraph_edges.push_back({g.node_ids.at(u), g.node_ids.at(v), w});
    }
    return b;
}

std::string narrative_result_to_json(const NarrativeResult& r) {
    nlohmann::ordered_json doc;
    doc["text"] = r.text;
    doc["kind"] = r.kind;
    doc["provider"] = r.provider;
    doc["model_name"] = r.model_name;
    doc["prompt_hash"] = r.prompt_hash;
    doc["template_hash"] = r.template_hash;
    doc["created_at"] = r.created_at;
    doc["retry_count"] = r.retry_count;
    if (r.token_usage) {
        doc["token_usage"] = {{"prompt_tokens", r.token_usage->prompt_tokens},
                              {"completion_tokens", r.token_usage->completion_tokens}};
    } else {
        doc["token_usage"] = nullptr;
    }
    return doc.dump(2) + "\n";
}

NarrativeResult generate_narrative(const std::string& prompt, const ProviderConfig& cfg,
                                   ChatTransport transport) {
    ChatClient client(cfg, std::move(transport));
    ChatCompletion completion = client.complete(kSystemMessage, prompt);

    NarrativeResult out;
    out.text = std::move(completion.content);
    out.kind = "narrative";
    if (cfg.mock) {
        out.provider = "mock";
    } else {
        const auto scheme_end = cfg.endpoint_url.find("://");
        const auto host_begin = scheme_end == std::string::npos ? 0 : scheme_end + 3;
        out.provider = cfg.endpoint_url.substr(host_begin, cfg.endpoint_url.find('/', host_begin) -
                                                               host_begin);
    }
    out.model_name = cfg.model_name;
    out.prompt_hash = sha256_hex(prompt);
    out.template_hash = prompt_template_v1_hash();
    out.created_at = iso8601_utc_now();
    out.retry_count = completion.retry_count;
    out.token_usage = completion.usage;
    return out;
}

NarrativeResult generate_description(
    const ExplanationView& view, double prediction, const std::string& target_id,
    const std::vector<std::pair<std::string, double>>& target_features,
    const std::vector<std::string>& node_labels) {
    if (node_labels.size() != view.nodes.size()) {
        throw ValidationError("generate_description: node labels must parallel view nodes");
    }
    std::map<std::uint32_t, std::string> label_of;
    for (std::size_t i = 0; i < view.nodes.size(); ++i) label_of[view.nodes[i]] = node_labels[i];
    std::map<std::string, double> value_of(target_features.begin(), target_features.end());

    std::ostringstream text;
    text << "Prediction: the model assigns node " << target_id << " the label "
         << view.predicted_label << " with probability " << format_value(prediction) << ".\n";
    text << "Top features for node " << target_id << ":\n";
    std::size_t rank = 1;
    for (const auto& [name, weight] : view.features) {
        text << rank++ << ". " << name;
        auto it = value_of.find(name);
        if (it != value_of.end()) text << " = " << format_value(it->second);
        text << " (importance " << format_value(weight) << ")\n";
    }
    if (!view.edges.empty()) {
        text << "Influential connections:\n";
        rank = 1;
        for (const auto& [u, v, w] : view.edges) {
            text << rank++ << ". " << label_of.at(u) << " -- " << label_of.at(v) << " (weight "
                 << format_value(w) << ")\n";
        }
    }

    NarrativeResult out;
    out.text = text.str();
    out.kind = "description";
    out.provider = "template";
    out.model_name = "xaid";
    out.prompt_hash = sha256_hex(out.text); // no prompt: digest of the rendered text
    out.template_hash = sha256_hex(kDescriptionTemplateId);
    out.created_at = iso8601_utc_now();
    return out;
}

const std::vector<std::string>& causal_connective_denylist() {
    static const std::vector<std::string> list = {
        "because",      "therefore",  "thus",       "hence",      "due to",
        "as a result",  "consequently", "leading to", "leads to",   "led to",
        "causes",       "caused",     "causing",    "so that",    "which explains",
        "explains why", "driven by",
    };
    return list;
}

std::vector<std::string> extract_numeric_tokens(const std::string& text) {
    std::vector<std::string> out;
    const std::size_t n = text.size();
    auto digit = [&](std::size_t i) {
        return i < n && std::isdigit(static_cast<unsigned char>(text[i]));
    };
    std::size_t i = 0;
    while (i < n) {
        const std::size_t start = i;
        if (text[i] == '-' && digit(i + 1)) {
            // A sign glued to a previous token ("2016-2017") is a separator,
            // not a negative number; scan the digits on the next pass.
            const char prev = i > 0 ? text[i - 1] : '\0';
            if (i > 0 && (is_token_char(prev) || prev == '.')) {
                ++i;
                continue;
            }
        } else if (!digit(i)) {
            ++i;
            continue;
        }
        const char prev = start > 0 ? text[start - 1] : '\0';
        const bool left_ok = start == 0 || !(is_token_char(prev) || prev == '.');

        std::size_t j = text[i] == '-' ? i + 1 : i;
        while (digit(j)) ++j;
        if (j < n && text[j] == '.' && digit(j + 1)) {
            ++j;
            while (digit(j)) ++j;
        }
        if (j < n && (text[j] == 'e' || text[j] == 'E')) {
            std::size_t k = j + 1;
            if (k < n && (text[k] == '+' || text[k] == '-')) ++k;
            if (digit(k)) {
                while (digit(k)) ++k;
                j = k;
            }
        }
        // Right boundary: letters, digits and decimal continuations bind;
        // a sentence-ending period does not.
        bool right_ok = true;
        if (j < n) {
            const char next = text[j];
            if (is_token_char(next)) right_ok = false;
            if (next == '.' && digit(j + 1)) right_ok = false;
        }
        if (left_ok && right_ok) out.push_back(text.substr(start, j - start));
        i = j;
    }
    return out;
}

StructureReport validate_narrative_structure(const std::string& text, const std::string& prompt,
                                             const PromptBundle& bundle) {
    StructureReport r;

    // Paragraphs are blocks separated by blank lines.
    std::istringstream in(text);
    std::string line;
    bool in_paragraph = false;
    while (std::getline(in, line)) {
        const bool blank = line.find_first_not_of(" \t\r") == std::string::npos;
        if (!blank && !in_paragraph) {
            ++r.paragraph_count;
            in_paragraph = true;
        } else if (blank) {
            in_paragraph = false;
        }
    }
    r.paragraphs_ok = r.paragraph_count >= 2;

    r.mentions_target = contains_word(text, bundle.target_id);

    r.mentions_feature = false;
    for (const auto& [name, w] : bundle.feature_importances) {
        (void)w;
        if (contains_word(text, name)) {
            r.mentions_feature = true;
            break;
        }
    }

    std::set<std::string> neighbor_ids(bundle.target_edges.begin(), bundle.target_edges.end());
    for (const auto& n : bundle.subgraph_nodes) {
        if (n.id != bundle.target_id) neighbor_ids.insert(n.id);
    }
    r.mentions_neighbor = neighbor_ids.empty(); // vacuous when no neighbors
    for (const auto& id : neighbor_ids) {
        if (contains_word(text, id)) {
            r.mentions_neighbor = true;
            break;
        }
    }

    std::set<std::string> allowed;
    for (auto& tok : extract_numeric_tokens(prompt)) allowed.insert(std::move(tok));
    std::set<std::string> seen;
    for (auto& tok : extract_numeric_tokens(text)) {
        if (!allowed.count(tok) && seen.insert(tok).second) {
            r.unknown_numbers.push_back(tok);
        }
    }
    r.hallucination_free = r.unknown_numbers.empty();
    return r;
}

std::string structure_report_to_json(const StructureReport& r) {
    nlohmann::ordered_json doc;
    doc["paragraph_count"] = r.paragraph_count;
    doc["paragraphs_ok"] = r.paragraphs_ok;
    doc["mentions_target"] = r.mentions_target;
    doc["mentions_feature"] = r.mentions_feature;
    doc["mentions_neighbor"] = r.mentions_neighbor;
    doc["unknown_numbers"] = r.unknown_numbers;
    doc["hallucination_free"] = r.hallucination_free;
    return doc.dump(2) + "\n";
}

namespace {

struct PromptFacts {
    std::string target_id;
    std::string prediction_sentence;
    std::vector<std::pair<std::string, std::string>> target_values; // name, rendered value
    std::vector<std::pair<std::string, std::string>> importances;   // name, rendered weight
    struct Edge {
        std::string u, v, w;
    };
    std::vector<Edge> edges;
};

// Parses the sections of a template-v1 prompt back out; the mock provider is
// deliberately coupled to the template version it ships with.
PromptFacts parse_prompt(const std::string& prompt) {
    PromptFacts facts;
    std::istringstream in(prompt);
    std::string line;
    enum class Section { none, target, prediction, subgraph_edges, importance } section =
        Section::none;
    bool in_target_features = false;
    while (std::getline(in, line)) {
        if (line.rfind("## ", 0) == 0) {
            if (line == "## Target node") section = Section::target;
            else if (line == "## Model prediction") section = Section::prediction;
            else if (line == "## Explanatory subgraph") section = Section::subgraph_edges;
            else if (line == "## Feature importance") section = Section::importance;
            else section = Section::none;
            in_target_features = false;
            continue;
        }
        switch (section) {
        case Section::target:
            if (line.rfind("Node ", 0) == 0 && facts.target_id.empty()) {
                facts.target_id = line.substr(5);
                if (!facts.target_id.empty() && facts.target_id.back() == '.') {
                    facts.target_id.pop_back();
                }
            } else if (line == "Feature values:") {
                in_target_features = true;
            } else if (line == "Connections:") {
                in_target_features = false;
            } else if (in_target_features && line.rfind("- ", 0) == 0) {
                const auto sep = line.rfind(": ");
                if (sep != std::string::npos) {
                    facts.target_values.emplace_back(line.substr(2, sep - 2),
                                                     line.substr(sep + 2));
                }
            }
            break;
        case Section::prediction:
            if (!line.empty() && facts.prediction_sentence.empty()) {
                facts.prediction_sentence = line;
            }
            break;
        case Section::subgraph_edges:
            if (line.rfind("- ", 0) == 0 && line.find(" -- ") != std::string::npos) {
                const auto dash = line.find(" -- ");
                const auto wpos = line.find(" (weight ", dash);
                if (wpos != std::string::npos && line.back() == ')') {
                    facts.edges.push_back({line.substr(2, dash - 2),
                                           line.substr(dash + 4, wpos - dash - 4),
                                           line.substr(wpos + 9, line.size() - wpos - 10)});
                }
            }
            break;
        case Section::importance:
            if (line.rfind("- ", 0) == 0) {
                const auto sep = line.rfind(": ");
                if (sep != std::string::npos) {
                    facts.importances.emplace_back(line.substr(2, sep - 2), line.substr(sep + 2));
                }
            }
            break;
        case Section::none:
            break;
        }
    }
    return facts;
}

} // namespace

std::string mock_completion(const std::string& user_prompt) {
    const PromptFacts facts = parse_prompt(user_prompt);
    const std::string digest = sha256_hex(user_prompt);
    static const char* openers[] = {"Consider", "Picture", "Meet"};
    const std::string opener = openers[static_cast<unsigned char>(digest[0]) % 3];
    const std::string& id = facts.target_id;

    std::ostringstream p1;
    p1 << opener << " node " << id << ", and the story behind the model's decision. ";
    if (!facts.prediction_sentence.empty()) p1 << facts.prediction_sentence << ' ';
    p1 << "The evidence below retells how that conclusion came together.";

    std::ostringstream p2;
    p2 << "The feature record does most of the early work here.";
    if (!facts.importances.empty()) {
        const auto& [f1, w1] = facts.importances.front();
        p2 << " The feature " << f1 << " stands out with an importance of " << w1;
        for (const auto& [name, value] : facts.target_values) {
            if (name == f1) {
                p2 << ", and for node " << id << " it sits at " << value;
                break;
            }
        }
        p2 << '.';
        if (facts.importances.size() > 1) {
            const auto& [f2, w2] = facts.importances[1];
            p2 << " Close behind, " << f2 << " carries an importance of " << w2
               << " and pushes in the same direction.";
        }
    }
    p2 << " Because the model leans on these signals, they set the stage for the final call.";

    std::ostringstream p3;
    if (!facts.edges.empty()) {
        const auto& e = facts.edges.front();
        p3 << "The graph then adds its voice. The connection between " << e.u << " and " << e.v
           << " carries a weight of " << e.w << ", so the company node " << id
           << " keeps also shapes the outcome. Taken together, the feature profile and these "
              "ties are what led the model to its prediction for node "
           << id << '.';
    } else {
        p3 << "No single connection dominates this explanation, so the outcome rests on node "
           << id
           << "'s own attributes. Taken together, the feature profile is what led the model to "
              "its prediction for node "
           << id << '.';
    }

    return p1.str() + "\n\n" + p2.str() + "\n\n" + p3.str() + "\n";
}

} // namespace graphxain
