#include "graphxain/graph.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "graphxain/errors.hpp"
#include "graphxain/rng.hpp"

namespace graphxain {

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ProviderError*>(&e)) return exit_code::provider;
    if (dynamic_cast<const NumericError*>(&e)) return exit_code::numeric;
    if (dynamic_cast<const IoError*>(&e)) return exit_code::io;
    if (dynamic_cast<const ParseError*>(&e)) return exit_code::validation;
    if (dynamic_cast<const ValidationError*>(&e)) return exit_code::validation;
    return 1;
}

Mat Graph::feature_matrix() const {
    Mat x(num_nodes, num_features);
    x.a = features;
    return x;
}

std::uint32_t Graph::index_of(const std::string& external_id) const {
    for (std::size_t i = 0; i < node_ids.size(); ++i) {
        if (node_ids[i] == external_id) return static_cast<std::uint32_t>(i);
    }
    throw ValidationError("unknown node id: " + external_id);
}

namespace {

// Minimal CSV: comma-separated, double quotes escape commas, "" inside a
// quoted field is a literal quote. Enough for the flat ingest contract.
std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_no) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(field);
            field.clear();
        } else if (c != '\r') {
            field.push_back(c);
        }
    }
    if (quoted) {
        throw ParseError("line " + std::to_string(line_no) + ": unterminated quote");
    }
    out.push_back(field);
    return out;
}

double parse_double(const std::string& s, std::size_t line_no) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(line_no) + ": not a number: '" + s + "'");
    }
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

bool is_blank(const std::string& s) {
    return s.find_first_not_of(" \t\r") == std::string::npos;
}

} // namespace

Graph build_graph(std::vector<RawNode> nodes,
                  std::vector<std::string> feature_names,
                  const std::vector<std::pair<std::string, std::string>>& edge_ids) {
    std::unordered_map<std::string, std::uint32_t> index;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].label != 0 && nodes[i].label != 1) {
            throw ValidationError("node '" + nodes[i].id + "': label must be 0 or 1");
        }
        if (nodes[i].features.size() != feature_names.size()) {
            throw ValidationError("node '" + nodes[i].id + "': expected " +
                                  std::to_string(feature_names.size()) + " features, got " +
                                  std::to_string(nodes[i].features.size()));
        }
        if (!index.emplace(nodes[i].id, static_cast<std::uint32_t>(i)).second) {
            throw ValidationError("duplicate node id: " + nodes[i].id);
        }
    }

    // Symmetrize, canonicalize (u < v), drop self-loops, dedup.
    std::set<std::pair<std::uint32_t, std::uint32_t>> canon;
    for (const auto& [src, dst] : edge_ids) {
        auto su = index.find(src);
        auto sv = index.find(dst);
        if (su == index.end()) throw ValidationError("edge references unknown id: " + src);
        if (sv == index.end()) throw ValidationError("edge references unknown id: " + dst);
        std::uint32_t u = su->second, v = sv->second;
        if (u == v) continue;
        canon.emplace(std::min(u, v), std::max(u, v));
    }

    // Remove isolated nodes, reindex densely in original order.
    std::vector<std::uint32_t> degree(nodes.size(), 0);
    for (const auto& [u, v] : canon) {
        ++degree[u];
        ++degree[v];
    }
    std::vector<std::uint32_t> remap(nodes.size(), UINT32_MAX);
    std::uint32_t next = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (degree[i] > 0) remap[i] = next++;
    }
    if (next == 0) throw ValidationError("no nodes survive preprocessing (empty graph)");

    Graph g;
    g.num_nodes = next;
    g.num_features = feature_names.size();
    g.feature_names = std::move(feature_names);
    g.features.reserve(g.num_nodes * g.num_features);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (remap[i] == UINT32_MAX) continue;
        g.node_ids.push_back(std::move(nodes[i].id));
        g.labels.push_back(nodes[i].label);
        g.features.insert(g.features.end(), nodes[i].features.begin(), nodes[i].features.end());
    }
    g.edges.reserve(canon.size());
    for (const auto& [u, v] : canon) {
        g.edges.emplace_back(remap[u], remap[v]);
    }
    std::sort(g.edges.begin(), g.edges.end());

    g.neighbors.assign(g.num_nodes, {});
    for (const auto& [u, v] : g.edges) {
        g.neighbors[u].push_back(v);
        g.neighbors[v].push_back(u);
    }
    for (auto& adj : g.neighbors) std::sort(adj.begin(), adj.end());
    return g;
}

Graph ingest(const std::filesystem::path& nodes_csv, const std::filesystem::path& edges_csv) {
    auto node_lines = read_lines(nodes_csv);
    if (node_lines.empty()) throw ParseError("nodes file is empty: " + nodes_csv.string());
    auto header = split_csv_line(node_lines[0], 1);
    if (header.size() < 2 || header[0] != "id" || header[1] != "label") {
        throw ParseError("nodes header must start with 'id,label', got line 1 of " + nodes_csv.string());
    }
    std::vector<std::string> feature_names(header.begin() + 2, header.end());

    std::vector<RawNode> nodes;
    for (std::size_t i = 1; i < node_lines.size(); ++i) {
        if (is_blank(node_lines[i])) continue;
        auto fields = split_csv_line(node_lines[i], i + 1);
        if (fields.size() != header.size()) {
            throw ParseError("line " + std::to_string(i + 1) + ": expected " +
                             std::to_string(header.size()) + " fields, got " +
                             std::to_string(fields.size()));
        }
        RawNode n;
        n.id = fields[0];
        double label = parse_double(fields[1], i + 1);
        if (label != 0.0 && label != 1.0) {
            throw ValidationError("line " + std::to_string(i + 1) + ": label must be 0 or 1");
        }
        n.label = static_cast<int>(label);
        n.features.reserve(feature_names.size());
        for (std::size_t f = 2; f < fields.size(); ++f) {
            n.features.push_back(parse_double(fields[f], i + 1));
        }
        nodes.push_back(std::move(n));
    }

    auto edge_lines = read_lines(edges_csv);
    if (edge_lines.empty()) throw ParseError("edges file is empty: " + edges_csv.string());
    auto edge_header = split_csv_line(edge_lines[0], 1);
    if (edge_header.size() != 2 || edge_header[0] != "src" || edge_header[1] != "dst") {
        throw ParseError("edges header must be 'src,dst' in " + edges_csv.string());
    }
    std::vector<std::pair<std::string, std::string>> edge_ids;
    for (std::size_t i = 1; i < edge_lines.size(); ++i) {
        if (is_blank(edge_lines[i])) continue;
        auto fields = split_csv_line(edge_lines[i], i + 1);
        if (fields.size() != 2) {
            throw ParseError("line " + std::to_string(i + 1) + ": expected 2 fields, got " +
                             std::to_string(fields.size()));
        }
        edge_ids.emplace_back(fields[0], fields[1]);
    }

    return build_graph(std::move(nodes), std::move(feature_names), edge_ids);
}

namespace {

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

// Shortest decimal form that parses back to the same double.
std::string double_repr(double v) {
    nlohmann::json j = v;
    return j.dump();
}

} // namespace

void write_canonical_csv(const Graph& g,
                         const std::filesystem::path& nodes_csv,
                         const std::filesystem::path& edges_csv) {
    std::ofstream nf(nodes_csv, std::ios::binary);
    if (!nf) throw IoError("cannot write file: " + nodes_csv.string());
    nf << "id,label";
    for (const auto& name : g.feature_names) nf << ',' << csv_escape(name);
    nf << '\n';
    for (std::size_t i = 0; i < g.num_nodes; ++i) {
        nf << csv_escape(g.node_ids[i]) << ',' << g.labels[i];
        for (std::size_t f = 0; f < g.num_features; ++f) {
            nf << ',' << double_repr(g.feature_at(i, f));
        }
        nf << '\n';
    }

    std::ofstream ef(edges_csv, std::ios::binary);
    if (!ef) throw IoError("cannot write file: " + edges_csv.string());
    ef << "src,dst\n";
    for (const auto& [u, v] : g.edges) {
        ef << csv_escape(g.node_ids[u]) << ',' << csv_escape(g.node_ids[v]) << '\n';
    }
}

std::string to_canonical_json(const Graph& g) {
    nlohmann::ordered_json doc;
    doc["nodes"] = nlohmann::json::array();
    for (std::size_t i = 0; i < g.num_nodes; ++i) {
        nlohmann::ordered_json n;
        n["id"] = g.node_ids[i];
        n["features"] = std::vector<double>(g.features.begin() + i * g.num_features,
                                            g.features.begin() + (i + 1) * g.num_features);
        doc["nodes"].push_back(std::move(n));
    }
    doc["feature_names"] = g.feature_names;
    doc["edges"] = nlohmann::json::array();
    for (const auto& [u, v] : g.edges) {
        doc["edges"].push_back({u, v});
    }
    doc["labels"] = g.labels;
    return doc.dump(2) + "\n";
}

Graph graph_from_canonical_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("graph json: ") + e.what());
    }
    std::vector<RawNode> nodes;
    std::vector<std::string> names = doc.at("feature_names").get<std::vector<std::string>>();
    auto labels = doc.at("labels").get<std::vector<int>>();
    std::size_t i = 0;
    for (const auto& n : doc.at("nodes")) {
        RawNode raw;
        raw.id = n.at("id").get<std::string>();
        raw.features = n.at("features").get<std::vector<double>>();
        raw.label = labels.at(i++);
        nodes.push_back(std::move(raw));
    }
    std::vector<std::pair<std::string, std::string>> edge_ids;
    for (const auto& e : doc.at("edges")) {
        edge_ids.emplace_back(nodes.at(e.at(0).get<std::size_t>()).id,
                              nodes.at(e.at(1).get<std::size_t>()).id);
    }
    return build_graph(std::move(nodes), std::move(names), edge_ids);
}

std::string id_map_json(const Graph& g) {
    nlohmann::ordered_json doc;
    doc["index_to_id"] = g.node_ids;
    nlohmann::ordered_json rev;
    for (std::size_t i = 0; i < g.node_ids.size(); ++i) {
        rev[g.node_ids[i]] = i;
    }
    doc["id_to_index"] = std::move(rev);
    return doc.dump(2) + "\n";
}

SplitMasks split(const Graph& g, std::uint64_t seed) {
    if (g.num_nodes < 5) {
        throw ValidationError("split requires at least 5 nodes, got " +
                              std::to_string(g.num_nodes));
    }
    std::vector<std::uint32_t> perm(g.num_nodes);
    for (std::uint32_t i = 0; i < g.num_nodes; ++i) perm[i] = i;
    Rng rng(seed);
    rng.shuffle(perm);

    const std::size_t n_val = g.num_nodes / 5;
    const std::size_t n_test = g.num_nodes / 5;
    const std::size_t n_train = g.num_nodes - n_val - n_test; // remainder to train

    SplitMasks m;
    m.seed = seed;
    m.train.assign(perm.begin(), perm.begin() + n_train);
    m.val.assign(perm.begin() + n_train, perm.begin() + n_train + n_val);
    m.test.assign(perm.begin() + n_train + n_val, perm.end());
    std::sort(m.train.begin(), m.train.end());
    std::sort(m.val.begin(), m.val.end());
    std::sort(m.test.begin(), m.test.end());
    return m;
}

double NormalizedAdjacency::at(std::uint32_t i, std::uint32_t j) const {
    auto begin = col.begin() + static_cast<std::ptrdiff_t>(row_ptr[i]);
    auto end = col.begin() + static_cast<std::ptrdiff_t>(row_ptr[i + 1]);
    auto it = std::lower_bound(begin, end, j);
    if (it == end || *it != j) return 0.0;
    return val[static_cast<std::size_t>(it - col.begin())];
}

bool NormalizedAdjacency::has(std::uint32_t i, std::uint32_t j) const {
    auto begin = col.begin() + static_cast<std::ptrdiff_t>(row_ptr[i]);
    auto end = col.begin() + static_cast<std::ptrdiff_t>(row_ptr[i + 1]);
    return std::binary_search(begin, end, j);
}

NormalizedAdjacency normalize(const Graph& g) {
    const std::size_t n = g.num_nodes;
    std::vector<double> dtilde(n);
    for (std::size_t i = 0; i < n; ++i) {
        dtilde[i] = static_cast<double>(g.neighbors[i].size()) + 1.0; // self-loop
    }

    NormalizedAdjacency adj;
    adj.n = n;
    adj.row_ptr.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
        adj.row_ptr[i + 1] = adj.row_ptr[i] + g.neighbors[i].size() + 1;
    }
    adj.col.resize(adj.row_ptr[n]);
    adj.val.resize(adj.row_ptr[n]);
    for (std::uint32_t i = 0; i < n; ++i) {
        std::size_t pos = adj.row_ptr[i];
        bool self_done = false;
        auto put_self = [&] {
            adj.col[pos] = i;
            adj.val[pos] = 1.0 / dtilde[i];
            ++pos;
            self_done = true;
        };
        for (std::uint32_t j : g.neighbors[i]) {
            if (!self_done && j > i) put_self();
            adj.col[pos] = j;
            adj.val[pos] = 1.0 / std::sqrt(dtilde[i] * dtilde[j]);
            ++pos;
        }
        if (!self_done) put_self();
    }
    return adj;
}

std::vector<std::uint32_t> khop_neighborhood(const Graph& g, std::uint32_t node, unsigned k) {
    if (node >= g.num_nodes) {
        throw ValidationError("node index out of range: " + std::to_string(node));
    }
    std::vector<std::uint32_t> order{node};
    std::vector<bool> seen(g.num_nodes, false);
    seen[node] = true;
    std::size_t frontier_begin = 0;
    for (unsigned depth = 0; depth < k; ++depth) {
        const std::size_t frontier_end = order.size();
        for (std::size_t i = frontier_begin; i < frontier_end; ++i) {
            for (std::uint32_t nb : g.neighbors[order[i]]) {
                if (!seen[nb]) {
                    seen[nb] = true;
                    order.push_back(nb);
                }
            }
        }
        if (order.size() == frontier_end) break;
        frontier_begin = frontier_end;
    }
    return order;
}

} // namespace graphxain
