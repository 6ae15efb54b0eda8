#include "graphxain/explainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include <json.hpp>

#include "graphxain/errors.hpp"
#include "graphxain/rng.hpp"

namespace graphxain {

namespace {

constexpr double kLogitClamp = 10.0;
constexpr std::size_t kUnmasked = static_cast<std::size_t>(-1);

// CSR position -> index into domain.edges, or kUnmasked (self-loops and
// entries outside the computation subgraph).
struct IndexedDomain {
    const MaskDomain* domain = nullptr;
    std::vector<std::size_t> csr_mask;
};

IndexedDomain index_domain(const NormalizedAdjacency& adj, const MaskDomain& domain) {
    IndexedDomain idx;
    idx.domain = &domain;
    idx.csr_mask.assign(adj.col.size(), kUnmasked);
    auto position = [&](std::uint32_t i, std::uint32_t j) {
        auto begin = adj.col.begin() + static_cast<std::ptrdiff_t>(adj.row_ptr[i]);
        auto end = adj.col.begin() + static_cast<std::ptrdiff_t>(adj.row_ptr[i + 1]);
        auto it = std::lower_bound(begin, end, j);
        if (it == end || *it != j) {
            throw ValidationError("edge logit for a non-existent edge (" + std::to_string(i) +
                                  ", " + std::to_string(j) + ")");
        }
        return static_cast<std::size_t>(it - adj.col.begin());
    };
    for (std::size_t k = 0; k < domain.edges.size(); ++k) {
        const auto [u, v] = domain.edges[k];
        if (u >= adj.n || v >= adj.n || u == v) {
            throw ValidationError("invalid masked edge (" + std::to_string(u) + ", " +
                                  std::to_string(v) + ")");
        }
        idx.csr_mask[position(u, v)] = k;
        idx.csr_mask[position(v, u)] = k;
    }
    return idx;
}

struct MaskedEval {
    double logit = 0.0;
    std::vector<double> d_edge;    // d logit / d edge logit (chain through sigmoid included)
    std::vector<double> d_feature;
};

MaskedEval masked_eval(const GcnModel& model, const NormalizedAdjacency& adj, const Mat& x,
                       const IndexedDomain& idx, std::span<const double> edge_logits,
                       std::span<const double> feature_logits, bool with_grad) {
    const MaskDomain& domain = *idx.domain;
    if (edge_logits.size() != domain.edges.size()) {
        throw ValidationError("edge logits must match the masked edge set");
    }
    if (feature_logits.size() != model.num_features) {
        throw ValidationError("feature logits must match the feature count");
    }
    const std::size_t n = adj.n;
    const std::size_t h = model.hidden;
    const std::size_t f = model.num_features;
    const std::uint32_t t = domain.target;

    std::vector<double> edge_scale(edge_logits.size());
    for (std::size_t k = 0; k < edge_logits.size(); ++k) edge_scale[k] = sigmoid(edge_logits[k]);
    std::vector<double> feat_scale(f);
    for (std::size_t c = 0; c < f; ++c) feat_scale[c] = sigmoid(feature_logits[c]);

    std::vector<double> aval(adj.val.size());
    for (std::size_t p = 0; p < aval.size(); ++p) {
        const std::size_t k = idx.csr_mask[p];
        aval[p] = k == kUnmasked ? adj.val[p] : adj.val[p] * edge_scale[k];
    }

    Mat xm(n, f);
    for (std::size_t i = 0; i < n; ++i) {
        const double* xi = x.row(i);
        double* mi = xm.row(i);
        for (std::size_t c = 0; c < f; ++c) mi[c] = xi[c] * feat_scale[c];
    }

    // xw = X' W1, s1 = A' xw + b1, h1 = relu(s1), z2 = h1 w2,
    // logit = (A' z2)[target] + b2
    Mat xw(n, h);
    for (std::size_t i = 0; i < n; ++i) {
        const double* mi = xm.row(i);
        double* wi = xw.row(i);
        for (std::size_t c = 0; c < f; ++c) {
            const double v = mi[c];
            if (v == 0.0) continue;
            const double* w1c = model.w1.row(c);
            for (std::size_t j = 0; j < h; ++j) wi[j] += v * w1c[j];
        }
    }
    Mat s1(n, h);
    for (std::size_t i = 0; i < n; ++i) {
        double* si = s1.row(i);
        for (std::size_t p = adj.row_ptr[i]; p < adj.row_ptr[i + 1]; ++p) {
            const double a = aval[p];
            const double* xj = xw.row(adj.col[p]);
            for (std::size_t j = 0; j < h; ++j) si[j] += a * xj[j];
        }
        for (std::size_t j = 0; j < h; ++j) si[j] += model.b1[j];
    }
    Mat h1 = s1;
    for (double& v : h1.a) v = relu(v);
    std::vector<double> z2(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* hi = h1.row(i);
        double acc = 0.0;
        for (std::size_t j = 0; j < h; ++j) acc += hi[j] * model.w2[j];
        z2[i] = acc;
    }
    MaskedEval out;
    out.logit = model.b2;
    for (std::size_t p = adj.row_ptr[t]; p < adj.row_ptr[t + 1]; ++p) {
        out.logit += aval[p] * z2[adj.col[p]];
    }
    if (!with_grad) return out;

    // Backward pass for d logit; A' is symmetric so transposes fold away.
    std::vector<double> dz2(n, 0.0);
    for (std::size_t p = adj.row_ptr[t]; p < adj.row_ptr[t + 1]; ++p) {
        dz2[adj.col[p]] += aval[p];
    }
    Mat ds1(n, h);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = dz2[i];
        if (d == 0.0) continue;
        double* di = ds1.row(i);
        const double* si = s1.row(i);
        for (std::size_t j = 0; j < h; ++j) di[j] = d * model.w2[j] * relu_grad(si[j]);
    }
    Mat dxw(n, h);
    for (std::size_t i = 0; i < n; ++i) {
        const double* di = ds1.row(i);
        bool zero_row = true;
        for (std::size_t j = 0; j < h; ++j) {
            if (di[j] != 0.0) {
                zero_row = false;
                break;
            }
        }
        if (zero_row) continue;
        for (std::size_t p = adj.row_ptr[i]; p < adj.row_ptr[i + 1]; ++p) {
            const double a = aval[p];
            double* dj = dxw.row(adj.col[p]);
            for (std::size_t j = 0; j < h; ++j) dj[j] += a * di[j];
        }
    }

    // Accumulate d logit / d A'[i][j] into the shared edge masks.
    std::vector<double> dmask(edge_logits.size(), 0.0);
    for (std::uint32_t i = 0; i < n; ++i) {
        const double* di = ds1.row(i);
        bool i_active = false;
        for (std::size_t j = 0; j < h; ++j) {
            if (di[j] != 0.0) {
                i_active = true;
                break;
            }
        }
        if (!i_active && i != t) continue;
        for (std::size_t p = adj.row_ptr[i]; p < adj.row_ptr[i + 1]; ++p) {
            const std::size_t k = idx.csr_mask[p];
            if (k == kUnmasked) continue;
            double da = 0.0;
            if (i_active) {
                const double* xj = xw.row(adj.col[p]);
                for (std::size_t j = 0; j < h; ++j) da += di[j] * xj[j];
            }
            if (i == t) da += z2[adj.col[p]];
            dmask[k] += adj.val[p] * da;
        }
    }
    out.d_edge.resize(edge_logits.size());
    for (std::size_t k = 0; k < dmask.size(); ++k) {
        out.d_edge[k] = dmask[k] * edge_scale[k] * (1.0 - edge_scale[k]);
    }

    // dX' = dxw W1^T, then fold the column scaling back onto feature logits.
    out.d_feature.assign(f, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* di = dxw.row(i);
        bool zero_row = true;
        for (std::size_t j = 0; j < h; ++j) {
            if (di[j] != 0.0) {
                zero_row = false;
                break;
            }
        }
        if (zero_row) continue;
        const double* xi = x.row(i);
        for (std::size_t c = 0; c < f; ++c) {
            const double* w1c = model.w1.row(c);
            double dxc = 0.0;
            for (std::size_t j = 0; j < h; ++j) dxc += di[j] * w1c[j];
            out.d_feature[c] += dxc * xi[c];
        }
    }
    for (std::size_t c = 0; c < f; ++c) {
        out.d_feature[c] *= feat_scale[c] * (1.0 - feat_scale[c]);
    }
    return out;
}

double ce_from_probability(double p, int label) {
    return label == 1 ? -std::log(p) : -std::log(1.0 - p);
}

} // namespace

void ExplainerConfig::validate() const {
    if (epochs < 1) throw ValidationError("explainer epochs must be >= 1");
    if (learning_rate <= 0.0) throw ValidationError("explainer learning_rate must be > 0");
    if (size_weight_edge < 0.0 || entropy_weight_edge < 0.0 || size_weight_feature < 0.0 ||
        entropy_weight_feature < 0.0) {
        throw ValidationError("explainer regularizer weights must be >= 0");
    }
}

MaskDomain mask_domain(const Graph& g, std::uint32_t target) {
    MaskDomain d;
    d.target = target;
    d.computation_nodes = khop_neighborhood(g, target, 2);
    std::vector<bool> in(g.num_nodes, false);
    for (std::uint32_t v : d.computation_nodes) in[v] = true;
    for (const auto& [u, v] : g.edges) {
        if (in[u] && in[v]) d.edges.emplace_back(u, v);
    }
    return d;
}

double masked_forward(const GcnModel& model, const Graph& g, const NormalizedAdjacency& adj,
                      const MaskDomain& domain, std::span<const double> edge_logits,
                      std::span<const double> feature_logits) {
    Mat x = model.input_features(g);
    IndexedDomain idx = index_domain(adj, domain);
    return sigmoid(masked_eval(model, adj, x, idx, edge_logits, feature_logits, false).logit);
}

double masked_forward(const GcnModel& model, const Graph& g, std::uint32_t target,
                      std::span<const double> edge_logits,
                      std::span<const double> feature_logits) {
    NormalizedAdjacency adj = normalize(g);
    return masked_forward(model, g, adj, mask_domain(g, target), edge_logits, feature_logits);
}

MaskedTargetEval masked_target_eval(const GcnModel& model, const Graph& g,
                                    const NormalizedAdjacency& adj, const MaskDomain& domain,
                                    std::span<const double> edge_logits,
                                    std::span<const double> feature_logits) {
    Mat x = model.input_features(g);
    IndexedDomain idx = index_domain(adj, domain);
    MaskedEval eval = masked_eval(model, adj, x, idx, edge_logits, feature_logits, true);
    MaskedTargetEval out;
    out.logit = eval.logit;
    out.probability = sigmoid(eval.logit);
    out.d_logit_d_edge = std::move(eval.d_edge);
    out.d_logit_d_feature = std::move(eval.d_feature);
    return out;
}

double explainer_loss(double masked_probability, int predicted_label,
                      std::span<const double> edge_logits,
                      std::span<const double> feature_logits, const ExplainerConfig& cfg) {
    if (predicted_label != 0 && predicted_label != 1) {
        throw ValidationError("predicted_label must be 0 or 1");
    }
    double loss = ce_from_probability(masked_probability, predicted_label);
    if (!edge_logits.empty()) {
        double size = 0.0, ent = 0.0;
        for (double l : edge_logits) {
            const double p = sigmoid(l);
            size += p;
            ent += binary_entropy(p);
        }
        loss += cfg.size_weight_edge * size;
        loss += cfg.entropy_weight_edge * ent / static_cast<double>(edge_logits.size());
    }
    if (!feature_logits.empty()) {
        double size = 0.0, ent = 0.0;
        for (double l : feature_logits) {
            const double p = sigmoid(l);
            size += p;
            ent += binary_entropy(p);
        }
        const double nf = static_cast<double>(feature_logits.size());
        loss += cfg.size_weight_feature * size / nf;
        loss += cfg.entropy_weight_feature * ent / nf;
    }
    return loss;
}

Explanation explain(const GcnModel& model, const Graph& g, const NormalizedAdjacency& adj,
                    std::uint32_t target, const ExplainerConfig& cfg) {
    cfg.validate();
    if (target >= g.num_nodes) {
        throw ValidationError("node index out of range: " + std::to_string(target));
    }
    MaskDomain domain = mask_domain(g, target);
    IndexedDomain idx = index_domain(adj, domain);
    Mat x = model.input_features(g);

    const double prediction = predict(model, adj, x, target);
    const int label = prediction >= 0.5 ? 1 : 0;

    const std::size_t ne = domain.edges.size();
    const std::size_t nf = model.num_features;
    Rng rng(cfg.seed);
    // Reference init convention: edges N(0, 2/|comp nodes|), features N(0, 0.01).
    const double edge_std = std::sqrt(2.0 / static_cast<double>(domain.computation_nodes.size()));
    std::vector<double> edge_logits(ne);
    for (double& v : edge_logits) v = edge_std * rng.normal();
    std::vector<double> feat_logits(nf);
    for (double& v : feat_logits) v = 0.1 * rng.normal();

    std::vector<double> em(ne, 0.0), ev(ne, 0.0), fm(nf, 0.0), fv(nf, 0.0);
    Explanation out;
    out.loss_trace.reserve(cfg.epochs);

    auto clamp_all = [](std::vector<double>& v) {
        for (double& x_ : v) x_ = std::clamp(x_, -kLogitClamp, kLogitClamp);
    };
    clamp_all(edge_logits);
    clamp_all(feat_logits);

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        MaskedEval eval = masked_eval(model, adj, x, idx, edge_logits, feat_logits, true);
        const double p = sigmoid(eval.logit);
        const double loss = explainer_loss(p, label, edge_logits, feat_logits, cfg);
        if (!std::isfinite(loss)) {
            throw NumericError("explainer loss not finite at epoch " + std::to_string(epoch) +
                               " for node " + std::to_string(target));
        }
        out.loss_trace.push_back(loss);
        if (epoch == 0) out.ce_initial = ce_from_probability(p, label);

        // d loss / d logits: cross-entropy seed plus regularizer terms.
        const double seed = p - static_cast<double>(label);
        std::vector<double> ge(ne), gf(nf);
        for (std::size_t k = 0; k < ne; ++k) {
            const double pk = sigmoid(edge_logits[k]);
            const double dsig = pk * (1.0 - pk);
            double r = cfg.size_weight_edge * dsig;
            r += cfg.entropy_weight_edge * (-edge_logits[k]) * dsig / static_cast<double>(ne);
            ge[k] = seed * eval.d_edge[k] + r;
        }
        for (std::size_t c = 0; c < nf; ++c) {
            const double pc = sigmoid(feat_logits[c]);
            const double dsig = pc * (1.0 - pc);
            double r = cfg.size_weight_feature * dsig / static_cast<double>(nf);
            r += cfg.entropy_weight_feature * (-feat_logits[c]) * dsig / static_cast<double>(nf);
            gf[c] = seed * eval.d_feature[c] + r;
        }

        adamw_update_flat(edge_logits.data(), ge.data(), em.data(), ev.data(), ne, epoch + 1,
                          cfg.learning_rate, 0.0);
        adamw_update_flat(feat_logits.data(), gf.data(), fm.data(), fv.data(), nf, epoch + 1,
                          cfg.learning_rate, 0.0);
        clamp_all(edge_logits);
        clamp_all(feat_logits);
    }

    const double p_final =
        sigmoid(masked_eval(model, adj, x, idx, edge_logits, feat_logits, false).logit);
    out.ce_final = ce_from_probability(p_final, label);

    out.target = target;
    out.computation_nodes = domain.computation_nodes;
    out.masked_edges = std::move(domain.edges);
    out.edge_weights.resize(ne);
    for (std::size_t k = 0; k < ne; ++k) out.edge_weights[k] = sigmoid(edge_logits[k]);
    out.feature_weights.resize(nf);
    for (std::size_t c = 0; c < nf; ++c) out.feature_weights[c] = sigmoid(feat_logits[c]);
    out.feature_names = model.feature_names;
    out.prediction = prediction;
    out.predicted_label = label;
    return out;
}

Explanation explain(const GcnModel& model, const Graph& g, std::uint32_t target,
                    const ExplainerConfig& cfg) {
    NormalizedAdjacency adj = normalize(g);
    return explain(model, g, adj, target, cfg);
}

ExplanationView truncate(const Explanation& expl, std::size_t k, std::size_t m,
                         NodeAggregation aggregation) {
    if (k < 1 || m < 1) throw ValidationError("truncate requires k >= 1 and m >= 1");

    // Node importance over the whole computation subgraph.
    std::vector<double> importance;
    std::vector<std::uint32_t> ids;
    {
        std::size_t max_id = expl.target;
        for (std::uint32_t v : expl.computation_nodes) max_id = std::max<std::size_t>(max_id, v);
        importance.assign(max_id + 1, 0.0);
        for (std::size_t e = 0; e < expl.masked_edges.size(); ++e) {
            const auto [u, v] = expl.masked_edges[e];
            const double w = expl.edge_weights[e];
            if (aggregation == NodeAggregation::sum) {
                importance[u] += w;
                importance[v] += w;
            } else {
                importance[u] = std::max(importance[u], w);
                importance[v] = std::max(importance[v], w);
            }
        }
        for (std::uint32_t v : expl.computation_nodes) {
            if (v != expl.target) ids.push_back(v);
        }
        std::sort(ids.begin(), ids.end(), [&](std::uint32_t a, std::uint32_t b) {
            if (importance[a] != importance[b]) return importance[a] > importance[b];
            return a < b;
        });
    }

    ExplanationView view;
    view.target = expl.target;
    view.prediction = expl.prediction;
    view.predicted_label = expl.predicted_label;
    const std::size_t k_eff = std::min(k, expl.computation_nodes.size());
    view.k_used = k_eff;
    view.nodes.push_back(expl.target);
    for (std::size_t i = 0; i + 1 < k_eff && i < ids.size(); ++i) view.nodes.push_back(ids[i]);

    std::set<std::uint32_t> in_view(view.nodes.begin(), view.nodes.end());
    for (std::size_t e = 0; e < expl.masked_edges.size(); ++e) {
        const auto [u, v] = expl.masked_edges[e];
        if (in_view.count(u) && in_view.count(v)) {
            view.edges.emplace_back(u, v, expl.edge_weights[e]);
        }
    }
    std::sort(view.edges.begin(), view.edges.end());

    // Top-m features by weight, ties by ascending feature index.
    std::vector<std::size_t> forder(expl.feature_weights.size());
    std::iota(forder.begin(), forder.end(), 0);
    std::sort(forder.begin(), forder.end(), [&](std::size_t a, std::size_t b) {
        if (expl.feature_weights[a] != expl.feature_weights[b]) {
            return expl.feature_weights[a] > expl.feature_weights[b];
        }
        return a < b;
    });
    for (std::size_t i = 0; i < forder.size() && i < m; ++i) {
        view.features.emplace_back(expl.feature_names[forder[i]],
                                   expl.feature_weights[forder[i]]);
    }

    // Connected iff every view node is reachable from the target over induced edges.
    std::set<std::uint32_t> seen{view.target};
    std::vector<std::uint32_t> stack{view.target};
    while (!stack.empty()) {
        const std::uint32_t u = stack.back();
        stack.pop_back();
        for (const auto& [a, b, w] : view.edges) {
            std::uint32_t other;
            if (a == u) other = b;
            else if (b == u) other = a;
            else continue;
            if (seen.insert(other).second) stack.push_back(other);
        }
    }
    view.connected = seen.size() == view.nodes.size();
    return view;
}

ExplanationView expand_to_connected(const Explanation& expl, std::size_t k_start,
                                    std::size_t k_max, std::size_t m,
                                    NodeAggregation aggregation) {
    if (k_start < 1 || k_start > k_max || k_max > expl.computation_nodes.size()) {
        throw ValidationError("expand_to_connected requires 1 <= k_start <= k_max <= |computation nodes|");
    }
    for (std::size_t k = k_start; k <= k_max; ++k) {
        ExplanationView view = truncate(expl, k, m, aggregation);
        if (view.connected) return view;
    }
    return truncate(expl, k_max, m, aggregation);
}

namespace {

nlohmann::ordered_json feature_weight_array(const Explanation& expl, bool normalized) {
    double total = 0.0;
    if (normalized) {
        total = std::accumulate(expl.feature_weights.begin(), expl.feature_weights.end(), 0.0);
        if (total <= 0.0) total = 1.0;
    }
    nlohmann::ordered_json arr = nlohmann::json::array();
    for (std::size_t i = 0; i < expl.feature_weights.size(); ++i) {
        nlohmann::ordered_json f;
        f["name"] = expl.feature_names[i];
        f["weight"] = normalized ? expl.feature_weights[i] / total : expl.feature_weights[i];
        arr.push_back(std::move(f));
    }
    return arr;
}

} // namespace

std::string explanation_to_json(const Explanation& expl) {
    nlohmann::ordered_json doc;
    doc["target"] = expl.target;
    doc["prediction"] = expl.prediction;
    doc["predicted_label"] = expl.predicted_label;
    doc["edges"] = nlohmann::json::array();
    for (std::size_t e = 0; e < expl.masked_edges.size(); ++e) {
        nlohmann::ordered_json j;
        j["u"] = expl.masked_edges[e].first;
        j["v"] = expl.masked_edges[e].second;
        j["weight"] = expl.edge_weights[e];
        doc["edges"].push_back(std::move(j));
    }
    doc["feature_weights"] = feature_weight_array(expl, false);
    doc["feature_weights_normalized"] = feature_weight_array(expl, true);
    doc["loss_trace"] = expl.loss_trace;
    return doc.dump(2) + "\n";
}

Explanation explanation_from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("explanation json: " + std::string(e.what()));
    }
    Explanation expl;
    expl.target = doc.at("target").get<std::uint32_t>();
    expl.prediction = doc.at("prediction").get<double>();
    expl.predicted_label = doc.at("predicted_label").get<int>();
    std::set<std::uint32_t> nodes{expl.target};
    for (const auto& e : doc.at("edges")) {
        expl.masked_edges.emplace_back(e.at("u").get<std::uint32_t>(),
                                       e.at("v").get<std::uint32_t>());
        expl.edge_weights.push_back(e.at("weight").get<double>());
        nodes.insert(expl.masked_edges.back().first);
        nodes.insert(expl.masked_edges.back().second);
    }
    expl.computation_nodes.assign(nodes.begin(), nodes.end());
    for (const auto& f : doc.at("feature_weights")) {
        expl.feature_names.push_back(f.at("name").get<std::string>());
        expl.feature_weights.push_back(f.at("weight").get<double>());
    }
    expl.loss_trace = doc.at("loss_trace").get<std::vector<double>>();
    return expl;
}

std::string view_to_json(const ExplanationView& view, const std::vector<std::string>& node_labels) {
    if (node_labels.size() != view.nodes.size()) {
        throw ValidationError("view_to_json: node labels must parallel view nodes");
    }
    nlohmann::ordered_json doc;
    doc["target"] = view.target;
    doc["prediction"] = view.prediction;
    doc["predicted_label"] = view.predicted_label;
    doc["nodes"] = nlohmann::json::array();
    for (std::size_t i = 0; i < view.nodes.size(); ++i) {
        nlohmann::ordered_json n;
        n["index"] = view.nodes[i];
        n["id"] = node_labels[i];
        doc["nodes"].push_back(std::move(n));
    }
    doc["edges"] = nlohmann::json::array();
    for (const auto& [u, v, w] : view.edges) {
        nlohmann::ordered_json j;
        j["u"] = u;
        j["v"] = v;
        j["weight"] = w;
        doc["edges"].push_back(std::move(j));
    }
    doc["feature_weights"] = nlohmann::json::array();
    for (const auto& [name, w] : view.features) {
        nlohmann::ordered_json f;
        f["name"] = name;
        f["weight"] = w;
        doc["feature_weights"].push_back(std::move(f));
    }
    doc["connected"] = view.connected;
    doc["k_used"] = view.k_used;
    return doc.dump(2) + "\n";
}

LoadedView view_from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("view json: " + std::string(e.what()));
    }
    LoadedView out;
    ExplanationView& view = out.view;
    view.target = doc.at("target").get<std::uint32_t>();
    view.prediction = doc.at("prediction").get<double>();
    view.predicted_label = doc.at("predicted_label").get<int>();
    for (const auto& n : doc.at("nodes")) {
        view.nodes.push_back(n.at("index").get<std::uint32_t>());
        out.node_labels.push_back(n.at("id").get<std::string>());
    }
    for (const auto& e : doc.at("edges")) {
        view.edges.emplace_back(e.at("u").get<std::uint32_t>(), e.at("v").get<std::uint32_t>(),
                                e.at("weight").get<double>());
    }
    for (const auto& f : doc.at("feature_weights")) {
        view.features.emplace_back(f.at("name").get<std::string>(), f.at("weight").get<double>());
    }
    view.connected = doc.at("connected").get<bool>();
    view.k_used = doc.at("k_used").get<std::size_t>();
    return out;
}

} // namespace graphxain
