#pragma once

// Test-side reference implementations, kept independent of the library's
// CSR/backprop code paths: everything here is dense and loop-based.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "graphxain/explainer.hpp"
#include "graphxain/gcn.hpp"
#include "graphxain/graph.hpp"

namespace oracle {

using graphxain::Explanation;
using graphxain::GcnModel;
using graphxain::Graph;

inline std::vector<std::vector<double>> dense_normalized(const Graph& g) {
    const std::size_t n = g.num_nodes;
    std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
    for (const auto& [u, v] : g.edges) {
        a[u][v] = 1.0;
        a[v][u] = 1.0;
    }
    for (std::size_t i = 0; i < n; ++i) a[i][i] = 1.0;
    std::vector<double> d(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) d[i] += a[i][j];
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            a[i][j] = a[i][j] / (std::sqrt(d[i]) * std::sqrt(d[j]));
        }
    }
    return a;
}

inline double sigmoid_ref(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Dense two-layer forward; adjacency passed explicitly so masked variants can
// reuse it.
inline std::vector<double> dense_forward(const GcnModel& m,
                                         const std::vector<std::vector<double>>& a,
                                         const std::vector<std::vector<double>>& x) {
    const std::size_t n = a.size();
    const std::size_t f = m.num_features;
    const std::size_t h = m.hidden;
    std::vector<std::vector<double>> xw(n, std::vector<double>(h, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < f; ++k) {
            for (std::size_t j = 0; j < h; ++j) xw[i][j] += x[i][k] * m.w1.at(k, j);
        }
    }
    std::vector<std::vector<double>> h1(n, std::vector<double>(h, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < h; ++j) {
            double acc = m.b1[j];
            for (std::size_t k = 0; k < n; ++k) acc += a[i][k] * xw[k][j];
            h1[i][j] = acc > 0.0 ? acc : 0.0;
        }
    }
    std::vector<double> z2(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < h; ++j) z2[i] += h1[i][j] * m.w2[j];
    }
    std::vector<double> logits(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = m.b2;
        for (std::size_t k = 0; k < n; ++k) acc += a[i][k] * z2[k];
        logits[i] = acc;
    }
    return logits;
}

inline std::vector<std::vector<double>> dense_features(const Graph& g) {
    std::vector<std::vector<double>> x(g.num_nodes, std::vector<double>(g.num_features));
    for (std::size_t i = 0; i < g.num_nodes; ++i) {
        for (std::size_t f = 0; f < g.num_features; ++f) x[i][f] = g.feature_at(i, f);
    }
    return x;
}

inline double dense_bce(const std::vector<double>& logits, const std::vector<int>& labels,
                        const std::vector<std::uint32_t>& mask) {
    double acc = 0.0;
    for (auto i : mask) {
        const double p = sigmoid_ref(logits[i]);
        acc += labels[i] == 1 ? -std::log(p) : -std::log(1.0 - p);
    }
    return acc / static_cast<double>(mask.size());
}

// Masked dense forward for the explainer oracle: edge scales applied
// symmetrically to off-diagonal adjacency entries, feature scales columnwise.
inline double dense_masked_probability(
    const GcnModel& m, const Graph& g, std::uint32_t target,
    const std::vector<std::pair<std::uint32_t, std::uint32_t>>& masked_edges,
    const std::vector<double>& edge_scales, const std::vector<double>& feature_scales) {
    auto a = dense_normalized(g);
    for (std::size_t e = 0; e < masked_edges.size(); ++e) {
        const auto [u, v] = masked_edges[e];
        a[u][v] *= edge_scales[e];
        a[v][u] *= edge_scales[e];
    }
    auto x = dense_features(g);
    // Standardize first (the model's input transform), then mask.
    if (m.standardizer.enabled) {
        for (auto& row : x) {
            for (std::size_t f = 0; f < row.size(); ++f) {
                row[f] = (row[f] - m.standardizer.mean[f]) / m.standardizer.stdev[f];
            }
        }
    }
    for (auto& row : x) {
        for (std::size_t f = 0; f < row.size(); ++f) row[f] *= feature_scales[f];
    }
    return sigmoid_ref(dense_forward(m, a, x)[target]);
}

// O(n^2) pairwise AUC with half-credit ties, integer numerator.
inline double pairwise_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    std::uint64_t wins2 = 0, n_pos = 0, n_neg = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] == 1) {
            ++n_pos;
            for (std::size_t j = 0; j < scores.size(); ++j) {
                if (labels[j] == 1) continue;
                if (scores[i] > scores[j]) wins2 += 2;
                else if (scores[i] == scores[j]) wins2 += 1;
            }
        } else {
            ++n_neg;
        }
    }
    return static_cast<double>(wins2) / (2.0 * static_cast<double>(n_pos * n_neg));
}

// Exhaustive node ranking for truncation: importance by incident weight sum
// (or max), ties broken by ascending id, target always kept.
inline std::vector<std::uint32_t> ranked_view_nodes(const Explanation& expl, std::size_t k,
                                                    bool use_max = false) {
    std::map<std::uint32_t, double> imp;
    for (std::uint32_t v : expl.computation_nodes) imp[v] = 0.0;
    for (std::size_t e = 0; e < expl.masked_edges.size(); ++e) {
        const auto [u, v] = expl.masked_edges[e];
        const double w = expl.edge_weights[e];
        if (use_max) {
            imp[u] = std::max(imp[u], w);
            imp[v] = std::max(imp[v], w);
        } else {
            imp[u] += w;
            imp[v] += w;
        }
    }
    std::vector<std::uint32_t> others;
    for (const auto& [node, w] : imp) {
        if (node != expl.target) others.push_back(node);
    }
    std::stable_sort(others.begin(), others.end(), [&](std::uint32_t a, std::uint32_t b) {
        if (imp[a] != imp[b]) return imp[a] > imp[b];
        return a < b;
    });
    std::vector<std::uint32_t> out{expl.target};
    const std::size_t k_eff = std::min(k, expl.computation_nodes.size());
    for (std::size_t i = 0; i + 1 < k_eff && i < others.size(); ++i) out.push_back(others[i]);
    return out;
}

// Central finite differences of the masked BCE loss across every parameter.
// The loss is evaluated through the public forward path; differencing itself
// is the independent oracle here.
inline graphxain::GcnGradients fd_gradients(GcnModel model,
                                            const graphxain::NormalizedAdjacency& adj,
                                            const graphxain::Mat& x,
                                            const std::vector<int>& labels,
                                            const std::vector<std::uint32_t>& mask,
                                            double h = 1e-5) {
    auto loss = [&]() {
        return graphxain::bce_loss(graphxain::forward(model, adj, x), labels, mask);
    };
    auto central = [&](double& p) {
        const double keep = p;
        p = keep + h;
        const double up = loss();
        p = keep - h;
        const double down = loss();
        p = keep;
        return (up - down) / (2.0 * h);
    };
    graphxain::GcnGradients g;
    g.w1 = graphxain::Mat(model.w1.rows, model.w1.cols);
    for (std::size_t i = 0; i < model.w1.a.size(); ++i) g.w1.a[i] = central(model.w1.a[i]);
    g.b1.resize(model.b1.size());
    for (std::size_t i = 0; i < model.b1.size(); ++i) g.b1[i] = central(model.b1[i]);
    g.w2.resize(model.w2.size());
    for (std::size_t i = 0; i < model.w2.size(); ++i) g.w2[i] = central(model.w2[i]);
    g.b2 = central(model.b2);
    return g;
}

// min |pre-relu activation|; instances near a kink make finite differences
// unreliable and get skipped by the seed scan.
inline double relu_margin(const GcnModel& m, const Graph& g) {
    auto a = dense_normalized(g);
    auto x = dense_features(g);
    const std::size_t n = g.num_nodes;
    double margin = 1e300;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m.hidden; ++j) {
            double acc = m.b1[j];
            for (std::size_t k = 0; k < n; ++k) {
                double xw = 0.0;
                for (std::size_t f = 0; f < m.num_features; ++f) {
                    xw += x[k][f] * m.w1.at(f, j);
                }
                acc += a[i][k] * xw;
            }
            margin = std::min(margin, std::abs(acc));
        }
    }
    return margin;
}

inline double max_relative_error(const graphxain::GcnGradients& a,
                                 const graphxain::GcnGradients& b) {
    double worst = 0.0;
    auto cmp = [&](double x, double y) {
        const double rel = std::abs(x - y) / std::max({1.0, std::abs(x), std::abs(y)});
        worst = std::max(worst, rel);
    };
    for (std::size_t i = 0; i < a.w1.a.size(); ++i) cmp(a.w1.a[i], b.w1.a[i]);
    for (std::size_t i = 0; i < a.b1.size(); ++i) cmp(a.b1[i], b.b1[i]);
    for (std::size_t i = 0; i < a.w2.size(); ++i) cmp(a.w2[i], b.w2[i]);
    cmp(a.b2, b.b2);
    return worst;
}

// Linear-scan minimal connected k oracle; returns 0 when none in range.
inline std::size_t minimal_connected_k(const Explanation& expl, std::size_t k_start,
                                       std::size_t k_max, std::size_t m) {
    for (std::size_t k = k_start; k <= k_max; ++k) {
        if (graphxain::truncate(expl, k, m).connected) return k;
    }
    return 0;
}

} // namespace oracle
