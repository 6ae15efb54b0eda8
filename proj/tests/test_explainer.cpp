#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "graphxain/errors.hpp"
#include "graphxain/explainer.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

using namespace graphxain;

namespace {

std::vector<double> constant(std::size_t n, double v) { return std::vector<double>(n, v); }

// Random explanation struct for truncation tests; weights are kept distinct
// unless ties are requested.
Explanation random_explanation(std::uint64_t seed, bool distinct_weights = true) {
    Rng rng(seed);
    const std::size_t n = 3 + rng.below(6); // up to 8 nodes
    Explanation e;
    e.target = static_cast<std::uint32_t>(rng.below(n));
    for (std::uint32_t v = 0; v < n; ++v) e.computation_nodes.push_back(v);
    for (std::uint32_t u = 0; u < n; ++u) {
        for (std::uint32_t v = u + 1; v < n; ++v) {
            if (rng.uniform() < 0.5) {
                e.masked_edges.emplace_back(u, v);
                if (distinct_weights) {
                    e.edge_weights.push_back(0.1 + 0.8 * rng.uniform());
                } else {
                    e.edge_weights.push_back(0.25 * static_cast<double>(1 + rng.below(3)));
                }
            }
        }
    }
    if (e.masked_edges.empty()) {
        e.masked_edges.emplace_back(0, 1);
        e.edge_weights.push_back(0.5);
    }
    const std::size_t f = 2 + rng.below(4);
    for (std::size_t c = 0; c < f; ++c) {
        e.feature_names.push_back("f_" + std::to_string(c));
        e.feature_weights.push_back(rng.uniform());
    }
    e.prediction = 0.5 + 0.4 * rng.uniform();
    e.predicted_label = 1;
    e.loss_trace = {1.0};
    return e;
}

struct TrainedFixture {
    Graph graph;
    GcnModel model;
    NormalizedAdjacency adj;
};

const TrainedFixture& trained_fixture() {
    static TrainedFixture fx = [] {
        Graph g = fixtures::planted_graph(200, 0.10, 0.01, 0.5, 5, 2, 7);
        SplitMasks masks = split(g, 7);
        TrainConfig cfg;
        cfg.epochs = 300;
        cfg.hidden = 16;
        cfg.seed = 3;
        auto [model, report] = train(g, masks, cfg);
        (void)report;
        NormalizedAdjacency adj = normalize(g);
        return TrainedFixture{std::move(g), std::move(model), std::move(adj)};
    }();
    return fx;
}

} // namespace

TEST_CASE("mask domain covers the 2-hop neighborhood and its induced edges") {
    Graph g = fixtures::random_graph(15, 2, 0.2, 3);
    MaskDomain d = mask_domain(g, 4);
    CHECK(d.computation_nodes == khop_neighborhood(g, 4, 2));
    std::set<std::uint32_t> in(d.computation_nodes.begin(), d.computation_nodes.end());
    for (const auto& [u, v] : d.edges) {
        CHECK(in.count(u) == 1);
        CHECK(in.count(v) == 1);
    }
    // every graph edge inside the set is present
    std::size_t expect = 0;
    for (const auto& [u, v] : g.edges) {
        if (in.count(u) && in.count(v)) ++expect;
    }
    CHECK(d.edges.size() == expect);
}

TEST_CASE("masked forward with saturated masks reproduces the unmasked prediction") {
    const auto& fx = trained_fixture();
    for (std::uint32_t target : {0u, 7u, 31u}) {
        MaskDomain d = mask_domain(fx.graph, target);
        const double p = masked_forward(fx.model, fx.graph, fx.adj, d,
                                        constant(d.edges.size(), 1e3),
                                        constant(fx.graph.num_features, 1e3));
        const double want = predict(fx.model, fx.adj, fx.model.input_features(fx.graph), target);
        CHECK(std::abs(p - want) < 1e-9);
    }
}

TEST_CASE("masked forward with closed edge masks leaves only the self-loop path") {
    Graph g = fixtures::random_graph(10, 3, 0.3, 6);
    GcnModel m = fixtures::random_model(g, 4, 8);
    for (double& v : m.w1.a) v = 0.0; // feature path off: output depends on b1, w2, b2 only
    NormalizedAdjacency adj = normalize(g);
    MaskDomain d = mask_domain(g, 2);

    const double p = masked_forward(m, g, adj, d, constant(d.edges.size(), -1e3),
                                    constant(g.num_features, 0.0));
    // With W1 = 0 and all edges removed, only the target's self-loop feeds
    // the second layer: logit = A^[t][t] * relu(b1) . w2 + b2.
    double z2 = 0.0;
    for (std::size_t j = 0; j < m.hidden; ++j) z2 += relu(m.b1[j]) * m.w2[j];
    const double want = sigmoid(adj.at(2, 2) * z2 + m.b2);
    CHECK(p == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("masked forward matches the dense masking oracle") {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        Graph g = fixtures::random_graph(8 + seed, 3, 0.3, seed + 40);
        GcnModel m = fixtures::random_model(g, 4, seed + 9);
        NormalizedAdjacency adj = normalize(g);
        const auto target = static_cast<std::uint32_t>(seed % g.num_nodes);
        MaskDomain d = mask_domain(g, target);

        Rng rng(seed + 100);
        std::vector<double> el(d.edges.size()), fl(g.num_features);
        for (double& v : el) v = 2.0 * rng.normal();
        for (double& v : fl) v = 2.0 * rng.normal();

        std::vector<double> edge_scales, feat_scales;
        for (double v : el) edge_scales.push_back(sigmoid(v));
        for (double v : fl) feat_scales.push_back(sigmoid(v));

        const double got = masked_forward(m, g, adj, d, el, fl);
        const double want =
            oracle::dense_masked_probability(m, g, target, d.edges, edge_scales, feat_scales);
        CHECK(got == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("masked forward validates its mask domain") {
    Graph g = fixtures::random_graph(8, 2, 0.3, 1);
    GcnModel m = fixtures::random_model(g, 3, 2);
    NormalizedAdjacency adj = normalize(g);
    MaskDomain d = mask_domain(g, 0);

    SUBCASE("logit count mismatch") {
        CHECK_THROWS_AS(masked_forward(m, g, adj, d, constant(d.edges.size() + 1, 0.0),
                                       constant(g.num_features, 0.0)),
                        ValidationError);
    }
    SUBCASE("edge absent from the graph") {
        MaskDomain bad = d;
        // find a non-adjacent pair
        for (std::uint32_t u = 0; u < g.num_nodes; ++u) {
            for (std::uint32_t v = u + 1; v < g.num_nodes; ++v) {
                if (!adj.has(u, v)) {
                    bad.edges.emplace_back(u, v);
                    goto found;
                }
            }
        }
    found:
        CHECK_THROWS_AS(masked_forward(m, g, adj, bad, constant(bad.edges.size(), 0.0),
                                       constant(g.num_features, 0.0)),
                        ValidationError);
    }
}

TEST_CASE("mask gradients match central finite differences") {
    Graph g = fixtures::random_graph(9, 3, 0.35, 51);
    GcnModel m = fixtures::random_model(g, 4, 52);
    // bias away from relu kinks for clean differencing
    for (double& b : m.b1) b += b > 0 ? 0.25 : -0.25;
    NormalizedAdjacency adj = normalize(g);
    const std::uint32_t target = 3;
    MaskDomain d = mask_domain(g, target);

    Rng rng(53);
    std::vector<double> el(d.edges.size()), fl(g.num_features);
    for (double& v : el) v = rng.normal();
    for (double& v : fl) v = rng.normal();

    MaskedTargetEval eval = masked_target_eval(m, g, adj, d, el, fl);
    const double h = 1e-5;
    const double dsig = eval.probability * (1.0 - eval.probability);

    auto fd_prob = [&](std::vector<double>& logits, std::size_t i) {
        const double keep = logits[i];
        logits[i] = keep + h;
        const double up = masked_forward(m, g, adj, d, el, fl);
        logits[i] = keep - h;
        const double down = masked_forward(m, g, adj, d, el, fl);
        logits[i] = keep;
        return (up - down) / (2.0 * h);
    };
    for (std::size_t i = 0; i < el.size(); ++i) {
        const double analytic = dsig * eval.d_logit_d_edge[i];
        CHECK(std::abs(analytic - fd_prob(el, i)) < 1e-6);
    }
    for (std::size_t i = 0; i < fl.size(); ++i) {
        const double analytic = dsig * eval.d_logit_d_feature[i];
        CHECK(std::abs(analytic - fd_prob(fl, i)) < 1e-6);
    }
}

TEST_CASE("explainer_loss pins its terms") {
    ExplainerConfig cfg;
    SUBCASE("perfect prediction, no regularizers") {
        cfg.size_weight_edge = cfg.entropy_weight_edge = 0.0;
        cfg.size_weight_feature = cfg.entropy_weight_feature = 0.0;
        CHECK(explainer_loss(1.0, 1, {}, {}, cfg) == 0.0);
    }
    SUBCASE("single edge logit 0 under unit size weight") {
        cfg.size_weight_edge = 1.0;
        cfg.entropy_weight_edge = 0.0;
        cfg.size_weight_feature = cfg.entropy_weight_feature = 0.0;
        const double logits[] = {0.0};
        CHECK(explainer_loss(1.0, 1, std::span(logits, 1), {}, cfg) == doctest::Approx(0.5));
    }
    SUBCASE("entropy of a half-open mask is ln 2") {
        cfg.size_weight_edge = 0.0;
        cfg.entropy_weight_edge = 1.0;
        cfg.size_weight_feature = cfg.entropy_weight_feature = 0.0;
        const double logits[] = {0.0};
        CHECK(explainer_loss(1.0, 1, std::span(logits, 1), {}, cfg) ==
              doctest::Approx(std::log(2.0)).epsilon(1e-12));
    }
    SUBCASE("feature size term averages over features") {
        cfg.size_weight_edge = cfg.entropy_weight_edge = 0.0;
        cfg.size_weight_feature = 1.0;
        cfg.entropy_weight_feature = 0.0;
        const double logits[] = {0.0, 0.0};
        CHECK(explainer_loss(1.0, 1, {}, std::span(logits, 2), cfg) == doctest::Approx(0.5));
    }
    SUBCASE("invalid label") {
        CHECK_THROWS_AS(explainer_loss(0.5, 2, {}, {}, cfg), ValidationError);
    }
}

TEST_CASE("explain is deterministic and improves its loss") {
    const auto& fx = trained_fixture();
    ExplainerConfig cfg;
    cfg.epochs = 60;
    cfg.seed = 4;

    Explanation a = explain(fx.model, fx.graph, fx.adj, 5, cfg);
    Explanation b = explain(fx.model, fx.graph, fx.adj, 5, cfg);
    CHECK(a.edge_weights == b.edge_weights);
    CHECK(a.feature_weights == b.feature_weights);
    CHECK(a.loss_trace == b.loss_trace);

    CHECK(a.loss_trace.size() == cfg.epochs);
    CHECK(a.loss_trace.back() < a.loss_trace.front());
    CHECK(a.prediction == predict(fx.model, fx.adj, fx.model.input_features(fx.graph), 5));
    CHECK(a.predicted_label == (a.prediction >= 0.5 ? 1 : 0));

    std::set<std::uint32_t> comp(a.computation_nodes.begin(), a.computation_nodes.end());
    for (const auto& [u, v] : a.masked_edges) {
        CHECK(comp.count(u) == 1);
        CHECK(comp.count(v) == 1);
    }
    for (double w : a.edge_weights) {
        CHECK(w > 0.0);
        CHECK(w < 1.0);
    }
    for (double w : a.feature_weights) {
        CHECK(w > 0.0);
        CHECK(w < 1.0);
    }
}

TEST_CASE("explain finds the planted feature and keeps the masked graph predictive") {
    const auto& fx = trained_fixture();
    ExplainerConfig cfg;
    cfg.seed = 11;
    std::size_t improved = 0, planted_top2 = 0, total = 0;
    std::vector<std::uint32_t> targets; // both communities
    for (std::uint32_t i = 0; i < 10; ++i) {
        targets.push_back(i);
        targets.push_back(static_cast<std::uint32_t>(fx.graph.num_nodes / 2) + i);
    }
    for (std::uint32_t target : targets) {
        Explanation e = explain(fx.model, fx.graph, fx.adj, target, cfg);
        ++total;
        if (e.ce_final <= e.ce_initial) ++improved;
        std::vector<std::size_t> order(e.feature_weights.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
            return e.feature_weights[x] > e.feature_weights[y];
        });
        if (order[0] == 2 || order[1] == 2) ++planted_top2; // planted column is f_2
    }
    CHECK(improved >= total * 8 / 10);
    CHECK(planted_top2 >= total * 7 / 10);
}

TEST_CASE("truncate: k=1 keeps only the target") {
    Explanation e = fixtures::disconnected_at_7_explanation();
    ExplanationView v = truncate(e, 1, 2);
    CHECK(v.nodes == std::vector<std::uint32_t>{0});
    CHECK(v.edges.empty());
    CHECK(v.connected);
    CHECK(v.k_used == 1);
    CHECK(v.features.size() == 2);
    CHECK(v.features[0].first == "f_0");
    CHECK(v.prediction == e.prediction);
    CHECK_THROWS_AS(truncate(e, 0, 1), ValidationError);
    CHECK_THROWS_AS(truncate(e, 1, 0), ValidationError);
}

TEST_CASE("truncate on a uniform star breaks ties by ascending id") {
    Explanation e;
    e.target = 0;
    for (std::uint32_t v = 0; v < 7; ++v) e.computation_nodes.push_back(v);
    for (std::uint32_t v = 1; v < 7; ++v) {
        e.masked_edges.emplace_back(0, v);
        e.edge_weights.push_back(0.5);
    }
    e.feature_names = {"f_0"};
    e.feature_weights = {0.5};
    ExplanationView view = truncate(e, 4, 1);
    CHECK(view.nodes == std::vector<std::uint32_t>{0, 1, 2, 3});
    CHECK(view.nodes == oracle::ranked_view_nodes(e, 4));
    CHECK(view.connected);
}

TEST_CASE("truncate matches the exhaustive ranking oracle") {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        Explanation e = random_explanation(seed, seed % 2 == 0);
        for (std::size_t k = 1; k <= e.computation_nodes.size(); ++k) {
            ExplanationView v = truncate(e, k, 3);
            CHECK(v.nodes == oracle::ranked_view_nodes(e, k));
            // induced edges: exactly those with both ends in the view
            std::set<std::uint32_t> in(v.nodes.begin(), v.nodes.end());
            std::size_t expect = 0;
            for (const auto& [u, w] : e.masked_edges) {
                if (in.count(u) && in.count(w)) ++expect;
            }
            CHECK(v.edges.size() == expect);
            for (std::size_t i = 1; i < v.features.size(); ++i) {
                CHECK(v.features[i - 1].second >= v.features[i].second);
            }
        }
    }
}

TEST_CASE("truncate honors the max-aggregation flag") {
    Explanation e;
    e.target = 0;
    for (std::uint32_t v = 0; v < 4; ++v) e.computation_nodes.push_back(v);
    // node 1: two weak edges (sum 0.6, max 0.3); node 2: one strong (sum=max=0.5)
    e.masked_edges = {{0, 1}, {1, 3}, {0, 2}};
    e.edge_weights = {0.3, 0.3, 0.5};
    e.feature_names = {"f_0"};
    e.feature_weights = {0.5};
    CHECK(truncate(e, 2, 1, NodeAggregation::sum).nodes ==
          std::vector<std::uint32_t>{0, 1});
    CHECK(truncate(e, 2, 1, NodeAggregation::max).nodes ==
          std::vector<std::uint32_t>{0, 2});
}

TEST_CASE("truncate is permutation-equivariant for distinct weights") {
    for (std::uint64_t seed = 100; seed < 110; ++seed) {
        Explanation e = random_explanation(seed, true);
        const std::size_t n = e.computation_nodes.size();
        // relabel i -> (i + 3) % n
        auto relabel = [&](std::uint32_t v) { return static_cast<std::uint32_t>((v + 3) % n); };
        auto unlabel = [&](std::uint32_t v) { return static_cast<std::uint32_t>((v + n - 3) % n); };
        Explanation p = e;
        p.target = relabel(e.target);
        for (auto& v : p.computation_nodes) v = relabel(v);
        std::sort(p.computation_nodes.begin(), p.computation_nodes.end());
        for (std::size_t i = 0; i < p.masked_edges.size(); ++i) {
            auto [u, v] = e.masked_edges[i];
            std::uint32_t pu = relabel(u), pv = relabel(v);
            p.masked_edges[i] = {std::min(pu, pv), std::max(pu, pv)};
        }

        const std::size_t k = 1 + seed % n;
        ExplanationView base = truncate(e, k, 2);
        ExplanationView perm = truncate(p, k, 2);

        std::vector<std::uint32_t> mapped_back;
        for (auto v : perm.nodes) mapped_back.push_back(unlabel(v));
        CHECK(mapped_back == base.nodes);
        CHECK(perm.connected == base.connected);

        std::set<std::tuple<std::uint32_t, std::uint32_t, double>> base_edges(
            base.edges.begin(), base.edges.end());
        std::set<std::tuple<std::uint32_t, std::uint32_t, double>> perm_edges;
        for (auto [u, v, w] : perm.edges) {
            std::uint32_t bu = unlabel(u), bv = unlabel(v);
            perm_edges.insert({std::min(bu, bv), std::max(bu, bv), w});
        }
        CHECK(perm_edges == base_edges);
    }
}

TEST_CASE("expand_to_connected walks the fixture from 7 to 9") {
    Explanation e = fixtures::disconnected_at_7_explanation();
    CHECK_FALSE(truncate(e, 7, 3).connected);
    CHECK_FALSE(truncate(e, 8, 3).connected);

    ExplanationView v = expand_to_connected(e, 7, 9, 3);
    CHECK(v.connected);
    CHECK(v.k_used == 9);
    CHECK(v.nodes.size() == 9);

    SUBCASE("an already-connected start returns unchanged") {
        ExplanationView one = expand_to_connected(e, 1, 9, 3);
        CHECK(one.k_used == 1);
        CHECK(one.nodes == truncate(e, 1, 3).nodes);
    }
    SUBCASE("capped below the connecting k falls back to k_max, disconnected") {
        ExplanationView capped = expand_to_connected(e, 7, 8, 3);
        CHECK_FALSE(capped.connected);
        CHECK(capped.k_used == 8);
    }
    SUBCASE("bounds are validated") {
        CHECK_THROWS_AS(expand_to_connected(e, 5, 4, 3), ValidationError);
        CHECK_THROWS_AS(expand_to_connected(e, 1, 100, 3), ValidationError);
    }
}

TEST_CASE("expand_to_connected returns the minimal connected k") {
    for (std::uint64_t seed = 200; seed < 230; ++seed) {
        Explanation e = random_explanation(seed);
        const std::size_t k_max = e.computation_nodes.size();
        for (std::size_t k_start = 1; k_start <= k_max; ++k_start) {
            ExplanationView v = expand_to_connected(e, k_start, k_max, 2);
            const std::size_t want = oracle::minimal_connected_k(e, k_start, k_max, 2);
            if (want == 0) {
                CHECK_FALSE(v.connected);
                CHECK(v.k_used == k_max);
            } else {
                CHECK(v.connected);
                CHECK(v.k_used == want);
            }
        }
    }
}

TEST_CASE("explanation json round-trips and keeps its contract fields") {
    Explanation e = fixtures::disconnected_at_7_explanation();
    const std::string doc = explanation_to_json(e);
    CHECK(doc == explanation_to_json(e));
    CHECK(doc.find("\"target\"") != std::string::npos);
    CHECK(doc.find("\"feature_weights_normalized\"") != std::string::npos);

    Explanation back = explanation_from_json(doc);
    CHECK(back.target == e.target);
    CHECK(back.masked_edges == e.masked_edges);
    CHECK(back.edge_weights == e.edge_weights);
    CHECK(back.feature_weights == e.feature_weights);
    CHECK(back.loss_trace == e.loss_trace);
    CHECK(back.prediction == e.prediction);

    CHECK_THROWS_AS(explanation_from_json("{"), ParseError);
}

TEST_CASE("view json round-trips with its node labels") {
    Explanation e = fixtures::disconnected_at_7_explanation();
    ExplanationView v = truncate(e, 7, 3);
    std::vector<std::string> labels;
    for (auto n : v.nodes) labels.push_back("p" + std::to_string(n));

    const std::string doc = view_to_json(v, labels);
    LoadedView back = view_from_json(doc);
    CHECK(back.view.nodes == v.nodes);
    CHECK(back.view.edges == v.edges);
    CHECK(back.view.features == v.features);
    CHECK(back.view.connected == v.connected);
    CHECK(back.view.k_used == v.k_used);
    CHECK(back.node_labels == labels);
    CHECK(view_to_json(back.view, back.node_labels) == doc);
}
