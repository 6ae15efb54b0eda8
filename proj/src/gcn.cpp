#include "graphxain/gcn.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "graphxain/errors.hpp"
#include "graphxain/rng.hpp"

namespace graphxain {

namespace {

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kEps = 1e-8;

// y = A^ x for CSR A^ and dense x (n x c).
Mat spmm(const NormalizedAdjacency& adj, const Mat& x) {
    Mat y(x.rows, x.cols);
    for (std::size_t i = 0; i < adj.n; ++i) {
        double* yi = y.row(i);
        for (std::size_t p = adj.row_ptr[i]; p < adj.row_ptr[i + 1]; ++p) {
            const double a = adj.val[p];
            const double* xj = x.row(adj.col[p]);
            for (std::size_t c = 0; c < x.cols; ++c) yi[c] += a * xj[c];
        }
    }
    return y;
}

std::vector<double> spmv(const NormalizedAdjacency& adj, const std::vector<double>& x) {
    std::vector<double> y(adj.n, 0.0);
    for (std::size_t i = 0; i < adj.n; ++i) {
        double acc = 0.0;
        for (std::size_t p = adj.row_ptr[i]; p < adj.row_ptr[i + 1]; ++p) {
            acc += adj.val[p] * x[adj.col[p]];
        }
        y[i] = acc;
    }
    return y;
}

// x (n x f) times w (f x h).
Mat matmul(const Mat& x, const Mat& w) {
    Mat y(x.rows, w.cols);
    for (std::size_t i = 0; i < x.rows; ++i) {
        const double* xi = x.row(i);
        double* yi = y.row(i);
        for (std::size_t k = 0; k < x.cols; ++k) {
            const double v = xi[k];
            if (v == 0.0) continue;
            const double* wk = w.row(k);
            for (std::size_t j = 0; j < w.cols; ++j) yi[j] += v * wk[j];
        }
    }
    return y;
}

void check_shapes(const GcnModel& model, const NormalizedAdjacency& adj, const Mat& x) {
    if (x.rows != adj.n || x.cols != model.num_features ||
        model.w1.rows != model.num_features || model.w1.cols != model.hidden ||
        model.b1.size() != model.hidden || model.w2.size() != model.hidden) {
        throw ValidationError("forward: dimension mismatch between model, adjacency and features");
    }
}

struct ForwardCache {
    Mat s1;                  // A^ X W1 + b1
    Mat h1;                  // relu(s1)
    std::vector<double> logits;
};

ForwardCache forward_cached(const GcnModel& model, const NormalizedAdjacency& adj, const Mat& x) {
    check_shapes(model, adj, x);
    ForwardCache cache;
    Mat xw = matmul(x, model.w1);
    cache.s1 = spmm(adj, xw);
    for (std::size_t i = 0; i < cache.s1.rows; ++i) {
        double* row = cache.s1.row(i);
        for (std::size_t j = 0; j < model.hidden; ++j) row[j] += model.b1[j];
    }
    cache.h1 = cache.s1;
    for (double& v : cache.h1.a) v = relu(v);

    std::vector<double> z2(adj.n, 0.0);
    for (std::size_t i = 0; i < adj.n; ++i) {
        const double* hi = cache.h1.row(i);
        double acc = 0.0;
        for (std::size_t j = 0; j < model.hidden; ++j) acc += hi[j] * model.w2[j];
        z2[i] = acc;
    }
    cache.logits = spmv(adj, z2);
    for (double& v : cache.logits) v += model.b2;
    return cache;
}

} // namespace

void TrainConfig::validate() const {
    if (learning_rate <= 0.0) throw ValidationError("learning_rate must be > 0");
    if (weight_decay < 0.0) throw ValidationError("weight_decay must be >= 0");
    if (epochs < 1) throw ValidationError("epochs must be >= 1");
    if (hidden < 1) throw ValidationError("hidden must be >= 1");
}

void Standardizer::apply(Mat& x) const {
    if (!enabled) return;
    for (std::size_t i = 0; i < x.rows; ++i) {
        double* row = x.row(i);
        for (std::size_t f = 0; f < x.cols; ++f) {
            row[f] = (row[f] - mean[f]) / stdev[f];
        }
    }
}

Mat GcnModel::input_features(const Graph& g) const {
    Mat x = g.feature_matrix();
    standardizer.apply(x);
    return x;
}

std::vector<double> forward(const GcnModel& model, const NormalizedAdjacency& adj, const Mat& x) {
    return forward_cached(model, adj, x).logits;
}

double bce_loss(const std::vector<double>& logits, const std::vector<int>& labels,
                const std::vector<std::uint32_t>& mask) {
    if (mask.empty()) throw ValidationError("bce_loss: empty mask");
    double acc = 0.0;
    for (std::uint32_t i : mask) acc += bce_term(logits[i], labels[i]);
    return acc / static_cast<double>(mask.size());
}

GcnGradients gradients(const GcnModel& model, const NormalizedAdjacency& adj, const Mat& x,
                       const std::vector<int>& labels, const std::vector<std::uint32_t>& mask) {
    if (mask.empty()) throw ValidationError("gradients: empty mask");
    ForwardCache cache = forward_cached(model, adj, x);
    const std::size_t n = adj.n;
    const std::size_t h = model.hidden;

    // dL/dlogit, mean BCE over the mask.
    std::vector<double> dlogit(n, 0.0);
    const double inv_m = 1.0 / static_cast<double>(mask.size());
    for (std::uint32_t i : mask) {
        dlogit[i] = (sigmoid(cache.logits[i]) - static_cast<double>(labels[i])) * inv_m;
    }

    GcnGradients g;
    g.w1 = Mat(model.num_features, h);
    g.b1.assign(h, 0.0);
    g.w2.assign(h, 0.0);
    g.b2 = std::accumulate(dlogit.begin(), dlogit.end(), 0.0);

    // Back through the second propagation; A^ is symmetric.
    std::vector<double> dz2 = spmv(adj, dlogit);

    Mat dh1(n, h);
    for (std::size_t i = 0; i < n; ++i) {
        const double* h1i = cache.h1.row(i);
        double* dh1i = dh1.row(i);
        const double d = dz2[i];
        for (std::size_t j = 0; j < h; ++j) {
            g.w2[j] += h1i[j] * d;
            dh1i[j] = d * model.w2[j];
        }
    }

    // Through relu.
    Mat ds1 = std::move(dh1);
    for (std::size_t i = 0; i < ds1.a.size(); ++i) {
        ds1.a[i] *= relu_grad(cache.s1.a[i]);
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = ds1.row(i);
        for (std::size_t j = 0; j < h; ++j) g.b1[j] += row[j];
    }

    // Through the first propagation and the input projection.
    Mat dxw = spmm(adj, ds1);
    for (std::size_t i = 0; i < n; ++i) {
        const double* xi = x.row(i);
        const double* di = dxw.row(i);
        for (std::size_t f = 0; f < model.num_features; ++f) {
            const double v = xi[f];
            if (v == 0.0) continue;
            double* gw = g.w1.row(f);
            for (std::size_t j = 0; j < h; ++j) gw[j] += v * di[j];
        }
    }
    return g;
}

void adamw_update_flat(double* param, const double* grad, double* m, double* v,
                       std::size_t n, std::size_t step, double lr, double weight_decay) {
    const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
    for (std::size_t i = 0; i < n; ++i) {
        param[i] *= 1.0 - lr * weight_decay; // decoupled decay before the step
        m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * grad[i];
        v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * grad[i] * grad[i];
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        param[i] -= lr * mhat / (std::sqrt(vhat) + kEps);
    }
}

void adamw_step(GcnModel& model, AdamWState& state, const GcnGradients& g,
                const TrainConfig& cfg) {
    if (state.step == 0) {
        state.m.w1 = Mat(model.w1.rows, model.w1.cols);
        state.m.b1.assign(model.b1.size(), 0.0);
        state.m.w2.assign(model.w2.size(), 0.0);
        state.m.b2 = 0.0;
        state.v = state.m;
    }
    ++state.step;
    adamw_update_flat(model.w1.a.data(), g.w1.a.data(), state.m.w1.a.data(), state.v.w1.a.data(),
                      model.w1.a.size(), state.step, cfg.learning_rate, cfg.weight_decay);
    adamw_update_flat(model.b1.data(), g.b1.data(), state.m.b1.data(), state.v.b1.data(),
                      model.b1.size(), state.step, cfg.learning_rate, cfg.weight_decay);
    adamw_update_flat(model.w2.data(), g.w2.data(), state.m.w2.data(), state.v.w2.data(),
                      model.w2.size(), state.step, cfg.learning_rate, cfg.weight_decay);
    adamw_update_flat(&model.b2, &g.b2, &state.m.b2, &state.v.b2, 1, state.step,
                      cfg.learning_rate, cfg.weight_decay);
}

namespace {

bool all_finite(const GcnModel& m) {
    auto ok = [](double v) { return std::isfinite(v); };
    return std::all_of(m.w1.a.begin(), m.w1.a.end(), ok) &&
           std::all_of(m.b1.begin(), m.b1.end(), ok) &&
           std::all_of(m.w2.begin(), m.w2.end(), ok) && ok(m.b2);
}

std::vector<double> subset(const std::vector<double>& v, const std::vector<std::uint32_t>& idx) {
    std::vector<double> out;
    out.reserve(idx.size());
    for (std::uint32_t i : idx) out.push_back(v[i]);
    return out;
}

std::vector<int> subset(const std::vector<int>& v, const std::vector<std::uint32_t>& idx) {
    std::vector<int> out;
    out.reserve(idx.size());
    for (std::uint32_t i : idx) out.push_back(v[i]);
    return out;
}

bool single_class(const std::vector<int>& labels) {
    return std::all_of(labels.begin(), labels.end(), [&](int l) { return l == labels.front(); });
}

} // namespace

std::pair<GcnModel, TrainReport> train(const Graph& g, const SplitMasks& masks,
                                       const TrainConfig& cfg) {
    cfg.validate();
    GcnModel model;
    model.num_features = g.num_features;
    model.hidden = cfg.hidden;
    model.feature_names = g.feature_names;
    model.config = cfg;

    if (cfg.standardize_features) {
        Standardizer st;
        st.enabled = true;
        st.mean.assign(g.num_features, 0.0);
        st.stdev.assign(g.num_features, 1.0);
        for (std::size_t f = 0; f < g.num_features; ++f) {
            double sum = 0.0;
            for (std::uint32_t i : masks.train) sum += g.feature_at(i, f);
            const double mean = sum / static_cast<double>(masks.train.size());
            double sq = 0.0;
            for (std::uint32_t i : masks.train) {
                const double d = g.feature_at(i, f) - mean;
                sq += d * d;
            }
            const double var = sq / static_cast<double>(masks.train.size());
            st.mean[f] = mean;
            st.stdev[f] = var > 1e-24 ? std::sqrt(var) : 1.0; // constant columns pass through
        }
        model.standardizer = std::move(st);
    }

    // Glorot-uniform init from the seeded generator.
    Rng rng(cfg.seed);
    auto glorot = [&](std::size_t fan_in, std::size_t fan_out) {
        return cfg.init_scale * std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    };
    model.w1 = Mat(g.num_features, cfg.hidden);
    const double s1 = glorot(g.num_features, cfg.hidden);
    for (double& v : model.w1.a) v = rng.uniform(-s1, s1);
    model.b1.assign(cfg.hidden, 0.0);
    model.w2.assign(cfg.hidden, 0.0);
    const double s2 = glorot(cfg.hidden, 1);
    for (double& v : model.w2) v = rng.uniform(-s2, s2);
    model.b2 = 0.0;

    NormalizedAdjacency adj = normalize(g);
    Mat x = model.input_features(g);

    TrainReport report;
    report.train_loss.reserve(cfg.epochs);
    report.val_loss.reserve(cfg.epochs);
    report.val_auc.reserve(cfg.epochs);
    const bool val_has_both = !single_class(subset(g.labels, masks.val));

    const auto t0 = std::chrono::steady_clock::now();
    AdamWState state;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        GcnGradients grad = gradients(model, adj, x, g.labels, masks.train);
        std::vector<double> logits = forward(model, adj, x);
        const double tl = bce_loss(logits, g.labels, masks.train);
        if (!std::isfinite(tl)) {
            throw NumericError("training loss is not finite at epoch " + std::to_string(epoch));
        }
        report.train_loss.push_back(tl);
        report.val_loss.push_back(bce_loss(logits, g.labels, masks.val));
        std::vector<double> val_scores = subset(logits, masks.val);
        report.val_auc.push_back(val_has_both
                                     ? auc(val_scores, subset(g.labels, masks.val))
                                     : std::numeric_limits<double>::quiet_NaN());

        adamw_step(model, state, grad, cfg);
        if (!all_finite(model)) {
            throw NumericError("non-finite parameter after epoch " + std::to_string(epoch));
        }
    }

    std::vector<double> logits = forward(model, adj, x);
    report.test_auc = auc(subset(logits, masks.test), subset(g.labels, masks.test));
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {std::move(model), std::move(report)};
}

double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size() || scores.empty()) {
        throw ValidationError("auc: scores and labels must be non-empty and parallel");
    }
    std::uint64_t n_pos = 0;
    for (int l : labels) n_pos += static_cast<std::uint64_t>(l);
    const std::uint64_t n_neg = labels.size() - n_pos;
    if (n_pos == 0 || n_neg == 0) {
        throw ValidationError("auc undefined: labels contain a single class");
    }

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Average ranks in half-units keep the numerator integral, so the result
    // matches the O(n^2) pairwise count bit for bit.
    std::uint64_t rank_sum_half = 0; // 2 * (sum of positive ranks)
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        const std::uint64_t two_avg_rank = static_cast<std::uint64_t>(i + 1) + j; // (i+1) + j
        for (std::size_t k = i; k < j; ++k) {
            if (labels[order[k]] == 1) rank_sum_half += two_avg_rank;
        }
        i = j;
    }
    const std::uint64_t numerator = rank_sum_half - n_pos * (n_pos + 1);
    return static_cast<double>(numerator) / (2.0 * static_cast<double>(n_pos * n_neg));
}

double predict(const GcnModel& model, const NormalizedAdjacency& adj, const Mat& x,
               std::uint32_t node) {
    if (node >= adj.n) {
        throw ValidationError("node index out of range: " + std::to_string(node));
    }
    return sigmoid(forward(model, adj, x)[node]);
}

double predict(const GcnModel& model, const Graph& g, std::uint32_t node) {
    NormalizedAdjacency adj = normalize(g);
    Mat x = model.input_features(g);
    return predict(model, adj, x, node);
}

namespace {

nlohmann::ordered_json config_json(const TrainConfig& c) {
    nlohmann::ordered_json j;
    j["learning_rate"] = c.learning_rate;
    j["weight_decay"] = c.weight_decay;
    j["epochs"] = c.epochs;
    j["hidden"] = c.hidden;
    j["seed"] = c.seed;
    j["init_scale"] = c.init_scale;
    j["standardize_features"] = c.standardize_features;
    return j;
}

TrainConfig config_from_json(const nlohmann::json& j) {
    TrainConfig c;
    c.learning_rate = j.at("learning_rate").get<double>();
    c.weight_decay = j.at("weight_decay").get<double>();
    c.epochs = j.at("epochs").get<std::size_t>();
    c.hidden = j.at("hidden").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.init_scale = j.at("init_scale").get<double>();
    c.standardize_features = j.at("standardize_features").get<bool>();
    return c;
}

} // namespace

void save_checkpoint(const GcnModel& model, const TrainReport& report,
                     const std::filesystem::path& path) {
    nlohmann::ordered_json doc;
    doc["config"] = config_json(model.config);
    doc["feature_names"] = model.feature_names;
    doc["num_features"] = model.num_features;
    doc["hidden"] = model.hidden;
    doc["W1"] = model.w1.a; // row-major num_features x hidden
    doc["b1"] = model.b1;
    doc["W2"] = model.w2;
    doc["b2"] = model.b2;
    if (model.standardizer.enabled) {
        doc["feature_mean"] = model.standardizer.mean;
        doc["feature_std"] = model.standardizer.stdev;
    }
    nlohmann::ordered_json summary;
    summary["epochs"] = report.train_loss.size();
    summary["final_train_loss"] = report.train_loss.empty() ? 0.0 : report.train_loss.back();
    summary["final_val_loss"] = report.val_loss.empty() ? 0.0 : report.val_loss.back();
    summary["test_auc"] = report.test_auc;
    doc["train_report_summary"] = std::move(summary);

    if (!path.parent_path().empty()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write checkpoint: " + path.string());
    out << doc.dump(2) << '\n';
}

GcnModel load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint: " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("checkpoint json: " + std::string(e.what()));
    }
    GcnModel model;
    model.config = config_from_json(doc.at("config"));
    model.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
    model.num_features = doc.at("num_features").get<std::size_t>();
    model.hidden = doc.at("hidden").get<std::size_t>();
    model.w1 = Mat(model.num_features, model.hidden);
    model.w1.a = doc.at("W1").get<std::vector<double>>();
    model.b1 = doc.at("b1").get<std::vector<double>>();
    model.w2 = doc.at("W2").get<std::vector<double>>();
    model.b2 = doc.at("b2").get<double>();
    if (model.w1.a.size() != model.num_features * model.hidden ||
        model.b1.size() != model.hidden || model.w2.size() != model.hidden) {
        throw ValidationError("checkpoint: inconsistent parameter shapes");
    }
    if (doc.contains("feature_mean")) {
        model.standardizer.enabled = true;
        model.standardizer.mean = doc.at("feature_mean").get<std::vector<double>>();
        model.standardizer.stdev = doc.at("feature_std").get<std::vector<double>>();
    }
    return model;
}

} // namespace graphxain
