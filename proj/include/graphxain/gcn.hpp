#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "graphxain/dense.hpp"
#include "graphxain/graph.hpp"

namespace graphxain {

struct TrainConfig {
    double learning_rate = 1e-3;
    double weight_decay = 5e-4;
    std::size_t epochs = 1400;
    std::size_t hidden = 16;
    std::uint64_t seed = 42;
    double init_scale = 1.0;            // multiplier on the Glorot-uniform bound
    bool standardize_features = false;  // mean 0 / var 1, fit on train nodes only

    void validate() const;
};

// Per-feature affine transform fit on the training nodes. Disabled by default;
// when enabled it travels with the model so inference sees the same inputs.
struct Standardizer {
    bool enabled = false;
    std::vector<double> mean;
    std::vector<double> stdev;

    void apply(Mat& x) const;
};

// Two-layer GCN, binary head:
//   logits = A^ relu(A^ X W1 + b1) W2 + b2
struct GcnModel {
    std::size_t num_features = 0;
    std::size_t hidden = 0;
    Mat w1;                  // num_features x hidden
    std::vector<double> b1;  // hidden
    std::vector<double> w2;  // hidden
    double b2 = 0.0;
    Standardizer standardizer;
    std::vector<std::string> feature_names;
    TrainConfig config;

    // Graph features with the model's input transform applied.
    Mat input_features(const Graph& g) const;
};

struct GcnGradients {
    Mat w1;
    std::vector<double> b1;
    std::vector<double> w2;
    double b2 = 0.0;
};

struct TrainReport {
    std::vector<double> train_loss;
    std::vector<double> val_loss;
    std::vector<double> val_auc; // NaN when the val split is single-class
    double test_auc = 0.0;
    double wall_seconds = 0.0;
};

std::vector<double> forward(const GcnModel& model, const NormalizedAdjacency& adj, const Mat& x);

double bce_loss(const std::vector<double>& logits, const std::vector<int>& labels,
                const std::vector<std::uint32_t>& mask);

GcnGradients gradients(const GcnModel& model, const NormalizedAdjacency& adj, const Mat& x,
                       const std::vector<int>& labels, const std::vector<std::uint32_t>& mask);

// AdamW moments; shapes mirror the parameters.
struct AdamWState {
    GcnGradients m;
    GcnGradients v;
    std::size_t step = 0;
};

// One decoupled-weight-decay Adam update on a flat parameter block:
// theta <- theta (1 - lr wd), then the bias-corrected Adam step.
// beta1 = 0.9, beta2 = 0.999, eps = 1e-8.
void adamw_update_flat(double* param, const double* grad, double* m, double* v,
                       std::size_t n, std::size_t step, double lr, double weight_decay);

void adamw_step(GcnModel& model, AdamWState& state, const GcnGradients& g,
                const TrainConfig& cfg);

std::pair<GcnModel, TrainReport> train(const Graph& g, const SplitMasks& masks,
                                       const TrainConfig& cfg);

// Rank-based AUC, ties count 1/2; exact (integer numerator).
// Throws ValidationError when labels are single-class.
double auc(const std::vector<double>& scores, const std::vector<int>& labels);

double predict(const GcnModel& model, const NormalizedAdjacency& adj, const Mat& x,
               std::uint32_t node);
double predict(const GcnModel& model, const Graph& g, std::uint32_t node);

// Checkpoint JSON; doubles round-trip exactly (shortest decimal encoding).
void save_checkpoint(const GcnModel& model, const TrainReport& report,
                     const std::filesystem::path& path);
GcnModel load_checkpoint(const std::filesystem::path& path);

} // namespace graphxain
