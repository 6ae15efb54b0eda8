#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace graphxain {

// Row-major dense matrix of doubles. The numerical core is double precision
// throughout so finite-difference checks stay tight.
struct Mat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), a(r * c, fill) {}

    double& at(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
    double* row(std::size_t i) { return a.data() + i * cols; }
    const double* row(std::size_t i) const { return a.data() + i * cols; }
};

inline double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    double e = std::exp(z);
    return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
inline double softplus(double z) {
    if (z > 0.0) return z + std::log1p(std::exp(-z));
    return std::log1p(std::exp(z));
}

// -[y log s(z) + (1-y) log(1-s(z))] in the log-sum-exp form.
inline double bce_term(double logit, int label) {
    return softplus(logit) - static_cast<double>(label) * logit;
}

// Binary entropy of p in nats; p must be in (0, 1).
inline double binary_entropy(double p) {
    return -p * std::log(p) - (1.0 - p) * std::log(1.0 - p);
}

inline double relu(double x) { return x > 0.0 ? x : 0.0; }

// Subgradient at 0 is fixed to 0 so gradient checks are deterministic.
inline double relu_grad(double x) { return x > 0.0 ? 1.0 : 0.0; }

} // namespace graphxain
