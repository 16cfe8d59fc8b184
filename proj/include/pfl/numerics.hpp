#pragma once

#include <span>
#include <vector>

#include "pfl/rng.hpp"

namespace pfl {

// Flat model parameter vector. All models in a run share one layout, so
// mixing, upload and download are plain vector operations.
using ParamVector = std::vector<double>;

enum class ModelKind { SoftmaxRegression, Mlp1Hidden };

// Parameter layouts (row-major, class-major):
//   softmax_regression: [ W (C x D) | b (C) ]
//   mlp_1hidden:        [ W1 (H x D) | b1 (H) | W2 (C x H) | b2 (C) ], ReLU
struct ModelSpec {
    ModelKind kind = ModelKind::SoftmaxRegression;
    int input_dim = 0;
    int num_classes = 0;
    int hidden_dim = 0;  // mlp_1hidden only
};

int param_count(const ModelSpec& spec);

// Validates field ranges; throws ConfigError.
void validate_model_spec(const ModelSpec& spec);

struct Batch {
    std::vector<double> inputs;  // rows x input_dim, row-major
    std::vector<int> labels;     // class indices in [0, num_classes)
    int rows = 0;
};

struct GradResult {
    double loss = 0.0;
    ParamVector grad;
};

// Mean cross-entropy over the batch, numerically stable log-softmax.
double forward_loss(const ModelSpec& spec, const ParamVector& params, const Batch& batch);

// Loss plus the exact analytic gradient (mean over the batch).
GradResult backward(const ModelSpec& spec, const ParamVector& params, const Batch& batch);

// Fixed-order weighted sum of same-dim vectors; coefficients are
// unconstrained reals.
ParamVector weighted_sum(std::span<const double> coeffs,
                         std::span<const ParamVector* const> vectors);
ParamVector weighted_sum(std::span<const double> coeffs,
                         std::span<const ParamVector> vectors);

// velocity <- momentum * velocity + grad; params <- params - lr * velocity
void sgd_step(ParamVector& params, const ParamVector& grad, double lr,
              double momentum, ParamVector& velocity);

// Gaussian(0, 0.01) weights, zero biases.
ParamVector init_params(const ModelSpec& spec, Rng& rng);

// Per-class logits for one sample (used by evaluation).
std::vector<double> model_logits(const ModelSpec& spec, const ParamVector& params,
                                 std::span<const double> x);

}  // namespace pfl
