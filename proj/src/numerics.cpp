#include "pfl/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pfl/errors.hpp"

namespace pfl {

namespace {

void check_dims(const ModelSpec& spec, const ParamVector& params, const Batch& batch) {
    if (static_cast<int>(params.size()) != param_count(spec)) {
        throw ConfigError("parameter vector has dim " + std::to_string(params.size()) +
                          ", model expects " + std::to_string(param_count(spec)));
    }
    if (batch.rows < 1) {
        throw ConfigError("batch must contain at least one sample");
    }
    if (static_cast<int>(batch.inputs.size()) != batch.rows * spec.input_dim) {
        throw ConfigError("batch input matrix does not match rows x input_dim");
    }
    if (static_cast<int>(batch.labels.size()) != batch.rows) {
        throw ConfigError("batch label count does not match row count");
    }
    for (int y : batch.labels) {
        if (y < 0 || y >= spec.num_classes) {
            throw ConfigError("batch label " + std::to_string(y) + " outside [0, " +
                              std::to_string(spec.num_classes) + ")");
        }
    }
}

void check_finite(const ParamVector& v, const char* what) {
    for (double x : v) {
        if (!std::isfinite(x)) throw NumericError(std::string(what) + " contains a non-finite value");
    }
}

// log-softmax of z in place, subtracting the row max first; returns logsumexp.
double log_softmax_inplace(std::vector<double>& z) {
    const double m = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double& v : z) {
        v -= m;
        sum += std::exp(v);
    }
    const double lse = std::log(sum);
    for (double& v : z) v -= lse;
    return lse + m;
}

struct MlpOffsets {
    int w1, b1, w2, b2;
};

MlpOffsets mlp_offsets(const ModelSpec& s) {
    const int w1 = 0;
    const int b1 = w1 + s.hidden_dim * s.input_dim;
    const int w2 = b1 + s.hidden_dim;
    const int b2 = w2 + s.num_classes * s.hidden_dim;
    return {w1, b1, w2, b2};
}

}  // namespace

int param_count(const ModelSpec& spec) {
    switch (spec.kind) {
        case ModelKind::SoftmaxRegression:
            return spec.input_dim * spec.num_classes + spec.num_classes;
        case ModelKind::Mlp1Hidden:
            return spec.input_dim * spec.hidden_dim + spec.hidden_dim +
                   spec.hidden_dim * spec.num_classes + spec.num_classes;
    }
    throw ConfigError("unknown model kind");
}

void validate_model_spec(const ModelSpec& spec) {
    if (spec.input_dim < 1) throw ConfigError("model input_dim must be positive");
    if (spec.num_classes < 2) throw ConfigError("model num_classes must be >= 2");
    if (spec.kind == ModelKind::Mlp1Hidden && spec.hidden_dim < 1) {
        throw ConfigError("mlp_1hidden needs a positive hidden_dim");
    }
}

std::vector<double> model_logits(const ModelSpec& spec, const ParamVector& params,
                                 std::span<const double> x) {
    const int C = spec.num_classes;
    const int D = spec.input_dim;
    std::vector<double> z(C);
    if (spec.kind == ModelKind::SoftmaxRegression) {
        const double* W = params.data();
        const double* b = params.data() + C * D;
        for (int c = 0; c < C; ++c) {
            double s = b[c];
            const double* w = W + c * D;
            for (int d = 0; d < D; ++d) s += w[d] * x[d];
            z[c] = s;
        }
        return z;
    }
    const int H = spec.hidden_dim;
    const auto off = mlp_offsets(spec);
    std::vector<double> h(H);
    for (int k = 0; k < H; ++k) {
        double s = params[off.b1 + k];
        const double* w = params.data() + off.w1 + k * D;
        for (int d = 0; d < D; ++d) s += w[d] * x[d];
        h[k] = s > 0.0 ? s : 0.0;
    }
    for (int c = 0; c < C; ++c) {
        double s = params[off.b2 + c];
        const double* w = params.data() + off.w2 + c * H;
        for (int k = 0; k < H; ++k) s += w[k] * h[k];
        z[c] = s;
    }
    return z;
}

double forward_loss(const ModelSpec& spec, const ParamVector& params, const Batch& batch) {
    check_dims(spec, params, batch);
    double total = 0.0;
    for (int i = 0; i < batch.rows; ++i) {
        std::span<const double> x(batch.inputs.data() + static_cast<std::size_t>(i) * spec.input_dim,
                                  static_cast<std::size_t>(spec.input_dim));
        std::vector<double> z = model_logits(spec, params, x);
        log_softmax_inplace(z);
        total -= z[batch.labels[i]];
    }
    const double loss = total / batch.rows;
    if (!std::isfinite(loss)) throw NumericError("forward loss is non-finite");
    return loss;
}

GradResult backward(const ModelSpec& spec, const ParamVector& params, const Batch& batch) {
    check_dims(spec, params, batch);
    const int C = spec.num_classes;
    const int D = spec.input_dim;
    const double inv_n = 1.0 / batch.rows;

    GradResult out;
    out.grad.assign(params.size(), 0.0);
    double total = 0.0;

    if (spec.kind == ModelKind::SoftmaxRegression) {
        double* gW = out.grad.data();
        double* gb = out.grad.data() + C * D;
        for (int i = 0; i < batch.rows; ++i) {
            std::span<const double> x(batch.inputs.data() + static_cast<std::size_t>(i) * D,
                                      static_cast<std::size_t>(D));
            std::vector<double> z = model_logits(spec, params, x);
            log_softmax_inplace(z);
            total -= z[batch.labels[i]];
            for (int c = 0; c < C; ++c) {
                double dz = std::exp(z[c]);
                if (c == batch.labels[i]) dz -= 1.0;
                dz *= inv_n;
                double* gw = gW + c * D;
                for (int d = 0; d < D; ++d) gw[d] += dz * x[d];
                gb[c] += dz;
            }
        }
    } else {
        const int H = spec.hidden_dim;
        const auto off = mlp_offsets(spec);
        std::vector<double> pre(H), h(H), z(C), dh(H);
        for (int i = 0; i < batch.rows; ++i) {
            const double* x = batch.inputs.data() + static_cast<std::size_t>(i) * D;
            for (int k = 0; k < H; ++k) {
                double s = params[off.b1 + k];
                const double* w = params.data() + off.w1 + k * D;
                for (int d = 0; d < D; ++d) s += w[d] * x[d];
                pre[k] = s;
                h[k] = s > 0.0 ? s : 0.0;
            }
            for (int c = 0; c < C; ++c) {
                double s = params[off.b2 + c];
                const double* w = params.data() + off.w2 + c * H;
                for (int k = 0; k < H; ++k) s += w[k] * h[k];
                z[c] = s;
            }
            log_softmax_inplace(z);
            total -= z[batch.labels[i]];
            std::fill(dh.begin(), dh.end(), 0.0);
            for (int c = 0; c < C; ++c) {
                double dz = std::exp(z[c]);
                if (c == batch.labels[i]) dz -= 1.0;
                dz *= inv_n;
                double* gw2 = out.grad.data() + off.w2 + c * H;
                for (int k = 0; k < H; ++k) {
                    gw2[k] += dz * h[k];
                    dh[k] += dz * params[off.w2 + c * H + k];
                }
                out.grad[off.b2 + c] += dz;
            }
            for (int k = 0; k < H; ++k) {
                if (pre[k] <= 0.0) continue;  // ReLU gate (derivative 0 at 0)
                const double da = dh[k];
                double* gw1 = out.grad.data() + off.w1 + k * D;
                for (int d = 0; d < D; ++d) gw1[d] += da * x[d];
                out.grad[off.b1 + k] += da;
            }
        }
    }

    out.loss = total / batch.rows;
    if (!std::isfinite(out.loss)) throw NumericError("loss is non-finite");
    check_finite(out.grad, "gradient");
    return out;
}

ParamVector weighted_sum(std::span<const double> coeffs,
                         std::span<const ParamVector* const> vectors) {
    if (coeffs.empty() || coeffs.size() != vectors.size()) {
        throw ConfigError("weighted_sum needs matching, nonempty coeffs and vectors");
    }
    const std::size_t dim = vectors[0]->size();
    for (const ParamVector* v : vectors) {
        if (v->size() != dim) throw ConfigError("weighted_sum vectors differ in dim");
    }
    ParamVector out(dim, 0.0);
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
        const double c = coeffs[k];
        const double* v = vectors[k]->data();
        for (std::size_t d = 0; d < dim; ++d) out[d] += c * v[d];
    }
    return out;
}

ParamVector weighted_sum(std::span<const double> coeffs, std::span<const ParamVector> vectors) {
    std::vector<const ParamVector*> ptrs(vectors.size());
    for (std::size_t k = 0; k < vectors.size(); ++k) ptrs[k] = &vectors[k];
    return weighted_sum(coeffs, std::span<const ParamVector* const>(ptrs));
}

void sgd_step(ParamVector& params, const ParamVector& grad, double lr, double momentum,
              ParamVector& velocity) {
    if (params.size() != grad.size() || params.size() != velocity.size()) {
        throw ConfigError("sgd_step dim mismatch");
    }
    for (std::size_t d = 0; d < params.size(); ++d) {
        velocity[d] = momentum * velocity[d] + grad[d];
        params[d] -= lr * velocity[d];
    }
}

ParamVector init_params(const ModelSpec& spec, Rng& rng) {
    ParamVector p(static_cast<std::size_t>(param_count(spec)), 0.0);
    const int C = spec.num_classes;
    const int D = spec.input_dim;
    if (spec.kind == ModelKind::SoftmaxRegression) {
        for (int k = 0; k < C * D; ++k) p[k] = 0.01 * rng.gaussian();
    } else {
        const auto off = mlp_offsets(spec);
        for (int k = off.w1; k < off.b1; ++k) p[k] = 0.01 * rng.gaussian();
        for (int k = off.w2; k < off.b2; ++k) p[k] = 0.01 * rng.gaussian();
    }
    return p;
}

}  // namespace pfl
