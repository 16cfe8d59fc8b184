#include "pfl/apple.hpp"

#include <cmath>
#include <numeric>

#include "pfl/errors.hpp"

namespace pfl {

ProxCenter prox_center(std::span<const int> train_sizes) {
    if (train_sizes.empty()) throw ConfigError("prox_center needs at least one client");
    long long total = 0;
    for (int n : train_sizes) {
        if (n < 1) throw ConfigError("prox_center needs positive train sizes");
        total += n;
    }
    ProxCenter p0;
    p0.weights.reserve(train_sizes.size());
    for (int n : train_sizes) {
        p0.weights.push_back(static_cast<double>(n) / static_cast<double>(total));
    }
    return p0;
}

double scheduler_value(const SchedulerSpec& spec, int round) {
    if (round < 0) throw ConfigError("scheduler round must be nonnegative");
    if (spec.kind == SchedulerKind::ConstantZero) return 0.0;
    if (round >= spec.cutoff_round) return 0.0;
    const double L = static_cast<double>(spec.cutoff_round);
    if (spec.kind == SchedulerKind::Cosine) {
        return (std::cos(round * M_PI / L) + 1.0) / 2.0;
    }
    return std::pow(spec.epsilon, round / L);
}

double penalized_loss(double base_loss, const DRVector& dr, const ProxCenter& p0,
                      double lambda_r, double mu) {
    if (dr.weights.size() != p0.weights.size()) {
        throw ConfigError("DR vector and prox-center length mismatch");
    }
    double sq = 0.0;
    for (std::size_t j = 0; j < dr.weights.size(); ++j) {
        const double d = dr.weights[j] - p0.weights[j];
        sq += d * d;
    }
    return base_loss + lambda_r * (mu / 2.0) * sq;
}

std::vector<double> dr_gradient(const ParamVector& model_grad_at_wp,
                                std::span<const ParamVector* const> core_models,
                                const DRVector& dr, const ProxCenter& p0, double lambda_r,
                                double mu) {
    const std::size_t n = core_models.size();
    if (dr.weights.size() != n || p0.weights.size() != n) {
        throw ConfigError("dr_gradient length mismatch");
    }
    std::vector<double> g(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        const ParamVector& w = *core_models[j];
        if (w.size() != model_grad_at_wp.size()) {
            throw ConfigError("dr_gradient core model dim mismatch");
        }
        double dot = 0.0;
        for (std::size_t d = 0; d < w.size(); ++d) dot += model_grad_at_wp[d] * w[d];
        g[j] = dot + lambda_r * mu * (dr.weights[j] - p0.weights[j]);
    }
    return g;
}

ParamVector core_gradient(const ParamVector& model_grad_at_wp, double self_weight) {
    ParamVector g(model_grad_at_wp.size());
    for (std::size_t d = 0; d < g.size(); ++d) g[d] = self_weight * model_grad_at_wp[d];
    return g;
}

ParamVector assemble_personalized(const ParamVector& core_model, const DRVector& dr,
                                  std::span<const ParamVector> peer_cache) {
    const std::size_t n = dr.weights.size();
    if (peer_cache.size() != n) throw ConfigError("peer cache size != DR length");
    std::vector<const ParamVector*> models(n);
    for (std::size_t j = 0; j < n; ++j) {
        models[j] = (static_cast<int>(j) == dr.owner) ? &core_model : &peer_cache[j];
    }
    return weighted_sum(dr.weights, std::span<const ParamVector* const>(models));
}

EpochLosses apple_local_epoch(const ModelSpec& spec, const Dataset& train,
                              ParamVector& core_model, DRVector& dr, ParamVector& velocity,
                              std::span<const ParamVector> peer_cache, const ProxCenter& p0,
                              const EpochParams& params, Rng& rng) {
    const std::size_t n_models = dr.weights.size();
    if (peer_cache.size() != n_models) throw ConfigError("peer cache size != DR length");
    if (train.size() < 1) throw DataError("client has no training samples");
    if (params.batch_size < 1) throw ConfigError("batch_size must be positive");

    std::vector<int> order(train.size());
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);

    std::vector<const ParamVector*> models(n_models);

    double loss_sum = 0.0;
    double pen_sum = 0.0;
    for (int start = 0; start < train.size(); start += params.batch_size) {
        const int end = std::min(train.size(), start + params.batch_size);
        const Batch batch = gather_batch(
            train, std::span<const int>(order.data() + start, static_cast<std::size_t>(end - start)));

        for (std::size_t j = 0; j < n_models; ++j) {
            models[j] = (static_cast<int>(j) == dr.owner) ? &core_model : &peer_cache[j];
        }
        const ParamVector wp = weighted_sum(dr.weights, std::span<const ParamVector* const>(models));
        const GradResult res = backward(spec, wp, batch);

        loss_sum += res.loss * batch.rows;
        pen_sum += penalized_loss(res.loss, dr, p0, params.lambda_r, params.mu) * batch.rows;

        // Simultaneous update: both gradients are taken at the pre-update
        // core model and DR vector before either step is applied.
        std::vector<double> g_dr;
        if (params.lr_dr != 0.0) {
            g_dr = dr_gradient(res.grad, std::span<const ParamVector* const>(models), dr, p0,
                               params.lambda_r, params.mu);
        }
        if (params.lr_net != 0.0) {
            const ParamVector g_core = core_gradient(res.grad, dr.weights[dr.owner]);
            sgd_step(core_model, g_core, params.lr_net, params.momentum, velocity);
        }
        if (params.lr_dr != 0.0) {
            for (std::size_t j = 0; j < n_models; ++j) {
                dr.weights[j] -= params.lr_dr * g_dr[j];
            }
        }
    }

    EpochLosses out;
    out.base = loss_sum / train.size();
    out.penalized = pen_sum / train.size();
    return out;
}

}  // namespace pfl
