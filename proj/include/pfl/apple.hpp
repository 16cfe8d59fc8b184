#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "pfl/dataset.hpp"
#include "pfl/numerics.hpp"
#include "pfl/rng.hpp"

namespace pfl {

// Client-local learnable weights over all N core models. Entries are
// unconstrained reals and never leave the owning client.
struct DRVector {
    std::vector<double> weights;
    int owner = 0;
};

// Data-size-proportional weights [n_1/n, ..., n_N/n]; the point the DR
// penalty pulls toward.
struct ProxCenter {
    std::vector<double> weights;
};

enum class SchedulerKind { Cosine, Exponential, ConstantZero };

struct SchedulerSpec {
    SchedulerKind kind = SchedulerKind::ConstantZero;
    int cutoff_round = 1;    // L: value is 0 for every round >= L
    double epsilon = 1e-3;   // exponential only
    double mu = 0.0;         // penalty coefficient
};

ProxCenter prox_center(std::span<const int> train_sizes);

// lambda(r): cosine (cos(r*pi/L)+1)/2, exponential epsilon^(r/L), both 0
// for r >= L.
double scheduler_value(const SchedulerSpec& spec, int round);

// base + lambda * (mu/2) * ||p - p0||^2
double penalized_loss(double base_loss, const DRVector& dr, const ProxCenter& p0,
                      double lambda_r, double mu);

// d/dp_j of the penalized objective at the mixed model:
// <grad, core_j> + lambda*mu*(p_j - p0_j).
std::vector<double> dr_gradient(const ParamVector& model_grad_at_wp,
                                std::span<const ParamVector* const> core_models,
                                const DRVector& dr, const ProxCenter& p0, double lambda_r,
                                double mu);

// d/d(core_own): the frozen peers contribute nothing, so it is p_ii * grad.
ParamVector core_gradient(const ParamVector& model_grad_at_wp, double self_weight);

struct EpochParams {
    double lr_net = 0.0;
    double lr_dr = 0.0;
    double momentum = 0.0;
    double lambda_r = 0.0;
    double mu = 0.0;
    int batch_size = 256;
};

struct EpochLosses {
    double base = 0.0;       // mean cross-entropy over the epoch's samples
    double penalized = 0.0;  // base plus the DR penalty
};

// One local epoch: per mini-batch (seeded shuffle) assemble the
// personalized model, take one backward pass at it, and update the core
// model (SGD with momentum) and the DR vector (plain gradient step)
// simultaneously from that shared gradient. peer_cache has N entries; the
// slot at dr.owner is ignored in favor of core_model. Zero learning rates
// skip the corresponding update entirely.
EpochLosses apple_local_epoch(const ModelSpec& spec, const Dataset& train,
                              ParamVector& core_model, DRVector& dr, ParamVector& velocity,
                              std::span<const ParamVector> peer_cache, const ProxCenter& p0,
                              const EpochParams& params, Rng& rng);

// The personalized model: sum_j p_j * core_j with the owner slot taken
// from core_model.
ParamVector assemble_personalized(const ParamVector& core_model, const DRVector& dr,
                                  std::span<const ParamVector> peer_cache);

}  // namespace pfl
