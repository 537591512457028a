#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ivpinn/assembly.hpp"
#include "ivpinn/lifting.hpp"
#include "ivpinn/network.hpp"

namespace ivpinn {

enum class SecondOrderMethod { bfgs, lbfgs, none };

struct TrainingConfig {
    int adam_epochs = 3000;
    double adam_lr0 = 1e-3;
    double lr_half_life = 1000.0;  // epochs per halving of the learning rate
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;

    SecondOrderMethod second_order = SecondOrderMethod::lbfgs;
    int second_order_max_iters = 2000;
    int lbfgs_memory = 20;
    double wolfe_c1 = 1e-4;
    double wolfe_c2 = 0.9;
    double grad_tol = 1e-10;
    double stagnation_rtol = 1e-14;
    int stagnation_patience = 30;

    int checkpoint_every = 500;
    std::uint64_t seed = 0;
    bool record_h1 = false;

    void validate() const;
};

struct HistoryEntry {
    int epoch = 0;
    double loss = 0.0;
    char phase = 'A';  // 'A' adam, 'B' bfgs, 'L' lbfgs
    double elapsed_seconds = 0.0;
    double h1_error = std::numeric_limits<double>::quiet_NaN();
};

struct TrainingHistory {
    std::vector<HistoryEntry> entries;
    bool aborted_nonfinite = false;
};

void write_history_csv(const TrainingHistory& history, const std::string& path);

struct TrainResult {
    MlpNetwork net;
    TrainingHistory history;
    double final_loss = 0.0;
};

/// Loss and gradient of a flat weight vector.
using Objective = std::function<double(std::span<const double>, std::span<double>)>;

/// Per-epoch observer; receives the latest interpolation-node values of B w
/// and returns the value recorded in the history's h1_error column.
using NodeObserver = std::function<double(std::span<const double>)>;

/// A residual loss bound to an assembled system; fn evaluates loss and weight
/// gradient, u_nodes() exposes the nodal values from the latest evaluation.
/// The referenced system/lifting must outlive the handle.
struct LossHandle {
    Objective fn;
    int n_weights = 0;
    std::function<std::span<const double>()> u_nodes;
    std::shared_ptr<void> state;
};

LossHandle make_ivpinn_loss(const AssembledSystem& system, const BoundaryLifting& lifting,
                            const MlpNetwork& prototype);

/// Non-interpolated variant (tanh only, linear problems only): B w and its
/// gradient are evaluated at the quadrature points through the network.
LossHandle make_vpinn_noninterp_loss(const AssembledSystem& system, const BoundaryLifting& lifting,
                                     const MlpNetwork& prototype);

/// Sum of per-parameter losses for a 3-input network; systems share meshes.
LossHandle make_parametric_loss(const std::vector<const AssembledSystem*>& systems,
                                const std::vector<const BoundaryLifting*>& liftings,
                                const MlpNetwork& prototype);

double adam_minimize(const Objective& obj, std::vector<double>& x, const TrainingConfig& cfg,
                     TrainingHistory& history, const std::function<double()>* observer);

double second_order_minimize(const Objective& obj, std::vector<double>& x, const TrainingConfig& cfg,
                             TrainingHistory& history, const std::function<double()>* observer);

TrainResult train_ivpinn(const AssembledSystem& system, const BoundaryLifting& lifting,
                         MlpNetwork net, const TrainingConfig& cfg,
                         const NodeObserver* h1_of_nodes = nullptr);

TrainResult train_vpinn_noninterp(const AssembledSystem& system, const BoundaryLifting& lifting,
                                  MlpNetwork net, const TrainingConfig& cfg,
                                  const NodeObserver* h1_of_nodes = nullptr);

TrainResult train_parametric(const std::vector<const AssembledSystem*>& systems,
                             const std::vector<const BoundaryLifting*>& liftings, MlpNetwork net,
                             const TrainingConfig& cfg);

/// Nodal values of B w at the interpolation nodes for a trained network.
std::vector<double> interpolation_node_values(const AssembledSystem& system,
                                              const BoundaryLifting& lifting,
                                              const MlpNetwork& net, double p_input = 0.0,
                                              bool with_p_input = false);

}  // namespace ivpinn
