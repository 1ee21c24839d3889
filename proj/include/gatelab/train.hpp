#ifndef GATELAB_TRAIN_HPP
#define GATELAB_TRAIN_HPP

#include <functional>

#include "gatelab/gram.hpp"
#include "gatelab/network.hpp"

namespace gatelab {
namespace train {

enum class OptKind { Sgd, RmsProp };

// For SGD, `alpha` is the step of the error recursion
// e_{t+1} = e_t - alpha K_t e_t, i.e. the update applies alpha/2 to the
// gradient of L = sum (yhat - y)^2. Reported step sizes always mean this
// effective alpha. RMSprop applies `alpha` to the raw loss gradient.
// batch = 0 trains full-batch (the recursion above); batch > 0 draws a
// seeded example subset per step. Loss/ratio are always full-batch.
struct Optimizer {
    OptKind kind = OptKind::Sgd;
    double alpha = 0.1;
    double decay = 0.9;       // RMSprop second-moment decay
    double stabilizer = 1e-8; // RMSprop denominator floor
    int batch = 0;
    std::uint64_t batch_seed = 1;
};

struct Snapshot {
    int step = 0;
    double nu = 0.0;        // y^T K_hat^{-1} y, trace-normalized kernel
    double rho_max = 0.0;
    double rho_min = 0.0;
    double gate_mean = 0.0;
    double gate_on_fraction = 0.0;  // fraction of gates > (1+eps)/2
    double theta_norm = 0.0;        // L2 norm of the trainable parameters
};

struct TrajectoryRecord {
    std::vector<int> step;  // 0..T
    Vec loss;               // L_t = ||e_t||^2
    Vec ratio;              // ||e_t||^2 / ||e_0||^2
    std::vector<Snapshot> snapshots;
    double alpha_effective = 0.0;
};

// Full-batch training of the squared loss. Frozen parameter sets and
// frozen gate tensors are never touched. Aborts with NumericError when
// the loss exceeds 1e6 times its initial value. `on_snapshot`, when set,
// runs at every snapshot step with the net in its current state.
using SnapshotHook = std::function<void(const Dgn&, int)>;

TrajectoryRecord train(Dgn& net, const Matrix& data_x, const Vec& y, const Optimizer& opt,
                       int steps, int snapshot_cadence = 0, const SnapshotHook& on_snapshot = {});

// alpha = factor / rho_max(K0)
double step_from_spectrum(const Matrix& k0, double factor);

// Frozen-kernel recursion e <- (I - alpha K) e; returns
// ||e_t||^2/||e_0||^2 for t = 1..steps.
Vec predict_linear_dynamics(const Matrix& k, double alpha, const Vec& e0, int steps);

// v <- decay v + (1-decay) grad^2; param <- param - alpha grad/(sqrt(v)+stab)
void rmsprop_step(Vec& param, Vec& v, const Vec& grad, const Optimizer& opt);

}  // namespace train
}  // namespace gatelab

#endif
