#include "gatelab/train.hpp"

#include <cmath>

namespace gatelab {
namespace train {

namespace {

Vec column(const Matrix& m, std::size_t j) {
    Vec v(m.rows);
    for (std::size_t i = 0; i < m.rows; ++i) v[i] = m(i, j);
    return v;
}

// Subtracts scale * update from the trainable parameter blocks; frozen
// blocks are skipped entirely, never written.
void apply_update(Dgn& net, const Vec& update, double scale) {
    const ParamIndexer idx(net.cfg);
    std::size_t m = 0;
    if (net.cfg.train_weights) {
        for (Matrix& layer : net.weights.layers)
            for (double& v : layer.data) v -= scale * update[m++];
    } else {
        m += idx.total();
    }
    if (net.cfg.variant == Variant::SoftGaLU) {
        if (net.cfg.train_gate_params) {
            for (Matrix& layer : net.gate_params.layers)
                for (double& v : layer.data) v -= scale * update[m++];
        }
    }
}

Snapshot take_snapshot(const Dgn& net, const Matrix& data_x, const Vec& y, int step) {
    Snapshot snap;
    snap.step = step;
    const gram::GramMatrix k = gram::gram_direct(net, data_x);
    const SymEigen eig = sym_eigen(k.m);
    snap.rho_max = eig.eigenvalues.back();
    snap.rho_min = eig.eigenvalues.front();
    snap.nu = gram::nu(k.m, y, /*normalize=*/true);

    double sq = 0.0;
    if (net.cfg.train_weights)
        for (const Matrix& layer : net.weights.layers)
            for (double v : layer.data) sq += v * v;
    if (net.cfg.variant == Variant::SoftGaLU && net.cfg.train_gate_params)
        for (const Matrix& layer : net.gate_params.layers)
            for (double v : layer.data) sq += v * v;
    snap.theta_norm = std::sqrt(sq);

    double gate_sum = 0.0;
    double on = 0.0;
    std::size_t count = 0;
    const double mid = (1.0 + net.cfg.epsilon) / 2.0;
    for (std::size_t s = 0; s < data_x.cols; ++s) {
        const GateRow g = compute_gates(net, column(data_x, s), static_cast<long>(s));
        for (double v : g.data) {
            gate_sum += v;
            if (v > mid) on += 1.0;
            ++count;
        }
    }
    snap.gate_mean = count ? gate_sum / count : 0.0;
    snap.gate_on_fraction = count ? on / count : 0.0;
    return snap;
}

}  // namespace

TrajectoryRecord train(Dgn& net, const Matrix& data_x, const Vec& y, const Optimizer& opt,
                       int steps, int snapshot_cadence, const SnapshotHook& on_snapshot) {
    if (data_x.cols == 0) throw DimensionError("train: dataset is empty");
    if (data_x.cols != y.size()) throw DimensionError("train: label count mismatch");
    if (opt.alpha < 0.0) throw NumericError("train: negative step size");
    if (opt.kind == OptKind::RmsProp && (opt.decay <= 0.0 || opt.decay >= 1.0))
        throw NumericError("train: RMSprop decay must be in (0,1)");

    const std::size_t n = data_x.cols;
    const std::size_t dim = ntf_dimension(net.cfg);
    TrajectoryRecord rec;
    rec.alpha_effective = opt.alpha;

    Vec rms_v(opt.kind == OptKind::RmsProp ? dim : 0, 0.0);
    double loss0 = -1.0;
    Prng batch_rng(opt.batch_seed);
    const bool minibatch = opt.batch > 0 && static_cast<std::size_t>(opt.batch) < n;

    for (int t = 0; t <= steps; ++t) {
        std::vector<std::uint8_t> in_batch(n, 1);
        if (minibatch && t < steps) {
            in_batch.assign(n, 0);
            for (int k = 0; k < opt.batch; ++k) {
                std::size_t s;
                do {
                    s = static_cast<std::size_t>(batch_rng.next_u64() % n);
                } while (in_batch[s]);
                in_batch[s] = 1;
            }
        }
        // gradient accumulation g = sum_s e_s psi_s and full-batch loss
        Vec g(dim, 0.0);
        double loss = 0.0;
        for (std::size_t s = 0; s < n; ++s) {
            const Vec xs = column(data_x, s);
            const ForwardCache cache = forward(net, xs, static_cast<long>(s));
            const double err = cache.yhat - y[s];
            loss += err * err;
            if (t == steps || !in_batch[s]) continue;
            const BackpropState bp = backprop(net, cache);
            const Vec psi = ntf_from_state(net, cache, bp);
            for (std::size_t m = 0; m < dim; ++m) g[m] += err * psi[m];
        }

        if (t == 0) loss0 = loss;
        rec.step.push_back(t);
        rec.loss.push_back(loss);
        rec.ratio.push_back(loss0 > 0.0 ? loss / loss0 : (loss == 0.0 ? 0.0 : 1.0));

        if (loss0 > 0.0 && loss > 1e6 * loss0)
            throw NumericError("train: diverged, loss exceeds 1e6 x initial at step " +
                               std::to_string(t));
        if (snapshot_cadence > 0 && (t % snapshot_cadence == 0 || t == steps)) {
            rec.snapshots.push_back(take_snapshot(net, data_x, y, t));
            if (on_snapshot) on_snapshot(net, t);
        }
        if (t == steps) break;

        if (opt.kind == OptKind::Sgd) {
            // theta <- theta - alpha * Psi e  (== (alpha/2) * grad L)
            apply_update(net, g, opt.alpha);
        } else {
            Vec grad(dim);
            for (std::size_t m = 0; m < dim; ++m) grad[m] = 2.0 * g[m];
            for (std::size_t m = 0; m < dim; ++m) {
                rms_v[m] = opt.decay * rms_v[m] + (1.0 - opt.decay) * grad[m] * grad[m];
                grad[m] = grad[m] / (std::sqrt(rms_v[m]) + opt.stabilizer);
            }
            apply_update(net, grad, opt.alpha);
        }
    }
    return rec;
}

double step_from_spectrum(const Matrix& k0, double factor) {
    const SymEigen eig = sym_eigen(k0);
    const double rho_max = eig.eigenvalues.back();
    if (rho_max <= 0.0) throw NumericError("step_from_spectrum: rho_max must be positive");
    return factor / rho_max;
}

Vec predict_linear_dynamics(const Matrix& k, double alpha, const Vec& e0, int steps) {
    if (k.rows != k.cols || k.rows != e0.size())
        throw DimensionError("predict_linear_dynamics: shape mismatch");
    double norm0 = 0.0;
    for (double v : e0) norm0 += v * v;

    Vec e = e0;
    Vec ratios;
    ratios.reserve(steps);
    for (int t = 0; t < steps; ++t) {
        Vec ke(e.size(), 0.0);
        for (std::size_t i = 0; i < k.rows; ++i)
            for (std::size_t j = 0; j < k.cols; ++j) ke[i] += k(i, j) * e[j];
        for (std::size_t i = 0; i < e.size(); ++i) e[i] -= alpha * ke[i];
        double norm = 0.0;
        for (double v : e) norm += v * v;
        ratios.push_back(norm0 > 0.0 ? norm / norm0 : 0.0);
    }
    return ratios;
}

void rmsprop_step(Vec& param, Vec& v, const Vec& grad, const Optimizer& opt) {
    if (param.size() != v.size() || param.size() != grad.size())
        throw DimensionError("rmsprop_step: state shapes do not match");
    for (std::size_t m = 0; m < param.size(); ++m) {
        v[m] = opt.decay * v[m] + (1.0 - opt.decay) * grad[m] * grad[m];
        param[m] -= opt.alpha * grad[m] / (std::sqrt(v[m]) + opt.stabilizer);
    }
}

}  // namespace train
}  // namespace gatelab
