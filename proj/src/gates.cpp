#include "gatelab/gates.hpp"

#include <cmath>

namespace gatelab {
namespace gates {

double compatibility_bound(double beta, double epsilon, double tau_active) {
    if (tau_active <= 0.0 || tau_active >= 1.0 + epsilon)
        throw NumericError("compatibility_bound: tau_active must lie in (0, 1+epsilon)");
    return soft_gate_dq(tau_active, beta, epsilon);
}

GateThresholds make_thresholds(const NetConfig& cfg, double tau_active, double tau_sensitive) {
    GateThresholds th;
    th.tau_active = tau_active;
    th.tau_sensitive = tau_sensitive;
    th.compatible =
        tau_sensitive > compatibility_bound(cfg.beta, cfg.epsilon, tau_active);
    return th;
}

GateThresholds default_thresholds(const NetConfig& cfg) {
    const double tau_a = 0.9 * (1.0 + cfg.epsilon);
    const double tau_s = 2.0 * compatibility_bound(cfg.beta, cfg.epsilon, tau_a);
    return make_thresholds(cfg, tau_a, tau_s);
}

GateClassification classify_gates(const Dgn& net, const Matrix& data_x,
                                  const GateThresholds& thresholds,
                                  std::uint64_t jacobian_budget) {
    const NetConfig& cfg = net.cfg;
    if (!cfg.is_soft())
        throw NotApplicableError("classify_gates: hard-gate variants have no gate derivatives");

    const std::size_t n = data_x.cols;
    const std::size_t layers = static_cast<std::size_t>(cfg.d - 1);
    const std::size_t width = static_cast<std::size_t>(cfg.w);
    const std::size_t gate_count = layers * width;
    const std::size_t dn = d_net(cfg);

    GateClassification cls;
    cls.n = n;
    cls.layers = layers;
    cls.width = width;
    cls.gate_value.assign(n * gate_count, 0.0);
    cls.active.assign(n * gate_count, 0);
    cls.sensitive.assign(n * gate_count, 0);
    cls.max_dg.assign(n * gate_count, 0.0);

    // column subset: everything when within budget, else an even stride
    // through each parameter layer
    std::vector<std::size_t> cols;
    if (static_cast<std::uint64_t>(gate_count) * dn <= jacobian_budget) {
        cols.resize(dn);
        for (std::size_t m = 0; m < dn; ++m) cols[m] = m;
    } else {
        cls.sampled = true;
        const ParamIndexer idx(cfg);
        const std::size_t per_layer =
            std::max<std::size_t>(1, jacobian_budget / (gate_count * idx.shapes.size() * 2));
        for (std::size_t l = 0; l < idx.shapes.size(); ++l) {
            const std::size_t lo = idx.offsets[l];
            const std::size_t hi = idx.offsets[l + 1];
            const std::size_t span = hi - lo;
            const std::size_t take = std::min(per_layer, span);
            for (std::size_t k = 0; k < take; ++k) cols.push_back(lo + (k * span) / take);
        }
        cls.sampled_columns = cols.size();
    }

    for (std::size_t s = 0; s < n; ++s) {
        Vec x(data_x.rows);
        for (std::size_t i = 0; i < data_x.rows; ++i) x[i] = data_x(i, s);
        const Matrix jac = gate_jacobian(net, x);
        const GateRow g = compute_gates(net, x);
        for (std::size_t l = 0; l < layers; ++l) {
            for (std::size_t i = 0; i < width; ++i) {
                const std::size_t f = cls.flat(s, l, i);
                cls.gate_value[f] = g(l, i);
                cls.active[f] = g(l, i) > thresholds.tau_active ? 1 : 0;
                const double* jrow = &jac.data[(l * width + i) * jac.cols];
                double mx = 0.0;
                for (std::size_t m : cols) mx = std::max(mx, std::fabs(jrow[m]));
                cls.max_dg[f] = mx;
                cls.sensitive[f] = mx > thresholds.tau_sensitive ? 1 : 0;
            }
        }
    }
    return cls;
}

SubnetworkSummary subnetwork_summary(const GateClassification& cls, const NetConfig& cfg) {
    if (cls.layers != static_cast<std::size_t>(cfg.d - 1) ||
        cls.width != static_cast<std::size_t>(cfg.w))
        throw DimensionError("subnetwork_summary: classification does not match config");
    SubnetworkSummary out;
    const std::size_t n = cls.n;
    const std::size_t layers = cls.layers;
    out.active_per_layer.assign(n, std::vector<std::size_t>(layers, 0));
    out.sensitive_per_layer.assign(n, std::vector<std::size_t>(layers, 0));
    out.active_path_count.assign(n, 0.0);
    out.sensitive_path_count.assign(n, 0.0);

    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t l = 0; l < layers; ++l)
            for (std::size_t i = 0; i < cls.width; ++i) {
                const std::size_t f = cls.flat(s, l, i);
                out.active_per_layer[s][l] += cls.active[f];
                out.sensitive_per_layer[s][l] += cls.sensitive[f];
            }
        double act = 1.0;
        for (std::size_t l = 0; l < layers; ++l)
            act *= static_cast<double>(out.active_per_layer[s][l]);
        out.active_path_count[s] = act;

        double sens = 0.0;
        for (std::size_t l = 0; l < layers; ++l) {
            double rest = 1.0;
            for (std::size_t lp = 0; lp < layers; ++lp)
                if (lp != l) rest *= static_cast<double>(out.active_per_layer[s][lp]);
            sens += static_cast<double>(out.sensitive_per_layer[s][l]) * rest;
        }
        out.sensitive_path_count[s] = sens;
    }

    out.active_overlap.reserve(layers);
    for (std::size_t l = 0; l < layers; ++l) {
        Matrix ov(n, n);
        for (std::size_t s = 0; s < n; ++s)
            for (std::size_t sp = s; sp < n; ++sp) {
                double c = 0.0;
                for (std::size_t i = 0; i < cls.width; ++i)
                    c += cls.active[cls.flat(s, l, i)] && cls.active[cls.flat(sp, l, i)] ? 1.0
                                                                                        : 0.0;
                ov(s, sp) = ov(sp, s) = c;
            }
        out.active_overlap.push_back(std::move(ov));
    }
    return out;
}

}  // namespace gates
}  // namespace gatelab
