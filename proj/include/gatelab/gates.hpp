#ifndef GATELAB_GATES_HPP
#define GATELAB_GATES_HPP

#include <cstdint>

#include "gatelab/network.hpp"

namespace gatelab {
namespace gates {

// |dG/dq| evaluated at gate value tau_active, including the beta chain
// factor: beta * tau_A * (1 + eps - tau_A) / (1 + eps). Gates above
// tau_A have a smaller derivative magnitude whenever tau_A > (1+eps)/2.
double compatibility_bound(double beta, double epsilon, double tau_active);

struct GateThresholds {
    double tau_active = 0.0;
    double tau_sensitive = 0.0;
    bool compatible = false;  // tau_sensitive > compatibility_bound(tau_active)
};

// Defaults: tau_A = 0.9 (1+eps), tau_S = 2 x compatibility_bound.
GateThresholds default_thresholds(const NetConfig& cfg);
GateThresholds make_thresholds(const NetConfig& cfg, double tau_active, double tau_sensitive);

struct GateClassification {
    std::size_t n = 0, layers = 0, width = 0;
    Vec gate_value;                 // per (s, l, i)
    std::vector<std::uint8_t> active;
    std::vector<std::uint8_t> sensitive;
    Vec max_dg;                     // max_m |dG/dtheta_g(m)|
    bool sampled = false;           // true when the Jacobian columns were subsampled
    std::size_t sampled_columns = 0;

    std::size_t flat(std::size_t s, std::size_t l, std::size_t i) const {
        return (s * layers + l) * width + i;
    }
};

// active: G > tau_A; sensitive: max_m |dG/dtheta_g(m)| > tau_S. The full
// per-gate Jacobian is used while gates x d_net stays within budget;
// beyond that each layer's parameter columns are subsampled evenly and
// the classification records it.
GateClassification classify_gates(const Dgn& net, const Matrix& data_x,
                                  const GateThresholds& thresholds,
                                  std::uint64_t jacobian_budget = 10'000'000);

struct SubnetworkSummary {
    // per example
    std::vector<std::vector<std::size_t>> active_per_layer;
    std::vector<std::vector<std::size_t>> sensitive_per_layer;
    Vec active_path_count;     // prod_l |A_l|
    Vec sensitive_path_count;  // sum_l |S_l| prod_{l' != l} |A_l'|
    // pairwise active-gate overlap, one n x n count matrix per layer
    std::vector<Matrix> active_overlap;
};

SubnetworkSummary subnetwork_summary(const GateClassification& cls, const NetConfig& cfg);

}  // namespace gates
}  // namespace gatelab

#endif
