#ifndef GATELAB_PATHS_HPP
#define GATELAB_PATHS_HPP

#include <cstdint>

#include "gatelab/network.hpp"

namespace gatelab {
namespace paths {

// A path visits one input node, one hidden node per gated layer, and the
// output node. node[0] in [d_in], node[1..d-1] in [w]; the output index
// is implicit. Enumeration is lexicographic over the node tuple and
// stable across runs.
struct Path {
    std::vector<int> node;
};

struct PathBudget {
    std::uint64_t max_paths = 10'000'000;
    std::uint64_t max_pairs = 10'000'000;
};

// d_in * w^(d-1); throws on 64-bit overflow.
std::uint64_t num_paths(const NetConfig& cfg);

Path path_from_index(const NetConfig& cfg, std::uint64_t index);
std::uint64_t path_index(const NetConfig& cfg, const Path& p);

// product of the d traversed weights
double path_strength(const ParamSet& params, const Path& p);

// product of the d-1 traversed gate values
double path_activation(const GateRow& gates, const Path& p);

// entry p is x(p(0)) * A(x, p), in enumeration order
Vec feature_vector(const Vec& x, const GateRow& gates, const NetConfig& cfg,
                   const PathBudget& budget = {});

// sum_p feature(p) * strength(p); must agree with network::forward
double output_via_paths(const Vec& x, const GateRow& gates, const ParamSet& params,
                        const NetConfig& cfg, const PathBudget& budget = {});

// leave-one-out weight product when p traverses theta(m), else 0
double path_sensitivity(const NetConfig& cfg, const ParamSet& params, const Path& p,
                        std::size_t m);

// sum over path pairs through input node i of
// A(x_s,p1) A(x_s',p2) <phi_p1, phi_p2>
double kappa(const NetConfig& cfg, const ParamSet& params, const GateRow& gates_s,
             const GateRow& gates_sp, int input_node, const PathBudget& budget = {});

// same path-pair sum with p1 through node i and p2 through node j; the
// full signal/wire expansion K(s,s') = sum_{i,j} x(i,s) x(j,s')
// kappa_pair(i,j) is exact, while the diagonal-only grouping drops the
// i != j pairs that still share deeper-layer weights (their inner
// products vanish only in expectation)
double kappa_pair(const NetConfig& cfg, const ParamSet& params, const GateRow& gates_s,
                  const GateRow& gates_sp, int node_i, int node_j,
                  const PathBudget& budget = {});

// Eq-8-style derivative of the path activation w.r.t. one gating
// parameter, via the analytic gate Jacobian. Soft variants only.
double activation_sensitivity(const Dgn& net, const Vec& x, const Path& p, std::size_t m_gate);

// derivative of A(x,p) w.r.t. every gating parameter; jac is
// gate_jacobian(net, x), passed in so callers can amortize it
Vec activation_gradient(const Dgn& net, const GateRow& gates, const Matrix& jac, const Path& p);

// Brute-force delta(s,s') = sum_{p from one input node} sum_m
// dA(x_s,p)/dtheta_g(m) * dA(x_s',p)/dtheta_g(m). Symmetric PSD.
Matrix delta_matrix(const Dgn& net, const Matrix& data_x, const PathBudget& budget = {});

// Brute-force lambda(s,s') = sum_{p from one input node} A_s(p) A_s'(p),
// the oracle the gram module's factorized lambda is checked against.
Matrix lambda_matrix_bruteforce(const NetConfig& cfg, const std::vector<GateRow>& gates,
                                const PathBudget& budget = {});

}  // namespace paths
}  // namespace gatelab

#endif
