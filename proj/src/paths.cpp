#include "gatelab/paths.hpp"

#include <cmath>

namespace gatelab {
namespace paths {

std::uint64_t num_paths(const NetConfig& cfg) {
    std::uint64_t p = static_cast<std::uint64_t>(cfg.d_in);
    for (int l = 0; l < cfg.d - 1; ++l) {
        const std::uint64_t next = p * static_cast<std::uint64_t>(cfg.w);
        if (cfg.w != 0 && next / static_cast<std::uint64_t>(cfg.w) != p)
            throw NumericError("num_paths: path count overflows 64 bits");
        p = next;
    }
    return p;
}

static void check_budget(const NetConfig& cfg, const PathBudget& budget) {
    const std::uint64_t p = num_paths(cfg);
    if (p > budget.max_paths)
        throw BudgetError("path enumeration over budget: " + std::to_string(p) + " > " +
                          std::to_string(budget.max_paths));
}

Path path_from_index(const NetConfig& cfg, std::uint64_t index) {
    Path p;
    p.node.resize(cfg.d);
    // lexicographic: node[0] is the most significant digit
    for (int l = cfg.d - 1; l >= 1; --l) {
        p.node[l] = static_cast<int>(index % cfg.w);
        index /= cfg.w;
    }
    p.node[0] = static_cast<int>(index);
    if (p.node[0] >= cfg.d_in) throw DimensionError("path_from_index: index out of range");
    return p;
}

std::uint64_t path_index(const NetConfig& cfg, const Path& p) {
    std::uint64_t idx = static_cast<std::uint64_t>(p.node[0]);
    for (int l = 1; l < cfg.d; ++l) idx = idx * cfg.w + static_cast<std::uint64_t>(p.node[l]);
    return idx;
}

double path_strength(const ParamSet& params, const Path& p) {
    const int d = static_cast<int>(params.layers.size());
    double s = 1.0;
    for (int l = 0; l < d; ++l) {
        const int from = p.node[l];
        const int to = l == d - 1 ? 0 : p.node[l + 1];
        s *= params.layers[l](from, to);
    }
    return s;
}

double path_activation(const GateRow& gates, const Path& p) {
    double a = 1.0;
    for (std::size_t l = 0; l < gates.rows; ++l) a *= gates(l, p.node[l + 1]);
    return a;
}

Vec feature_vector(const Vec& x, const GateRow& gates, const NetConfig& cfg,
                   const PathBudget& budget) {
    check_budget(cfg, budget);
    const std::uint64_t np = num_paths(cfg);
    Vec phi(np);
    for (std::uint64_t pi = 0; pi < np; ++pi) {
        const Path p = path_from_index(cfg, pi);
        phi[pi] = x[p.node[0]] * path_activation(gates, p);
    }
    return phi;
}

double output_via_paths(const Vec& x, const GateRow& gates, const ParamSet& params,
                        const NetConfig& cfg, const PathBudget& budget) {
    check_budget(cfg, budget);
    const std::uint64_t np = num_paths(cfg);
    double y = 0.0;
    for (std::uint64_t pi = 0; pi < np; ++pi) {
        const Path p = path_from_index(cfg, pi);
        y += x[p.node[0]] * path_activation(gates, p) * path_strength(params, p);
    }
    return y;
}

double path_sensitivity(const NetConfig& cfg, const ParamSet& params, const Path& p,
                        std::size_t m) {
    const ParamIndexer idx(cfg);
    std::size_t layer, i, j;
    idx.decode(m, layer, i, j);
    const int d = cfg.d;
    const std::size_t from = static_cast<std::size_t>(p.node[layer]);
    const std::size_t to =
        static_cast<int>(layer) == d - 1 ? 0 : static_cast<std::size_t>(p.node[layer + 1]);
    if (from != i || to != j) return 0.0;  // p does not traverse theta(m)
    double s = 1.0;
    for (int l = 0; l < d; ++l) {
        if (static_cast<std::size_t>(l) == layer) continue;
        const int lf = p.node[l];
        const int lt = l == d - 1 ? 0 : p.node[l + 1];
        s *= params.layers[l](lf, lt);
    }
    return s;
}

namespace {

// <phi_p1, phi_p2> = sum over layers where p1 and p2 traverse the same
// weight of the product of the two leave-one-out strengths
double sensitivity_inner(const NetConfig& cfg, const ParamSet& params, const Path& p1,
                         const Path& p2) {
    const int d = cfg.d;
    double total = 0.0;
    for (int l = 0; l < d; ++l) {
        const int f1 = p1.node[l], f2 = p2.node[l];
        const int t1 = l == d - 1 ? 0 : p1.node[l + 1];
        const int t2 = l == d - 1 ? 0 : p2.node[l + 1];
        if (f1 != f2 || t1 != t2) continue;
        double s1 = 1.0, s2 = 1.0;
        for (int k = 0; k < d; ++k) {
            if (k == l) continue;
            const int kt1 = k == d - 1 ? 0 : p1.node[k + 1];
            const int kt2 = k == d - 1 ? 0 : p2.node[k + 1];
            s1 *= params.layers[k](p1.node[k], kt1);
            s2 *= params.layers[k](p2.node[k], kt2);
        }
        total += s1 * s2;
    }
    return total;
}

}  // namespace

double kappa_pair(const NetConfig& cfg, const ParamSet& params, const GateRow& gates_s,
                  const GateRow& gates_sp, int node_i, int node_j, const PathBudget& budget) {
    const std::uint64_t per_node = num_paths(cfg) / static_cast<std::uint64_t>(cfg.d_in);
    if (per_node * per_node > budget.max_pairs)
        throw BudgetError("kappa: path-pair enumeration over budget");

    // enumerate hidden-node sequences; the input nodes are fixed
    NetConfig one = cfg;
    one.d_in = 1;
    double total = 0.0;
    for (std::uint64_t i1 = 0; i1 < per_node; ++i1) {
        Path p1 = path_from_index(one, i1);
        p1.node[0] = node_i;
        const double a1 = path_activation(gates_s, p1);
        if (a1 == 0.0) continue;
        for (std::uint64_t i2 = 0; i2 < per_node; ++i2) {
            Path p2 = path_from_index(one, i2);
            p2.node[0] = node_j;
            const double a2 = path_activation(gates_sp, p2);
            if (a2 == 0.0) continue;
            total += a1 * a2 * sensitivity_inner(cfg, params, p1, p2);
        }
    }
    return total;
}

double kappa(const NetConfig& cfg, const ParamSet& params, const GateRow& gates_s,
             const GateRow& gates_sp, int input_node, const PathBudget& budget) {
    return kappa_pair(cfg, params, gates_s, gates_sp, input_node, input_node, budget);
}

Vec activation_gradient(const Dgn& net, const GateRow& gates, const Matrix& jac, const Path& p) {
    const NetConfig& cfg = net.cfg;
    Vec grad(jac.cols, 0.0);
    for (int l = 0; l < cfg.d - 1; ++l) {
        double rest = 1.0;
        for (int k = 0; k < cfg.d - 1; ++k)
            if (k != l) rest *= gates(k, p.node[k + 1]);
        if (rest == 0.0) continue;
        const double* jrow = &jac.data[(static_cast<std::size_t>(l) * cfg.w + p.node[l + 1]) * jac.cols];
        for (std::size_t m = 0; m < jac.cols; ++m) grad[m] += rest * jrow[m];
    }
    return grad;
}

double activation_sensitivity(const Dgn& net, const Vec& x, const Path& p, std::size_t m_gate) {
    if (!net.cfg.is_soft())
        throw NotApplicableError(
            "activation_sensitivity: hard gates have identically zero derivative");
    const GateRow gates = compute_gates(net, x);
    const Matrix jac = gate_jacobian(net, x);
    double total = 0.0;
    for (int l = 0; l < net.cfg.d - 1; ++l) {
        double rest = 1.0;
        for (int k = 0; k < net.cfg.d - 1; ++k)
            if (k != l) rest *= gates(k, p.node[k + 1]);
        total += jac(static_cast<std::size_t>(l) * net.cfg.w + p.node[l + 1], m_gate) * rest;
    }
    return total;
}

Matrix delta_matrix(const Dgn& net, const Matrix& data_x, const PathBudget& budget) {
    const NetConfig& cfg = net.cfg;
    const std::size_t n = data_x.cols;
    // hard gates have identically zero derivatives
    if (!cfg.is_soft()) return Matrix(n, n);
    const std::uint64_t per_node = num_paths(cfg) / static_cast<std::uint64_t>(cfg.d_in);
    const std::size_t dn = d_net(cfg);
    if (per_node * dn > budget.max_pairs)
        throw BudgetError("delta_matrix: paths x d_net enumeration over budget");

    // per-example gate rows and activation gradients for every path
    NetConfig one = cfg;
    one.d_in = 1;
    std::vector<std::vector<Vec>> path_grads(n);
    for (std::size_t s = 0; s < n; ++s) {
        Vec x(data_x.rows);
        for (std::size_t i = 0; i < data_x.rows; ++i) x[i] = data_x(i, s);
        const GateRow gates = compute_gates(net, x);
        const Matrix jac = gate_jacobian(net, x);
        path_grads[s].reserve(per_node);
        for (std::uint64_t pi = 0; pi < per_node; ++pi) {
            Path p = path_from_index(one, pi);
            p.node[0] = 0;  // any input node; activations do not depend on it
            path_grads[s].push_back(activation_gradient(net, gates, jac, p));
        }
    }

    Matrix delta(n, n);
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t sp = s; sp < n; ++sp) {
            double v = 0.0;
            for (std::uint64_t pi = 0; pi < per_node; ++pi) {
                const Vec& ga = path_grads[s][pi];
                const Vec& gb = path_grads[sp][pi];
                for (std::size_t m = 0; m < ga.size(); ++m) v += ga[m] * gb[m];
            }
            delta(s, sp) = v;
            delta(sp, s) = v;
        }
    }
    return delta;
}

Matrix lambda_matrix_bruteforce(const NetConfig& cfg, const std::vector<GateRow>& gates,
                                const PathBudget& budget) {
    const std::size_t n = gates.size();
    const std::uint64_t per_node = num_paths(cfg) / static_cast<std::uint64_t>(cfg.d_in);
    if (per_node > budget.max_paths) throw BudgetError("lambda brute force over budget");

    NetConfig one = cfg;
    one.d_in = 1;
    Matrix lambda(n, n);
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t sp = s; sp < n; ++sp) {
            double v = 0.0;
            for (std::uint64_t pi = 0; pi < per_node; ++pi) {
                const Path p = path_from_index(one, pi);
                v += path_activation(gates[s], p) * path_activation(gates[sp], p);
            }
            lambda(s, sp) = v;
            lambda(sp, s) = v;
        }
    }
    return lambda;
}

}  // namespace paths
}  // namespace gatelab
