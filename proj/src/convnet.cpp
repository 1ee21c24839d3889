#include "gatelab/convnet.hpp"

#include <cmath>

namespace gatelab {
namespace convnet {

void ConvConfig::validate() const {
    if (d_in < 1) throw DimensionError("ConvConfig: d_in must be >= 1");
    if (kernel <= 0 || kernel >= d_in)
        throw DimensionError("ConvConfig: kernel width must satisfy 0 < kernel < d_in");
    if (layers < 1) throw DimensionError("ConvConfig: need at least one conv layer");
}

ConvNet make_conv_net(const ConvConfig& cfg, ConvGateKind kind, double sigma, double mu,
                      Prng& rng) {
    cfg.validate();
    ConvNet net;
    net.cfg = cfg;
    net.gate_kind = kind;
    for (int l = 0; l < cfg.layers; ++l) {
        Vec t(cfg.kernel);
        for (double& v : t) v = rng.bernoulli_sym(sigma);
        net.taps.push_back(std::move(t));
    }
    if (kind == ConvGateKind::GaLU) {
        for (int l = 0; l < cfg.layers; ++l) {
            Vec t(cfg.kernel);
            for (double& v : t) v = rng.bernoulli_sym(sigma);
            net.gate_taps.push_back(std::move(t));
        }
    } else if (kind == ConvGateKind::Frg) {
        net.frg_gates = Matrix(cfg.layers, cfg.d_in);
        for (double& v : net.frg_gates.data) v = rng.bernoulli(mu);
    }
    return net;
}

namespace {

Vec circ_layer(const Vec& z, const Vec& taps, int d_in) {
    Vec q(d_in, 0.0);
    for (int i = 0; i < d_in; ++i)
        for (std::size_t k = 0; k < taps.size(); ++k)
            q[i] += taps[k] * z[(i + static_cast<int>(k)) % d_in];
    return q;
}

}  // namespace

ConvForward circ_conv_forward(const ConvNet& net, const Vec& x) {
    const ConvConfig& cfg = net.cfg;
    cfg.validate();
    if (x.size() != static_cast<std::size_t>(cfg.d_in))
        throw DimensionError("circ_conv_forward: signal length != d_in");

    ConvForward out;
    out.gates = Matrix(cfg.layers, cfg.d_in);

    // gating side first when the gates come from a twin net
    Vec zg = x;
    for (int l = 0; l < cfg.layers; ++l) {
        Vec row(cfg.d_in, 1.0);
        if (net.gate_kind == ConvGateKind::GaLU) {
            const Vec qg = circ_layer(zg, net.gate_taps[l], cfg.d_in);
            Vec zg_next(cfg.d_in);
            for (int i = 0; i < cfg.d_in; ++i) {
                row[i] = qg[i] > 0.0 ? 1.0 : 0.0;
                zg_next[i] = qg[i] * row[i];
            }
            zg = std::move(zg_next);
        } else if (net.gate_kind == ConvGateKind::Frg) {
            for (int i = 0; i < cfg.d_in; ++i) row[i] = net.frg_gates(l, i);
        }
        for (int i = 0; i < cfg.d_in; ++i) out.gates(l, i) = row[i];
    }

    Vec z = x;
    for (int l = 0; l < cfg.layers; ++l) {
        const Vec q = circ_layer(z, net.taps[l], cfg.d_in);
        Vec znext(cfg.d_in);
        for (int i = 0; i < cfg.d_in; ++i) znext[i] = q[i] * out.gates(l, i);
        out.z.push_back(znext);
        z = std::move(znext);
    }

    double gap = 0.0;
    for (double v : z) gap += v;
    out.gap = gap / cfg.d_in;
    return out;
}

Vec rotate_input(const Vec& x, int i) {
    const int n = static_cast<int>(x.size());
    if (n == 0) throw DimensionError("rotate_input: empty signal");
    const int shift = ((i % n) + n) % n;
    Vec out(x.size());
    for (int j = 0; j < n; ++j) out[j] = x[(j + shift) % n];
    return out;
}

std::uint64_t num_bundles(const ConvConfig& cfg) {
    std::uint64_t b = 1;
    for (int l = 0; l < cfg.layers; ++l) {
        const std::uint64_t next = b * static_cast<std::uint64_t>(cfg.kernel);
        if (next / cfg.kernel != b) throw NumericError("num_bundles: overflow");
        b = next;
    }
    return b;
}

std::uint64_t num_conv_paths(const ConvConfig& cfg) {
    return num_bundles(cfg) * static_cast<std::uint64_t>(cfg.d_in);
}

int conv_path_node(const ConvConfig& cfg, const ConvPath& p, int layer) {
    int node = p.start;
    for (int l = 0; l < layer; ++l) node = ((node - p.taps[l]) % cfg.d_in + cfg.d_in) % cfg.d_in;
    return node;
}

ConvPath conv_path_from_index(const ConvConfig& cfg, std::uint64_t global_index) {
    ConvPath p;
    p.start = static_cast<int>(global_index % cfg.d_in);
    std::uint64_t k = global_index / cfg.d_in;
    p.taps.resize(cfg.layers);
    for (int l = cfg.layers - 1; l >= 0; --l) {
        p.taps[l] = static_cast<int>(k % cfg.kernel);
        k /= cfg.kernel;
    }
    return p;
}

std::vector<std::vector<ConvPath>> enumerate_bundles(const ConvConfig& cfg,
                                                     std::uint64_t max_paths) {
    const std::uint64_t np = num_conv_paths(cfg);
    if (np > max_paths) throw BudgetError("enumerate_bundles: path count over budget");
    const std::uint64_t nb = num_bundles(cfg);
    std::vector<std::vector<ConvPath>> bundles(nb);
    for (std::uint64_t k = 0; k < nb; ++k) {
        bundles[k].reserve(cfg.d_in);
        for (int i = 0; i < cfg.d_in; ++i)
            bundles[k].push_back(conv_path_from_index(cfg, k * cfg.d_in + i));
    }
    return bundles;
}

double conv_path_strength(const ConvNet& net, const ConvPath& p) {
    double s = 1.0;
    for (int l = 0; l < net.cfg.layers; ++l) s *= net.taps[l][p.taps[l]];
    return s / net.cfg.d_in;
}

double conv_path_activation(const ConvConfig& cfg, const Matrix& gates, const ConvPath& p) {
    double a = 1.0;
    for (int l = 1; l <= cfg.layers; ++l) a *= gates(l - 1, conv_path_node(cfg, p, l));
    return a;
}

double output_via_bundles(const ConvNet& net, const Vec& x) {
    const ConvForward fwd = circ_conv_forward(net, x);
    const auto bundles = enumerate_bundles(net.cfg);
    double y = 0.0;
    for (const auto& bundle : bundles)
        for (const ConvPath& p : bundle)
            y += x[p.start] * conv_path_activation(net.cfg, fwd.gates, p) *
                 conv_path_strength(net, p);
    return y;
}

double invariance_expectation(const ConvConfig& cfg, const Matrix& gates_s,
                              const Matrix& gates_sp, const Vec& x_s, const Vec& x_sp,
                              double sigma, std::uint64_t max_paths) {
    cfg.validate();
    if (num_conv_paths(cfg) > max_paths)
        throw BudgetError("invariance_expectation: over path budget");
    const double coeff =
        std::pow(sigma, 2.0 * (cfg.d() - 1)) / (static_cast<double>(cfg.d_in) * cfg.d_in);
    const auto bundles = enumerate_bundles(cfg, max_paths);
    double total = 0.0;
    for (const auto& bundle : bundles) {
        double lhs = 0.0, rhs = 0.0;
        for (const ConvPath& p : bundle) {
            lhs += x_s[p.start] * conv_path_activation(cfg, gates_s, p);
            rhs += x_sp[p.start] * conv_path_activation(cfg, gates_sp, p);
        }
        total += lhs * rhs;
    }
    return coeff * total;
}

}  // namespace convnet
}  // namespace gatelab
