#include "gatelab/gram.hpp"

#include <algorithm>
#include <cmath>

namespace gatelab {
namespace gram {

namespace {

Vec column(const Matrix& m, std::size_t j) {
    Vec v(m.rows);
    for (std::size_t i = 0; i < m.rows; ++i) v[i] = m(i, j);
    return v;
}

double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

Matrix ntf_matrix(const Dgn& net, const Matrix& data_x) {
    if (data_x.rows != static_cast<std::size_t>(net.cfg.d_in))
        throw DimensionError("ntf_matrix: data dimension != d_in");
    const std::size_t n = data_x.cols;
    Matrix psi(ntf_dimension(net.cfg), n);
    for (std::size_t s = 0; s < n; ++s) {
        const Vec g = ntf_column(net, column(data_x, s), static_cast<long>(s));
        for (std::size_t m = 0; m < g.size(); ++m) psi(m, s) = g[m];
    }
    return psi;
}

GramMatrix gram(const Matrix& ntf) {
    const std::size_t n = ntf.cols;
    GramMatrix k;
    k.kind = GramKind::Full;
    k.m = Matrix(n, n);
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t sp = s; sp < n; ++sp) {
            double v = 0.0;
            for (std::size_t m = 0; m < ntf.rows; ++m) v += ntf(m, s) * ntf(m, sp);
            k.m(s, sp) = v;
            k.m(sp, s) = v;
        }
    }
    return k;
}

std::pair<GramMatrix, GramMatrix> gram_split_soft_galu(const NetConfig& cfg, const Matrix& ntf) {
    if (cfg.variant != Variant::SoftGaLU)
        throw NotApplicableError("gram_split_soft_galu: defined for the soft-GaLU variant");
    const std::size_t dn = d_net(cfg);
    if (ntf.rows != 2 * dn)
        throw DimensionError("gram_split_soft_galu: NTF does not carry two parameter blocks");
    const std::size_t n = ntf.cols;

    GramMatrix kw, ka;
    kw.kind = GramKind::Strength;
    ka.kind = GramKind::Gate;
    kw.m = Matrix(n, n);
    ka.m = Matrix(n, n);
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t sp = s; sp < n; ++sp) {
            double vw = 0.0, va = 0.0;
            for (std::size_t m = 0; m < dn; ++m) vw += ntf(m, s) * ntf(m, sp);
            for (std::size_t m = dn; m < 2 * dn; ++m) va += ntf(m, s) * ntf(m, sp);
            kw.m(s, sp) = kw.m(sp, s) = vw;
            ka.m(s, sp) = ka.m(sp, s) = va;
        }
    }
    return {kw, ka};
}

namespace {

// Per-example factorized gradient state: the layer inner products below
// reconstruct every Gram entry exactly.
struct KernelState {
    std::vector<Vec> z;        // z(0)=x .. z(d-1)
    std::vector<Vec> delta;    // strength net, layers 1..d-1, plus head scalar 1
    std::vector<Vec> zg;       // gating net inputs (soft-GaLU)
    std::vector<Vec> delta_g;  // gating net deltas (soft-GaLU)
};

KernelState kernel_state(const Dgn& net, const Vec& x, long example) {
    KernelState st;
    const ForwardCache c = forward(net, x, example);
    const BackpropState bp = backprop(net, c);
    st.z.push_back(c.x);
    for (const Vec& z : c.z) st.z.push_back(z);
    st.delta = bp.delta;
    if (net.cfg.variant == Variant::SoftGaLU) {
        // inputs of gating layers 1..d-1; the last gating output feeds
        // only the unused gating head
        st.zg.push_back(c.x);
        for (int l = 0; l + 1 < net.cfg.d - 1; ++l) st.zg.push_back(c.zg[l]);
        st.delta_g = bp.delta_g;
    }
    return st;
}

double strength_entry(const KernelState& a, const KernelState& b, int d) {
    double total = 0.0;
    for (int l = 0; l < d - 1; ++l)
        total += dot(a.z[l], b.z[l]) * dot(a.delta[l], b.delta[l]);
    // output layer: delta is the scalar 1
    total += dot(a.z[d - 1], b.z[d - 1]);
    return total;
}

double gate_entry(const KernelState& a, const KernelState& b, int d) {
    double total = 0.0;
    for (int l = 0; l < d - 1; ++l)
        total += dot(a.zg[l], b.zg[l]) * dot(a.delta_g[l], b.delta_g[l]);
    return total;
}

}  // namespace

GramMatrix gram_direct(const Dgn& net, const Matrix& data_x) {
    const std::size_t n = data_x.cols;
    const int d = net.cfg.d;
    std::vector<KernelState> states;
    states.reserve(n);
    for (std::size_t s = 0; s < n; ++s) states.push_back(kernel_state(net, column(data_x, s), static_cast<long>(s)));

    GramMatrix k;
    k.kind = GramKind::Full;
    k.m = Matrix(n, n);
    const bool split = net.cfg.variant == Variant::SoftGaLU;
    for (std::size_t s = 0; s < n; ++s)
        for (std::size_t sp = s; sp < n; ++sp) {
            double v = strength_entry(states[s], states[sp], d);
            if (split) v += gate_entry(states[s], states[sp], d);
            k.m(s, sp) = k.m(sp, s) = v;
        }
    return k;
}

GramBlocks gram_blocks_direct(const Dgn& net, const Matrix& data_x) {
    const std::size_t n = data_x.cols;
    const int d = net.cfg.d;
    std::vector<KernelState> states;
    states.reserve(n);
    for (std::size_t s = 0; s < n; ++s) states.push_back(kernel_state(net, column(data_x, s), static_cast<long>(s)));

    GramBlocks out;
    out.full.kind = GramKind::Full;
    out.strength.kind = GramKind::Strength;
    out.gate.kind = GramKind::Gate;
    out.full.m = Matrix(n, n);
    out.strength.m = Matrix(n, n);
    out.gate.m = Matrix(n, n);
    const bool split = net.cfg.variant == Variant::SoftGaLU;
    for (std::size_t s = 0; s < n; ++s)
        for (std::size_t sp = s; sp < n; ++sp) {
            const double vw = strength_entry(states[s], states[sp], d);
            const double va = split ? gate_entry(states[s], states[sp], d) : 0.0;
            out.strength.m(s, sp) = out.strength.m(sp, s) = vw;
            out.gate.m(s, sp) = out.gate.m(sp, s) = va;
            out.full.m(s, sp) = out.full.m(sp, s) = vw + va;
        }
    return out;
}

GramMatrix lambda_matrix(const std::vector<GateRow>& gates) {
    const std::size_t n = gates.size();
    if (n == 0) throw DimensionError("lambda_matrix: no gate rows");
    const std::size_t layers = gates[0].rows;
    const std::size_t width = gates[0].cols;
    for (const GateRow& g : gates)
        if (g.rows != layers || g.cols != width)
            throw DimensionError("lambda_matrix: inconsistent gate shapes");

    GramMatrix lam;
    lam.kind = GramKind::Overlap;
    lam.m = Matrix(n, n);
    for (std::size_t s = 0; s < n; ++s)
        for (std::size_t sp = s; sp < n; ++sp) {
            double prod = 1.0;
            for (std::size_t l = 0; l < layers; ++l) {
                double inner = 0.0;
                for (std::size_t j = 0; j < width; ++j) inner += gates[s](l, j) * gates[sp](l, j);
                prod *= inner;
            }
            lam.m(s, sp) = lam.m(sp, s) = prod;
        }
    return lam;
}

Matrix data_gram(const Matrix& data_x) {
    const std::size_t n = data_x.cols;
    Matrix g(n, n);
    for (std::size_t s = 0; s < n; ++s)
        for (std::size_t sp = s; sp < n; ++sp) {
            double v = 0.0;
            for (std::size_t i = 0; i < data_x.rows; ++i) v += data_x(i, s) * data_x(i, sp);
            g(s, sp) = g(sp, s) = v;
        }
    return g;
}

GramMatrix feature_gram(const Matrix& data_x, const GramMatrix& lambda) {
    if (lambda.m.rows != data_x.cols)
        throw DimensionError("feature_gram: lambda size != number of examples");
    GramMatrix m;
    m.kind = GramKind::Feature;
    m.m = hadamard(data_gram(data_x), lambda.m);
    return m;
}

TauEta tau_eta(const std::vector<GateRow>& gates) {
    const std::size_t n = gates.size();
    const std::size_t layers = gates.empty() ? 0 : gates[0].rows;
    TauEta out;
    out.tau.reserve(layers);
    for (std::size_t l = 0; l < layers; ++l) {
        Matrix t(n, n);
        for (std::size_t s = 0; s < n; ++s)
            for (std::size_t sp = s; sp < n; ++sp) {
                double v = 0.0;
                for (std::size_t j = 0; j < gates[0].cols; ++j)
                    v += gates[s](l, j) * gates[sp](l, j);
                t(s, sp) = t(sp, s) = v;
            }
        out.tau.push_back(std::move(t));
    }

    out.eta_defined = true;
    for (std::size_t s = 0; s < n; ++s)
        for (std::size_t l = 0; l < layers; ++l)
            if (out.tau[l](s, s) == 0.0) {
                out.eta_defined = false;
                out.dead_layers.push_back(static_cast<int>(s * layers + l));
            }

    if (out.eta_defined) {
        double eta = 0.0;
        for (std::size_t s = 0; s < n; ++s)
            for (std::size_t sp = 0; sp < n; ++sp) {
                if (s == sp) continue;
                for (std::size_t l = 0; l < layers; ++l)
                    eta = std::max(eta, out.tau[l](s, sp) / out.tau[l](s, s));
            }
        out.eta = eta;
        out.eta_power_bound = std::pow(eta, static_cast<double>(layers));

        const GramMatrix lam = lambda_matrix(gates);
        double ratio = 0.0;
        for (std::size_t s = 0; s < n; ++s)
            for (std::size_t sp = 0; sp < n; ++sp) {
                if (s == sp || lam.m(s, s) == 0.0) continue;
                ratio = std::max(ratio, lam.m(s, sp) / lam.m(s, s));
            }
        out.max_lambda_ratio = ratio;
        out.ratio_bound_holds = ratio <= out.eta_power_bound + 1e-12;
    }
    return out;
}

SpectrumReport ecdf(const Vec& eigenvalues, SpectrumNormalization norm) {
    if (eigenvalues.empty()) throw DimensionError("ecdf: empty spectrum");
    SpectrumReport rep;
    rep.normalization = norm;
    rep.eigenvalues = eigenvalues;
    std::sort(rep.eigenvalues.begin(), rep.eigenvalues.end());

    double denom = 1.0;
    if (norm == SpectrumNormalization::ByMaxEigenvalue) {
        denom = rep.eigenvalues.back();
        if (denom == 0.0) throw NumericError("ecdf: max eigenvalue is zero");
    } else if (norm == SpectrumNormalization::ByTrace) {
        denom = 0.0;
        for (double v : rep.eigenvalues) denom += v;
        if (denom == 0.0) throw NumericError("ecdf: trace is zero");
    }
    for (double& v : rep.eigenvalues) v /= denom;

    rep.ecdf.resize(rep.eigenvalues.size());
    double cum = 0.0;
    for (std::size_t i = 0; i < rep.eigenvalues.size(); ++i) {
        cum += rep.eigenvalues[i];
        rep.ecdf[i] = cum;
    }
    return rep;
}

double nu(const Matrix& h, const Vec& y, bool normalize, double jitter) {
    if (h.rows != h.cols || h.rows != y.size()) throw DimensionError("nu: shape mismatch");
    const double tr = trace(h);
    Matrix hat = h;
    if (normalize) {
        if (tr <= 0.0) throw NumericError("nu: trace must be positive for normalization");
        hat = scale(h, 1.0 / tr);
    }
    const double n = static_cast<double>(h.rows);
    const double eff_jitter = jitter >= 0.0 ? jitter : 1e-8 * trace(hat) / n;
    const Vec v = regularized_solve(hat, y, eff_jitter);
    double out = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) out += y[i] * v[i];
    return out;
}

}  // namespace gram
}  // namespace gatelab
