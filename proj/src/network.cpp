#include "gatelab/network.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

namespace gatelab {

const char* variant_name(Variant v) {
    switch (v) {
        case Variant::DLN: return "dln";
        case Variant::FRG: return "frg";
        case Variant::GaLUFrozen: return "galu";
        case Variant::ReLU: return "relu";
        case Variant::SoftReLU: return "soft-relu";
        case Variant::SoftGaLU: return "soft-galu";
    }
    return "?";
}

Variant variant_from_name(const std::string& name) {
    if (name == "dln") return Variant::DLN;
    if (name == "frg") return Variant::FRG;
    if (name == "galu") return Variant::GaLUFrozen;
    if (name == "relu") return Variant::ReLU;
    if (name == "soft-relu") return Variant::SoftReLU;
    if (name == "soft-galu") return Variant::SoftGaLU;
    throw ParseError("unknown gating variant '" + name + "'");
}

void NetConfig::validate() const {
    if (d < 2) throw DimensionError("NetConfig: d must be >= 2");
    if (w < 1) throw DimensionError("NetConfig: w must be >= 1");
    if (d_in < 1) throw DimensionError("NetConfig: d_in must be >= 1");
    if (is_soft()) {
        if (beta <= 0.0) throw NumericError("NetConfig: beta must be positive for soft gates");
        if (epsilon < 0.0) throw NumericError("NetConfig: epsilon must be >= 0");
    }
    if (variant == Variant::FRG && (mu <= 0.0 || mu >= 1.0))
        throw NumericError("NetConfig: FRG needs mu in (0,1)");
    // frozen-gate families must not mark gating parameters trainable
    if ((variant == Variant::DLN || variant == Variant::FRG || variant == Variant::GaLUFrozen) &&
        train_gate_params)
        throw NotApplicableError("NetConfig: gates of this variant are frozen by definition");
}

double default_sigma(const NetConfig& cfg) {
    switch (cfg.variant) {
        case Variant::DLN: return std::sqrt(1.0 / cfg.w);
        case Variant::FRG: return std::sqrt(1.0 / (cfg.mu * cfg.w));
        default: return std::sqrt(2.0 / cfg.w);
    }
}

double effective_sigma(const NetConfig& cfg) {
    return cfg.sigma > 0.0 ? cfg.sigma : default_sigma(cfg);
}

std::size_t ParamSet::num_params() const {
    std::size_t n = 0;
    for (const Matrix& m : layers) n += m.size();
    return n;
}

std::vector<std::pair<std::size_t, std::size_t>> layer_shapes(const NetConfig& cfg) {
    std::vector<std::pair<std::size_t, std::size_t>> shapes;
    const auto w = static_cast<std::size_t>(cfg.w);
    shapes.emplace_back(static_cast<std::size_t>(cfg.d_in), w);
    for (int l = 0; l < cfg.d - 2; ++l) shapes.emplace_back(w, w);
    shapes.emplace_back(w, std::size_t{1});
    return shapes;
}

std::size_t d_net(const NetConfig& cfg) {
    std::size_t n = 0;
    for (auto [r, c] : layer_shapes(cfg)) n += r * c;
    return n;
}

ParamIndexer::ParamIndexer(const NetConfig& cfg) : shapes(layer_shapes(cfg)) {
    offsets.resize(shapes.size() + 1);
    offsets[0] = 0;
    for (std::size_t l = 0; l < shapes.size(); ++l)
        offsets[l + 1] = offsets[l] + shapes[l].first * shapes[l].second;
}

std::size_t ParamIndexer::encode(std::size_t layer, std::size_t i, std::size_t j) const {
    return offsets[layer] + i * shapes[layer].second + j;
}

void ParamIndexer::decode(std::size_t m, std::size_t& layer, std::size_t& i,
                          std::size_t& j) const {
    std::size_t l = 0;
    while (m >= offsets[l + 1]) ++l;
    const std::size_t rel = m - offsets[l];
    layer = l;
    i = rel / shapes[l].second;
    j = rel % shapes[l].second;
}

GateRow GateTensor::row(std::size_t s) const {
    GateRow g(layers, width);
    for (std::size_t l = 0; l < layers; ++l)
        for (std::size_t i = 0; i < width; ++i) g(l, i) = at(s, l, i);
    return g;
}

ParamSet init_params(const NetConfig& cfg, Prng& rng) {
    cfg.validate();
    const double sigma = effective_sigma(cfg);
    ParamSet p;
    for (auto [r, c] : layer_shapes(cfg)) {
        Matrix m(r, c);
        for (double& v : m.data) v = rng.bernoulli_sym(sigma);
        p.layers.push_back(std::move(m));
    }
    return p;
}

Dgn make_net(const NetConfig& cfg, Prng& rng) {
    Dgn net;
    net.cfg = cfg;
    net.weights = init_params(cfg, rng);
    if (cfg.is_decoupled()) net.gate_params = init_params(cfg, rng);
    return net;
}

void register_frg_inputs(Dgn& net, const Matrix& x, Prng& rng) {
    if (net.cfg.variant != Variant::FRG)
        throw NotApplicableError("register_frg_inputs: only FRG nets carry random gates");
    if (x.rows != static_cast<std::size_t>(net.cfg.d_in))
        throw DimensionError("register_frg_inputs: input dimension mismatch");
    net.frg_inputs = x;
    net.frg_gates =
        GateTensor(x.cols, static_cast<std::size_t>(net.cfg.d - 1),
                   static_cast<std::size_t>(net.cfg.w));
    for (double& v : net.frg_gates.values) v = rng.bernoulli(net.cfg.mu);
}

double soft_gate(double q, double beta, double epsilon) {
    // chi_eps(-beta q) with chi_eps(v) = (1+eps)/(1+exp(v))
    return (1.0 + epsilon) / (1.0 + std::exp(-beta * q));
}

double soft_gate_dq(double gate_value, double beta, double epsilon) {
    return beta * gate_value * (1.0 + epsilon - gate_value) / (1.0 + epsilon);
}

namespace {

// q = Theta^T z, q_j = sum_i Theta(i,j) z_i
Vec layer_preactivation(const Matrix& theta, const Vec& z) {
    Vec q(theta.cols, 0.0);
    for (std::size_t i = 0; i < theta.rows; ++i) {
        const double zi = z[i];
        if (zi == 0.0) continue;
        const double* row = &theta.data[i * theta.cols];
        for (std::size_t j = 0; j < theta.cols; ++j) q[j] += row[j] * zi;
    }
    return q;
}

// g_prev_i = sum_j Theta(i,j) delta_j
Vec layer_backprop(const Matrix& theta, const Vec& delta) {
    Vec g(theta.rows, 0.0);
    for (std::size_t i = 0; i < theta.rows; ++i) {
        const double* row = &theta.data[i * theta.cols];
        double s = 0.0;
        for (std::size_t j = 0; j < theta.cols; ++j) s += row[j] * delta[j];
        g[i] = s;
    }
    return g;
}

struct GatingState {
    GateRow gates;        // (d-1) x w
    std::vector<Vec> qg;  // gating-net pre-activations (decoupled only)
    std::vector<Vec> zg;  // gating-net layer outputs (decoupled only)
};

// Runs the gating side. For shared variants the caller derives gates from
// its own pre-activations, so this handles DLN/FRG/GaLUFrozen/SoftGaLU.
GatingState gating_forward(const Dgn& net, const Vec& x, long example) {
    const NetConfig& cfg = net.cfg;
    GatingState st;
    st.gates = GateRow(cfg.d - 1, cfg.w);

    switch (cfg.variant) {
        case Variant::DLN: {
            for (double& v : st.gates.data) v = 1.0;
            return st;
        }
        case Variant::FRG: {
            if (net.frg_inputs.cols == 0)
                throw NotApplicableError("FRG net has no registered inputs");
            if (example >= 0) {
                if (static_cast<std::size_t>(example) >= net.frg_gates.n)
                    throw NotApplicableError("FRG example index out of range");
                for (std::size_t i = 0; i < net.frg_inputs.rows; ++i)
                    if (net.frg_inputs(i, example) != x[i])
                        throw NotApplicableError(
                            "FRG input does not match its registered example");
                st.gates = net.frg_gates.row(static_cast<std::size_t>(example));
                return st;
            }
            for (std::size_t s = 0; s < net.frg_inputs.cols; ++s) {
                bool match = true;
                for (std::size_t i = 0; i < net.frg_inputs.rows; ++i)
                    if (net.frg_inputs(i, s) != x[i]) { match = false; break; }
                if (match) {
                    st.gates = net.frg_gates.row(s);
                    return st;
                }
            }
            throw NotApplicableError(
                "FRG gates are defined only for registered training inputs");
        }
        case Variant::GaLUFrozen:
        case Variant::SoftGaLU: {
            const ParamSet& pg = net.gate_params;
            Vec z = x;
            for (int l = 0; l < cfg.d - 1; ++l) {
                Vec q = layer_preactivation(pg.layers[l], z);
                Vec znext(q.size());
                for (std::size_t j = 0; j < q.size(); ++j) {
                    const double g = cfg.variant == Variant::SoftGaLU
                                         ? soft_gate(q[j], cfg.beta, cfg.epsilon)
                                         : (q[j] > 0.0 ? 1.0 : 0.0);
                    st.gates(l, j) = g;
                    znext[j] = q[j] * g;
                }
                st.qg.push_back(std::move(q));
                st.zg.push_back(std::move(znext));
                z = st.zg.back();
            }
            return st;
        }
        default:
            throw NotApplicableError("gating_forward: shared-parameter variant");
    }
}

}  // namespace

ForwardCache forward(const Dgn& net, const Vec& x, long example) {
    const NetConfig& cfg = net.cfg;
    cfg.validate();
    if (x.size() != static_cast<std::size_t>(cfg.d_in))
        throw DimensionError("forward: input length != d_in");

    ForwardCache c;
    c.x = x;
    c.gates = GateRow(cfg.d - 1, cfg.w);

    const bool shared = cfg.variant == Variant::ReLU || cfg.variant == Variant::SoftReLU;
    GatingState gst;
    if (!shared) {
        gst = gating_forward(net, x, example);
        c.gates = gst.gates;
        c.qg = std::move(gst.qg);
        c.zg = std::move(gst.zg);
    }

    Vec z = x;
    for (int l = 0; l < cfg.d - 1; ++l) {
        Vec q = layer_preactivation(net.weights.layers[l], z);
        Vec znext(q.size());
        for (std::size_t j = 0; j < q.size(); ++j) {
            double g;
            if (shared) {
                g = cfg.variant == Variant::ReLU ? (q[j] > 0.0 ? 1.0 : 0.0)
                                                 : soft_gate(q[j], cfg.beta, cfg.epsilon);
                c.gates(l, j) = g;
            } else {
                g = c.gates(l, j);
            }
            znext[j] = q[j] * g;
        }
        c.q.push_back(std::move(q));
        c.z.push_back(std::move(znext));
        z = c.z.back();
    }
    const Vec out = layer_preactivation(net.weights.layers[cfg.d - 1], z);
    c.yhat = out[0];
    return c;
}

GateRow compute_gates(const Dgn& net, const Vec& x, long example) {
    return forward(net, x, example).gates;
}

std::size_t ntf_dimension(const NetConfig& cfg) {
    return cfg.variant == Variant::SoftGaLU ? 2 * d_net(cfg) : d_net(cfg);
}

BackpropState backprop(const Dgn& net, const ForwardCache& c) {
    const NetConfig& cfg = net.cfg;
    const int d = cfg.d;
    BackpropState st;
    st.delta.resize(d - 1);

    // gz(l) = dyhat/dz(l) along the strength-carrying network
    std::vector<Vec> gz(d - 1);
    {
        const Matrix& head = net.weights.layers[d - 1];
        Vec g(head.rows);
        for (std::size_t i = 0; i < head.rows; ++i) g[i] = head(i, 0);
        gz[d - 2] = std::move(g);
    }

    const bool shared_soft = cfg.variant == Variant::SoftReLU;
    for (int l = d - 2; l >= 0; --l) {
        Vec delta(cfg.w);
        for (int j = 0; j < cfg.w; ++j) {
            const double g = c.gates(l, j);
            double dz_dq = g;
            if (shared_soft) dz_dq += c.q[l][j] * soft_gate_dq(g, cfg.beta, cfg.epsilon);
            delta[j] = gz[l][j] * dz_dq;
        }
        st.delta[l] = std::move(delta);
        if (l > 0) gz[l - 1] = layer_backprop(net.weights.layers[l], st.delta[l]);
    }

    if (cfg.variant == Variant::SoftGaLU) {
        st.delta_g.resize(d - 1);
        // a(l,j) = dyhat/dG(l,j) = q_w(l,j) * gz(l,j); propagate through
        // zg(l) = qg(l) * G(l) feeding deeper gating layers
        for (int l = d - 2; l >= 0; --l) {
            Vec cur(cfg.w);
            for (int j = 0; j < cfg.w; ++j) {
                const double gate = c.gates(l, j);
                const double gamma = soft_gate_dq(gate, cfg.beta, cfg.epsilon);
                double v = c.q[l][j] * gz[l][j] * gamma;
                if (l < d - 2) {
                    const double zeta = gate + c.qg[l][j] * gamma;
                    double back = 0.0;
                    const Matrix& theta_up = net.gate_params.layers[l + 1];
                    for (std::size_t k = 0; k < theta_up.cols; ++k)
                        back += theta_up(j, k) * st.delta_g[l + 1][k];
                    v += zeta * back;
                }
                cur[j] = v;
            }
            st.delta_g[l] = std::move(cur);
        }
    }
    return st;
}

Vec ntf_column(const Dgn& net, const Vec& x, long example) {
    const ForwardCache c = forward(net, x, example);
    return ntf_from_state(net, c, backprop(net, c));
}

Vec ntf_from_state(const Dgn& net, const ForwardCache& c, const BackpropState& bp) {
    const NetConfig& cfg = net.cfg;
    const ParamIndexer idx(cfg);
    const std::size_t dn = idx.total();
    Vec grad(ntf_dimension(cfg), 0.0);

    const int d = cfg.d;
    const Vec& zlast = c.z[d - 2];
    for (std::size_t i = 0; i < zlast.size(); ++i)
        grad[idx.encode(d - 1, i, 0)] = zlast[i];

    for (int l = d - 2; l >= 0; --l) {
        const Vec& zprev = l == 0 ? c.x : c.z[l - 1];
        for (std::size_t i = 0; i < zprev.size(); ++i) {
            if (zprev[i] == 0.0) continue;
            for (int j = 0; j < cfg.w; ++j)
                grad[idx.encode(l, i, j)] = zprev[i] * bp.delta[l][j];
        }
    }

    if (cfg.variant == Variant::SoftGaLU) {
        // Theta^g(d) never reaches the output; its block stays zero.
        for (int l = d - 2; l >= 0; --l) {
            const Vec& zgprev = l == 0 ? c.x : c.zg[l - 1];
            for (std::size_t i = 0; i < zgprev.size(); ++i) {
                if (zgprev[i] == 0.0) continue;
                for (int j = 0; j < cfg.w; ++j)
                    grad[dn + idx.encode(l, i, j)] = zgprev[i] * bp.delta_g[l][j];
            }
        }
    }
    return grad;
}

Matrix gate_jacobian(const Dgn& net, const Vec& x) {
    const NetConfig& cfg = net.cfg;
    if (!cfg.is_soft())
        throw NotApplicableError("gate_jacobian: hard gates have zero derivative by definition");

    const ForwardCache c = forward(net, x);
    const ParamIndexer idx(cfg);
    const std::size_t dn = idx.total();
    const bool shared = cfg.variant == Variant::SoftReLU;
    const ParamSet& pg = shared ? net.weights : net.gate_params;
    const std::vector<Vec>& qg = shared ? c.q : c.qg;
    const std::vector<Vec>& zg = shared ? c.z : c.zg;

    Matrix jac(static_cast<std::size_t>(cfg.d - 1) * cfg.w, dn);

    // zeta(l,j) = dz(l,j)/dq(l,j) along the gating-side propagation
    std::vector<Vec> zeta(cfg.d - 1, Vec(cfg.w));
    std::vector<Vec> gamma(cfg.d - 1, Vec(cfg.w));
    for (int l = 0; l < cfg.d - 1; ++l)
        for (int j = 0; j < cfg.w; ++j) {
            const double g = c.gates(l, j);
            gamma[l][j] = soft_gate_dq(g, cfg.beta, cfg.epsilon);
            zeta[l][j] = g + qg[l][j] * gamma[l][j];
        }

    for (int l = 0; l < cfg.d - 1; ++l) {
        for (int i = 0; i < cfg.w; ++i) {
            double* row = &jac.data[(static_cast<std::size_t>(l) * cfg.w + i) * dn];
            // dG(l,i)/dqg(l,i) = gamma(l,i); accumulate dqg(l,i)/dtheta
            const double seed = gamma[l][i];
            if (seed == 0.0) continue;
            // layer l weights feeding qg(l,i)
            const Vec& zprev = l == 0 ? c.x : zg[l - 1];
            for (std::size_t r = 0; r < zprev.size(); ++r)
                row[idx.encode(l, r, i)] = seed * zprev[r];
            if (l == 0) continue;
            // pull back through earlier layers
            Vec dz(cfg.w);  // d qg(l,i) / d z(lambda, .)
            for (int r = 0; r < cfg.w; ++r) dz[r] = pg.layers[l](r, i);
            for (int lam = l - 1; lam >= 0; --lam) {
                Vec dq(cfg.w);
                for (int j = 0; j < cfg.w; ++j) dq[j] = dz[j] * zeta[lam][j];
                const Vec& zlam = lam == 0 ? c.x : zg[lam - 1];
                for (std::size_t r = 0; r < zlam.size(); ++r) {
                    if (zlam[r] == 0.0) continue;
                    for (int j = 0; j < cfg.w; ++j)
                        row[idx.encode(lam, r, j)] += seed * dq[j] * zlam[r];
                }
                if (lam > 0) dz = layer_backprop(pg.layers[lam], dq);
            }
        }
    }
    return jac;
}

Dgn transplant_gates(const Dgn& source, const NetConfig& target_cfg, Prng& rng) {
    const NetConfig& scfg = source.cfg;
    if (scfg.d_in != target_cfg.d_in || scfg.w != target_cfg.w || scfg.d != target_cfg.d)
        throw DimensionError("transplant_gates: source and target architectures differ");
    if (target_cfg.variant != Variant::GaLUFrozen)
        throw NotApplicableError("transplant_gates: target must be a frozen-gate GaLU net");
    Dgn target;
    target.cfg = target_cfg;
    target.gate_params = source.weights;
    target.weights = init_params(target_cfg, rng);
    return target;
}

// ---------------------------------------------------------------------------
// persistence
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'D', 'G', 'N', '1'};
constexpr std::uint32_t kFormatVersion = 1;

void put_u8(std::string& buf, std::uint8_t v) { buf.push_back(static_cast<char>(v)); }

void put_u32(std::string& buf, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& buf, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& buf, double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, 8);
    put_u64(buf, bits);
}

struct Reader {
    const std::string& buf;
    std::size_t pos = 0;

    void need(std::size_t n) const {
        if (pos + n > buf.size()) throw FormatError("weight file truncated");
    }
    std::uint8_t u8() {
        need(1);
        return static_cast<std::uint8_t>(buf[pos++]);
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(buf[pos + i])) << (8 * i);
        pos += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(buf[pos + i])) << (8 * i);
        pos += 8;
        return v;
    }
    double f64() {
        const std::uint64_t bits = u64();
        double d;
        std::memcpy(&d, &bits, 8);
        return d;
    }
};

std::uint64_t fnv1a64(const char* data, std::size_t n) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= static_cast<std::uint8_t>(data[i]);
        h *= 0x100000001b3ULL;
    }
    return h;
}

void put_param_set(std::string& buf, const ParamSet& p) {
    put_u32(buf, static_cast<std::uint32_t>(p.layers.size()));
    for (const Matrix& m : p.layers) {
        put_u32(buf, static_cast<std::uint32_t>(m.rows));
        put_u32(buf, static_cast<std::uint32_t>(m.cols));
    }
    for (const Matrix& m : p.layers)
        for (double v : m.data) put_f64(buf, v);
}

ParamSet read_param_set(Reader& r) {
    ParamSet p;
    const std::uint32_t nl = r.u32();
    if (nl > 4096) throw FormatError("weight file: implausible layer count");
    std::vector<std::pair<std::uint32_t, std::uint32_t>> dims;
    for (std::uint32_t l = 0; l < nl; ++l) {
        const std::uint32_t rows = r.u32();
        const std::uint32_t cols = r.u32();
        dims.emplace_back(rows, cols);
    }
    for (auto [rows, cols] : dims) {
        Matrix m(rows, cols);
        for (double& v : m.data) v = r.f64();
        p.layers.push_back(std::move(m));
    }
    return p;
}

}  // namespace

void save_net(const std::string& path, const Dgn& net) {
    std::string buf;
    buf.append(kMagic, 4);
    put_u32(buf, kFormatVersion);
    put_u32(buf, static_cast<std::uint32_t>(net.cfg.d_in));
    put_u32(buf, static_cast<std::uint32_t>(net.cfg.w));
    put_u32(buf, static_cast<std::uint32_t>(net.cfg.d));
    put_u32(buf, static_cast<std::uint32_t>(net.cfg.variant));
    put_f64(buf, net.cfg.sigma);
    put_f64(buf, net.cfg.beta);
    put_f64(buf, net.cfg.epsilon);
    put_f64(buf, net.cfg.mu);
    put_u8(buf, net.cfg.train_weights ? 1 : 0);
    put_u8(buf, net.cfg.train_gate_params ? 1 : 0);

    put_u32(buf, net.gate_params.empty() ? 1u : 2u);
    put_param_set(buf, net.weights);
    if (!net.gate_params.empty()) put_param_set(buf, net.gate_params);

    put_u64(buf, fnv1a64(buf.data(), buf.size()));

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("save_net: cannot open '" + path + "' for writing");
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw FormatError("save_net: write failed for '" + path + "'");
}

Dgn load_net(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("load_net: cannot open '" + path + "'");
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    if (buf.size() < 12 || std::memcmp(buf.data(), kMagic, 4) != 0)
        throw FormatError("load_net: bad magic, not a DGN weight file");
    if (buf.size() < 8 + 8) throw FormatError("weight file truncated");
    {
        // verify trailer before trusting any dimension fields
        Reader tail{buf, buf.size() - 8};
        const std::uint64_t want = tail.u64();
        const std::uint64_t got = fnv1a64(buf.data(), buf.size() - 8);
        if (want != got) throw ChecksumError("load_net: checksum mismatch");
    }

    Reader r{buf, 4};
    const std::uint32_t version = r.u32();
    if (version > kFormatVersion)
        throw VersionError("load_net: file format version " + std::to_string(version) +
                           " is newer than supported version " +
                           std::to_string(kFormatVersion));

    Dgn net;
    net.cfg.d_in = static_cast<int>(r.u32());
    net.cfg.w = static_cast<int>(r.u32());
    net.cfg.d = static_cast<int>(r.u32());
    net.cfg.variant = static_cast<Variant>(r.u32());
    net.cfg.sigma = r.f64();
    net.cfg.beta = r.f64();
    net.cfg.epsilon = r.f64();
    net.cfg.mu = r.f64();
    net.cfg.train_weights = r.u8() != 0;
    net.cfg.train_gate_params = r.u8() != 0;

    const std::uint32_t nsets = r.u32();
    if (nsets < 1 || nsets > 2) throw FormatError("load_net: bad parameter-set count");
    net.weights = read_param_set(r);
    if (nsets == 2) net.gate_params = read_param_set(r);

    if (r.pos != buf.size() - 8) throw FormatError("load_net: trailing bytes before checksum");
    net.cfg.validate();
    return net;
}

}  // namespace gatelab
