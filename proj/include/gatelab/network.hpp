#ifndef GATELAB_NETWORK_HPP
#define GATELAB_NETWORK_HPP

#include <string>
#include <utility>
#include <vector>

#include "gatelab/linalg.hpp"

namespace gatelab {

// Gating families. DLN/FRG/GaLUFrozen/ReLU carry hard (0/1 or constant)
// gates; SoftReLU/SoftGaLU carry differentiable gates in (0, 1+epsilon).
enum class Variant { DLN, FRG, GaLUFrozen, ReLU, SoftReLU, SoftGaLU };

const char* variant_name(Variant v);
Variant variant_from_name(const std::string& name);

struct NetConfig {
    int d_in = 1;    // input dimension
    int w = 1;       // hidden width, uniform across layers
    int d = 2;       // number of weighted layers; d-1 hidden gated layers
    Variant variant = Variant::DLN;
    double sigma = 0.0;   // init scale; 0 selects the variant default
    double beta = 4.0;    // soft-gate sharpness
    double epsilon = 0.0; // soft-gate ceiling: gates live in (0, 1+epsilon)
    double mu = 0.5;      // Bernoulli rate for FRG gates
    bool train_weights = true;      // strength parameters trainable
    bool train_gate_params = false; // gating parameters trainable (soft-GaLU)

    bool is_soft() const { return variant == Variant::SoftReLU || variant == Variant::SoftGaLU; }
    // two independent parameter sets (Theta^g, Theta^w)?
    bool is_decoupled() const {
        return variant == Variant::GaLUFrozen || variant == Variant::SoftGaLU;
    }
    void validate() const;
};

// sqrt(1/(mu*w)) for FRG, sqrt(1/w) for DLN, sqrt(2/w) otherwise.
double default_sigma(const NetConfig& cfg);
double effective_sigma(const NetConfig& cfg);

// Per-layer weight matrices, shapes d_in*w, (w*w)*(d-2), w*1. No biases.
struct ParamSet {
    std::vector<Matrix> layers;

    bool empty() const { return layers.empty(); }
    std::size_t num_params() const;
};

std::vector<std::pair<std::size_t, std::size_t>> layer_shapes(const NetConfig& cfg);
std::size_t d_net(const NetConfig& cfg);

// Flat enumeration theta(m): layer-major, row-major inside a layer.
struct ParamIndexer {
    std::vector<std::size_t> offsets;  // per layer, plus total at the back
    std::vector<std::pair<std::size_t, std::size_t>> shapes;

    explicit ParamIndexer(const NetConfig& cfg);
    std::size_t total() const { return offsets.back(); }
    std::size_t encode(std::size_t layer, std::size_t i, std::size_t j) const;
    // returns (layer, i, j), layer in [0, d)
    void decode(std::size_t m, std::size_t& layer, std::size_t& i, std::size_t& j) const;
};

// Gates of a single example: rows = d-1 layers, cols = w.
using GateRow = Matrix;

// Per-example, per-layer, per-node gate values for n registered examples.
struct GateTensor {
    std::size_t n = 0, layers = 0, width = 0;
    Vec values;

    GateTensor() = default;
    GateTensor(std::size_t n_, std::size_t layers_, std::size_t width_)
        : n(n_), layers(layers_), width(width_), values(n_ * layers_ * width_, 0.0) {}

    double& at(std::size_t s, std::size_t l, std::size_t i) {
        return values[(s * layers + l) * width + i];
    }
    double at(std::size_t s, std::size_t l, std::size_t i) const {
        return values[(s * layers + l) * width + i];
    }
    GateRow row(std::size_t s) const;
};

// One DGN instance: configuration plus every parameter/gate source the
// variant needs. Immutable during evaluation; training takes exclusive
// ownership.
struct Dgn {
    NetConfig cfg;
    ParamSet weights;      // Theta (shared variants) or Theta^w
    ParamSet gate_params;  // Theta^g for GaLUFrozen / SoftGaLU
    GateTensor frg_gates;  // FRG only
    Matrix frg_inputs;     // d_in x n registered inputs (FRG only)
};

// i.i.d. symmetric Bernoulli {-sigma, +sigma} entries.
ParamSet init_params(const NetConfig& cfg, Prng& rng);

// Builds a net, drawing one or two parameter sets as the variant requires.
// FRG nets additionally need register_frg_inputs before evaluation.
Dgn make_net(const NetConfig& cfg, Prng& rng);

// Draws the frozen Bernoulli(mu) gate tensor for the given inputs.
void register_frg_inputs(Dgn& net, const Matrix& x, Prng& rng);

// Gate row of one example. FRG gates are stored per example index;
// `example >= 0` selects that row directly (required when a dataset
// contains duplicate inputs, e.g. the rank-1 dataset), `example < 0` falls
// back to matching x against the registered inputs. FRG throws
// NotApplicableError for inputs that were never registered; there is no
// natural rule for unseen inputs.
GateRow compute_gates(const Dgn& net, const Vec& x, long example = -1);

struct ForwardCache {
    Vec x;
    std::vector<Vec> q;  // pre-activations, layers 1..d-1
    std::vector<Vec> z;  // gated outputs,   layers 1..d-1
    GateRow gates;       // (d-1) x w
    double yhat = 0.0;
    // gating-network internals (decoupled variants only)
    std::vector<Vec> qg;
    std::vector<Vec> zg;
};

ForwardCache forward(const Dgn& net, const Vec& x, long example = -1);

// Reverse-mode state: dyhat/dq per hidden layer of the strength network,
// and of the gating network for soft-GaLU. Every gradient entry is an
// outer product z(l-1,i) * delta(l,j), which the gram module exploits.
struct BackpropState {
    std::vector<Vec> delta;    // strength net, layers 1..d-1
    std::vector<Vec> delta_g;  // gating net, layers 1..d-1 (soft-GaLU only)
};

BackpropState backprop(const Dgn& net, const ForwardCache& cache);

// Gradient of yhat w.r.t. all trainable parameters, by reverse
// accumulation through the recursion. Hard gates contribute no gate
// gradient; soft variants include the gate-derivative flow. SoftGaLU
// returns the concatenation (Theta^w grads, Theta^g grads), length
// 2*d_net.
Vec ntf_column(const Dgn& net, const Vec& x, long example = -1);
// same, reusing an already-computed forward/backprop pair
Vec ntf_from_state(const Dgn& net, const ForwardCache& cache, const BackpropState& bp);
std::size_t ntf_dimension(const NetConfig& cfg);

// d(gate)/d(q) for a soft gate value g: beta * g * (1+eps-g) / (1+eps).
double soft_gate(double q, double beta, double epsilon);
double soft_gate_dq(double gate_value, double beta, double epsilon);

// Jacobian of all (d-1)*w gate values w.r.t. the gating parameters
// (Theta^g for decoupled variants, the shared Theta otherwise).
// Row (l*w + i) holds dG(l,i)/dtheta_g(m). Throws NotApplicableError for
// DLN/FRG, whose gates have no parameters.
Matrix gate_jacobian(const Dgn& net, const Vec& x);

// Copies the source net's weights into a fresh GaLUFrozen net's gating
// parameter set; strength parameters are drawn anew from rng.
Dgn transplant_gates(const Dgn& source, const NetConfig& target_cfg, Prng& rng);

// Versioned binary weight file: magic "DGN1", format version, config
// block, per-layer dims, little-endian f64 payload, 64-bit checksum.
void save_net(const std::string& path, const Dgn& net);
Dgn load_net(const std::string& path);

}  // namespace gatelab

#endif
