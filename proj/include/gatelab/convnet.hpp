#ifndef GATELAB_CONVNET_HPP
#define GATELAB_CONVNET_HPP

#include <cstdint>

#include "gatelab/linalg.hpp"

namespace gatelab {
namespace convnet {

// L circular 1-D convolutional layers of kernel width `kernel`, each
// producing a d_in-long signal, followed by a fixed global-average-
// pooling head [1/d_in, ..., 1/d_in]. Depth in the path formulas is
// d = layers + 1.
struct ConvConfig {
    int d_in = 3;
    int kernel = 2;
    int layers = 2;

    int d() const { return layers + 1; }
    void validate() const;
};

enum class ConvGateKind { AllOnes, Frg, GaLU };

struct ConvNet {
    ConvConfig cfg;
    std::vector<Vec> taps;       // L kernels of `kernel` weights each
    ConvGateKind gate_kind = ConvGateKind::AllOnes;
    std::vector<Vec> gate_taps;  // twin gating net (GaLU)
    Matrix frg_gates;            // layers x d_in random bits (FRG)
};

ConvNet make_conv_net(const ConvConfig& cfg, ConvGateKind kind, double sigma, double mu,
                      Prng& rng);

struct ConvForward {
    std::vector<Vec> z;  // per conv layer, length d_in
    Matrix gates;        // layers x d_in
    double gap = 0.0;    // pooled output x(L,1)
};

// Circular indexing: position i of layer l reads positions
// (i + k) mod d_in of layer l-1, k = 0..kernel-1.
ConvForward circ_conv_forward(const ConvNet& net, const Vec& x);

// cyclic shift by i coordinates
Vec rotate_input(const Vec& x, int i);

// A conv path picks a start position and one tap per layer; the d_in
// cyclic translates of a tap sequence form one bundle and share the
// strength prod_l taps[l] * (1/d_in).
struct ConvPath {
    int start = 0;
    std::vector<int> taps;
};

std::uint64_t num_conv_paths(const ConvConfig& cfg);  // d_in * kernel^L
std::uint64_t num_bundles(const ConvConfig& cfg);     // kernel^L

// node visited in layer l (1-based), after wrapping
int conv_path_node(const ConvConfig& cfg, const ConvPath& p, int layer);

// bundle k holds global paths [k*d_in, (k+1)*d_in)
ConvPath conv_path_from_index(const ConvConfig& cfg, std::uint64_t global_index);

std::vector<std::vector<ConvPath>> enumerate_bundles(const ConvConfig& cfg,
                                                     std::uint64_t max_paths = 10'000'000);

double conv_path_strength(const ConvNet& net, const ConvPath& p);
double conv_path_activation(const ConvConfig& cfg, const Matrix& gates, const ConvPath& p);

// path-sum form of the pooled output, the oracle for circ_conv_forward
double output_via_bundles(const ConvNet& net, const Vec& x);

// E[x_s(L,1) x_s'(L,1)] over +-sigma tap draws with the gates held
// fixed: (sigma^(2(d-1))/d_in^2) * sum_k (sum_{p in b_k} x_s(p(0)) A_s(p))
//                                       * (sum_{p in b_k} x_s'(p(0)) A_s'(p))
double invariance_expectation(const ConvConfig& cfg, const Matrix& gates_s,
                              const Matrix& gates_sp, const Vec& x_s, const Vec& x_sp,
                              double sigma, std::uint64_t max_paths = 10'000'000);

}  // namespace convnet
}  // namespace gatelab

#endif
