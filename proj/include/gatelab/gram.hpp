#ifndef GATELAB_GRAM_HPP
#define GATELAB_GRAM_HPP

#include <optional>

#include "gatelab/network.hpp"

namespace gatelab {
namespace gram {

enum class GramKind { Full, Strength, Gate, Feature, Overlap };

// n x n kernel; kind records which object it is. Full/strength/gate/
// feature kinds are PSD up to eigen tolerance -1e-8 * trace.
struct GramMatrix {
    Matrix m;
    GramKind kind = GramKind::Full;
};

// Columns are ntf_column per example; d_net x n, or 2*d_net x n for
// soft-GaLU (strength block stacked over the gate block).
Matrix ntf_matrix(const Dgn& net, const Matrix& data_x);

// K = Psi^T Psi
GramMatrix gram(const Matrix& ntf);

// soft-GaLU split: (K^w, K^a) from the two row blocks; K^w + K^a = K
std::pair<GramMatrix, GramMatrix> gram_split_soft_galu(const NetConfig& cfg, const Matrix& ntf);

// K without materializing Psi: every gradient entry is an outer product
// z(l-1,i) delta(l,j), so K(s,s') = sum_l <z_s, z_s'> <delta_s, delta_s'>.
// Agrees with gram(ntf_matrix(...)) and is the route used at width 500.
GramMatrix gram_direct(const Dgn& net, const Matrix& data_x);

struct GramBlocks {
    GramMatrix full;
    GramMatrix strength;  // K^w
    GramMatrix gate;      // K^a (zero matrix for hard-gated variants)
};

GramBlocks gram_blocks_direct(const Dgn& net, const Matrix& data_x);

// Overlap matrix via the layerwise identity
// lambda(s,s') = prod_l sum_j G_s(l,j) G_s'(l,j);
// equal to the brute-force path sum, which the tests enforce.
GramMatrix lambda_matrix(const std::vector<GateRow>& gates);

// M = (x^T x) o lambda
GramMatrix feature_gram(const Matrix& data_x, const GramMatrix& lambda);

Matrix data_gram(const Matrix& data_x);  // x^T x

// Per-layer gate overlaps tau(s,s',l) and the worst-case layer ratio eta.
struct TauEta {
    std::vector<Matrix> tau;  // one n x n matrix per gated layer
    double eta = 0.0;
    bool eta_defined = false;       // false when some tau(s,s,l) = 0
    std::vector<int> dead_layers;   // (s,l) pairs flattened as s*layers+l
    double max_lambda_ratio = 0.0;  // max over s!=s' of lambda(s,s')/lambda(s,s)
    double eta_power_bound = 0.0;   // eta^(d-1)
    bool ratio_bound_holds = false;
};

TauEta tau_eta(const std::vector<GateRow>& gates);

enum class SpectrumNormalization { None, ByMaxEigenvalue, ByTrace };

struct SpectrumReport {
    Vec eigenvalues;  // ascending, after normalization
    Vec ecdf;         // cumulative sums
    SpectrumNormalization normalization = SpectrumNormalization::None;
};

SpectrumReport ecdf(const Vec& eigenvalues, SpectrumNormalization norm);

// nu = y^T (H_hat + jitter I)^{-1} y with optional trace normalization.
// jitter < 0 selects the default ridge 1e-8 * trace(H_hat) / n.
double nu(const Matrix& h, const Vec& y, bool normalize, double jitter = -1.0);

}  // namespace gram
}  // namespace gatelab

#endif
