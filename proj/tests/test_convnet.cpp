#include <cmath>

#include "doctest.h"
#include "gatelab/convnet.hpp"

using namespace gatelab;
using namespace gatelab::convnet;

TEST_SUITE_BEGIN("convnet");

namespace {

ConvNet fixed_taps_net(const ConvConfig& cfg, const std::vector<Vec>& taps) {
    ConvNet net;
    net.cfg = cfg;
    net.taps = taps;
    net.gate_kind = ConvGateKind::AllOnes;
    return net;
}

double mean(const Vec& v) {
    double s = 0;
    for (double x : v) s += x;
    return s / v.size();
}

struct MeanSe {
    double mean, se;
};

MeanSe mean_se(const Vec& v) {
    MeanSe out{0, 0};
    for (double x : v) out.mean += x;
    out.mean /= v.size();
    double ss = 0;
    for (double x : v) ss += (x - out.mean) * (x - out.mean);
    out.se = std::sqrt(ss / (v.size() - 1.0) / v.size());
    return out;
}

}  // namespace

TEST_CASE("config validation") {
    ConvConfig bad;
    bad.d_in = 3;
    bad.kernel = 3;  // kernel must be < d_in
    bad.layers = 1;
    CHECK_THROWS_AS(bad.validate(), DimensionError);
    bad.kernel = 0;
    CHECK_THROWS_AS(bad.validate(), DimensionError);
}

TEST_CASE("delta kernels shift the signal and GAP takes the mean") {
    ConvConfig cfg;
    cfg.d_in = 4;
    cfg.kernel = 2;
    cfg.layers = 1;
    const Vec x = {1.0, 2.0, 3.0, 4.0};

    // taps (1, 0): identity
    const ConvNet id = fixed_taps_net(cfg, {{1.0, 0.0}});
    const ConvForward f1 = circ_conv_forward(id, x);
    CHECK(f1.z.back() == x);
    CHECK(f1.gap == doctest::Approx(mean(x)));

    // taps (0, 1): cyclic shift by one
    const ConvNet sh = fixed_taps_net(cfg, {{0.0, 1.0}});
    const ConvForward f2 = circ_conv_forward(sh, x);
    CHECK(f2.z.back() == Vec{2.0, 3.0, 4.0, 1.0});
    CHECK(f2.gap == doctest::Approx(mean(x)));
}

TEST_CASE("constant signals are eigenvectors of every circulant layer") {
    ConvConfig cfg;
    cfg.d_in = 5;
    cfg.kernel = 3;
    cfg.layers = 2;
    Prng rng(1);
    ConvNet net = make_conv_net(cfg, ConvGateKind::AllOnes, 0.5, 0.5, rng);
    const double c = 2.5;
    const Vec x(5, c);
    const ConvForward f = circ_conv_forward(net, x);
    double factor = 1.0;
    for (const Vec& taps : net.taps) {
        double s = 0;
        for (double t : taps) s += t;
        factor *= s;
    }
    for (const Vec& z : f.z)
        for (std::size_t i = 1; i < z.size(); ++i) CHECK(z[i] == doctest::Approx(z[0]));
    CHECK(f.gap == doctest::Approx(c * factor));
}

TEST_CASE("forward equals the bundle path sum") {
    Prng rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        ConvConfig cfg;
        cfg.d_in = 3 + static_cast<int>(rng.next_u64() % 3);
        cfg.kernel = 2;
        cfg.layers = 1 + static_cast<int>(rng.next_u64() % 3);
        const ConvGateKind kind = trial % 2 == 0 ? ConvGateKind::AllOnes : ConvGateKind::GaLU;
        const ConvNet net = make_conv_net(cfg, kind, 0.7, 0.5, rng);
        Vec x(cfg.d_in);
        for (double& v : x) v = rng.next_uniform(-1, 1);
        const double via_layers = circ_conv_forward(net, x).gap;
        const double via_paths = output_via_bundles(net, x);
        CHECK(std::fabs(via_layers - via_paths) <= 1e-12 * std::max(1.0, std::fabs(via_paths)));
    }
}

TEST_CASE("rotate_input group properties") {
    const Vec x = {1.0, 2.0, 3.0, 4.0};
    CHECK(rotate_input(x, 0) == x);
    CHECK(rotate_input(x, 4) == x);
    CHECK(rotate_input(rotate_input(x, 1), 3) == x);
    CHECK(rotate_input(x, 1) == Vec{2.0, 3.0, 4.0, 1.0});
}

TEST_CASE("bundle enumeration partitions the paths with equal strengths") {
    ConvConfig cfg;
    cfg.d_in = 3;
    cfg.kernel = 2;
    cfg.layers = 3;  // d = 4: 8 bundles, 24 paths
    CHECK(num_bundles(cfg) == 8);
    CHECK(num_conv_paths(cfg) == 24);

    const auto bundles = enumerate_bundles(cfg);
    REQUIRE(bundles.size() == 8);
    std::vector<int> seen(24, 0);
    for (const auto& b : bundles) {
        CHECK(b.size() == 3);
        for (const ConvPath& p : b) {
            std::uint64_t gid = 0;
            // recompute the global index from (taps, start)
            std::uint64_t k = 0;
            for (int l = 0; l < cfg.layers; ++l) k = k * cfg.kernel + p.taps[l];
            gid = k * cfg.d_in + p.start;
            seen[gid] += 1;
        }
    }
    for (int c : seen) CHECK(c == 1);  // every path in exactly one bundle

    Prng rng(3);
    const ConvNet net = make_conv_net(cfg, ConvGateKind::AllOnes, 0.6, 0.5, rng);
    for (const auto& b : bundles) {
        const double s0 = conv_path_strength(net, b[0]);
        for (const ConvPath& p : b) CHECK(conv_path_strength(net, p) == s0);
    }
}

TEST_CASE("invariance_expectation basics") {
    ConvConfig cfg;
    cfg.d_in = 3;
    cfg.kernel = 2;
    cfg.layers = 2;
    const Matrix ones(2, 3, 1.0);
    const Vec zero(3, 0.0);
    CHECK(invariance_expectation(cfg, ones, ones, zero, zero, 0.5) == 0.0);

    // s = s', x = e1, all gates on: compare against direct bundle enumeration
    Vec e1(3, 0.0);
    e1[0] = 1.0;
    const double sigma = 0.5;
    const double got = invariance_expectation(cfg, ones, ones, e1, e1, sigma);
    const auto bundles = enumerate_bundles(cfg);
    double want = 0.0;
    for (const auto& b : bundles) {
        double lhs = 0.0;
        for (const ConvPath& p : b) lhs += e1[p.start];  // activation 1
        want += lhs * lhs;
    }
    want *= std::pow(sigma, 2.0 * cfg.layers) / (cfg.d_in * cfg.d_in);
    CHECK(got == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("Monte Carlo over weight draws matches the bundle expectation") {
    // fixed gates (one gating draw), taps redrawn each round
    ConvConfig cfg;
    cfg.d_in = 3;
    cfg.kernel = 2;
    cfg.layers = 2;
    const double sigma = std::sqrt(0.5);
    Prng grng(17);
    const ConvNet gate_source = make_conv_net(cfg, ConvGateKind::GaLU, sigma, 0.5, grng);

    const Vec xs = {1.0, -0.5, 0.25};
    const Vec xsp = {0.5, 1.0, -1.0};
    const Matrix gates_s = circ_conv_forward(gate_source, xs).gates;
    const Matrix gates_sp = circ_conv_forward(gate_source, xsp).gates;

    const double predicted = invariance_expectation(cfg, gates_s, gates_sp, xs, xsp, sigma);

    const int draws = 600;
    Vec prods(draws);
    for (int m = 0; m < draws; ++m) {
        Prng rng(900 + m);
        ConvNet net = gate_source;  // same gating taps
        for (Vec& taps : net.taps)
            for (double& v : taps) v = rng.bernoulli_sym(sigma);
        prods[m] = circ_conv_forward(net, xs).gap * circ_conv_forward(net, xsp).gap;
    }
    const MeanSe ms = mean_se(prods);
    CHECK(std::fabs(ms.mean - predicted) <= 3.0 * std::max(ms.se, 1e-12));
}

TEST_CASE("all-ones bundle expectation is exactly rotation invariant") {
    ConvConfig cfg;
    cfg.d_in = 3;
    cfg.kernel = 2;
    cfg.layers = 2;
    const Matrix ones(2, 3, 1.0);
    const Vec xs = {1.0, 2.0, 3.0};
    const Vec xsp = {2.0, 1.0, 2.0};
    const double base = invariance_expectation(cfg, ones, ones, xs, xsp, 0.5);
    for (int shift = 0; shift < 3; ++shift) {
        const double rotated = invariance_expectation(
            cfg, ones, ones, rotate_input(xs, shift), rotate_input(xsp, shift), 0.5);
        CHECK(rotated == base);  // integer-valued inputs keep the sums exact
    }
}

TEST_CASE("GAP output is linear in the input for fixed gates") {
    ConvConfig cfg;
    cfg.d_in = 4;
    cfg.kernel = 2;
    cfg.layers = 2;
    Prng rng(4);
    const ConvNet net = make_conv_net(cfg, ConvGateKind::Frg, 0.5, 0.5, rng);
    const Vec a = {1.0, -2.0, 0.5, 0.25};
    const Vec b = {0.5, 1.5, -1.0, 2.0};
    Vec apb(4);
    for (int i = 0; i < 4; ++i) apb[i] = 2.0 * a[i] + 3.0 * b[i];
    const double lhs = circ_conv_forward(net, apb).gap;
    const double rhs =
        2.0 * circ_conv_forward(net, a).gap + 3.0 * circ_conv_forward(net, b).gap;
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_SUITE_END();
