#include <cmath>

#include "doctest.h"
#include "gatelab/gates.hpp"

using namespace gatelab;

TEST_SUITE_BEGIN("gates");

namespace {

NetConfig soft_cfg(Variant v, int d_in, int w, int d, double beta, double eps) {
    NetConfig cfg;
    cfg.variant = v;
    cfg.d_in = d_in;
    cfg.w = w;
    cfg.d = d;
    cfg.beta = beta;
    cfg.epsilon = eps;
    cfg.train_gate_params = v == Variant::SoftGaLU;
    return cfg;
}

}  // namespace

TEST_CASE("compatibility_bound") {
    // sigmoid midpoint: beta=1, eps=0, tau=0.5 -> 0.25
    CHECK(gates::compatibility_bound(1.0, 0.0, 0.5) == doctest::Approx(0.25));
    // vanishes at the ceiling
    CHECK(gates::compatibility_bound(4.0, 0.1, 1.0999999) < 1e-5);
    // linear in beta at fixed tau
    const double b1 = gates::compatibility_bound(2.0, 0.1, 0.8);
    const double b2 = gates::compatibility_bound(4.0, 0.1, 0.8);
    CHECK(b2 == doctest::Approx(2.0 * b1));
    CHECK_THROWS_AS(gates::compatibility_bound(1.0, 0.0, 1.5), NumericError);
}

TEST_CASE("compatibility_bound matches finite differences of the gate response") {
    const double beta = 3.0, eps = 0.1;
    // invert the gate to find q with G(q) = tau, then differentiate G(q)
    const double tau = 0.7;
    const double q = -std::log((1.0 + eps) / tau - 1.0) / beta;
    const double h = 1e-7;
    const double fd = (soft_gate(q + h, beta, eps) - soft_gate(q - h, beta, eps)) / (2 * h);
    CHECK(gates::compatibility_bound(beta, eps, tau) == doctest::Approx(fd).epsilon(1e-5));
}

TEST_CASE("saturated gates are active and insensitive") {
    NetConfig cfg = soft_cfg(Variant::SoftGaLU, 1, 3, 3, 60.0, 0.0);
    Dgn net;
    net.cfg = cfg;
    net.weights.layers = {Matrix(1, 3, 0.5), Matrix(3, 3, 0.5), Matrix(3, 1, 0.5)};
    net.gate_params.layers = {Matrix(1, 3, 1.0), Matrix(3, 3, 1.0), Matrix(3, 1, 1.0)};
    Matrix data(1, 1, 1.0);  // all gating pre-activations strongly positive

    const gates::GateThresholds th = gates::default_thresholds(cfg);
    const gates::GateClassification cls = gates::classify_gates(net, data, th);
    for (std::size_t f = 0; f < cls.active.size(); ++f) {
        CHECK(cls.active[f] == 1);
        CHECK(cls.sensitive[f] == 0);
    }
}

TEST_CASE("tau_active near zero marks every gate active") {
    NetConfig cfg = soft_cfg(Variant::SoftReLU, 2, 3, 3, 4.0, 0.0);
    Prng rng(2);
    Dgn net = make_net(cfg, rng);
    Matrix data(2, 2);
    for (double& v : data.data) v = rng.next_uniform(-1, 1);
    const gates::GateThresholds th = gates::make_thresholds(cfg, 1e-9, 1.0);
    const gates::GateClassification cls = gates::classify_gates(net, data, th);
    for (std::size_t f = 0; f < cls.active.size(); ++f) CHECK(cls.active[f] == 1);
}

TEST_CASE("disjointness holds whenever tau_S exceeds the bound") {
    int nets_checked = 0;
    for (int trial = 0; trial < 50; ++trial) {
        Prng rng(100 + trial);
        const int d = 2 + static_cast<int>(rng.next_u64() % 3);
        const int w = 2 + static_cast<int>(rng.next_u64() % 3);
        const int d_in = 1 + static_cast<int>(rng.next_u64() % 2);
        const Variant v = (trial % 2 == 0) ? Variant::SoftGaLU : Variant::SoftReLU;
        NetConfig cfg = soft_cfg(v, d_in, w, d, 1.0 + rng.next_unit() * 7.0,
                                 rng.next_unit() * 0.2);
        cfg.sigma = std::sqrt(1.0 / w);
        Dgn net = make_net(cfg, rng);
        Matrix data(d_in, 3);
        for (double& x : data.data) x = rng.next_uniform(-1, 1);

        const double tau_a = 0.9 * (1.0 + cfg.epsilon);
        const double tau_s =
            (1.0 + rng.next_unit()) * gates::compatibility_bound(cfg.beta, cfg.epsilon, tau_a) +
            1e-12;
        const gates::GateThresholds th = gates::make_thresholds(cfg, tau_a, tau_s);
        REQUIRE(th.compatible);
        const gates::GateClassification cls = gates::classify_gates(net, data, th);
        for (std::size_t f = 0; f < cls.active.size(); ++f) {
            const bool both = cls.active[f] && cls.sensitive[f];
            CHECK_FALSE(both);
        }
        ++nets_checked;
    }
    CHECK(nets_checked == 50);
}

TEST_CASE("classification derivatives match finite differences") {
    NetConfig cfg = soft_cfg(Variant::SoftGaLU, 2, 3, 3, 3.0, 0.1);
    Prng rng(5);
    Dgn net = make_net(cfg, rng);
    Matrix data(2, 2);
    for (double& v : data.data) v = rng.next_uniform(-1, 1);

    const gates::GateClassification cls =
        gates::classify_gates(net, data, gates::default_thresholds(cfg));

    // recompute max |dG/dtheta| by central differences over every gating weight
    for (std::size_t s = 0; s < 2; ++s) {
        const Vec x = {data(0, s), data(1, s)};
        for (std::size_t l = 0; l < cls.layers; ++l)
            for (std::size_t i = 0; i < cls.width; ++i) {
                double fd_max = 0.0;
                for (Matrix& layer : net.gate_params.layers) {
                    for (double& slot : layer.data) {
                        const double orig = slot;
                        const double h = 1e-6;
                        slot = orig + h;
                        const double gp = compute_gates(net, x)(l, i);
                        slot = orig - h;
                        const double gm = compute_gates(net, x)(l, i);
                        slot = orig;
                        fd_max = std::max(fd_max, std::fabs((gp - gm) / (2 * h)));
                    }
                }
                CHECK(std::fabs(cls.max_dg[cls.flat(s, l, i)] - fd_max) <=
                      1e-5 * std::max(1.0, fd_max));
            }
    }
}

TEST_CASE("soft-relu gate derivatives flow through the shared weights") {
    // shared-parameter variant: dG/dtheta runs through the same net that
    // produced the pre-activations
    NetConfig cfg = soft_cfg(Variant::SoftReLU, 2, 3, 3, 2.0, 0.05);
    Prng rng(9);
    Dgn net = make_net(cfg, rng);
    const Vec x = {0.6, -0.3};
    const Matrix jac = gate_jacobian(net, x);

    for (std::size_t l = 0; l < 2; ++l)
        for (std::size_t i = 0; i < 3; ++i) {
            for (std::size_t m = 0; m < d_net(cfg); ++m) {
                std::size_t rem = m;
                double* slot = nullptr;
                for (Matrix& layer : net.weights.layers) {
                    if (rem < layer.data.size()) {
                        slot = &layer.data[rem];
                        break;
                    }
                    rem -= layer.data.size();
                }
                const double orig = *slot;
                const double h = 1e-6;
                *slot = orig + h;
                const double gp = compute_gates(net, x)(l, i);
                *slot = orig - h;
                const double gm = compute_gates(net, x)(l, i);
                *slot = orig;
                const double fd = (gp - gm) / (2 * h);
                CHECK(std::fabs(jac(l * 3 + i, m) - fd) <= 1e-5 * std::max(1.0, std::fabs(fd)));
            }
        }
}

TEST_CASE("classify_gates rejects hard variants") {
    NetConfig cfg;
    cfg.variant = Variant::ReLU;
    cfg.d_in = 1;
    cfg.w = 2;
    cfg.d = 2;
    cfg.train_gate_params = false;
    Prng rng(6);
    Dgn net = make_net(cfg, rng);
    Matrix data(1, 1, 1.0);
    CHECK_THROWS_AS(gates::classify_gates(net, data, gates::GateThresholds{0.5, 0.1, true}),
                    NotApplicableError);
}

TEST_CASE("jacobian sampling engages beyond the budget") {
    NetConfig cfg = soft_cfg(Variant::SoftReLU, 2, 6, 3, 4.0, 0.0);
    Prng rng(7);
    Dgn net = make_net(cfg, rng);
    Matrix data(2, 1);
    for (double& v : data.data) v = rng.next_uniform(-1, 1);
    const gates::GateClassification cls =
        gates::classify_gates(net, data, gates::default_thresholds(cfg), /*budget=*/64);
    CHECK(cls.sampled);
    CHECK(cls.sampled_columns > 0);
    CHECK(cls.sampled_columns < d_net(cfg));
}

TEST_CASE("subnetwork_summary counts") {
    NetConfig cfg = soft_cfg(Variant::SoftGaLU, 1, 3, 4, 4.0, 0.0);
    gates::GateClassification cls;
    cls.n = 1;
    cls.layers = 3;
    cls.width = 3;
    cls.gate_value.assign(9, 1.0);
    cls.active.assign(9, 1);
    cls.sensitive.assign(9, 0);
    cls.max_dg.assign(9, 0.0);

    // all gates active, none sensitive: w^(d-1) active paths, no sensitive paths
    gates::SubnetworkSummary sum = gates::subnetwork_summary(cls, cfg);
    CHECK(sum.active_path_count[0] == doctest::Approx(27.0));
    CHECK(sum.sensitive_path_count[0] == 0.0);

    // one sensitive gate in layer 1, everything else active: w^(d-2) sensitive paths
    cls.active[cls.flat(0, 0, 0)] = 0;
    cls.sensitive[cls.flat(0, 0, 0)] = 1;
    sum = gates::subnetwork_summary(cls, cfg);
    CHECK(sum.sensitive_path_count[0] == doctest::Approx(9.0));
    CHECK(sum.active_path_count[0] == doctest::Approx(2.0 * 3 * 3));

    // bounds
    CHECK(sum.active_path_count[0] <= std::pow(3.0, 3));
    CHECK(sum.sensitive_path_count[0] <= 3 * std::pow(3.0, 2));
}

TEST_CASE("subnetwork_summary matches brute-force path classification") {
    NetConfig cfg = soft_cfg(Variant::SoftGaLU, 2, 3, 3, 2.0, 0.1);
    Prng rng(8);
    Dgn net = make_net(cfg, rng);
    Matrix data(2, 2);
    for (double& v : data.data) v = rng.next_uniform(-1, 1);
    const gates::GateThresholds th = gates::default_thresholds(cfg);
    const gates::GateClassification cls = gates::classify_gates(net, data, th);
    const gates::SubnetworkSummary sum = gates::subnetwork_summary(cls, cfg);

    for (std::size_t s = 0; s < 2; ++s) {
        // brute force over all hidden-node sequences from one input node
        double active_paths = 0, sensitive_paths = 0;
        for (int n1 = 0; n1 < 3; ++n1)
            for (int n2 = 0; n2 < 3; ++n2) {
                const bool a1 = cls.active[cls.flat(s, 0, n1)];
                const bool a2 = cls.active[cls.flat(s, 1, n2)];
                const bool s1 = cls.sensitive[cls.flat(s, 0, n1)];
                const bool s2 = cls.sensitive[cls.flat(s, 1, n2)];
                if (a1 && a2) active_paths += 1;
                if ((s1 && a2) || (a1 && s2)) sensitive_paths += 1;
            }
        CHECK(sum.active_path_count[s] == doctest::Approx(active_paths));
        CHECK(sum.sensitive_path_count[s] == doctest::Approx(sensitive_paths));
    }

    // pairwise overlap table is symmetric with the right diagonal
    for (std::size_t l = 0; l < sum.active_overlap.size(); ++l) {
        const Matrix& ov = sum.active_overlap[l];
        CHECK(ov(0, 0) == static_cast<double>(sum.active_per_layer[0][l]));
        CHECK(ov(0, 1) == ov(1, 0));
    }
}

TEST_SUITE_END();
