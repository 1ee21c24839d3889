#include "gatelab/experiments.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <mutex>
#include <thread>

#include "gatelab/paths.hpp"

namespace gatelab {
namespace experiments {

data::Dataset make_dataset(const ExperimentSpec& spec, std::uint64_t seed) {
    if (spec.data_kind == "exp1") return data::gen_experiment1(spec.n, seed);
    if (spec.data_kind == "exp2") return data::gen_experiment2(spec.n, seed);
    if (spec.data_kind == "gauss")
        return data::gen_two_gaussians(spec.n, spec.gauss_d_in, spec.gauss_separation, seed);
    if (spec.data_kind == "csv") return data::load_csv(spec.csv_path, spec.net.d_in);
    if (spec.data_kind == "idx")
        return data::load_idx_binary_mnist(spec.idx_images, spec.idx_labels, spec.class_a,
                                           spec.class_b, spec.per_class);
    throw ParseError("unknown data kind '" + spec.data_kind + "'");
}

void for_each_index(int count, int jobs, const std::function<void(int)>& fn) {
    if (jobs <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex err_mutex;
    auto worker = [&]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const int nthreads = std::min(jobs, count);
    pool.reserve(nthreads);
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

namespace {

// deterministic per-run stream: decorrelate (base, index) through the
// same splitmix mixing the Prng uses
std::uint64_t run_seed(std::uint64_t base, int index) {
    return base + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(index + 1);
}

struct MeanSe {
    double mean = 0, se = 0;
};

MeanSe mean_se(const Vec& v) {
    MeanSe out;
    if (v.empty()) return out;
    for (double x : v) out.mean += x;
    out.mean /= static_cast<double>(v.size());
    if (v.size() > 1) {
        double ss = 0;
        for (double x : v) ss += (x - out.mean) * (x - out.mean);
        out.se = std::sqrt(ss / (static_cast<double>(v.size()) - 1.0) /
                           static_cast<double>(v.size()));
    }
    return out;
}

Dgn build_net(const NetConfig& cfg_in, const data::Dataset& ds, std::uint64_t seed) {
    NetConfig cfg = cfg_in;
    cfg.d_in = static_cast<int>(ds.d_in());
    Prng rng(seed);
    Dgn net = make_net(cfg, rng);
    if (cfg.variant == Variant::FRG) register_frg_inputs(net, ds.x, rng);
    return net;
}

Matrix first_columns(const Matrix& x, std::size_t count) {
    Matrix sub(x.rows, std::min(count, x.cols));
    for (std::size_t i = 0; i < x.rows; ++i)
        for (std::size_t j = 0; j < sub.cols; ++j) sub(i, j) = x(i, j);
    return sub;
}

}  // namespace

std::vector<GramTraceRow> run_gram_trace(const ExperimentSpec& spec) {
    if (spec.net.variant != Variant::FRG && spec.net.variant != Variant::DLN)
        throw NotApplicableError("gram-trace expects the FRG or DLN variant");
    const int w = spec.widths.at(0);
    std::vector<GramTraceRow> rows;
    for (int d : spec.depths) {
        NetConfig cfg = spec.net;
        cfg.d = d;
        cfg.w = w;
        const double sigma = effective_sigma(cfg);

        Vec diag(spec.seed_count), off(spec.seed_count);
        const data::Dataset ds = make_dataset(spec, spec.seed);
        const Matrix pair_x = first_columns(ds.x, 2);
        for_each_index(spec.seed_count, spec.jobs, [&](int i) {
            Dgn net = build_net(cfg, ds, run_seed(spec.seed, i));
            const gram::GramMatrix k = gram::gram_direct(net, pair_x);
            diag[i] = k.m(0, 0);
            off[i] = k.m.cols > 1 ? k.m(0, 1) : 0.0;
        });

        GramTraceRow row;
        row.d = d;
        const MeanSe md = mean_se(diag), mo = mean_se(off);
        row.mc_diag = md.mean;
        row.se_diag = md.se;
        row.mc_off = mo.mean;
        row.se_off = mo.se;

        double lam_self, lam_cross;
        if (cfg.variant == Variant::FRG) {
            std::tie(lam_self, lam_cross) = theory::frg_lambda_bar(cfg.mu, w, d);
        } else {
            lam_self = lam_cross = std::pow(static_cast<double>(w), d - 1);
        }
        const Matrix xtx = gram::data_gram(pair_x);
        const double c = d * std::pow(sigma, 2.0 * (d - 1));
        row.theory_diag = c * xtx(0, 0) * lam_self;
        row.theory_off = xtx.cols > 1 ? c * xtx(0, 1) * lam_cross : 0.0;
        rows.push_back(row);
    }
    return rows;
}

std::vector<EcdfCurve> run_ecdf_sweep(const ExperimentSpec& spec) {
    if (spec.net.variant != Variant::FRG)
        throw NotApplicableError("spectrum sweep expects the FRG variant");
    std::vector<EcdfCurve> curves;
    for (int d : spec.depths) {
        for (int w : spec.widths) {
            NetConfig cfg = spec.net;
            cfg.d = d;
            cfg.w = w;
            const data::Dataset ds = make_dataset(spec, spec.seed);
            const std::size_t n = ds.n();

            std::vector<Vec> per_seed(spec.seed_count);
            for_each_index(spec.seed_count, spec.jobs, [&](int i) {
                Dgn net = build_net(cfg, ds, run_seed(spec.seed, i));
                gram::GramMatrix k = gram::gram_direct(net, ds.x);
                k.m = scale(k.m, 1.0 / d);
                const SymEigen eig = sym_eigen(k.m);
                per_seed[i] =
                    gram::ecdf(eig.eigenvalues, gram::SpectrumNormalization::None).ecdf;
            });

            EcdfCurve curve;
            curve.d = d;
            curve.w = w;
            curve.seed_count = spec.seed_count;
            curve.actual.assign(n, 0.0);
            for (const Vec& c : per_seed)
                for (std::size_t k = 0; k < n; ++k) curve.actual[k] += c[k];
            for (double& v : curve.actual) v /= spec.seed_count;
            curve.ideal = gram::ecdf(theory::ideal_frg_spectrum(static_cast<int>(n), cfg.mu, d),
                                     gram::SpectrumNormalization::None)
                              .ecdf;
            for (std::size_t k = 0; k < n; ++k)
                curve.sup_gap = std::max(curve.sup_gap, std::fabs(curve.actual[k] - curve.ideal[k]));
            curves.push_back(std::move(curve));
        }
    }
    return curves;
}

std::vector<ConvergenceRow> run_convergence_sweep(const ExperimentSpec& spec) {
    std::vector<ConvergenceRow> rows;
    const int w = spec.widths.at(0);
    for (int d : spec.depths) {
        NetConfig cfg = spec.net;
        cfg.d = d;
        cfg.w = w;
        std::vector<Vec> ratios(spec.seed_count);
        for_each_index(spec.seed_count, spec.jobs, [&](int i) {
            const data::Dataset ds = make_dataset(spec, run_seed(spec.seed, i));
            Dgn net = build_net(cfg, ds, run_seed(spec.seed ^ 0x5151, i));
            train::Optimizer opt;
            opt.kind = train::OptKind::Sgd;
            if (spec.alpha > 0.0) {
                opt.alpha = spec.alpha;
            } else {
                const gram::GramMatrix k0 = gram::gram_direct(net, ds.x);
                opt.alpha = train::step_from_spectrum(k0.m, spec.alpha_factor);
            }
            const train::TrajectoryRecord rec = train::train(net, ds.x, ds.y, opt, spec.steps);
            ratios[i] = rec.ratio;
        });
        ConvergenceRow row;
        row.d = d;
        row.mean_ratio.assign(spec.steps + 1, 0.0);
        for (const Vec& r : ratios)
            for (std::size_t t = 0; t < r.size(); ++t) row.mean_ratio[t] += r[t];
        for (double& v : row.mean_ratio) v /= spec.seed_count;
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<DlnDepthResult> run_dln_dynamics(const ExperimentSpec& spec) {
    const int w = spec.widths.at(0);
    std::vector<DlnDepthResult> out;
    for (int d : spec.depths) {
        NetConfig cfg = spec.net;
        cfg.variant = Variant::DLN;
        cfg.train_gate_params = false;
        cfg.d_in = 1;
        cfg.d = d;
        cfg.w = w;

        // the scalar dataset: the single pair (x, y) = (1, 1)
        data::Dataset ds;
        ds.name = "dln-unit";
        ds.x = Matrix(1, 1, 1.0);
        ds.y = {1.0};

        DlnDepthResult res;
        res.d = d;
        res.k0_theory = d * std::pow(w * effective_sigma(cfg) * effective_sigma(cfg), d - 1);

        Vec k0(spec.seed_count), early(spec.seed_count);
        std::vector<train::TrajectoryRecord> recs(spec.seed_count);
        for_each_index(spec.seed_count, spec.jobs, [&](int i) {
            Dgn net = build_net(cfg, ds, run_seed(spec.seed, i));
            train::Optimizer opt;
            opt.alpha = spec.alpha_factor / d;
            recs[i] = train::train(net, ds.x, ds.y, opt, spec.steps, /*cadence=*/1);
            k0[i] = recs[i].snapshots.front().rho_max;
            double acc = 0.0;
            const int early_steps = std::min(5, spec.steps);
            for (int t = 0; t < early_steps; ++t) acc += recs[i].loss[t + 1] / recs[i].loss[t];
            early[i] = acc / early_steps;
        });

        const MeanSe mk = mean_se(k0);
        res.k0_mean = mk.mean;
        res.k0_se = mk.se;
        res.early_ratio_mean = mean_se(early).mean;

        const std::size_t len = recs[0].ratio.size();
        res.mean_ratio.assign(len, 0.0);
        res.mean_kt.assign(len, 0.0);
        res.mean_theta_norm.assign(len, 0.0);
        for (const auto& rec : recs) {
            for (std::size_t t = 0; t < len; ++t) {
                res.mean_ratio[t] += rec.ratio[t];
                res.mean_kt[t] += rec.snapshots[t].rho_max;
                res.mean_theta_norm[t] += rec.snapshots[t].theta_norm;
            }
        }
        for (std::size_t t = 0; t < len; ++t) {
            res.mean_ratio[t] /= spec.seed_count;
            res.mean_kt[t] /= spec.seed_count;
            res.mean_theta_norm[t] /= spec.seed_count;
        }
        out.push_back(std::move(res));
    }
    return out;
}

namespace {

Matrix chosen_nu_kernel(const Dgn& net, const Matrix& data_x, const std::string& kind,
                        bool& normalize) {
    if (kind == "K") {
        normalize = true;
        return gram::gram_direct(net, data_x).m;
    }
    if (kind == "Ka" || kind == "KaHat") {
        normalize = kind == "KaHat";
        return gram::gram_blocks_direct(net, data_x).gate.m;
    }
    if (kind == "M") {
        normalize = true;
        std::vector<GateRow> gates;
        gates.reserve(data_x.cols);
        for (std::size_t s = 0; s < data_x.cols; ++s) {
            Vec x(data_x.rows);
            for (std::size_t i = 0; i < data_x.rows; ++i) x[i] = data_x(i, s);
            gates.push_back(compute_gates(net, x, static_cast<long>(s)));
        }
        return gram::feature_gram(data_x, gram::lambda_matrix(gates)).m;
    }
    throw ParseError("unknown nu kernel '" + kind + "'");
}

}  // namespace

std::vector<NuTrackRow> run_nu_track(const ExperimentSpec& spec, Dgn* final_net) {
    const data::Dataset ds = make_dataset(spec, spec.seed);
    Dgn net = build_net(spec.net, ds, run_seed(spec.seed, 0));

    train::Optimizer opt;
    if (spec.opt_kind == "rmsprop") {
        opt.kind = train::OptKind::RmsProp;
        opt.alpha = spec.alpha > 0.0 ? spec.alpha : 1e-4;
        opt.decay = spec.rms_decay;
        opt.stabilizer = spec.rms_stabilizer;
    } else {
        opt.kind = train::OptKind::Sgd;
        opt.alpha = spec.alpha > 0.0
                        ? spec.alpha
                        : train::step_from_spectrum(gram::gram_direct(net, ds.x).m,
                                                    spec.alpha_factor);
    }

    std::vector<NuTrackRow> rows;
    const int cadence = spec.cadence > 0 ? spec.cadence : std::max(1, spec.steps / 10);
    auto hook = [&](const Dgn& current, int step) {
        bool normalize = true;
        const Matrix h = chosen_nu_kernel(current, ds.x, spec.nu_kernel, normalize);
        NuTrackRow row;
        row.step = step;
        row.nu = gram::nu(h, ds.y, normalize);
        const SymEigen eig = sym_eigen(h);
        row.rho_max = eig.eigenvalues.back();
        row.rho_min = eig.eigenvalues.front();
        rows.push_back(row);
    };
    const train::TrajectoryRecord rec =
        train::train(net, ds.x, ds.y, opt, spec.steps, cadence, hook);

    for (NuTrackRow& row : rows) {
        row.loss = rec.loss[row.step];
        row.ratio = rec.ratio[row.step];
    }
    if (final_net) *final_net = std::move(net);
    return rows;
}

namespace {

bool param_sets_equal(const ParamSet& a, const ParamSet& b) {
    if (a.layers.size() != b.layers.size()) return false;
    for (std::size_t l = 0; l < a.layers.size(); ++l)
        if (a.layers[l].data != b.layers[l].data) return false;
    return true;
}

double test_loss(const Dgn& net, const data::Dataset& ds) {
    double loss = 0.0;
    for (std::size_t s = 0; s < ds.n(); ++s) {
        const double e = forward(net, ds.input(s)).yhat - ds.y[s];
        loss += e * e;
    }
    return loss;
}

double nu_from_feature_gram(const Dgn& net, const data::Dataset& ds) {
    std::vector<GateRow> gates;
    gates.reserve(ds.n());
    for (std::size_t s = 0; s < ds.n(); ++s) gates.push_back(compute_gates(net, ds.input(s), static_cast<long>(s)));
    return gram::nu(gram::feature_gram(ds.x, gram::lambda_matrix(gates)).m, ds.y, true);
}

}  // namespace

GateCompareResult run_gate_comparison(const ExperimentSpec& spec) {
    const data::Dataset full = make_dataset(spec, spec.seed);
    auto [train_ds, test_ds] = data::shuffle_split(full, spec.holdout_frac, spec.seed ^ 0xabcd);

    GateCompareResult out;
    Dgn net_a, net_b;
    Prng rng(run_seed(spec.seed, 7));

    if (spec.compare_mode == "adaptive") {
        // adaptive ReLU against the same initialization with frozen gates
        out.label_a = "relu-adaptive";
        out.label_b = "galu-frozen";
        NetConfig relu_cfg = spec.net;
        relu_cfg.variant = Variant::ReLU;
        relu_cfg.d_in = static_cast<int>(train_ds.d_in());
        net_a = make_net(relu_cfg, rng);
        NetConfig frozen_cfg = relu_cfg;
        frozen_cfg.variant = Variant::GaLUFrozen;
        frozen_cfg.train_gate_params = false;
        net_b.cfg = frozen_cfg;
        net_b.weights = net_a.weights;      // Theta^w_0 = Theta_0
        net_b.gate_params = net_a.weights;  // Theta^g_0 = Theta^w_0
    } else if (spec.compare_mode == "transplant") {
        // gates learned by a ReLU run against freshly drawn frozen gates
        out.label_a = "galu-learned-gates";
        out.label_b = "galu-random-gates";
        NetConfig relu_cfg = spec.net;
        relu_cfg.variant = Variant::ReLU;
        relu_cfg.d_in = static_cast<int>(train_ds.d_in());
        Dgn source = make_net(relu_cfg, rng);
        train::Optimizer pre_opt;
        pre_opt.alpha =
            train::step_from_spectrum(gram::gram_direct(source, train_ds.x).m, 0.1);
        train::train(source, train_ds.x, train_ds.y, pre_opt, spec.steps);

        NetConfig galu_cfg = relu_cfg;
        galu_cfg.variant = Variant::GaLUFrozen;
        galu_cfg.train_gate_params = false;
        net_a = transplant_gates(source, galu_cfg, rng);

        // transplanted gates must equal the source's gates at step 0
        out.transplant_gates_match = true;
        for (std::size_t s = 0; s < train_ds.n(); ++s) {
            const GateRow ga = compute_gates(source, train_ds.input(s));
            const GateRow gb = compute_gates(net_a, train_ds.input(s));
            if (ga.data != gb.data) out.transplant_gates_match = false;
        }

        net_b = make_net(galu_cfg, rng);
    } else {
        throw ParseError("unknown compare mode '" + spec.compare_mode + "'");
    }

    const ParamSet frozen_before = net_b.cfg.variant == Variant::GaLUFrozen
                                       ? net_b.gate_params
                                       : ParamSet{};

    const int cadence = spec.cadence > 0 ? spec.cadence : std::max(1, spec.steps / 10);
    auto run_one = [&](Dgn& net, Vec& test_curve, Vec& nu_curve, std::vector<int>& steps_out) {
        train::Optimizer opt;
        opt.kind = spec.opt_kind == "rmsprop" ? train::OptKind::RmsProp : train::OptKind::Sgd;
        if (opt.kind == train::OptKind::RmsProp) {
            opt.alpha = spec.alpha > 0.0 ? spec.alpha : 1e-4;
            opt.decay = spec.rms_decay;
            opt.stabilizer = spec.rms_stabilizer;
        } else {
            opt.alpha = spec.alpha > 0.0
                            ? spec.alpha
                            : train::step_from_spectrum(
                                  gram::gram_direct(net, train_ds.x).m, spec.alpha_factor);
        }
        auto hook = [&](const Dgn& cur, int step) {
            steps_out.push_back(step);
            test_curve.push_back(test_loss(cur, test_ds));
            nu_curve.push_back(nu_from_feature_gram(cur, train_ds));
        };
        return train::train(net, train_ds.x, train_ds.y, opt, spec.steps, cadence, hook);
    };

    std::vector<int> steps_a, steps_b;
    const train::TrajectoryRecord rec_a = run_one(net_a, out.test_a, out.nu_a, steps_a);
    const train::TrajectoryRecord rec_b = run_one(net_b, out.test_b, out.nu_b, steps_b);
    out.step = steps_a;
    for (int s : out.step) {
        out.train_a.push_back(rec_a.loss[s]);
        out.train_b.push_back(rec_b.loss[s]);
    }

    if (net_b.cfg.variant == Variant::GaLUFrozen)
        out.frozen_gates_intact = param_sets_equal(frozen_before, net_b.gate_params);
    return out;
}

std::vector<ConvInvarianceRow> run_conv_invariance(const ExperimentSpec& spec) {
    const convnet::ConvConfig cfg = spec.conv;
    cfg.validate();
    const double sigma = std::sqrt(1.0 / cfg.kernel);

    // deterministic small-integer signals keep the all-ones sums exact
    Vec xs(cfg.d_in), xsp(cfg.d_in);
    for (int i = 0; i < cfg.d_in; ++i) {
        xs[i] = i + 1.0;
        xsp[i] = ((i * 2) % cfg.d_in) + 1.0;
    }

    std::vector<ConvInvarianceRow> rows;
    const Matrix ones_gates(cfg.layers, cfg.d_in, 1.0);

    if (spec.conv_gates == "ones" || spec.conv_gates == "all") {
        for (int shift = 0; shift < cfg.d_in; ++shift) {
            const Vec rs = convnet::rotate_input(xs, shift);
            const Vec rsp = convnet::rotate_input(xsp, shift);
            ConvInvarianceRow row;
            row.gates = "ones";
            row.shift = shift;
            row.exact =
                convnet::invariance_expectation(cfg, ones_gates, ones_gates, rs, rsp, sigma);
            Vec draws(spec.mc_draws);
            for (int m = 0; m < spec.mc_draws; ++m) {
                Prng rng(run_seed(spec.seed, m));
                const convnet::ConvNet net = convnet::make_conv_net(
                    cfg, convnet::ConvGateKind::AllOnes, sigma, 0.5, rng);
                draws[m] =
                    convnet::circ_conv_forward(net, rs).gap * convnet::circ_conv_forward(net, rsp).gap;
            }
            const MeanSe ms = mean_se(draws);
            row.mc_mean = ms.mean;
            row.mc_se = ms.se;
            rows.push_back(row);
        }
    }
    if (spec.conv_gates == "galu" || spec.conv_gates == "all") {
        for (int shift = 0; shift < cfg.d_in; ++shift) {
            const Vec rs = convnet::rotate_input(xs, shift);
            const Vec rsp = convnet::rotate_input(xsp, shift);
            ConvInvarianceRow row;
            row.gates = "galu";
            row.shift = shift;
            Vec draws(spec.mc_draws), formula(spec.mc_draws);
            for (int m = 0; m < spec.mc_draws; ++m) {
                Prng rng(run_seed(spec.seed ^ 0x77, m));
                const convnet::ConvNet net =
                    convnet::make_conv_net(cfg, convnet::ConvGateKind::GaLU, sigma, 0.5, rng);
                const convnet::ConvForward fa = convnet::circ_conv_forward(net, rs);
                const convnet::ConvForward fb = convnet::circ_conv_forward(net, rsp);
                draws[m] = fa.gap * fb.gap;
                formula[m] =
                    convnet::invariance_expectation(cfg, fa.gates, fb.gates, rs, rsp, sigma);
            }
            const MeanSe ms = mean_se(draws);
            row.mc_mean = ms.mean;
            row.mc_se = ms.se;
            row.exact = mean_se(formula).mean;  // gate-averaged bundle expectation
            rows.push_back(row);
        }
    }
    return rows;
}

OracleGridReport oracle_check_grid() {
    const auto t0 = std::chrono::steady_clock::now();
    OracleGridReport rep;
    const Variant variants[] = {Variant::DLN,  Variant::FRG,      Variant::GaLUFrozen,
                                Variant::ReLU, Variant::SoftReLU, Variant::SoftGaLU};
    std::uint64_t seed = 20200206;

    for (int d = 2; d <= 4; ++d) {
        for (int w = 1; w <= 4; ++w) {
            for (int d_in = 1; d_in <= 3; ++d_in) {
                for (Variant variant : variants) {
                    NetConfig cfg;
                    cfg.d = d;
                    cfg.w = w;
                    cfg.d_in = d_in;
                    cfg.variant = variant;
                    cfg.beta = 4.0;
                    cfg.epsilon = variant == Variant::SoftGaLU ? 0.1 : 0.0;
                    cfg.train_gate_params = variant == Variant::SoftGaLU;
                    ++seed;

                    Prng rng(seed);
                    const int n = 2;
                    Matrix data_x(d_in, n);
                    for (double& v : data_x.data) v = rng.next_uniform(-1.0, 1.0);
                    Dgn net = make_net(cfg, rng);
                    if (variant == Variant::FRG) register_frg_inputs(net, data_x, rng);
                    ++rep.configs;

                    std::vector<GateRow> gates;
                    std::vector<Vec> xs;
                    for (int s = 0; s < n; ++s) {
                        Vec x(d_in);
                        for (int i = 0; i < d_in; ++i) x[i] = data_x(i, s);
                        xs.push_back(x);
                        gates.push_back(compute_gates(net, x, s));
                    }

                    // forward vs path sum
                    for (int s = 0; s < n; ++s) {
                        const double y_net = forward(net, xs[s]).yhat;
                        const double y_path =
                            paths::output_via_paths(xs[s], gates[s], net.weights, cfg);
                        const double err =
                            std::fabs(y_net - y_path) / std::max(1.0, std::fabs(y_path));
                        rep.max_forward_rel_err = std::max(rep.max_forward_rel_err, err);
                    }

                    // ntf oracle
                    const std::size_t dim = ntf_dimension(cfg);
                    const Vec psi = ntf_column(net, xs[0]);
                    if (cfg.is_soft()) {
                        // central differences over every trainable entry
                        const double h0 = 1e-5;
                        std::size_t m = 0;
                        auto fd_check = [&](ParamSet& pset, std::size_t count) {
                            for (std::size_t k = 0; k < count; ++k, ++m) {
                                double* slot = nullptr;
                                std::size_t rem = k;
                                for (Matrix& layer : pset.layers) {
                                    if (rem < layer.data.size()) {
                                        slot = &layer.data[rem];
                                        break;
                                    }
                                    rem -= layer.data.size();
                                }
                                const double orig = *slot;
                                const double h = h0 * std::max(1.0, std::fabs(orig));
                                *slot = orig + h;
                                const double yp = forward(net, xs[0]).yhat;
                                *slot = orig - h;
                                const double ym = forward(net, xs[0]).yhat;
                                *slot = orig;
                                const double fd = (yp - ym) / (2.0 * h);
                                const double err =
                                    std::fabs(psi[m] - fd) / std::max(1.0, std::fabs(fd));
                                rep.max_ntf_fd_err = std::max(rep.max_ntf_fd_err, err);
                            }
                        };
                        fd_check(net.weights, d_net(cfg));
                        if (variant == Variant::SoftGaLU) fd_check(net.gate_params, d_net(cfg));
                    } else {
                        // path-sensitivity sums, exact up to association order
                        const std::uint64_t np = paths::num_paths(cfg);
                        for (std::size_t m = 0; m < dim; ++m) {
                            double acc = 0.0;
                            for (std::uint64_t pi = 0; pi < np; ++pi) {
                                const paths::Path p = paths::path_from_index(cfg, pi);
                                acc += xs[0][p.node[0]] * paths::path_activation(gates[0], p) *
                                       paths::path_sensitivity(cfg, net.weights, p, m);
                            }
                            const double err =
                                std::fabs(psi[m] - acc) / std::max(1.0, std::fabs(acc));
                            rep.max_ntf_path_err = std::max(rep.max_ntf_path_err, err);
                        }
                    }

                    // lambda factorization vs brute force
                    const gram::GramMatrix lam = gram::lambda_matrix(gates);
                    const Matrix lam_bf = paths::lambda_matrix_bruteforce(cfg, gates);
                    for (std::size_t i = 0; i < lam.m.data.size(); ++i) {
                        const double err = std::fabs(lam.m.data[i] - lam_bf.data[i]);
                        if (cfg.is_soft())
                            rep.max_lambda_err_soft = std::max(rep.max_lambda_err_soft, err);
                        else
                            rep.max_lambda_err_hard = std::max(rep.max_lambda_err_hard, err);
                    }

                    // signal/wire reconstruction for frozen-gate evaluation
                    if (!cfg.is_soft()) {
                        const gram::GramMatrix k = gram::gram(gram::ntf_matrix(net, data_x));
                        for (int s = 0; s < n; ++s) {
                            for (int sp = 0; sp < n; ++sp) {
                                double diag = 0.0, exact = 0.0;
                                for (int i = 0; i < d_in; ++i) {
                                    for (int j = 0; j < d_in; ++j) {
                                        const double kp = paths::kappa_pair(
                                            cfg, net.weights, gates[s], gates[sp], i, j);
                                        exact += data_x(i, s) * data_x(j, sp) * kp;
                                        if (i == j) diag += data_x(i, s) * data_x(j, sp) * kp;
                                    }
                                }
                                const double denom = std::max(1.0, std::fabs(k.m(s, sp)));
                                const double err_exact = std::fabs(exact - k.m(s, sp)) / denom;
                                const double err_diag = std::fabs(diag - k.m(s, sp)) / denom;
                                rep.max_kappa_exact_rel_err =
                                    std::max(rep.max_kappa_exact_rel_err, err_exact);
                                rep.max_kappa_diag_rel_err_full =
                                    std::max(rep.max_kappa_diag_rel_err_full, err_diag);
                                if (d_in == 1)
                                    rep.max_kappa_diag_rel_err_din1 =
                                        std::max(rep.max_kappa_diag_rel_err_din1, err_diag);
                            }
                        }
                    }
                }
            }
        }
    }
    rep.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

// ---------------------------------------------------------------------------
// CSV renderings
// ---------------------------------------------------------------------------

io::CsvTable gram_trace_table(const std::vector<GramTraceRow>& rows) {
    io::CsvTable t;
    t.header = {"d", "entry_kind", "mc_mean", "mc_se", "theory"};
    for (const GramTraceRow& r : rows) {
        t.add_row_mixed({io::format_double(r.d), "diag", io::format_double(r.mc_diag),
                         io::format_double(r.se_diag), io::format_double(r.theory_diag)});
        t.add_row_mixed({io::format_double(r.d), "offdiag", io::format_double(r.mc_off),
                         io::format_double(r.se_off), io::format_double(r.theory_off)});
    }
    return t;
}

io::CsvTable ecdf_table(const std::vector<EcdfCurve>& curves) {
    io::CsvTable t;
    t.header = {"d", "w", "seed_count", "index", "actual_cum", "ideal_cum"};
    for (const EcdfCurve& c : curves)
        for (std::size_t k = 0; k < c.actual.size(); ++k)
            t.add_row({static_cast<double>(c.d), static_cast<double>(c.w),
                       static_cast<double>(c.seed_count), static_cast<double>(k + 1),
                       c.actual[k], c.ideal[k]});
    return t;
}

io::CsvTable convergence_table(const std::vector<ConvergenceRow>& rows) {
    io::CsvTable t;
    t.header = {"d", "step", "residual_ratio"};
    for (const ConvergenceRow& r : rows)
        for (std::size_t s = 0; s < r.mean_ratio.size(); ++s)
            t.add_row({static_cast<double>(r.d), static_cast<double>(s), r.mean_ratio[s]});
    return t;
}

io::CsvTable trajectory_table(const train::TrajectoryRecord& rec, bool with_snapshots) {
    io::CsvTable t;
    if (!with_snapshots || rec.snapshots.empty()) {
        t.header = {"step", "loss", "residual_ratio"};
        for (std::size_t i = 0; i < rec.loss.size(); ++i)
            t.add_row({static_cast<double>(rec.step[i]), rec.loss[i], rec.ratio[i]});
        return t;
    }
    t.header = {"step", "loss", "residual_ratio", "nu", "rho_max", "rho_min"};
    for (const train::Snapshot& s : rec.snapshots)
        t.add_row({static_cast<double>(s.step), rec.loss[s.step], rec.ratio[s.step], s.nu,
                   s.rho_max, s.rho_min});
    return t;
}

io::CsvTable nu_track_table(const std::vector<NuTrackRow>& rows) {
    io::CsvTable t;
    t.header = {"step", "loss", "residual_ratio", "nu", "rho_max", "rho_min"};
    for (const NuTrackRow& r : rows)
        t.add_row({static_cast<double>(r.step), r.loss, r.ratio, r.nu, r.rho_max, r.rho_min});
    return t;
}

io::CsvTable gate_compare_table(const GateCompareResult& r) {
    io::CsvTable t;
    t.header = {"step", "train_loss_a", "test_loss_a", "nu_a",
                "train_loss_b", "test_loss_b", "nu_b"};
    for (std::size_t i = 0; i < r.step.size(); ++i)
        t.add_row({static_cast<double>(r.step[i]), r.train_a[i], r.test_a[i], r.nu_a[i],
                   r.train_b[i], r.test_b[i], r.nu_b[i]});
    return t;
}

io::CsvTable conv_invariance_table(const std::vector<ConvInvarianceRow>& rows) {
    io::CsvTable t;
    t.header = {"gates", "shift", "bundle_expectation", "mc_mean", "mc_se"};
    for (const ConvInvarianceRow& r : rows)
        t.add_row_mixed({r.gates, io::format_double(r.shift), io::format_double(r.exact),
                         io::format_double(r.mc_mean), io::format_double(r.mc_se)});
    return t;
}

io::CsvTable gates_table(const gates::GateClassification& cls) {
    io::CsvTable t;
    t.header = {"example", "layer", "node", "G", "active", "sensitive", "max_dG"};
    for (std::size_t s = 0; s < cls.n; ++s)
        for (std::size_t l = 0; l < cls.layers; ++l)
            for (std::size_t i = 0; i < cls.width; ++i) {
                const std::size_t f = cls.flat(s, l, i);
                t.add_row({static_cast<double>(s), static_cast<double>(l + 1),
                           static_cast<double>(i), cls.gate_value[f],
                           static_cast<double>(cls.active[f]),
                           static_cast<double>(cls.sensitive[f]), cls.max_dg[f]});
            }
    return t;
}

io::CsvTable dln_k0_table(const std::vector<DlnDepthResult>& rows) {
    io::CsvTable t;
    t.header = {"d", "k0_mc_mean", "k0_mc_se", "k0_theory", "early_ratio_mean"};
    for (const DlnDepthResult& r : rows)
        t.add_row({static_cast<double>(r.d), r.k0_mean, r.k0_se, r.k0_theory,
                   r.early_ratio_mean});
    return t;
}

io::CsvTable dln_trajectory_table(const std::vector<DlnDepthResult>& rows) {
    io::CsvTable t;
    t.header = {"d", "step", "residual_ratio", "k_t", "theta_norm"};
    for (const DlnDepthResult& r : rows)
        for (std::size_t s = 0; s < r.mean_ratio.size(); ++s)
            t.add_row({static_cast<double>(r.d), static_cast<double>(s), r.mean_ratio[s],
                       r.mean_kt[s], r.mean_theta_norm[s]});
    return t;
}

void write_manifest(const io::Config& resolved, const std::string& out_dir,
                    const std::vector<std::string>& outputs) {
    std::ofstream out(out_dir + "/manifest.cfg", std::ios::trunc);
    if (!out) throw FormatError("cannot write manifest in '" + out_dir + "'");
    const std::time_t now = std::time(nullptr);
    char stamp[64];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    out << "# gatelab run manifest (re-run with --config this file)\n";
    out << "# gatelab-version: " << kVersion << "\n";
    out << "# generated: " << stamp << "\n";
    for (const auto& [key, value] : resolved.entries()) out << key << " = " << value << "\n";
    for (const std::string& file : outputs) {
        std::ifstream in(out_dir + "/" + file, std::ios::binary);
        std::uint64_t h = 0xcbf29ce484222325ULL;
        char c;
        while (in.get(c)) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001b3ULL;
        }
        char hex[32];
        std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
        out << "# output: " << file << " fnv1a64=" << hex << "\n";
    }
}

}  // namespace experiments
}  // namespace gatelab
