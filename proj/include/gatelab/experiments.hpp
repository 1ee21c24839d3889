#ifndef GATELAB_EXPERIMENTS_HPP
#define GATELAB_EXPERIMENTS_HPP

#include <functional>

#include "gatelab/convnet.hpp"
#include "gatelab/data.hpp"
#include "gatelab/gates.hpp"
#include "gatelab/gram.hpp"
#include "gatelab/io.hpp"
#include "gatelab/theory.hpp"
#include "gatelab/train.hpp"

namespace gatelab {
namespace experiments {

// One fully-resolved experiment description; every runner below consumes
// the fields it needs and ignores the rest.
struct ExperimentSpec {
    NetConfig net;

    std::string data_kind = "exp1";  // exp1 | exp2 | gauss | csv | idx
    int n = 50;
    int gauss_d_in = 10;
    double gauss_separation = 3.0;
    std::string csv_path;
    std::string idx_images, idx_labels;
    int class_a = 4, class_b = 7, per_class = 100;

    std::uint64_t seed = 1;
    int seed_count = 5;
    std::vector<int> depths = {2, 4, 6, 8};
    std::vector<int> widths = {100};

    std::string opt_kind = "sgd";  // sgd | rmsprop
    double alpha = 0.0;            // explicit effective step; 0 = derive from factor
    double alpha_factor = 0.1;     // alpha = factor / rho_max(K0)
    double rms_decay = 0.9;
    double rms_stabilizer = 1e-8;
    int batch = 0;  // 0 = full batch
    int steps = 100;
    int cadence = 0;

    std::string nu_kernel = "M";      // K | Ka | KaHat | M
    std::string compare_mode = "adaptive";  // adaptive | transplant
    double holdout_frac = 0.5;
    int mc_draws = 500;

    convnet::ConvConfig conv;
    std::string conv_gates = "galu";  // ones | frg | galu

    std::string out_dir = "runs";
    int jobs = 1;
    bool svg = false;
};

data::Dataset make_dataset(const ExperimentSpec& spec, std::uint64_t seed);

// runs fn(0..count-1) across up to `jobs` threads; fn writes only to
// caller-owned slots indexed by its argument
void for_each_index(int count, int jobs, const std::function<void(int)>& fn);

// ---- Gram-entry traces vs depth, Monte Carlo vs closed form ----
struct GramTraceRow {
    int d = 0;
    double mc_diag = 0, se_diag = 0, theory_diag = 0;
    double mc_off = 0, se_off = 0, theory_off = 0;
};
std::vector<GramTraceRow> run_gram_trace(const ExperimentSpec& spec);

// ---- spectrum ECDF sweep over (d, w) ----
struct EcdfCurve {
    int d = 0, w = 0;
    int seed_count = 0;
    Vec actual;  // seed-mean cumulative spectrum of K0/d
    Vec ideal;
    double sup_gap = 0.0;
};
std::vector<EcdfCurve> run_ecdf_sweep(const ExperimentSpec& spec);

// ---- residual-ratio curves per depth ----
struct ConvergenceRow {
    int d = 0;
    Vec mean_ratio;  // ||e_t||^2/||e_0||^2 averaged over seeds, t = 0..T
};
std::vector<ConvergenceRow> run_convergence_sweep(const ExperimentSpec& spec);

// ---- DLN scalar dynamics ----
struct DlnDepthResult {
    int d = 0;
    double k0_mean = 0, k0_se = 0, k0_theory = 0;
    double early_ratio_mean = 0;  // mean e_{t+1}^2/e_t^2 over first 5 steps
    Vec mean_ratio;
    Vec mean_kt;
    Vec mean_theta_norm;
};
std::vector<DlnDepthResult> run_dln_dynamics(const ExperimentSpec& spec);

// ---- nu_t tracking ----
struct NuTrackRow {
    int step = 0;
    double loss = 0, ratio = 0, nu = 0, rho_max = 0, rho_min = 0;
};
// final_net, when given, receives the trained network so callers can run
// gate classification on it
std::vector<NuTrackRow> run_nu_track(const ExperimentSpec& spec, Dgn* final_net = nullptr);

// ---- paired adaptive/frozen or
//      transplanted/random runs on a held-out split ----
struct GateCompareResult {
    std::string label_a, label_b;
    std::vector<int> step;
    Vec train_a, test_a, nu_a;
    Vec train_b, test_b, nu_b;
    bool frozen_gates_intact = false;   // bitwise equality after training
    bool transplant_gates_match = false;  // target gates == source gates at step 0
};
GateCompareResult run_gate_comparison(const ExperimentSpec& spec);

// ---- translation-invariance desk check ----
struct ConvInvarianceRow {
    std::string gates;
    int shift = 0;
    double exact = 0;    // bundle-sum expectation (all-ones gates)
    double mc_mean = 0;  // Monte Carlo over weight (and gating) draws
    double mc_se = 0;
};
std::vector<ConvInvarianceRow> run_conv_invariance(const ExperimentSpec& spec);

// ---- exhaustive tiny-net oracle sweep ----
struct OracleGridReport {
    int configs = 0;
    double max_forward_rel_err = 0;
    double max_ntf_fd_err = 0;     // soft variants vs central differences
    double max_ntf_path_err = 0;   // frozen variants vs path-sensitivity sums
    double max_lambda_err_hard = 0;
    double max_lambda_err_soft = 0;
    // full signal/wire reconstruction sum_{i,j} x_i x_j' kappa_pair(i,j)
    double max_kappa_exact_rel_err = 0;
    // diagonal-only grouping sum_i x_i x_i' kappa(i): exact at d_in = 1,
    // reported separately for d_in > 1 where it holds only in expectation
    double max_kappa_diag_rel_err_din1 = 0;
    double max_kappa_diag_rel_err_full = 0;
    double runtime_seconds = 0;
};
OracleGridReport oracle_check_grid();

// CSV renderings of the result structs, per the documented schemas
io::CsvTable gram_trace_table(const std::vector<GramTraceRow>& rows);
io::CsvTable ecdf_table(const std::vector<EcdfCurve>& curves);
io::CsvTable convergence_table(const std::vector<ConvergenceRow>& rows);
io::CsvTable trajectory_table(const train::TrajectoryRecord& rec, bool with_snapshots);
io::CsvTable nu_track_table(const std::vector<NuTrackRow>& rows);
io::CsvTable gate_compare_table(const GateCompareResult& r);
io::CsvTable conv_invariance_table(const std::vector<ConvInvarianceRow>& rows);
io::CsvTable gates_table(const gates::GateClassification& cls);
io::CsvTable dln_k0_table(const std::vector<DlnDepthResult>& rows);
io::CsvTable dln_trajectory_table(const std::vector<DlnDepthResult>& rows);

// manifest.cfg: resolved key=value pairs plus hash comments; reloading it
// as --config reproduces the run byte for byte
void write_manifest(const io::Config& resolved, const std::string& out_dir,
                    const std::vector<std::string>& outputs);

}  // namespace experiments
}  // namespace gatelab

#endif
