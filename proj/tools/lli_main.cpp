// lli: label inference from log-loss scores.
//
// Subcommands: attack, sweep, verify, defend. All configuration is explicit
// flags; no environment variables are consulted.

#include <cstdio>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "lli/analysis.hpp"
#include "lli/harness.hpp"

namespace {

struct CommonFlags {
    std::string kind = "exact1";
    std::size_t n = 0;
    std::uint32_t k = 2;
    std::string arith = "apa";
    int phi_a = 11, phi_b = 53;
    std::string noise = "none";
    double scale = 0.0;
    double lambda = 0.0, nu = 0.0, delta = 0.1;
    double alpha = 0.0;
    std::string chunk = "budget";
    std::uint64_t seed = 1;
    std::string labels;
    std::string out;
    std::string format = "csv";
    std::size_t trials = 0;
    int phi_plan = 0;
    double tau_max = 0.0;
    std::size_t threads = 0;
};

void add_common_flags(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--kind", f.kind, "attack kind")
        ->check(CLI::IsMember({"exact1", "exactM", "kary1", "karyM", "robust1", "robustM"}))
        ->required();
    cmd->add_option("--n", f.n, "number of labels (or give --labels)");
    cmd->add_option("--k", f.k, "number of classes (K-ary attacks)");
    cmd->add_option("--arith", f.arith, "arithmetic model")
        ->check(CLI::IsMember({"apa", "fpa"}));
    cmd->add_option("--phi-a", f.phi_a, "FPA exponent bits");
    cmd->add_option("--phi-b", f.phi_b, "FPA mantissa bits");
    cmd->add_option("--noise", f.noise, "noise model")
        ->check(CLI::IsMember({"none", "bounded", "gauss", "subexp", "mult"}));
    cmd->add_option("--scale", f.scale, "noise scale (bounded tau / gaussian stddev)");
    cmd->add_option("--lambda", f.lambda, "subexponential lambda");
    cmd->add_option("--nu", f.nu, "subexponential nu");
    cmd->add_option("--delta", f.delta, "failure tolerance for unbounded noise");
    cmd->add_option("--alpha", f.alpha, "multiplicative noise rate");
    cmd->add_option("--chunk", f.chunk, "chunk policy: theory|budget|fixed:INT");
    cmd->add_option("--seed", f.seed, "master RNG seed")->required();
    cmd->add_option("--labels", f.labels, "label file (one label per line)");
    cmd->add_option("--out", f.out, "report output path")->required();
    cmd->add_option("--format", f.format, "report format")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--trials", f.trials, "trials per N (default 1000 for N <= 64, else 100)");
    cmd->add_option("--phi-plan", f.phi_plan, "phi used for robust multi-query planning");
    cmd->add_option("--tau-max", f.tau_max, "robust attacks: assumed error bound");
    cmd->add_option("--threads", f.threads, "worker threads (default: auto)");
}

lli::ExperimentConfig build_config(const CommonFlags& f, double rr_p) {
    lli::ExperimentConfig cfg;
    cfg.kind = lli::attack_kind_from_name(f.kind);
    cfg.n = f.n;
    cfg.k = f.k;
    cfg.trials = f.trials;
    cfg.seed = f.seed;
    cfg.threads = f.threads;
    if (f.arith == "apa") {
        cfg.arith = lli::ArithModel::apa();
    } else {
        cfg.arith = lli::ArithModel::fpa(lli::FpaFormat{f.phi_a, f.phi_b});
    }
    if (f.noise == "none") {
        cfg.noise = lli::NoiseModel::none();
    } else if (f.noise == "bounded") {
        cfg.noise = lli::NoiseModel::bounded_uniform(f.scale, 0);
    } else if (f.noise == "gauss") {
        cfg.noise = lli::NoiseModel::gaussian(f.scale, 0);
    } else if (f.noise == "subexp") {
        cfg.noise = lli::NoiseModel::subexponential(f.lambda, f.nu, 0);
    } else if (f.noise == "mult") {
        cfg.noise = lli::NoiseModel::multiplicative(f.alpha, 0);
    }
    if (f.chunk == "theory") {
        cfg.chunk_policy = lli::ChunkPlan::Policy::Theoretical;
    } else if (f.chunk == "budget") {
        cfg.chunk_policy = lli::ChunkPlan::Policy::MantissaBudget;
    } else if (f.chunk.rfind("fixed:", 0) == 0) {
        cfg.chunk_policy = lli::ChunkPlan::Policy::Fixed;
        cfg.chunk_fixed_m = std::stoul(f.chunk.substr(6));
    } else {
        throw CLI::ValidationError("--chunk must be theory|budget|fixed:INT");
    }
    if (!f.labels.empty()) cfg.labels_path = f.labels;
    if (rr_p >= 0) cfg.rr_p = rr_p;

    // robust attacks: error bound from the flags if not given directly
    if (cfg.kind == lli::AttackKind::Robust1 || cfg.kind == lli::AttackKind::RobustM) {
        if (f.tau_max > 0) {
            cfg.tau_max = f.tau_max;
        } else if (f.noise == "bounded" || f.noise == "none") {
            cfg.tau_max = f.scale;
        } else if (f.noise == "gauss") {
            cfg.tau_max = lli::tau_for_gaussian(f.scale, f.delta);
        } else if (f.noise == "subexp") {
            cfg.tau_max = lli::tau_for_subexponential(f.lambda, f.nu, f.delta);
        }
        cfg.phi_for_plan = f.phi_plan;
    }
    return cfg;
}

int run_attack_like(const CommonFlags& f, double rr_p) {
    lli::ExperimentConfig cfg = build_config(f, rr_p);
    lli::AttackReport report = lli::run_experiment(cfg);
    lli::emit_report(report,
                     f.format == "json" ? lli::ReportFormat::Json : lli::ReportFormat::Csv,
                     f.out);
    std::size_t failed = 0;
    for (const auto& r : report.rows)
        if (r.failed) ++failed;
    std::printf("%s N=%zu trials=%zu: mean_acc=%.6f max_acc=%.6f mean_attack_ms=%.3f", f.kind.c_str(),
                report.rows.empty() ? cfg.n : report.rows.front().n, report.rows.size(),
                report.mean_accuracy(), report.max_accuracy(), report.mean_wall_ms());
    if (failed) std::printf(" failed_trials=%zu", failed);
    std::printf(" -> %s\n", f.out.c_str());
    if (failed) {
        for (const auto& r : report.rows)
            if (r.failed) {
                std::fprintf(stderr, "trial %zu failed: %s\n", r.trial, r.error.c_str());
                break;
            }
    }
    return 0;
}

int run_sweep(const CommonFlags& f, std::size_t from, std::size_t to, std::size_t step,
              double rr_p) {
    if (from < 1 || to < from || step < 1)
        throw CLI::ValidationError("--n-from/--n-to/--n-step must describe a forward range");
    lli::AttackReport all;
    for (std::size_t n = from; n <= to; n += step) {
        CommonFlags g = f;
        g.n = n;
        lli::ExperimentConfig cfg = build_config(g, rr_p);
        lli::AttackReport rep = lli::run_experiment(cfg);
        std::printf("N=%zu: mean_acc=%.6f max_acc=%.6f mean_attack_ms=%.3f\n", n,
                    rep.mean_accuracy(), rep.max_accuracy(), rep.mean_wall_ms());
        for (auto& r : rep.rows) all.rows.push_back(std::move(r));
    }
    lli::emit_report(all, f.format == "json" ? lli::ReportFormat::Json : lli::ReportFormat::Csv,
                     f.out);
    std::printf("sweep -> %s\n", f.out.c_str());
    return 0;
}

std::vector<double> parse_list(const std::string& csv) {
    std::vector<double> out;
    std::istringstream in(csv);
    std::string cell;
    while (std::getline(in, cell, ',')) out.push_back(std::stod(cell));
    return out;
}

int run_verify(const std::string& mode, const std::string& set_csv, const std::string& weights_csv,
               std::size_t robust_n, double tau, int lb_n, double lb_threshold,
               double lb_resolution) {
    using namespace lli;
    if (mode == "mu") {
        std::vector<Real> s;
        for (double v : parse_list(set_csv)) s.emplace_back(v, 128);
        GapReport rep = mu_subset_sums(s);
        std::printf("mu = %s  witness subsets: %#x vs %#x\n", rep.gap.str(12).c_str(),
                    rep.subset_a, rep.subset_b);
        return 0;
    }
    if (mode == "lowerbound") {
        LowerBoundReport rep = robust_vector_lower_bound_check(lb_n, tau, lb_threshold,
                                                               lb_resolution);
        std::printf("lower bound %s at resolution %g below ln-threshold %g (%llu candidates)\n",
                    rep.bound_respected ? "respected" : "REFUTED", rep.resolution,
                    rep.ln_threshold,
                    static_cast<unsigned long long>(rep.candidates_checked));
        if (rep.counterexample_ln) {
            std::printf("counterexample ln v:");
            for (double v : *rep.counterexample_ln) std::printf(" %g", v);
            std::printf("\n");
        }
        return rep.bound_respected ? 0 : 2;
    }
    WeightVector w = [&]() {
        if (!weights_csv.empty()) {
            std::vector<Rational> v;
            for (double x : parse_list(weights_csv)) {
                Rational q;
                mpq_set_d(q.get_mpq_t(), x);
                v.push_back(q);
            }
            return WeightVector::exact(std::move(v));
        }
        if (robust_n == 0)
            throw CLI::ValidationError("verify: provide --weights or --robust-n with --tau");
        return robust_weights(robust_n, tau, 256);
    }();
    if (mode == "delta") {
        LossGapReport rep = delta_loss_gap(w);
        std::printf("delta = %s  witness labelings: %#x vs %#x\n", rep.gap.str(12).c_str(),
                    rep.labeling_a, rep.labeling_b);
        return 0;
    }
    if (mode == "robust") {
        RobustnessReport rep = verify_robustness(w, tau);
        std::printf("robust(tau=%g) = %s  (delta = %s)\n", tau, rep.robust ? "true" : "false",
                    rep.gap.gap.str(12).c_str());
        if (rep.ambiguous_score)
            std::printf("ambiguous score witness: %s\n", rep.ambiguous_score->str(12).c_str());
        return rep.robust ? 0 : 2;
    }
    throw CLI::ValidationError("verify mode must be mu|delta|robust|lowerbound");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"label inference attacks from log-loss scores"};
    app.require_subcommand(1);

    CommonFlags attack_flags;
    auto* attack = app.add_subcommand("attack", "run one attack configuration");
    add_common_flags(attack, attack_flags);

    CommonFlags sweep_flags;
    std::size_t n_from = 1, n_to = 1, n_step = 1;
    auto* sweep = app.add_subcommand("sweep", "run an attack across a range of N");
    add_common_flags(sweep, sweep_flags);
    sweep->add_option("--n-from", n_from, "first N")->required();
    sweep->add_option("--n-to", n_to, "last N")->required();
    sweep->add_option("--n-step", n_step, "N increment");

    std::string verify_mode, set_csv, weights_csv;
    std::size_t robust_n = 0;
    double tau = 0.0, lb_threshold = 0.0, lb_resolution = 0.25;
    int lb_n = 3;
    auto* verify = app.add_subcommand("verify", "brute-force gap and bound checks");
    verify->add_option("mode", verify_mode, "mu|delta|robust|lowerbound")->required();
    verify->add_option("--set", set_csv, "comma-separated positive reals (mu)");
    verify->add_option("--weights", weights_csv, "comma-separated weights (delta/robust)");
    verify->add_option("--robust-n", robust_n, "build robust weights of this size");
    verify->add_option("--tau", tau, "error bound");
    verify->add_option("--lb-n", lb_n, "lower bound check: N (<= 6)");
    verify->add_option("--lb-threshold", lb_threshold, "ln-threshold (default 2 N tau)");
    verify->add_option("--lb-resolution", lb_resolution, "grid resolution");

    CommonFlags defend_flags;
    double rr_p = 0.0;
    auto* defend = app.add_subcommand("defend",
                                      "attack a randomized-response-defended oracle");
    add_common_flags(defend, defend_flags);
    defend->add_option("--rr-p", rr_p, "label flip probability in [0, 1/2)")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(attack)) return run_attack_like(attack_flags, -1.0);
        if (app.got_subcommand(sweep)) return run_sweep(sweep_flags, n_from, n_to, n_step, -1.0);
        if (app.got_subcommand(verify))
            return run_verify(verify_mode, set_csv, weights_csv, robust_n, tau, lb_n,
                              lb_threshold, lb_resolution);
        if (app.got_subcommand(defend)) return run_attack_like(defend_flags, rr_p);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
