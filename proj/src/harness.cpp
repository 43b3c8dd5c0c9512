#include "lli/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "lli/rng.hpp"

namespace lli {

const char* attack_kind_name(AttackKind k) {
    switch (k) {
        case AttackKind::Exact1: return "exact1";
        case AttackKind::ExactM: return "exactM";
        case AttackKind::Kary1: return "kary1";
        case AttackKind::KaryM: return "karyM";
        case AttackKind::Robust1: return "robust1";
        case AttackKind::RobustM: return "robustM";
    }
    return "?";
}

AttackKind attack_kind_from_name(const std::string& s) {
    if (s == "exact1") return AttackKind::Exact1;
    if (s == "exactM") return AttackKind::ExactM;
    if (s == "kary1") return AttackKind::Kary1;
    if (s == "karyM") return AttackKind::KaryM;
    if (s == "robust1") return AttackKind::Robust1;
    if (s == "robustM") return AttackKind::RobustM;
    throw std::invalid_argument("unknown attack kind: " + s);
}

double AttackReport::mean_accuracy() const {
    if (rows.empty()) return 0.0;
    double s = 0;
    for (const auto& r : rows) s += r.accuracy;
    return s / static_cast<double>(rows.size());
}

double AttackReport::max_accuracy() const {
    double m = 0;
    for (const auto& r : rows) m = std::max(m, r.accuracy);
    return m;
}

double AttackReport::mean_wall_ms() const {
    if (rows.empty()) return 0.0;
    double s = 0;
    for (const auto& r : rows) s += r.wall_ms;
    return s / static_cast<double>(rows.size());
}

namespace {

std::vector<std::string> read_label_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open label file");
    std::vector<std::string> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t a = line.find_first_not_of(" \t\r");
        if (a == std::string::npos) continue;
        std::size_t b = line.find_last_not_of(" \t\r");
        std::string body = line.substr(a, b - a + 1);
        if (body[0] == '#') continue;
        out.push_back(std::to_string(lineno) + ":" + body);
    }
    return out;
}

std::pair<std::size_t, std::string> split_line(const std::string& tagged) {
    auto pos = tagged.find(':');
    return {std::stoul(tagged.substr(0, pos)), tagged.substr(pos + 1)};
}

}  // namespace

BinaryLabeling load_binary_labels(const std::string& path) {
    BinaryLabeling out;
    for (const auto& tagged : read_label_lines(path)) {
        auto [lineno, body] = split_line(tagged);
        if (body == "0")
            out.bits.push_back(0);
        else if (body == "1")
            out.bits.push_back(1);
        else
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected 0 or 1, got '" + body + "'");
    }
    out.validate();
    return out;
}

KaryLabeling load_kary_labels(const std::string& path, std::uint32_t k) {
    KaryLabeling out;
    out.num_classes = k;
    for (const auto& tagged : read_label_lines(path)) {
        auto [lineno, body] = split_line(tagged);
        unsigned long v = 0;
        try {
            std::size_t used = 0;
            v = std::stoul(body, &used);
            if (used != body.size()) throw std::invalid_argument("");
        } catch (...) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected an integer class, got '" + body + "'");
        }
        if (v < 1 || v > k)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": class out of range 1.." + std::to_string(k));
        out.classes.push_back(static_cast<std::uint32_t>(v));
    }
    out.validate();
    return out;
}

namespace {

BinaryLabeling random_binary(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    BinaryLabeling l;
    l.bits.resize(n);
    for (auto& b : l.bits) b = static_cast<std::uint8_t>(rng.next() & 1);
    return l;
}

KaryLabeling random_kary(std::size_t n, std::uint32_t k, std::uint64_t seed) {
    Rng rng(seed);
    KaryLabeling l;
    l.num_classes = k;
    l.classes.resize(n);
    for (auto& c : l.classes) c = static_cast<std::uint32_t>(1 + rng.below(k));
    return l;
}

double derive_tau(const ExperimentConfig& cfg) {
    if (cfg.tau_max > 0) return cfg.tau_max;
    switch (cfg.noise.kind) {
        case NoiseModel::Kind::BoundedAdditive: return cfg.noise.tau;
        case NoiseModel::Kind::Gaussian: return tau_for_gaussian(cfg.noise.stddev, 0.01);
        case NoiseModel::Kind::Subexponential:
            return tau_for_subexponential(cfg.noise.lambda, cfg.noise.nu, 0.01);
        case NoiseModel::Kind::Multiplicative:
        case NoiseModel::Kind::None:
            break;
    }
    throw std::invalid_argument("robust attack: tau_max not set and not derivable from noise");
}

struct TrialOutcome {
    double accuracy = 0;
    std::size_t queries = 0;
    bool perfect = false;
    std::uint64_t truth_hash = 0, recovered_hash = 0;
};

TrialOutcome run_one_trial(const ExperimentConfig& cfg, std::uint64_t trial_seed,
                           const std::optional<BinaryLabeling>& fixed_binary,
                           const std::optional<KaryLabeling>& fixed_kary, double& wall_ms) {
    const bool kary = cfg.kind == AttackKind::Kary1 || cfg.kind == AttackKind::KaryM;
    OracleConfig ocfg;
    ocfg.arith = cfg.arith;
    ocfg.noise = cfg.noise;
    ocfg.noise.seed = mix_seed(trial_seed, 2);
    ocfg.transcript = TranscriptMode::Off;
    if (cfg.rr_p) ocfg.defense = RandomizedResponse{*cfg.rr_p, mix_seed(trial_seed, 3)};

    BinaryLabeling truth_b;
    KaryLabeling truth_k;
    if (kary) {
        truth_k = fixed_kary ? *fixed_kary : random_kary(cfg.n, cfg.k, mix_seed(trial_seed, 1));
        ocfg.labeling = truth_k;
    } else {
        truth_b = fixed_binary ? *fixed_binary : random_binary(cfg.n, mix_seed(trial_seed, 1));
        ocfg.labeling = truth_b;
    }
    const std::size_t n = kary ? truth_k.size() : truth_b.size();

    Oracle oracle(std::move(ocfg));

    TrialOutcome out;
    auto t0 = std::chrono::steady_clock::now();
    std::uint64_t score_ns0 = oracle.scoring_time_ns();
    switch (cfg.kind) {
        case AttackKind::Exact1: {
            BinaryRecovery rec = single_query_binary_attack(oracle, n);
            out.accuracy = recovery_accuracy(truth_b, rec);
            out.queries = rec.queries;
            out.perfect = rec.complete && rec.labels.bits == truth_b.bits;
            out.recovered_hash = labeling_hash(rec.labels.bits);
            break;
        }
        case AttackKind::ExactM: {
            ChunkPlan plan = plan_chunks(n, cfg.arith.is_apa() ? FpaFormat::binary64() : cfg.arith.fmt,
                                         cfg.chunk_policy, cfg.chunk_fixed_m);
            BinaryRecovery rec = multi_query_binary_attack(oracle, n, plan);
            out.accuracy = recovery_accuracy(truth_b, rec);
            out.queries = rec.queries;
            out.perfect = rec.complete && rec.labels.bits == truth_b.bits;
            out.recovered_hash = labeling_hash(rec.labels.bits);
            break;
        }
        case AttackKind::Kary1: {
            KaryAttackOptions opts;
            opts.allow_fpa = !cfg.arith.is_apa();
            KaryRecovery rec = single_query_kary_attack(oracle, n, cfg.k, opts);
            out.accuracy = recovery_accuracy(truth_k, rec);
            out.queries = rec.queries;
            out.perfect = rec.complete && rec.labels.classes == truth_k.classes;
            std::vector<std::uint8_t> bytes;
            for (auto c : rec.labels.classes) bytes.push_back(static_cast<std::uint8_t>(c));
            out.recovered_hash = labeling_hash(bytes);
            break;
        }
        case AttackKind::KaryM: {
            FpaFormat fmt = cfg.arith.is_apa() ? FpaFormat::binary64() : cfg.arith.fmt;
            KaryRecovery rec = multi_query_kary_attack(oracle, n, cfg.k, fmt);
            out.accuracy = recovery_accuracy(truth_k, rec);
            out.queries = rec.queries;
            out.perfect = rec.complete && rec.labels.classes == truth_k.classes;
            std::vector<std::uint8_t> bytes;
            for (auto c : rec.labels.classes) bytes.push_back(static_cast<std::uint8_t>(c));
            out.recovered_hash = labeling_hash(bytes);
            break;
        }
        case AttackKind::Robust1: {
            BinaryRecovery rec = single_query_robust_attack(oracle, n, derive_tau(cfg));
            out.accuracy = recovery_accuracy(truth_b, rec);
            out.queries = rec.queries;
            out.perfect = rec.labels.bits == truth_b.bits;
            out.recovered_hash = labeling_hash(rec.labels.bits);
            break;
        }
        case AttackKind::RobustM: {
            BinaryRecovery rec;
            if (cfg.noise.kind == NoiseModel::Kind::Multiplicative) {
                MultiplicativePlan mp = plan_for_multiplicative(cfg.noise.alpha);
                RobustPlan plan{mp.tau, std::min(mp.chunk, n)};
                rec = multi_query_robust_attack_with_plan(oracle, n, plan);
            } else {
                int phi = cfg.phi_for_plan > 0 ? cfg.phi_for_plan
                          : cfg.arith.is_apa() ? FpaFormat::binary64().phi()
                                               : cfg.arith.fmt.phi();
                rec = multi_query_robust_attack(oracle, n, derive_tau(cfg), phi);
            }
            out.accuracy = recovery_accuracy(truth_b, rec);
            out.queries = rec.queries;
            out.perfect = rec.labels.bits == truth_b.bits;
            out.recovered_hash = labeling_hash(rec.labels.bits);
            break;
        }
    }
    auto t1 = std::chrono::steady_clock::now();
    std::uint64_t score_ns = oracle.scoring_time_ns() - score_ns0;
    double total_ns =
        static_cast<double>(std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count());
    // attack-side time: the oracle's own scoring is server work
    wall_ms = (total_ns - static_cast<double>(score_ns)) / 1e6;
    if (wall_ms < 0) wall_ms = 0;

    if (kary) {
        std::vector<std::uint8_t> bytes;
        for (auto c : truth_k.classes) bytes.push_back(static_cast<std::uint8_t>(c));
        out.truth_hash = labeling_hash(bytes);
    } else {
        out.truth_hash = labeling_hash(truth_b.bits);
    }
    return out;
}

}  // namespace

AttackReport run_experiment(const ExperimentConfig& cfg) {
    std::optional<BinaryLabeling> fixed_binary;
    std::optional<KaryLabeling> fixed_kary;
    std::size_t n = cfg.n;
    const bool kary = cfg.kind == AttackKind::Kary1 || cfg.kind == AttackKind::KaryM;
    if (cfg.labels_path) {
        if (kary) {
            fixed_kary = load_kary_labels(*cfg.labels_path, cfg.k);
            n = fixed_kary->size();
        } else {
            fixed_binary = load_binary_labels(*cfg.labels_path);
            n = fixed_binary->size();
        }
    }
    if (n == 0) throw std::invalid_argument("run_experiment: N must be >= 1");

    std::size_t trials = cfg.trials ? cfg.trials : (n <= 64 ? 1000 : 100);
    AttackReport report;
    report.rows.resize(trials);

    std::size_t workers = cfg.threads ? cfg.threads
                                      : std::max<std::size_t>(1, std::min<std::size_t>(
                                            std::thread::hardware_concurrency(), 4));
    workers = std::min(workers, trials);

    std::atomic<std::size_t> next{0};
    auto body = [&]() {
        for (;;) {
            std::size_t t = next.fetch_add(1);
            if (t >= trials) return;
            TrialRow& row = report.rows[t];
            row.attack = attack_kind_name(cfg.kind);
            row.n = n;
            row.k = kary ? cfg.k : 2;
            row.trial = t;
            row.seed = mix_seed(cfg.seed, t);
            switch (cfg.noise.kind) {
                case NoiseModel::Kind::None: row.noise_kind = "none"; break;
                case NoiseModel::Kind::BoundedAdditive:
                    row.noise_kind = cfg.noise.bounded_mode == NoiseModel::BoundedMode::Uniform
                                         ? "bounded"
                                         : "bounded_adv";
                    row.noise_scale = cfg.noise.tau;
                    break;
                case NoiseModel::Kind::Gaussian:
                    row.noise_kind = "gauss";
                    row.noise_scale = cfg.noise.stddev;
                    break;
                case NoiseModel::Kind::Subexponential:
                    row.noise_kind = "subexp";
                    row.noise_scale = cfg.noise.lambda;
                    break;
                case NoiseModel::Kind::Multiplicative:
                    row.noise_kind = "mult";
                    row.noise_scale = cfg.noise.alpha;
                    break;
            }
            if (!cfg.arith.is_apa()) {
                row.phi_a = cfg.arith.fmt.exp_bits;
                row.phi_b = cfg.arith.fmt.mantissa_bits;
            }
            try {
                TrialOutcome out =
                    run_one_trial(cfg, row.seed, fixed_binary, fixed_kary, row.wall_ms);
                row.accuracy = out.accuracy;
                row.queries = out.queries;
                row.perfect = out.perfect;
                row.labeling_hash = out.truth_hash;
                row.recovered_hash = out.recovered_hash;
            } catch (const std::exception& e) {
                row.failed = true;
                row.error = e.what();
                row.accuracy = 0.0;
            }
        }
    };
    if (workers <= 1) {
        body();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(body);
        for (auto& th : pool) th.join();
    }
    return report;
}

namespace {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

std::string format_scale(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

}  // namespace

std::string report_csv(const AttackReport& report) {
    std::ostringstream out;
    out << "attack,N,K,trial,seed,noise_kind,noise_scale,phi_a,phi_b,queries,accuracy,wall_ms\n";
    for (const auto& r : report.rows) {
        out << r.attack << ',' << r.n << ',' << r.k << ',' << r.trial << ',' << r.seed << ','
            << r.noise_kind << ',' << format_scale(r.noise_scale) << ',' << r.phi_a << ','
            << r.phi_b << ',' << r.queries << ',' << format_double(r.accuracy) << ','
            << format_double(r.wall_ms) << '\n';
    }
    return out.str();
}

void emit_report(const AttackReport& report, ReportFormat format, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    if (format == ReportFormat::Csv) {
        out << report_csv(report);
    } else {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& r : report.rows) {
            rows.push_back({{"attack", r.attack},
                            {"N", r.n},
                            {"K", r.k},
                            {"trial", r.trial},
                            {"seed", r.seed},
                            {"noise_kind", r.noise_kind},
                            {"noise_scale", r.noise_scale},
                            {"phi_a", r.phi_a},
                            {"phi_b", r.phi_b},
                            {"queries", r.queries},
                            {"accuracy", r.accuracy},
                            {"wall_ms", r.wall_ms}});
        }
        out << rows.dump(2) << '\n';
    }
    if (!out) throw std::runtime_error(path + ": write failed");
}

AttackReport parse_report(ReportFormat format, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open");
    AttackReport report;
    if (format == ReportFormat::Json) {
        nlohmann::json rows = nlohmann::json::parse(in);
        for (const auto& j : rows) {
            TrialRow r;
            r.attack = j.at("attack").get<std::string>();
            r.n = j.at("N").get<std::size_t>();
            r.k = j.at("K").get<std::uint32_t>();
            r.trial = j.at("trial").get<std::size_t>();
            r.seed = j.at("seed").get<std::uint64_t>();
            r.noise_kind = j.at("noise_kind").get<std::string>();
            r.noise_scale = j.at("noise_scale").get<double>();
            r.phi_a = j.at("phi_a").get<int>();
            r.phi_b = j.at("phi_b").get<int>();
            r.queries = j.at("queries").get<std::size_t>();
            r.accuracy = j.at("accuracy").get<double>();
            r.wall_ms = j.at("wall_ms").get<double>();
            report.rows.push_back(std::move(r));
        }
        return report;
    }
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error(path + ": empty CSV report");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (cells.size() != 12) throw std::runtime_error(path + ": malformed CSV row");
        TrialRow r;
        r.attack = cells[0];
        r.n = std::stoul(cells[1]);
        r.k = static_cast<std::uint32_t>(std::stoul(cells[2]));
        r.trial = std::stoul(cells[3]);
        r.seed = std::stoull(cells[4]);
        r.noise_kind = cells[5];
        r.noise_scale = std::stod(cells[6]);
        r.phi_a = std::stoi(cells[7]);
        r.phi_b = std::stoi(cells[8]);
        r.queries = std::stoul(cells[9]);
        r.accuracy = std::stod(cells[10]);
        r.wall_ms = std::stod(cells[11]);
        report.rows.push_back(std::move(r));
    }
    return report;
}

}  // namespace lli
