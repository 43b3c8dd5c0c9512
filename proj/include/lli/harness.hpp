#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lli/attacks_exact.hpp"
#include "lli/attacks_robust.hpp"
#include "lli/oracle.hpp"

namespace lli {

enum class AttackKind { Exact1, ExactM, Kary1, KaryM, Robust1, RobustM };

const char* attack_kind_name(AttackKind k);
AttackKind attack_kind_from_name(const std::string& s);

enum class ReportFormat { Csv, Json };

struct ExperimentConfig {
    AttackKind kind = AttackKind::Exact1;
    std::size_t n = 0;          // ignored when labels_path names a file
    std::uint32_t k = 2;        // K-ary attacks
    std::size_t trials = 0;     // 0: default by size (1000 for N <= 64, else 100)
    ArithModel arith = ArithModel::apa();
    NoiseModel noise = NoiseModel::none();  // per-trial seeds derived from `seed`
    ChunkPlan::Policy chunk_policy = ChunkPlan::Policy::MantissaBudget;
    std::size_t chunk_fixed_m = 0;
    double tau_max = 0.0;       // robust attacks; derived from noise when 0
    int phi_for_plan = 0;       // robust multi-query planning; fmt's phi when 0
    std::uint64_t seed = 1;
    std::optional<std::string> labels_path;
    std::optional<double> rr_p;  // randomized-response defense
    std::size_t threads = 0;     // 0: auto
};

struct TrialRow {
    std::string attack;
    std::size_t n = 0;
    std::uint32_t k = 2;
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    std::string noise_kind;
    double noise_scale = 0.0;
    int phi_a = 0, phi_b = 0;
    std::size_t queries = 0;
    double accuracy = 0.0;
    double wall_ms = 0.0;
    // not part of the wire schema:
    std::uint64_t labeling_hash = 0;
    std::uint64_t recovered_hash = 0;
    bool perfect = false;
    bool failed = false;
    std::string error;
};

struct AttackReport {
    std::vector<TrialRow> rows;

    double mean_accuracy() const;
    double max_accuracy() const;
    double mean_wall_ms() const;
};

// One label per line; blank lines and lines starting with '#' are skipped.
BinaryLabeling load_binary_labels(const std::string& path);
KaryLabeling load_kary_labels(const std::string& path, std::uint32_t k);

AttackReport run_experiment(const ExperimentConfig& cfg);

void emit_report(const AttackReport& report, ReportFormat format, const std::string& path);
AttackReport parse_report(ReportFormat format, const std::string& path);
std::string report_csv(const AttackReport& report);

}  // namespace lli
