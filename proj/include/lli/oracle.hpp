#pragma once

#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

#include "lli/core.hpp"

namespace lli {

struct budget_exhausted_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Additive / multiplicative perturbation applied to returned scores.
// Stochastic variants carry an explicit seed; there is no ambient randomness.
struct NoiseModel {
    enum class Kind { None, BoundedAdditive, Gaussian, Subexponential, Multiplicative };
    enum class BoundedMode { Uniform, Adversarial };

    Kind kind = Kind::None;
    BoundedMode bounded_mode = BoundedMode::Uniform;
    double tau = 0.0;     // BoundedAdditive
    double stddev = 0.0;  // Gaussian
    double lambda = 0.0;  // Subexponential
    double nu = 0.0;
    double alpha = 0.0;  // Multiplicative, rate in [0,1)
    std::uint64_t seed = 0;
    // Adversarial mode: fixed +-1 sign pattern cycled per query; empty means
    // alternation (+, -, +, ...). A registered chooser overrides both.
    std::vector<std::int8_t> sign_pattern;

    static NoiseModel none() { return NoiseModel{}; }
    static NoiseModel bounded_uniform(double tau, std::uint64_t seed);
    static NoiseModel bounded_adversarial(double tau, std::vector<std::int8_t> pattern = {});
    static NoiseModel gaussian(double stddev, std::uint64_t seed);
    static NoiseModel subexponential(double lambda, double nu, std::uint64_t seed);
    static NoiseModel multiplicative(double alpha, std::uint64_t seed);

    void validate() const;
};

// Warner-style defense: each bit flipped once, independently, at construction.
struct RandomizedResponse {
    double p = 0.0;  // flip probability in [0, 1/2)
    std::uint64_t seed = 0;
};

BinaryLabeling randomized_response(const BinaryLabeling& labels, double p, std::uint64_t seed);

enum class TranscriptMode { Off, Hashes, Full };

struct TranscriptEntry {
    std::uint64_t query_hash = 0;
    double returned = 0.0;
    // Full (audit) mode only:
    std::optional<PredictionVector> query;
    std::optional<PredictionMatrix> kary_query;
    std::optional<Score> true_score;  // unnoised
};

struct QueryTranscript {
    std::vector<TranscriptEntry> entries;
};

struct OracleConfig {
    std::variant<BinaryLabeling, KaryLabeling> labeling;
    ArithModel arith = ArithModel::apa();
    NoiseModel noise = NoiseModel::none();
    std::optional<std::uint64_t> query_budget;  // >= 1 when bounded
    std::optional<RandomizedResponse> defense;
    TranscriptMode transcript = TranscriptMode::Hashes;
};

// Scoring server: holds the (possibly defended) labeling and answers loss
// queries under the configured arithmetic and noise. Queries are serialized;
// counter and transcript updates are atomic with the score computation.
class Oracle {
public:
    explicit Oracle(OracleConfig cfg);

    std::size_t n() const { return n_; }
    bool is_binary() const { return std::holds_alternative<BinaryLabeling>(cfg_.labeling); }
    std::uint32_t num_classes() const;
    const ArithModel& model() const { return cfg_.arith; }
    const NoiseModel& noise() const { return cfg_.noise; }

    Score query(const PredictionVector& q);
    Score query(const PredictionMatrix& q);

    std::uint64_t queries_used() const;
    std::uint64_t scoring_time_ns() const;
    const QueryTranscript& transcript() const { return transcript_; }

    // Worst-case bounded noise consults this to pick the +-tau endpoint;
    // receives the unnoised score, returns the additive perturbation.
    void set_adversarial_chooser(std::function<double(double)> chooser);

    // Audit access: the labeling actually scored (post-defense).
    const BinaryLabeling& scored_binary_labels() const;
    const KaryLabeling& scored_kary_labels() const;

private:
    Score apply_noise(Score s);
    void record(std::uint64_t hash, const Score& noised, const Score& unnoised,
                const PredictionVector* q, const PredictionMatrix* m);
    void check_budget() const;

    OracleConfig cfg_;
    std::size_t n_ = 0;
    std::uint64_t used_ = 0;
    std::uint64_t scoring_ns_ = 0;
    std::uint64_t rng_state_ = 0;
    std::uint64_t noise_index_ = 0;
    std::function<double(double)> chooser_;
    QueryTranscript transcript_;
    mutable std::mutex mu_;
};

}  // namespace lli
