#pragma once

#include <cstdint>

#include "lli/attacks_exact.hpp"
#include "lli/oracle.hpp"

namespace lli {

struct precision_error : std::runtime_error {
    precision_error(const std::string& what, mpfr_prec_t required)
        : std::runtime_error(what), required_bits(required) {}
    mpfr_prec_t required_bits;
};

struct RobustPlan {
    double tau = 0.0;
    std::size_t m = 1;  // labels decoded per query, capped at ceil(log2 N)
    std::size_t query_count(std::size_t n) const { return (n + m - 1) / m; }
};

struct RobustOptions {
    std::size_t max_exhaustive_n = 26;   // cap on the 2^N single-query scan
    mpfr_prec_t max_guard_bits = 1 << 20;
};

// Geometric weights v_i = 3^(2^i N tau), i = 1..N, held in log-domain.
// Any two labelings then score more than 2*tau apart.
WeightVector robust_weights(std::size_t n, double tau, mpfr_prec_t prec);

// Fractional guard bits needed to evaluate every candidate score of a
// decode over chunks of size m, plus headroom.
mpfr_prec_t robust_guard_bits(std::size_t n, double tau, std::size_t m,
                              const RobustOptions& opts);

// One query, then argmin over all 2^N candidate scores. Exact recovery for
// any additive noise of magnitude <= tau_max.
BinaryRecovery single_query_robust_attack(Oracle& oracle, std::size_t n, double tau_max,
                                          const RobustOptions& opts = {});

// m = min(ceil(log2 N), floor(log2((phi - 8) / (N tau ln 2)))).
RobustPlan robust_chunk_size(std::size_t n, double tau, int phi);

// Chunked decode: robust weights inside one chunk per query, weight 1
// elsewhere; 2^m candidates scanned per chunk.
BinaryRecovery multi_query_robust_attack(Oracle& oracle, std::size_t n, double tau_max,
                                         int phi, const RobustOptions& opts = {});
BinaryRecovery multi_query_robust_attack_with_plan(Oracle& oracle, std::size_t n,
                                                   const RobustPlan& plan,
                                                   const RobustOptions& opts = {});

// Noise-model reductions to an additive bound.
double tau_for_bounded_support(double a, double b);
double tau_for_subexponential(double lambda, double nu, double delta);
double tau_for_gaussian(double stddev, double delta);

struct MultiplicativePlan {
    std::size_t chunk = 1;
    double tau = 0.0;
};
// Valid for rates alpha <= 1/8; larger rates defeat these weight vectors.
MultiplicativePlan plan_for_multiplicative(double alpha);

// All 2^n candidate scores of the single-query robust decode, double view.
std::vector<double> robust_candidate_scores(std::size_t n, double tau,
                                            const RobustOptions& opts = {});

// Worst-case endpoint chooser for the oracle's adversarial bounded mode:
// given the unnoised score, picks the +-tau endpoint that lands the observed
// score closest to some wrong candidate.
std::function<double(double)> make_worst_case_chooser(std::vector<double> candidates,
                                                      double tau);

}  // namespace lli
