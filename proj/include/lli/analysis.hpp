#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "lli/core.hpp"
#include "lli/real.hpp"

namespace lli {

// mu(S): minimum |sum(S1) - sum(S2)| over distinct subset pairs, with a
// witnessing pair. The S1 == S2 pair is excluded (it would make mu == 0
// identically).
struct GapReport {
    Real gap;
    std::uint32_t subset_a = 0;  // bitmask witnesses
    std::uint32_t subset_b = 0;
};

GapReport mu_subset_sums(const std::vector<Real>& s);

struct IntGapReport {
    std::int64_t gap = 0;
    std::uint32_t subset_a = 0;
    std::uint32_t subset_b = 0;
};
IntGapReport mu_subset_sums_int(const std::vector<std::int64_t>& s);

// Delta(v): minimum loss-score gap over distinct labeling pairs, evaluated
// through the loss itself (this is the independent route against mu).
struct LossGapReport {
    Real gap;
    std::uint32_t labeling_a = 0;
    std::uint32_t labeling_b = 0;
};
LossGapReport delta_loss_gap(const WeightVector& v, mpfr_prec_t prec = 128);

// Delta(v) > 2*tau decides single-query decodability under +-tau error.
// When false, the witness pair's midpoint score decodes ambiguously.
struct RobustnessReport {
    bool robust = false;
    LossGapReport gap;
    std::optional<Real> ambiguous_score;
};
RobustnessReport verify_robustness(const WeightVector& v, double tau, mpfr_prec_t prec = 128);

// Minimal max-element over size-n positive integer sets whose subset sums
// are pairwise at least lambda apart (mu >= lambda; lambda = 1 is the
// distinct-subset-sums condition). Exhaustive with pruning; n <= 6.
struct MinLinfResult {
    std::int64_t max_element = 0;
    std::vector<std::int64_t> witness;
};
MinLinfResult min_linf_distinct_subset_sums(int n, std::int64_t lambda);

// Grid refutation at a fixed resolution: no tau-robust vector found with
// ln ||v||_inf below ln_threshold. Evidence at the given discretization,
// never a proof over the reals.
struct LowerBoundReport {
    bool bound_respected = true;
    double ln_threshold = 0.0;
    double resolution = 0.0;
    std::uint64_t candidates_checked = 0;
    std::optional<std::vector<double>> counterexample_ln;
};
LowerBoundReport robust_vector_lower_bound_check(int n, double tau, double ln_threshold = 0.0,
                                                 double resolution = 0.25);

}  // namespace lli
