#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "lli/oracle.hpp"
#include "lli/primes.hpp"

namespace lli {

struct infeasible_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// How many labels to decode per query in the bounded-precision attack.
struct ChunkPlan {
    enum class Policy { Theoretical, MantissaBudget, Fixed };
    Policy policy = Policy::MantissaBudget;
    std::size_t m = 1;

    std::size_t query_count(std::size_t n) const { return (n + m - 1) / m; }
};

// Theoretical: largest m with p_m <= 2^((phi-5)/4).
// MantissaBudget: largest m with sum_{j<=m} log2(p_j) <= mantissa_bits - 4,
// keeping the recovered prime product exactly representable with guard bits.
// Fixed: caller-supplied m.
ChunkPlan plan_chunks(std::size_t n, const FpaFormat& fmt, ChunkPlan::Policy policy,
                      std::size_t fixed_m = 0);

// Result of a decode. Labels whose chunk could not be resolved within the
// arithmetic precision are reported as 0 with inferred[i] == 0; they count
// as not inferred.
struct BinaryRecovery {
    BinaryLabeling labels;
    std::vector<std::uint8_t> inferred;
    std::size_t queries = 0;
    bool complete = true;
};

struct KaryRecovery {
    KaryLabeling labels;
    std::vector<std::uint8_t> inferred;
    std::size_t queries = 0;
    bool complete = true;
};

// Single-query attack: weights = first N primes (or any mutually co-prime
// moduli), decode by divisibility of q = T e^{-N ell}. Exact in APA; in FPA
// q is rounded to the nearest integer and accepted only when unambiguous.
BinaryRecovery single_query_binary_attack(Oracle& oracle, std::size_t n,
                                          const std::vector<Integer>* coprime_moduli = nullptr);

// Chunked attack: primes in one chunk per query, weight 1 elsewhere.
BinaryRecovery multi_query_binary_attack(Oracle& oracle, std::size_t n, const ChunkPlan& plan);

struct KaryAttackOptions {
    bool allow_fpa = false;  // the single-query K-ary decode is APA by contract
};

// Single query, prime powers p_i^(k-1) per class: the recovered integer's
// factorization reads off all labels.
KaryRecovery single_query_kary_attack(Oracle& oracle, std::size_t n, std::uint32_t k,
                                      const KaryAttackOptions& opts = {});

// Blocked K-ary attack for bounded precision: datapoints and classes split
// into blocks of size m; one query per (datapoint block, class block) pair.
KaryRecovery multi_query_kary_attack(Oracle& oracle, std::size_t n, std::uint32_t k,
                                     const FpaFormat& fmt);

double recovery_accuracy(const BinaryLabeling& truth, const BinaryRecovery& rec);
double recovery_accuracy(const KaryLabeling& truth, const KaryRecovery& rec);

}  // namespace lli
