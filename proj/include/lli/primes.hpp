#pragma once

#include <cstdint>
#include <vector>

namespace lli {

// Ordered table of the first n primes: 2 = p_1 < p_2 < ... < p_n.
class PrimeTable {
public:
    static PrimeTable first(std::size_t n);

    std::size_t size() const { return primes_.size(); }
    // 1-based, matching the usual p_i indexing.
    std::uint64_t nth(std::size_t i) const { return primes_.at(i - 1); }
    const std::vector<std::uint64_t>& values() const { return primes_; }

private:
    explicit PrimeTable(std::vector<std::uint64_t> p) : primes_(std::move(p)) {}
    std::vector<std::uint64_t> primes_;
};

struct PrimeBound {
    std::size_t index;    // m such that p_m <= x < p_{m+1}
    std::uint64_t prime;  // p_m
};

// Largest prime <= x. Throws std::invalid_argument for x < 2 and
// std::invalid_argument for x beyond the enumeration cap (2^26).
PrimeBound largest_prime_at_most(double x);

// All primes <= limit, ascending.
std::vector<std::uint64_t> primes_up_to(std::uint64_t limit);

}  // namespace lli
