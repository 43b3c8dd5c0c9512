#include "lli/primes.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace lli {

namespace {
constexpr std::uint64_t kSieveCap = std::uint64_t(1) << 26;
}

std::vector<std::uint64_t> primes_up_to(std::uint64_t limit) {
    if (limit > kSieveCap)
        throw std::invalid_argument("primes_up_to: limit " + std::to_string(limit) +
                                    " exceeds enumeration cap 2^26");
    std::vector<std::uint64_t> out;
    if (limit < 2) return out;
    std::vector<bool> composite(limit + 1, false);
    for (std::uint64_t p = 2; p * p <= limit; ++p) {
        if (composite[p]) continue;
        for (std::uint64_t q = p * p; q <= limit; q += p) composite[q] = true;
    }
    for (std::uint64_t p = 2; p <= limit; ++p)
        if (!composite[p]) out.push_back(p);
    return out;
}

PrimeTable PrimeTable::first(std::size_t n) {
    if (n == 0) throw std::invalid_argument("PrimeTable::first: n must be >= 1");
    // Rosser-style upper bound on p_n, padded for small n
    double nn = static_cast<double>(n);
    std::uint64_t limit = n < 6 ? 13
                                : static_cast<std::uint64_t>(nn * (std::log(nn) + std::log(std::log(nn))) + 16);
    auto primes = primes_up_to(limit);
    while (primes.size() < n) {
        limit *= 2;
        primes = primes_up_to(limit);
    }
    primes.resize(n);
    return PrimeTable(std::move(primes));
}

PrimeBound largest_prime_at_most(double x) {
    if (!(x >= 2.0)) throw std::invalid_argument("largest_prime_at_most: no prime <= x for x < 2");
    if (x > static_cast<double>(kSieveCap))
        throw std::invalid_argument("largest_prime_at_most: x exceeds enumeration cap 2^26");
    auto primes = primes_up_to(static_cast<std::uint64_t>(std::floor(x)));
    return PrimeBound{primes.size(), primes.back()};
}

}  // namespace lli
