#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace lli {

// Exact arbitrary-precision integers and rationals (GMP-backed).
// All arithmetic on these types is exact; no operation rounds.
using Integer = mpz_class;
using Rational = mpq_class;

inline Rational make_rational(const Integer& num, const Integer& den) {
    if (sgn(den) == 0) throw std::invalid_argument("make_rational: zero denominator");
    Rational q(num, den);
    q.canonicalize();
    return q;
}

inline Rational make_rational(long num, long den) {
    return make_rational(Integer(num), Integer(den));
}

inline bool is_integer(const Rational& q) {
    return mpz_cmp_ui(q.get_den().get_mpz_t(), 1) == 0;
}

inline Integer pow_int(const Integer& base, unsigned long e) {
    Integer r;
    mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), e);
    return r;
}

// 2^e for any sign of e.
inline Rational pow2_rational(long e) {
    Integer p;
    mpz_ui_pow_ui(p.get_mpz_t(), 2, static_cast<unsigned long>(e < 0 ? -e : e));
    if (e >= 0) return Rational(p);
    return make_rational(Integer(1), p);
}

// Nearest integer, ties away from zero (used only where the caller has
// already established the value is within 1/4 of an integer).
inline Integer round_to_integer(const Rational& q) {
    Integer num = q.get_num(), den = q.get_den();
    Integer twice = 2 * num + (sgn(num) >= 0 ? den : -den);
    Integer r;
    mpz_fdiv_q(r.get_mpz_t(), twice.get_mpz_t(), Integer(2 * den).get_mpz_t());
    return r;
}

inline std::size_t bit_length(const Integer& z) {
    return mpz_sizeinbase(z.get_mpz_t(), 2);
}

}  // namespace lli
