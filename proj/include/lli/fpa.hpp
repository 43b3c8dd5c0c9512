#pragma once

#include <cstdint>
#include <stdexcept>

#include "lli/rational.hpp"
#include "lli/real.hpp"

namespace lli {

// Bounded-precision binary float format: 1 sign bit, exp_bits exponent bits,
// mantissa_bits significand bits (the leading bit is implicit in the
// encoding, so the stored fraction field has mantissa_bits - 1 bits).
// {11, 53} is exactly IEEE-754 binary64 restricted to normal numbers.
struct FpaFormat {
    int exp_bits = 11;
    int mantissa_bits = 53;

    int phi() const { return 1 + exp_bits + mantissa_bits; }
    long bias() const { return (1L << (exp_bits - 1)) - 1; }
    long min_exponent() const { return 1 - bias(); }
    long max_exponent() const { return bias(); }
    int encoded_bits() const { return 1 + exp_bits + mantissa_bits - 1; }
    bool is_binary64() const { return exp_bits == 11 && mantissa_bits == 53; }

    void validate() const;

    // phi_a = phi_b = (phi-1)/2; phi must be odd and >= 5.
    static FpaFormat default_split(int phi);
    static FpaFormat binary64() { return FpaFormat{11, 53}; }

    bool operator==(const FpaFormat&) const = default;
};

// A value of a given FpaFormat. Overflow is reported in-band as a signed
// sentinel that orders beyond all finite values.
struct FpaValue {
    enum class Kind : std::uint8_t { Zero = 0, Finite = 1, Overflow = 2 };

    Kind kind = Kind::Zero;
    bool negative = false;
    std::int32_t exponent = 0;      // value = +-significand * 2^(exponent - mantissa_bits + 1)
    std::uint64_t significand = 0;  // in [2^(mb-1), 2^mb) when Finite

    bool is_zero() const { return kind == Kind::Zero; }
    bool is_finite() const { return kind != Kind::Overflow; }
    bool is_overflow() const { return kind == Kind::Overflow; }

    static FpaValue zero() { return FpaValue{}; }
    static FpaValue overflow(bool neg) { return FpaValue{Kind::Overflow, neg, 0, 0}; }
};

// Total order consistent with the extended reals; sentinels at the extremes.
int fpa_cmp(const FpaValue& a, const FpaValue& b);
inline bool fpa_less(const FpaValue& a, const FpaValue& b) { return fpa_cmp(a, b) < 0; }

std::uint64_t fpa_encode(const FpaValue& v, const FpaFormat& fmt);
FpaValue fpa_decode(std::uint64_t bits, const FpaFormat& fmt);

Rational fpa_to_rational(const FpaValue& v);  // finite values only
double fpa_to_double(const FpaValue& v);      // overflow maps to +-inf
FpaValue fpa_from_double(double x, const FpaFormat& fmt);

// Round-to-nearest, ties to even mantissa. Values past the exponent range
// become the overflow sentinel; values below the smallest normal round to
// the nearest of {0, smallest normal}.
FpaValue fpa_round(const Rational& x, const FpaFormat& fmt);
FpaValue fpa_round(const Real& x, const FpaFormat& fmt);
FpaValue fpa_round(double x, const FpaFormat& fmt);

// Elementary operations: the exact mathematical result, then one rounding.
FpaValue fpa_add(const FpaValue& a, const FpaValue& b, const FpaFormat& fmt);
FpaValue fpa_sub(const FpaValue& a, const FpaValue& b, const FpaFormat& fmt);
FpaValue fpa_mul(const FpaValue& a, const FpaValue& b, const FpaFormat& fmt);
FpaValue fpa_div(const FpaValue& a, const FpaValue& b, const FpaFormat& fmt);
FpaValue fpa_ln(const FpaValue& a, const FpaFormat& fmt);
FpaValue fpa_exp(const FpaValue& a, const FpaFormat& fmt);
inline FpaValue fpa_neg(FpaValue a) {
    if (!a.is_zero()) a.negative = !a.negative;
    return a;
}

enum class FpaOp { Add, Sub, Mul, Div, Ln, Exp };
FpaValue fpa_arith(FpaOp op, const FpaValue& a, const FpaValue& b, const FpaFormat& fmt);

}  // namespace lli
