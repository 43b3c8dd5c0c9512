#include "lli/fpa.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace lli {

void FpaFormat::validate() const {
    if (exp_bits < 2 || exp_bits > 30)
        throw std::invalid_argument("FpaFormat: exp_bits must be in [2, 30]");
    if (mantissa_bits < 2 || mantissa_bits > 62)
        throw std::invalid_argument("FpaFormat: mantissa_bits must be in [2, 62]");
}

FpaFormat FpaFormat::default_split(int phi) {
    if (phi < 5 || phi % 2 == 0)
        throw std::invalid_argument("FpaFormat::default_split: phi must be odd and >= 5");
    FpaFormat f{(phi - 1) / 2, (phi - 1) / 2};
    f.validate();
    return f;
}

int fpa_cmp(const FpaValue& a, const FpaValue& b) {
    auto rank = [](const FpaValue& v) -> int {
        if (v.is_overflow()) return v.negative ? -2 : 2;
        if (v.is_zero()) return 0;
        return v.negative ? -1 : 1;
    };
    int ra = rank(a), rb = rank(b);
    if (ra != rb) return ra < rb ? -1 : 1;
    if (ra == 0 || a.is_overflow()) return 0;
    // both finite nonzero, same sign
    int mag;
    if (a.exponent != b.exponent)
        mag = a.exponent < b.exponent ? -1 : 1;
    else if (a.significand != b.significand)
        mag = a.significand < b.significand ? -1 : 1;
    else
        mag = 0;
    return a.negative ? -mag : mag;
}

std::uint64_t fpa_encode(const FpaValue& v, const FpaFormat& fmt) {
    fmt.validate();
    const int fb = fmt.mantissa_bits - 1;
    const std::uint64_t exp_mask = (std::uint64_t(1) << fmt.exp_bits) - 1;
    std::uint64_t sign = v.negative ? 1 : 0;
    std::uint64_t stored_exp = 0, frac = 0;
    switch (v.kind) {
        case FpaValue::Kind::Zero:
            sign = 0;
            break;
        case FpaValue::Kind::Overflow:
            stored_exp = exp_mask;
            break;
        case FpaValue::Kind::Finite:
            stored_exp = static_cast<std::uint64_t>(v.exponent + fmt.bias());
            frac = v.significand & ((std::uint64_t(1) << fb) - 1);
            break;
    }
    return (sign << (fmt.exp_bits + fb)) | (stored_exp << fb) | frac;
}

FpaValue fpa_decode(std::uint64_t bits, const FpaFormat& fmt) {
    fmt.validate();
    const int fb = fmt.mantissa_bits - 1;
    const std::uint64_t exp_mask = (std::uint64_t(1) << fmt.exp_bits) - 1;
    bool neg = ((bits >> (fmt.exp_bits + fb)) & 1) != 0;
    std::uint64_t stored_exp = (bits >> fb) & exp_mask;
    std::uint64_t frac = bits & ((std::uint64_t(1) << fb) - 1);
    if (stored_exp == 0) return FpaValue::zero();
    if (stored_exp == exp_mask) return FpaValue::overflow(neg);
    FpaValue v;
    v.kind = FpaValue::Kind::Finite;
    v.negative = neg;
    v.exponent = static_cast<std::int32_t>(static_cast<long>(stored_exp) - fmt.bias());
    v.significand = frac | (std::uint64_t(1) << fb);
    return v;
}

Rational fpaValueMagnitude(const FpaValue& v, int mantissa_bits) {
    Rational m(Integer(static_cast<unsigned long>(v.significand)));
    long shift = static_cast<long>(v.exponent) - (mantissa_bits - 1);
    return m * pow2_rational(shift);
}

Rational fpa_to_rational(const FpaValue& v) {
    if (v.is_overflow()) throw std::domain_error("fpa_to_rational: overflow sentinel");
    if (v.is_zero()) return Rational(0);
    // significand * 2^(exponent - mb + 1); mb recovered from the significand width
    int mb = 64 - __builtin_clzll(v.significand);
    Rational r = fpaValueMagnitude(v, mb);
    if (v.negative) r = -r;
    return r;
}

double fpa_to_double(const FpaValue& v) {
    if (v.is_overflow())
        return v.negative ? -std::numeric_limits<double>::infinity()
                          : std::numeric_limits<double>::infinity();
    if (v.is_zero()) return 0.0;
    int mb = 64 - __builtin_clzll(v.significand);
    double mag = std::ldexp(static_cast<double>(v.significand),
                            static_cast<int>(v.exponent) - (mb - 1));
    return v.negative ? -mag : mag;
}

namespace {

// Pack a positive magnitude already correctly rounded to fmt.mantissa_bits
// bits (held in r) into the exponent range. under() resolves the
// below-smallest-normal case: nearest of {0, 2^emin}, ties to zero.
template <typename UnderCmp>
FpaValue pack_rounded(mpfr_srcptr r, bool negative, const FpaFormat& fmt, UnderCmp under) {
    long e = static_cast<long>(mpfr_get_exp(r)) - 1;
    if (e > fmt.max_exponent()) return FpaValue::overflow(negative);
    if (e < fmt.min_exponent()) {
        int c = under();  // sign of (|x| - 2^(emin-1))
        if (c <= 0) return FpaValue::zero();
        FpaValue v;
        v.kind = FpaValue::Kind::Finite;
        v.negative = negative;
        v.exponent = static_cast<std::int32_t>(fmt.min_exponent());
        v.significand = std::uint64_t(1) << (fmt.mantissa_bits - 1);
        return v;
    }
    mpz_class m;
    mpfr_exp_t e2 = mpfr_get_z_2exp(m.get_mpz_t(), r);
    (void)e2;
    FpaValue v;
    v.kind = FpaValue::Kind::Finite;
    v.negative = negative;
    v.exponent = static_cast<std::int32_t>(e);
    v.significand = mpz_get_ui(m.get_mpz_t());
    // mpfr may return the significand with trailing zeros stripped
    while (v.significand < (std::uint64_t(1) << (fmt.mantissa_bits - 1))) v.significand <<= 1;
    return v;
}

FpaValue round_magnitude(const Rational& ax, bool negative, const FpaFormat& fmt) {
    mpfr_t r;
    mpfr_init2(r, fmt.mantissa_bits);
    mpfr_set_q(r, ax.get_mpq_t(), MPFR_RNDN);
    FpaValue v = pack_rounded(r, negative, fmt, [&]() {
        Rational half_min = pow2_rational(fmt.min_exponent() - 1);
        return cmp(ax, half_min);
    });
    mpfr_clear(r);
    return v;
}

// Exact dyadic operand loaded into an mpfr at full width.
void load_exact(mpfr_ptr dst, const FpaValue& v) {
    mpfr_set_uj(dst, v.significand, MPFR_RNDN);
    int mb = 64 - __builtin_clzll(v.significand);
    mpfr_mul_2si(dst, dst, static_cast<long>(v.exponent) - (mb - 1), MPFR_RNDN);
    if (v.negative) mpfr_neg(dst, dst, MPFR_RNDN);
}

[[noreturn]] void overflow_arith_error(const char* op) {
    throw std::domain_error(std::string("fpa_") + op + ": undefined on overflow sentinels");
}

}  // namespace

FpaValue fpa_round(const Rational& x, const FpaFormat& fmt) {
    fmt.validate();
    int s = sgn(x);
    if (s == 0) return FpaValue::zero();
    Rational ax = s < 0 ? Rational(-x) : x;
    return round_magnitude(ax, s < 0, fmt);
}

FpaValue fpa_round(const Real& x, const FpaFormat& fmt) {
    fmt.validate();
    int s = x.sign();
    if (s == 0) return FpaValue::zero();
    mpfr_t r;
    mpfr_init2(r, fmt.mantissa_bits);
    mpfr_abs(r, x.raw(), MPFR_RNDN);
    FpaValue v = pack_rounded(r, s < 0, fmt, [&]() {
        mpfr_t t;
        mpfr_init2(t, x.prec());
        mpfr_abs(t, x.raw(), MPFR_RNDN);
        int c = mpfr_cmp_ui_2exp(t, 1, fmt.min_exponent() - 1);
        mpfr_clear(t);
        return c;
    });
    mpfr_clear(r);
    return v;
}

FpaValue fpa_round(double x, const FpaFormat& fmt) {
    fmt.validate();
    if (std::isinf(x)) return FpaValue::overflow(x < 0);
    if (std::isnan(x)) throw std::domain_error("fpa_round: nan");
    if (x == 0.0) return FpaValue::zero();
    Rational q;
    mpq_set_d(q.get_mpq_t(), x);
    return fpa_round(q, fmt);
}

FpaValue fpa_from_double(double x, const FpaFormat& fmt) { return fpa_round(x, fmt); }

FpaValue fpa_add(const FpaValue& a, const FpaValue& b, const FpaFormat& fmt) {
    if (a.is_overflow() || b.is_overflow()) {
        if (a.is_overflow() && b.is_overflow() && a.negative != b.negative)
            overflow_arith_error("add");
        return a.is_overflow() ? a : b;
    }
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    return fpa_round(Rational(fpa_to_rational(a) + fpa_to_rational(b)), fmt);
}

FpaValue fpa_sub(const FpaValue& a, const FpaValue& b, const FpaFormat& fmt) {
    return fpa_add(a, fpa_neg(b), fmt);
}

FpaValue fpa_mul(const FpaValue& a, const FpaValue& b, const FpaFormat& fmt) {
    if (a.is_overflow() || b.is_overflow()) {
        if (a.is_zero() || b.is_zero()) overflow_arith_error("mul");
        return FpaValue::overflow(a.negative != b.negative);
    }
    if (a.is_zero() || b.is_zero()) return FpaValue::zero();
    return fpa_round(Rational(fpa_to_rational(a) * fpa_to_rational(b)), fmt);
}

FpaValue fpa_div(const FpaValue& a, const FpaValue& b, const FpaFormat& fmt) {
    if (b.is_zero()) throw std::domain_error("fpa_div: division by zero");
    if (a.is_overflow() && b.is_overflow()) overflow_arith_error("div");
    if (a.is_overflow()) return FpaValue::overflow(a.negative != b.negative);
    if (b.is_overflow()) return FpaValue::zero();
    if (a.is_zero()) return FpaValue::zero();
    return fpa_round(Rational(fpa_to_rational(a) / fpa_to_rational(b)), fmt);
}

FpaValue fpa_ln(const FpaValue& a, const FpaFormat& fmt) {
    fmt.validate();
    if (a.is_zero() || a.negative) throw std::domain_error("fpa_ln: argument must be positive");
    if (a.is_overflow()) return FpaValue::overflow(false);
    if (a.significand == (std::uint64_t(1) << (fmt.mantissa_bits - 1)) && a.exponent == 0)
        return FpaValue::zero();  // ln(1)
    mpfr_t op, r;
    mpfr_init2(op, 64);
    mpfr_init2(r, fmt.mantissa_bits);
    load_exact(op, a);
    mpfr_log(r, op, MPFR_RNDN);
    bool neg = mpfr_sgn(r) < 0;
    mpfr_abs(r, r, MPFR_RNDN);
    FpaValue v = pack_rounded(r, neg, fmt, [&]() {
        // |ln a| below the smallest normal: recompute wider for the tie test
        mpfr_t w;
        mpfr_init2(w, 128);
        mpfr_log(w, op, MPFR_RNDN);
        mpfr_abs(w, w, MPFR_RNDN);
        int c = mpfr_cmp_ui_2exp(w, 1, fmt.min_exponent() - 1);
        mpfr_clear(w);
        return c;
    });
    mpfr_clear(op);
    mpfr_clear(r);
    return v;
}

FpaValue fpa_exp(const FpaValue& a, const FpaFormat& fmt) {
    fmt.validate();
    if (a.is_overflow()) {
        if (a.negative) return FpaValue::zero();
        return FpaValue::overflow(false);
    }
    if (a.is_zero()) return fpa_round(Rational(1), fmt);
    // cheap range pre-checks keep mpfr_exp away from its own exponent limits
    double ad = fpa_to_double(a);
    double lim = 0.6931471805599453 * (static_cast<double>(fmt.max_exponent()) + 2);
    if (ad > lim + 2) return FpaValue::overflow(false);
    if (ad < -(lim + 2) - 2 * 64) return FpaValue::zero();
    mpfr_t op, r;
    mpfr_init2(op, 64);
    mpfr_init2(r, fmt.mantissa_bits);
    load_exact(op, a);
    mpfr_exp(r, op, MPFR_RNDN);
    FpaValue v = pack_rounded(r, false, fmt, [&]() {
        mpfr_t w;
        mpfr_init2(w, 128);
        mpfr_exp(w, op, MPFR_RNDN);
        int c = mpfr_cmp_ui_2exp(w, 1, fmt.min_exponent() - 1);
        mpfr_clear(w);
        return c;
    });
    mpfr_clear(op);
    mpfr_clear(r);
    return v;
}

FpaValue fpa_arith(FpaOp op, const FpaValue& a, const FpaValue& b, const FpaFormat& fmt) {
    switch (op) {
        case FpaOp::Add: return fpa_add(a, b, fmt);
        case FpaOp::Sub: return fpa_sub(a, b, fmt);
        case FpaOp::Mul: return fpa_mul(a, b, fmt);
        case FpaOp::Div: return fpa_div(a, b, fmt);
        case FpaOp::Ln: return fpa_ln(a, fmt);
        case FpaOp::Exp: return fpa_exp(a, fmt);
    }
    throw std::logic_error("fpa_arith: bad op");
}

}  // namespace lli
