#pragma once

#include <mpfr.h>

#include <cstdint>
#include <string>
#include <utility>

#include "lli/rational.hpp"

namespace lli {

// Arbitrary-precision binary float backed by MPFR, round-to-nearest-even.
// Precision is carried per value, in significand bits. Used for log-domain
// score arithmetic where weights are far too large for linear-domain types.
class Real {
public:
    Real() { mpfr_init2(x_, 64); mpfr_set_zero(x_, 1); }
    explicit Real(mpfr_prec_t bits) { mpfr_init2(x_, clamp(bits)); mpfr_set_zero(x_, 1); }
    Real(double v, mpfr_prec_t bits) { mpfr_init2(x_, clamp(bits)); mpfr_set_d(x_, v, MPFR_RNDN); }
    Real(long v, mpfr_prec_t bits) { mpfr_init2(x_, clamp(bits)); mpfr_set_si(x_, v, MPFR_RNDN); }
    Real(const Integer& z, mpfr_prec_t bits) {
        mpfr_init2(x_, clamp(bits));
        mpfr_set_z(x_, z.get_mpz_t(), MPFR_RNDN);
    }
    Real(const Rational& q, mpfr_prec_t bits) {
        mpfr_init2(x_, clamp(bits));
        mpfr_set_q(x_, q.get_mpq_t(), MPFR_RNDN);
    }

    Real(const Real& o) {
        mpfr_init2(x_, mpfr_get_prec(o.x_));
        mpfr_set(x_, o.x_, MPFR_RNDN);
    }
    Real(Real&& o) noexcept {
        mpfr_init2(x_, 2);
        mpfr_swap(x_, o.x_);
    }
    Real& operator=(const Real& o) {
        if (this != &o) {
            mpfr_set_prec(x_, mpfr_get_prec(o.x_));
            mpfr_set(x_, o.x_, MPFR_RNDN);
        }
        return *this;
    }
    Real& operator=(Real&& o) noexcept {
        if (this != &o) mpfr_swap(x_, o.x_);
        return *this;
    }
    ~Real() { mpfr_clear(x_); }

    mpfr_prec_t prec() const { return mpfr_get_prec(x_); }
    double to_double() const { return mpfr_get_d(x_, MPFR_RNDN); }
    bool is_zero() const { return mpfr_zero_p(x_) != 0; }
    int sign() const { return mpfr_sgn(x_); }

    // In-place ops round at this value's precision.
    Real& operator+=(const Real& o) { mpfr_add(x_, x_, o.x_, MPFR_RNDN); return *this; }
    Real& operator-=(const Real& o) { mpfr_sub(x_, x_, o.x_, MPFR_RNDN); return *this; }
    Real& operator*=(const Real& o) { mpfr_mul(x_, x_, o.x_, MPFR_RNDN); return *this; }
    Real& operator/=(const Real& o) { mpfr_div(x_, x_, o.x_, MPFR_RNDN); return *this; }
    Real& negate() { mpfr_neg(x_, x_, MPFR_RNDN); return *this; }

    // Binary ops round at the wider operand precision.
    friend Real operator+(const Real& a, const Real& b) { Real r(wider(a, b)); mpfr_add(r.x_, a.x_, b.x_, MPFR_RNDN); return r; }
    friend Real operator-(const Real& a, const Real& b) { Real r(wider(a, b)); mpfr_sub(r.x_, a.x_, b.x_, MPFR_RNDN); return r; }
    friend Real operator*(const Real& a, const Real& b) { Real r(wider(a, b)); mpfr_mul(r.x_, a.x_, b.x_, MPFR_RNDN); return r; }
    friend Real operator/(const Real& a, const Real& b) { Real r(wider(a, b)); mpfr_div(r.x_, a.x_, b.x_, MPFR_RNDN); return r; }
    friend Real operator-(const Real& a) { Real r(a); r.negate(); return r; }

    // Exact sum/product: result precision grown so no rounding occurs.
    static Real add_exact(const Real& a, const Real& b);
    static Real mul_exact(const Real& a, const Real& b);

    Real abs() const { Real r(*this); mpfr_abs(r.x_, r.x_, MPFR_RNDN); return r; }
    static Real abs_diff(const Real& a, const Real& b) { Real r = a - b; mpfr_abs(r.x_, r.x_, MPFR_RNDN); return r; }

    static Real ln(const Real& v, mpfr_prec_t bits);
    static Real ln(const Rational& q, mpfr_prec_t bits);
    static Real exp(const Real& v, mpfr_prec_t bits);
    // ln(1 + e^t), stable for any magnitude of t.
    static Real softplus(const Real& t, mpfr_prec_t bits);
    static Real mul_2exp(const Real& v, long e);
    static Real pi_free_ln2(mpfr_prec_t bits) { Real r(bits); mpfr_const_log2(r.x_, MPFR_RNDN); return r; }

    int cmp(const Real& o) const { return mpfr_cmp(x_, o.x_); }
    friend bool operator<(const Real& a, const Real& b) { return a.cmp(b) < 0; }
    friend bool operator>(const Real& a, const Real& b) { return a.cmp(b) > 0; }
    friend bool operator<=(const Real& a, const Real& b) { return a.cmp(b) <= 0; }
    friend bool operator>=(const Real& a, const Real& b) { return a.cmp(b) >= 0; }
    friend bool operator==(const Real& a, const Real& b) { return a.cmp(b) == 0; }
    friend bool operator!=(const Real& a, const Real& b) { return a.cmp(b) != 0; }

    std::string str(std::size_t digits = 20) const;

    mpfr_srcptr raw() const { return x_; }
    mpfr_ptr raw() { return x_; }

private:
    static mpfr_prec_t clamp(mpfr_prec_t bits) { return bits < MPFR_PREC_MIN ? MPFR_PREC_MIN : bits; }
    static mpfr_prec_t wider(const Real& a, const Real& b) {
        return a.prec() > b.prec() ? a.prec() : b.prec();
    }

    mpfr_t x_;
};

}  // namespace lli
