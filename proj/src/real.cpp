#include "lli/real.hpp"

#include <algorithm>
#include <cstdio>
#include <vector>

namespace lli {

Real Real::add_exact(const Real& a, const Real& b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    // exponent span + both significands bounds the exact sum's precision
    mpfr_exp_t ea = mpfr_get_exp(a.x_), eb = mpfr_get_exp(b.x_);
    mpfr_exp_t hi = std::max(ea, eb);
    mpfr_exp_t lo = std::min(ea - a.prec(), eb - b.prec());
    mpfr_prec_t need = static_cast<mpfr_prec_t>(hi - lo) + 4;
    Real r(need);
    mpfr_add(r.x_, a.x_, b.x_, MPFR_RNDN);
    return r;
}

Real Real::mul_exact(const Real& a, const Real& b) {
    Real r(a.prec() + b.prec() + 2);
    mpfr_mul(r.x_, a.x_, b.x_, MPFR_RNDN);
    return r;
}

Real Real::ln(const Real& v, mpfr_prec_t bits) {
    Real r(bits);
    mpfr_log(r.x_, v.x_, MPFR_RNDN);
    return r;
}

Real Real::ln(const Rational& q, mpfr_prec_t bits) {
    // ln(num) - ln(den) with guard bits; components may be thousands of bits
    mpfr_prec_t work = bits + 32;
    Real n(bits), d(work);
    mpfr_set_z(d.x_, q.get_num().get_mpz_t(), MPFR_RNDN);
    Real lnum(work);
    mpfr_log(lnum.x_, d.x_, MPFR_RNDN);
    mpfr_set_z(d.x_, q.get_den().get_mpz_t(), MPFR_RNDN);
    Real lden(work);
    mpfr_log(lden.x_, d.x_, MPFR_RNDN);
    mpfr_sub(n.x_, lnum.x_, lden.x_, MPFR_RNDN);
    return n;
}

Real Real::exp(const Real& v, mpfr_prec_t bits) {
    Real r(bits);
    mpfr_exp(r.x_, v.x_, MPFR_RNDN);
    return r;
}

Real Real::softplus(const Real& t, mpfr_prec_t bits) {
    Real r(bits);
    if (t.sign() <= 0) {
        // ln(1 + e^t), e^t <= 1
        Real e(bits + 8);
        mpfr_exp(e.x_, t.x_, MPFR_RNDN);
        mpfr_log1p(r.x_, e.x_, MPFR_RNDN);
    } else {
        // t + ln(1 + e^-t)
        Real e(bits + 8);
        mpfr_neg(e.x_, t.x_, MPFR_RNDN);
        mpfr_exp(e.x_, e.x_, MPFR_RNDN);
        mpfr_log1p(e.x_, e.x_, MPFR_RNDN);
        mpfr_add(r.x_, t.x_, e.x_, MPFR_RNDN);
    }
    return r;
}

Real Real::mul_2exp(const Real& v, long e) {
    Real r(v);
    mpfr_mul_2si(r.x_, r.x_, e, MPFR_RNDN);
    return r;
}

std::string Real::str(std::size_t digits) const {
    char buf[512];
    std::string fmt = "%." + std::to_string(std::min<std::size_t>(digits, 400)) + "Rg";
    mpfr_snprintf(buf, sizeof(buf), fmt.c_str(), x_);
    return std::string(buf);
}

}  // namespace lli
