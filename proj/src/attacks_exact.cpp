#include "lli/attacks_exact.hpp"

#include <cmath>

namespace lli {

namespace {

// Integer extraction guard: a decoded chunk is accepted only when q sits
// within 1/4 of an integer AND the format can still resolve integers at
// that magnitude (ulp <= 1/2). Exceeding either marks the chunk unrecovered
// instead of producing silent garbage.
struct QInt {
    bool ok = false;
    Integer value;
};

QInt q_from_double(double q) {
    QInt out;
    if (!std::isfinite(q) || q < 0.5) return out;
    if (q > std::ldexp(1.0, 52)) return out;  // ulp > 1/2
    double r = std::nearbyint(q);
    if (std::fabs(q - r) >= 0.25) return out;
    out.ok = true;
    out.value = Integer(static_cast<unsigned long>(r));
    return out;
}

QInt q_from_fpa(const FpaValue& q, const FpaFormat& fmt) {
    QInt out;
    if (q.is_overflow() || q.is_zero() || q.negative) return out;
    if (q.exponent > fmt.mantissa_bits - 2) return out;  // ulp > 1/2
    Rational qr = fpa_to_rational(q);
    Integer r = round_to_integer(qr);
    Rational diff = qr - Rational(r);
    if (cmp(abs(diff), make_rational(1, 4)) >= 0) return out;
    if (sgn(r) <= 0) return out;
    out.ok = true;
    out.value = r;
    return out;
}

QInt q_from_rational(const Rational& q) {
    QInt out;
    if (sgn(q) <= 0) return out;
    Integer r = round_to_integer(q);
    Rational diff = q - Rational(r);
    if (cmp(abs(diff), make_rational(1, 4)) >= 0) return out;
    out.ok = true;
    out.value = r;
    return out;
}

// q from a high-precision numeric score: q = scale * e^{-N*ell}.
QInt q_from_numeric(const Real& ell, std::size_t n, const Real& ln_scale) {
    mpfr_prec_t prec = std::max<mpfr_prec_t>(ell.prec(), 128);
    Real t = Real(static_cast<long>(n), prec) * ell;
    t.negate();
    t += ln_scale;
    // bail out if the integer cannot be resolved at this magnitude
    if (t.to_double() > 42.0) return QInt{};
    Real q = Real::exp(t, prec);
    double qd = q.to_double();
    QInt out;
    if (!std::isfinite(qd) || qd < 0.5) return out;
    double r = std::nearbyint(qd);
    Real diff = Real::abs_diff(q, Real(r, prec));
    if (diff.cmp(Real(0.25, 64)) >= 0) return out;
    out.ok = true;
    out.value = Integer(static_cast<unsigned long>(r));
    return out;
}

bool divides(const Integer& p, const Integer& q) {
    return mpz_divisible_p(q.get_mpz_t(), p.get_mpz_t()) != 0;
}

}  // namespace

ChunkPlan plan_chunks(std::size_t n, const FpaFormat& fmt, ChunkPlan::Policy policy,
                      std::size_t fixed_m) {
    fmt.validate();
    if (n == 0) throw std::invalid_argument("plan_chunks: n must be >= 1");
    if (fmt.phi() < 9) throw infeasible_error("plan_chunks: phi must be >= 9");
    ChunkPlan plan;
    plan.policy = policy;
    switch (policy) {
        case ChunkPlan::Policy::Theoretical: {
            double cap = std::pow(2.0, (static_cast<double>(fmt.phi()) - 5.0) / 4.0);
            if (cap < 2.0) throw infeasible_error("plan_chunks: no prime fits the format");
            plan.m = largest_prime_at_most(cap).index;
            break;
        }
        case ChunkPlan::Policy::MantissaBudget: {
            double budget = static_cast<double>(fmt.mantissa_bits) - 4.0;
            if (budget < 1.0) throw infeasible_error("plan_chunks: mantissa too small");
            PrimeTable t = PrimeTable::first(64);
            double acc = 0.0;
            std::size_t m = 0;
            while (m < t.size()) {
                acc += std::log2(static_cast<double>(t.nth(m + 1)));
                if (acc > budget) break;
                ++m;
            }
            if (m == 0) throw infeasible_error("plan_chunks: mantissa too small");
            plan.m = m;
            break;
        }
        case ChunkPlan::Policy::Fixed:
            if (fixed_m < 1 || fixed_m > n)
                throw std::invalid_argument("plan_chunks: fixed m must lie in [1, n]");
            plan.m = fixed_m;
            break;
    }
    if (plan.m > n) plan.m = n;
    return plan;
}

BinaryRecovery single_query_binary_attack(Oracle& oracle, std::size_t n,
                                          const std::vector<Integer>* coprime_moduli) {
    if (!oracle.is_binary())
        throw std::invalid_argument("single_query_binary_attack: oracle is not binary");
    if (oracle.n() != n)
        throw std::invalid_argument("single_query_binary_attack: n mismatch");
    std::vector<Integer> mods;
    if (coprime_moduli) {
        if (coprime_moduli->size() != n)
            throw std::invalid_argument("single_query_binary_attack: moduli length mismatch");
        mods = *coprime_moduli;
    } else {
        PrimeTable t = PrimeTable::first(n);
        mods.reserve(n);
        for (std::size_t i = 1; i <= n; ++i) mods.emplace_back(static_cast<unsigned long>(t.nth(i)));
    }

    BinaryRecovery rec;
    rec.labels.bits.assign(n, 0);
    rec.inferred.assign(n, 0);

    const bool apa = oracle.model().is_apa();
    QInt q;
    if (apa) {
        ExactVector u;
        u.u.reserve(n);
        Integer t_prod(1);
        for (const auto& p : mods) {
            u.u.push_back(make_rational(p, p + 1));
            t_prod *= p + 1;
        }
        Score s = oracle.query(PredictionVector(std::move(u)));
        rec.queries = 1;
        if (s.exact_exp_neg_nl) {
            q = q_from_rational(Rational(*s.exact_exp_neg_nl * Rational(t_prod)));
        } else {
            // noised or otherwise inexact score: decode from the numeric view
            mpfr_prec_t prec = std::max<mpfr_prec_t>(s.numeric.prec(), 256);
            q = q_from_numeric(s.numeric, n, Real::ln(Rational(t_prod), prec));
        }
    } else {
        const FpaFormat& fmt = oracle.model().fmt;
        if (fmt.is_binary64()) {
            DenseF64Vector u;
            u.u.reserve(n);
            double t_prod = 1.0;
            std::vector<double> pd(n);
            for (std::size_t i = 0; i < n; ++i) {
                double p = mods[i].get_d();
                pd[i] = p;
                u.u.push_back(p / (1.0 + p));
                t_prod *= 1.0 + p;
            }
            Score s = oracle.query(PredictionVector(std::move(u)));
            rec.queries = 1;
            double ell = s.numeric.to_double();
            q = q_from_double(t_prod * std::exp(-static_cast<double>(n) * ell));
        } else {
            DenseFpaVector u;
            u.fmt = fmt;
            u.u.reserve(n);
            FpaValue one = fpa_round(Rational(1), fmt);
            FpaValue t_prod = one;
            for (const auto& p : mods) {
                FpaValue pf = fpa_round(Rational(p), fmt);
                u.u.push_back(fpa_div(pf, fpa_add(one, pf, fmt), fmt));
                t_prod = fpa_mul(t_prod, fpa_add(one, pf, fmt), fmt);
            }
            Score s = oracle.query(PredictionVector(std::move(u)));
            rec.queries = 1;
            if (!s.fpa) throw std::invalid_argument("single_query_binary_attack: missing FPA score");
            FpaValue nl = fpa_mul(fpa_round(Rational(static_cast<long>(n)), fmt), *s.fpa, fmt);
            FpaValue qv = fpa_mul(t_prod, fpa_exp(fpa_neg(nl), fmt), fmt);
            q = q_from_fpa(qv, fmt);
        }
    }

    if (!q.ok) {
        rec.complete = false;
        return rec;
    }
    for (std::size_t i = 0; i < n; ++i) {
        rec.labels.bits[i] = divides(mods[i], q.value) ? 1 : 0;
        rec.inferred[i] = 1;
    }
    return rec;
}

BinaryRecovery multi_query_binary_attack(Oracle& oracle, std::size_t n, const ChunkPlan& plan) {
    if (!oracle.is_binary())
        throw std::invalid_argument("multi_query_binary_attack: oracle is not binary");
    if (oracle.n() != n) throw std::invalid_argument("multi_query_binary_attack: n mismatch");
    if (plan.m < 1 || plan.m > n) throw std::invalid_argument("multi_query_binary_attack: bad plan");

    const std::size_t m = plan.m;
    PrimeTable primes = PrimeTable::first(m);
    BinaryRecovery rec;
    rec.labels.bits.assign(n, 0);
    rec.inferred.assign(n, 0);

    const bool apa = oracle.model().is_apa();
    const FpaFormat fmt = oracle.model().fmt;
    const bool native = !apa && fmt.is_binary64();

    // reusable query buffers; only the chunk entries change between queries
    DenseF64Vector f64;
    ExactVector ex;
    DenseFpaVector fpav;
    FpaValue half{}, one{};
    if (native) {
        f64.u.assign(n, 0.5);
    } else if (apa) {
        ex.u.assign(n, make_rational(1, 2));
    } else {
        fpav.fmt = fmt;
        one = fpa_round(Rational(1), fmt);
        half = fpa_round(make_rational(1, 2), fmt);
        fpav.u.assign(n, half);
    }

    for (std::size_t start = 0; start < n; start += m) {
        const std::size_t ml = std::min(m, n - start);
        QInt q;
        if (apa) {
            Integer alpha(1);
            for (std::size_t j = 0; j < ml; ++j) {
                Integer p(static_cast<unsigned long>(primes.nth(j + 1)));
                ex.u[start + j] = make_rational(p, p + 1);
                alpha *= p + 1;
            }
            Score s = oracle.query(PredictionVector(ex));
            ++rec.queries;
            for (std::size_t j = 0; j < ml; ++j) ex.u[start + j] = make_rational(1, 2);
            if (s.exact_exp_neg_nl) {
                Rational qr = *s.exact_exp_neg_nl * Rational(alpha) *
                              Rational(pow_int(Integer(2), static_cast<unsigned long>(n - ml)));
                q = q_from_rational(qr);
            } else {
                mpfr_prec_t prec = std::max<mpfr_prec_t>(s.numeric.prec(), 256);
                Real ln2 = Real::pi_free_ln2(prec);
                Real ln_scale =
                    Real::ln(Rational(alpha), prec) + Real(static_cast<long>(n - ml), prec) * ln2;
                q = q_from_numeric(s.numeric, n, ln_scale);
            }
        } else if (native) {
            double alpha = 1.0;
            for (std::size_t j = 0; j < ml; ++j) {
                double p = static_cast<double>(primes.nth(j + 1));
                f64.u[start + j] = p / (1.0 + p);
                alpha *= 1.0 + p;
            }
            Score s = oracle.query(PredictionVector(f64));
            ++rec.queries;
            for (std::size_t j = 0; j < ml; ++j) f64.u[start + j] = 0.5;
            double ell = s.numeric.to_double();
            double expo = -static_cast<double>(n) * ell +
                          static_cast<double>(n - ml) * std::log(2.0);
            q = q_from_double(alpha * std::exp(expo));
        } else {
            FpaValue alpha = one;
            for (std::size_t j = 0; j < ml; ++j) {
                FpaValue p = fpa_round(Rational(static_cast<long>(primes.nth(j + 1))), fmt);
                FpaValue p1 = fpa_add(one, p, fmt);
                fpav.u[start + j] = fpa_div(p, p1, fmt);
                alpha = fpa_mul(alpha, p1, fmt);
            }
            Score s = oracle.query(PredictionVector(fpav));
            ++rec.queries;
            for (std::size_t j = 0; j < ml; ++j) fpav.u[start + j] = half;
            if (!s.fpa) throw std::invalid_argument("multi_query_binary_attack: missing FPA score");
            FpaValue nf = fpa_round(Rational(static_cast<long>(n)), fmt);
            FpaValue rest = fpa_round(Rational(static_cast<long>(n - ml)), fmt);
            FpaValue ln2 = fpa_ln(fpa_round(Rational(2), fmt), fmt);
            FpaValue expo = fpa_add(fpa_neg(fpa_mul(nf, *s.fpa, fmt)),
                                    fpa_mul(rest, ln2, fmt), fmt);
            q = q_from_fpa(fpa_mul(alpha, fpa_exp(expo, fmt), fmt), fmt);
        }

        if (!q.ok) {
            rec.complete = false;
            continue;
        }
        for (std::size_t j = 0; j < ml; ++j) {
            Integer p(static_cast<unsigned long>(primes.nth(j + 1)));
            rec.labels.bits[start + j] = divides(p, q.value) ? 1 : 0;
            rec.inferred[start + j] = 1;
        }
    }
    return rec;
}

namespace {

// Exponent of p in q by repeated division; bounded by cap.
unsigned prime_exponent(Integer& q, const Integer& p, unsigned cap) {
    unsigned e = 0;
    while (e < cap && mpz_divisible_p(q.get_mpz_t(), p.get_mpz_t())) {
        q /= p;
        ++e;
    }
    return e;
}

}  // namespace

KaryRecovery single_query_kary_attack(Oracle& oracle, std::size_t n, std::uint32_t k,
                                      const KaryAttackOptions& opts) {
    if (oracle.is_binary())
        throw std::invalid_argument("single_query_kary_attack: oracle is not K-ary");
    if (oracle.n() != n || oracle.num_classes() != k)
        throw std::invalid_argument("single_query_kary_attack: shape mismatch");
    const bool apa = oracle.model().is_apa();
    if (!apa && !opts.allow_fpa)
        throw std::invalid_argument(
            "single_query_kary_attack: unsupported outside APA (use multi_query_kary_attack)");

    PrimeTable primes = PrimeTable::first(n);
    KaryRecovery rec;
    rec.labels.num_classes = k;
    rec.labels.classes.assign(n, 1);
    rec.inferred.assign(n, 0);
    rec.queries = 1;

    if (apa) {
        ExactMatrix weights;
        weights.rows = n;
        weights.cols = k;
        weights.u.reserve(n * k);
        Integer s_prod(1);
        for (std::size_t i = 0; i < n; ++i) {
            Integer p(static_cast<unsigned long>(primes.nth(i + 1)));
            Integer s(0), pk(1);
            for (std::uint32_t j = 0; j < k; ++j) {
                weights.u.push_back(Rational(pk));
                s += pk;
                pk *= p;
            }
            s_prod *= s;
        }
        Score sc = oracle.query(PredictionMatrix(normalize_rows(weights)));
        if (!sc.exact_exp_neg_nl)
            throw std::invalid_argument("single_query_kary_attack: exact score unavailable");
        QInt q = q_from_rational(Rational(*sc.exact_exp_neg_nl * Rational(s_prod)));
        if (!q.ok) {
            rec.complete = false;
            return rec;
        }
        Integer rem = q.value;
        for (std::size_t i = 0; i < n; ++i) {
            Integer p(static_cast<unsigned long>(primes.nth(i + 1)));
            unsigned e = prime_exponent(rem, p, k - 1);
            rec.labels.classes[i] = 1 + e;
            rec.inferred[i] = 1;
        }
        if (rem != 1) {  // leftover factor: decode was inconsistent
            rec.complete = false;
            rec.inferred.assign(n, 0);
            rec.labels.classes.assign(n, 1);
        }
        return rec;
    }

    // opt-in FPA pathway: same construction under rounded arithmetic
    const FpaFormat& fmt = oracle.model().fmt;
    if (!fmt.is_binary64())
        throw std::invalid_argument("single_query_kary_attack: FPA pathway requires binary64");
    DenseF64Matrix u;
    u.rows = n;
    u.cols = k;
    u.u.resize(n * k);
    double ln_s_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double p = static_cast<double>(primes.nth(i + 1));
        double s = 0.0, pk = 1.0;
        std::vector<double> row(k);
        for (std::uint32_t j = 0; j < k; ++j) {
            row[j] = pk;
            s += pk;
            pk *= p;
        }
        for (std::uint32_t j = 0; j < k; ++j) u.u[i * k + j] = row[j] / s;
        ln_s_sum += std::log(s);
    }
    Score sc = oracle.query(PredictionMatrix(std::move(u)));
    double ell = sc.numeric.to_double();
    QInt q = q_from_double(std::exp(-static_cast<double>(n) * ell + ln_s_sum));
    if (!q.ok) {
        rec.complete = false;
        return rec;
    }
    Integer rem = q.value;
    for (std::size_t i = 0; i < n; ++i) {
        Integer p(static_cast<unsigned long>(primes.nth(i + 1)));
        unsigned e = prime_exponent(rem, p, k - 1);
        rec.labels.classes[i] = 1 + e;
        rec.inferred[i] = 1;
    }
    if (rem != 1) {
        rec.complete = false;
        rec.inferred.assign(n, 0);
        rec.labels.classes.assign(n, 1);
    }
    return rec;
}

KaryRecovery multi_query_kary_attack(Oracle& oracle, std::size_t n, std::uint32_t k,
                                     const FpaFormat& fmt) {
    if (oracle.is_binary())
        throw std::invalid_argument("multi_query_kary_attack: oracle is not K-ary");
    if (oracle.n() != n || oracle.num_classes() != k)
        throw std::invalid_argument("multi_query_kary_attack: shape mismatch");
    fmt.validate();

    // Block size: largest m whose worst-case recovered product (every label
    // at the top of its class block) stays exactly representable.
    const double budget = static_cast<double>(fmt.mantissa_bits) - 4.0;
    PrimeTable small = PrimeTable::first(64);
    std::size_t m = 0;
    {
        double acc = 0.0;
        while (m < small.size()) {
            acc += std::log2(static_cast<double>(small.nth(m + 1)));
            double worst = static_cast<double>(std::min<std::size_t>(m + 1, k)) * acc;
            if (worst > budget) break;
            ++m;
        }
    }
    if (m == 0) throw infeasible_error("multi_query_kary_attack: phi too small for m = 1");
    m = std::min<std::size_t>(m, n);

    KaryRecovery rec;
    rec.labels.num_classes = k;
    rec.labels.classes.assign(n, 1);
    rec.inferred.assign(n, 0);

    const bool native = fmt.is_binary64();
    const std::size_t class_blocks = (k + m - 1) / m;
    std::vector<unsigned> found_exponent(n, 0);
    std::vector<std::uint32_t> found_block(n, 0);
    std::vector<std::uint8_t> tainted(n, 0);

    for (std::size_t dstart = 0; dstart < n; dstart += m) {
        const std::size_t dl = std::min(m, n - dstart);
        for (std::size_t cb = 0; cb < class_blocks; ++cb) {
            const std::uint32_t c0 = static_cast<std::uint32_t>(cb * m);
            const std::uint32_t cl = static_cast<std::uint32_t>(
                std::min<std::size_t>(m, k - c0));
            // exponent shift +1: class c0+t gets p^(t+1), so exponent 0
            // unambiguously means "label outside this class block"
            ++rec.queries;
            QInt q;
            if (native) {
                DenseF64Matrix u;
                u.rows = n;
                u.cols = k;
                u.u.assign(n * k, 1.0 / static_cast<double>(k));
                double ln_s_sum = 0.0;
                for (std::size_t r = 0; r < dl; ++r) {
                    double p = static_cast<double>(small.nth(r + 1));
                    std::vector<double> w(k, 1.0);
                    double pk = p, s = 0.0;
                    for (std::uint32_t t = 0; t < cl; ++t) {
                        w[c0 + t] = pk;
                        pk *= p;
                    }
                    for (std::uint32_t j = 0; j < k; ++j) s += w[j];
                    for (std::uint32_t j = 0; j < k; ++j) u.u[(dstart + r) * k + j] = w[j] / s;
                    ln_s_sum += std::log(s);
                }
                Score sc = oracle.query(PredictionMatrix(std::move(u)));
                double ell = sc.numeric.to_double();
                double expo = -static_cast<double>(n) * ell +
                              static_cast<double>(n - dl) * std::log(static_cast<double>(k)) +
                              ln_s_sum;
                q = q_from_double(std::exp(expo));
            } else {
                DenseFpaMatrix u;
                u.fmt = fmt;
                u.rows = n;
                u.cols = k;
                FpaValue one = fpa_round(Rational(1), fmt);
                FpaValue kf = fpa_round(Rational(static_cast<long>(k)), fmt);
                FpaValue invk = fpa_div(one, kf, fmt);
                u.u.assign(n * k, invk);
                FpaValue ln_s_sum = FpaValue::zero();
                for (std::size_t r = 0; r < dl; ++r) {
                    FpaValue p = fpa_round(Rational(static_cast<long>(small.nth(r + 1))), fmt);
                    std::vector<FpaValue> w(k, one);
                    FpaValue pk = p;
                    for (std::uint32_t t = 0; t < cl; ++t) {
                        w[c0 + t] = pk;
                        pk = fpa_mul(pk, p, fmt);
                    }
                    FpaValue s = FpaValue::zero();
                    for (std::uint32_t j = 0; j < k; ++j) s = fpa_add(s, w[j], fmt);
                    for (std::uint32_t j = 0; j < k; ++j)
                        u.u[(dstart + r) * k + j] = fpa_div(w[j], s, fmt);
                    ln_s_sum = fpa_add(ln_s_sum, fpa_ln(s, fmt), fmt);
                }
                Score sc = oracle.query(PredictionMatrix(std::move(u)));
                if (!sc.fpa)
                    throw std::invalid_argument("multi_query_kary_attack: missing FPA score");
                FpaValue nf = fpa_round(Rational(static_cast<long>(n)), fmt);
                FpaValue rest = fpa_round(Rational(static_cast<long>(n - dl)), fmt);
                FpaValue lnk = fpa_ln(kf, fmt);
                FpaValue expo = fpa_add(fpa_neg(fpa_mul(nf, *sc.fpa, fmt)),
                                        fpa_add(fpa_mul(rest, lnk, fmt), ln_s_sum, fmt), fmt);
                q = q_from_fpa(fpa_exp(expo, fmt), fmt);
            }

            if (!q.ok) {
                for (std::size_t r = 0; r < dl; ++r) tainted[dstart + r] = 1;
                continue;
            }
            Integer rem = q.value;
            bool clean = true;
            std::vector<unsigned> exps(dl, 0);
            for (std::size_t r = 0; r < dl; ++r) {
                Integer p(static_cast<unsigned long>(small.nth(r + 1)));
                exps[r] = prime_exponent(rem, p, cl);
            }
            if (rem != 1) clean = false;
            if (!clean) {
                for (std::size_t r = 0; r < dl; ++r) tainted[dstart + r] = 1;
                continue;
            }
            for (std::size_t r = 0; r < dl; ++r) {
                if (exps[r] == 0) continue;
                std::size_t i = dstart + r;
                if (found_exponent[i] != 0) {
                    tainted[i] = 1;  // contradictory decodes across class blocks
                    continue;
                }
                found_exponent[i] = exps[r];
                found_block[i] = c0;
            }
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        if (tainted[i] || found_exponent[i] == 0) {
            rec.complete = false;
            continue;
        }
        rec.labels.classes[i] = found_block[i] + found_exponent[i];
        rec.inferred[i] = 1;
    }
    return rec;
}

double recovery_accuracy(const BinaryLabeling& truth, const BinaryRecovery& rec) {
    if (truth.size() != rec.labels.size())
        throw std::invalid_argument("recovery_accuracy: length mismatch");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < truth.size(); ++i)
        if (rec.inferred[i] && rec.labels.bits[i] == truth.bits[i]) ++correct;
    return static_cast<double>(correct) / static_cast<double>(truth.size());
}

double recovery_accuracy(const KaryLabeling& truth, const KaryRecovery& rec) {
    if (truth.size() != rec.labels.size())
        throw std::invalid_argument("recovery_accuracy: length mismatch");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < truth.size(); ++i)
        if (rec.inferred[i] && rec.labels.classes[i] == truth.classes[i]) ++correct;
    return static_cast<double>(correct) / static_cast<double>(truth.size());
}

}  // namespace lli
