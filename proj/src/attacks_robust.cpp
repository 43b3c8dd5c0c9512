#include "lli/attacks_robust.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lli {

namespace {

constexpr double kLog2_3 = 1.5849625007211562;  // log2(3)

// ln v_r = 2^r * n * tau * ln 3 for r = 1..count, at the given precision.
std::vector<Real> log_weights(std::size_t count, std::size_t n, double tau, mpfr_prec_t prec) {
    Real ln3 = Real::ln(Real(3.0, prec), prec);
    Real base = ln3 * Real(tau, prec) * Real(static_cast<long>(n), prec);
    std::vector<Real> out;
    out.reserve(count);
    for (std::size_t r = 1; r <= count; ++r)
        out.push_back(Real::mul_2exp(base, static_cast<long>(r)));
    return out;
}

// Gray-code scan over subsets of `terms`: argmin over subsets S of
// |sum(S) - target|. Ties break toward the lexicographically smallest
// labeling (0 wins at the lowest differing index).
std::uint64_t argmin_subset_sum(const std::vector<Real>& terms, const Real& target) {
    const std::size_t m = terms.size();
    const std::uint64_t total = std::uint64_t(1) << m;
    mpfr_prec_t prec = target.prec();
    for (const auto& t : terms) prec = std::max(prec, t.prec());

    Real cur(prec);  // running subset sum, starts at empty set
    Real best_dist = Real::abs_diff(cur, target);
    std::uint64_t best_code = 0, code = 0;

    auto lex_smaller = [](std::uint64_t a, std::uint64_t b) {
        // dictionary order on (sigma_1, sigma_2, ...): at the lowest
        // differing index, the labeling with bit 0 is smaller
        std::uint64_t d = a ^ b;
        std::uint64_t low = d & (~d + 1);
        return (a & low) == 0;
    };

    for (std::uint64_t t = 1; t < total; ++t) {
        int j = __builtin_ctzll(t);
        code ^= std::uint64_t(1) << j;
        if (code & (std::uint64_t(1) << j))
            cur += terms[static_cast<std::size_t>(j)];
        else
            cur -= terms[static_cast<std::size_t>(j)];
        Real d = Real::abs_diff(cur, target);
        int c = d.cmp(best_dist);
        if (c < 0 || (c == 0 && lex_smaller(code, best_code))) {
            best_dist = d;
            best_code = code;
        }
    }
    return best_code;
}

}  // namespace

WeightVector robust_weights(std::size_t n, double tau, mpfr_prec_t prec) {
    if (n == 0) throw std::invalid_argument("robust_weights: n must be >= 1");
    if (!(tau > 0)) throw std::invalid_argument("robust_weights: tau must be > 0");
    auto lw = log_weights(n, n, tau, prec);
    std::vector<std::pair<std::size_t, Real>> entries;
    entries.reserve(n);
    for (std::size_t i = 0; i < n; ++i) entries.emplace_back(i, std::move(lw[i]));
    return WeightVector::log_domain(n, std::move(entries));
}

mpfr_prec_t robust_guard_bits(std::size_t n, double tau, std::size_t m,
                              const RobustOptions& opts) {
    double frac = std::ldexp(1.0, static_cast<int>(m)) * static_cast<double>(n) * tau * kLog2_3;
    double total = frac + 16.0 + 64.0;
    if (!(total < static_cast<double>(opts.max_guard_bits)))
        throw precision_error(
            "robust decode: required guard precision " + std::to_string(total) +
                " bits exceeds the configured cap " + std::to_string(opts.max_guard_bits),
            static_cast<mpfr_prec_t>(std::min(total, 1e18)));
    return static_cast<mpfr_prec_t>(total);
}

BinaryRecovery single_query_robust_attack(Oracle& oracle, std::size_t n, double tau_max,
                                          const RobustOptions& opts) {
    if (!oracle.is_binary())
        throw std::invalid_argument("single_query_robust_attack: oracle is not binary");
    if (oracle.n() != n) throw std::invalid_argument("single_query_robust_attack: n mismatch");
    if (!(tau_max > 0)) throw std::invalid_argument("single_query_robust_attack: tau must be > 0");
    if (n > opts.max_exhaustive_n)
        throw infeasible_error("single_query_robust_attack: n exceeds the 2^N scan cap " +
                               std::to_string(opts.max_exhaustive_n));
    mpfr_prec_t prec = robust_guard_bits(n, tau_max, n, opts);

    auto lw = log_weights(n, n, tau_max, prec);
    std::vector<std::pair<std::size_t, Real>> logits;
    logits.reserve(n);
    for (std::size_t i = 0; i < n; ++i) logits.emplace_back(i, lw[i]);
    SparseLogitVector u;
    u.n = n;
    u.logits = std::move(logits);

    Score s = oracle.query(PredictionVector(std::move(u)));

    // candidate score: L(sigma) = (C - sum_{sigma_i=1} ln v_i) / N with
    // C = sum_i softplus(ln v_i); minimizing |L - ell| over sigma is the
    // nearest subset sum to target = C - N*ell
    Real c_sum(prec);
    for (const auto& w : lw) c_sum += Real::softplus(w, prec);
    Real target = c_sum - Real(static_cast<long>(n), prec) * s.numeric;

    std::uint64_t code = argmin_subset_sum(lw, target);
    BinaryRecovery rec;
    rec.labels.bits.assign(n, 0);
    rec.inferred.assign(n, 1);
    rec.queries = 1;
    for (std::size_t i = 0; i < n; ++i)
        rec.labels.bits[i] = (code >> i) & 1 ? 1 : 0;
    return rec;
}

RobustPlan robust_chunk_size(std::size_t n, double tau, int phi) {
    if (n == 0) throw std::invalid_argument("robust_chunk_size: n must be >= 1");
    if (!(tau > 0)) throw std::invalid_argument("robust_chunk_size: tau must be > 0");
    double nt_ln2 = static_cast<double>(n) * tau * M_LN2;
    if (phi < 8 + static_cast<int>(std::ceil(nt_ln2)))
        throw infeasible_error("robust_chunk_size: phi must be >= 8 + ceil(N tau ln 2)");
    double by_phi = std::floor(std::log2((static_cast<double>(phi) - 8.0) / nt_ln2));
    double by_n = std::ceil(std::log2(static_cast<double>(n)));
    double m = std::min(by_n, by_phi);
    if (m < 1) m = 1;  // the precondition held, so one label per query is available
    RobustPlan plan;
    plan.tau = tau;
    plan.m = static_cast<std::size_t>(m);
    return plan;
}

BinaryRecovery multi_query_robust_attack(Oracle& oracle, std::size_t n, double tau_max,
                                         int phi, const RobustOptions& opts) {
    return multi_query_robust_attack_with_plan(oracle, n, robust_chunk_size(n, tau_max, phi),
                                               opts);
}

BinaryRecovery multi_query_robust_attack_with_plan(Oracle& oracle, std::size_t n,
                                                   const RobustPlan& plan,
                                                   const RobustOptions& opts) {
    if (!oracle.is_binary())
        throw std::invalid_argument("multi_query_robust_attack: oracle is not binary");
    if (oracle.n() != n) throw std::invalid_argument("multi_query_robust_attack: n mismatch");
    if (plan.m < 1 || plan.m > n)
        throw std::invalid_argument("multi_query_robust_attack: bad chunk size");
    const double tau = plan.tau;
    const std::size_t m = plan.m;
    mpfr_prec_t prec = robust_guard_bits(n, tau, m, opts);

    auto lw = log_weights(m, n, tau, prec);
    Real ln2 = Real::pi_free_ln2(prec);
    Real n_real(static_cast<long>(n), prec);

    BinaryRecovery rec;
    rec.labels.bits.assign(n, 0);
    rec.inferred.assign(n, 1);

    for (std::size_t start = 0; start < n; start += m) {
        const std::size_t ml = std::min(m, n - start);
        std::vector<std::pair<std::size_t, Real>> logits;
        logits.reserve(ml);
        for (std::size_t r = 0; r < ml; ++r) logits.emplace_back(start + r, lw[r]);
        SparseLogitVector u;
        u.n = n;
        u.logits = std::move(logits);
        Score s = oracle.query(PredictionVector(std::move(u)));
        ++rec.queries;

        Real c_sum = Real(static_cast<long>(n - ml), prec) * ln2;
        for (std::size_t r = 0; r < ml; ++r) c_sum += Real::softplus(lw[r], prec);
        Real target = c_sum - n_real * s.numeric;
        std::vector<Real> terms(lw.begin(), lw.begin() + static_cast<std::ptrdiff_t>(ml));
        std::uint64_t code = argmin_subset_sum(terms, target);
        for (std::size_t r = 0; r < ml; ++r)
            rec.labels.bits[start + r] = (code >> r) & 1 ? 1 : 0;
    }
    return rec;
}

double tau_for_bounded_support(double a, double b) {
    if (a > b) throw std::invalid_argument("tau_for_bounded_support: need a <= b");
    return std::max(std::fabs(a), std::fabs(b));
}

double tau_for_subexponential(double lambda, double nu, double delta) {
    if (!(lambda > 0) || !(nu > 0))
        throw std::invalid_argument("tau_for_subexponential: lambda, nu must be > 0");
    if (!(delta > 0) || !(delta < 1))
        throw std::invalid_argument("tau_for_subexponential: delta must lie in (0,1)");
    return 2.0 * (lambda + nu) * std::sqrt(std::log(2.0 / delta));
}

double tau_for_gaussian(double stddev, double delta) {
    if (!(stddev > 0)) throw std::invalid_argument("tau_for_gaussian: stddev must be > 0");
    if (!(delta > 0) || !(delta < 1))
        throw std::invalid_argument("tau_for_gaussian: delta must lie in (0,1)");
    // two-sided quantile at delta/4 via bisection on erfc
    double lo = 0.0, hi = 1.0;
    auto tail = [](double z) { return std::erfc(z / std::sqrt(2.0)) / 2.0; };
    while (tail(hi) > delta / 4.0) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (tail(mid) > delta / 4.0)
            lo = mid;
        else
            hi = mid;
    }
    return stddev * hi;
}

MultiplicativePlan plan_for_multiplicative(double alpha) {
    if (!(alpha > 0) || alpha > 0.125)
        throw std::invalid_argument(
            "plan_for_multiplicative: only rates alpha in (0, 1/8] are supported");
    MultiplicativePlan plan;
    plan.chunk = static_cast<std::size_t>(std::ceil(std::log2(1.0 / alpha) - 2.0));
    if (plan.chunk < 1) plan.chunk = 1;
    plan.tau = 2.0 * M_LN2 * alpha;
    return plan;
}

std::vector<double> robust_candidate_scores(std::size_t n, double tau,
                                            const RobustOptions& opts) {
    if (n > opts.max_exhaustive_n)
        throw infeasible_error("robust_candidate_scores: n exceeds the scan cap");
    mpfr_prec_t prec = robust_guard_bits(n, tau, n, opts);
    auto lw = log_weights(n, n, tau, prec);
    Real c_sum(prec);
    for (const auto& w : lw) c_sum += Real::softplus(w, prec);
    std::vector<double> out(std::size_t(1) << n);
    for (std::uint64_t code = 0; code < out.size(); ++code) {
        Real sum(prec);
        for (std::size_t i = 0; i < n; ++i)
            if ((code >> i) & 1) sum += lw[i];
        Real l = (c_sum - sum) / Real(static_cast<long>(n), prec);
        out[code] = l.to_double();
    }
    return out;
}

std::function<double(double)> make_worst_case_chooser(std::vector<double> candidates,
                                                      double tau) {
    std::sort(candidates.begin(), candidates.end());
    return [candidates = std::move(candidates), tau](double unnoised) {
        auto nearest_other = [&](double obs) {
            auto it = std::lower_bound(candidates.begin(), candidates.end(), obs);
            double best = std::numeric_limits<double>::infinity();
            for (auto probe : {it, it == candidates.begin() ? it : std::prev(it),
                               it == candidates.end() ? it : std::next(it)}) {
                if (probe == candidates.end()) continue;
                if (std::fabs(*probe - unnoised) < 1e-12) continue;  // the true score
                best = std::min(best, std::fabs(*probe - obs));
            }
            return best;
        };
        double up = nearest_other(unnoised + tau);
        double down = nearest_other(unnoised - tau);
        return up <= down ? tau : -tau;
    };
}

}  // namespace lli
