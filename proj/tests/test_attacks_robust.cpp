#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "lli/analysis.hpp"
#include "lli/attacks_robust.hpp"
#include "lli/rng.hpp"

using namespace lli;

namespace {

BinaryLabeling bits(std::initializer_list<int> b) {
    BinaryLabeling l;
    for (int x : b) l.bits.push_back(static_cast<std::uint8_t>(x));
    return l;
}

BinaryLabeling bits_of_code(std::uint64_t code, std::size_t n) {
    BinaryLabeling l;
    for (std::size_t i = 0; i < n; ++i) l.bits.push_back((code >> i) & 1);
    return l;
}

BinaryLabeling random_bits(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    BinaryLabeling l;
    l.bits.resize(n);
    for (auto& b : l.bits) b = rng.next() & 1;
    return l;
}

Oracle noisy_oracle(BinaryLabeling sigma, NoiseModel noise) {
    OracleConfig cfg;
    cfg.labeling = std::move(sigma);
    cfg.noise = std::move(noise);
    return Oracle(std::move(cfg));
}

Oracle clean_oracle(BinaryLabeling sigma) { return noisy_oracle(std::move(sigma), NoiseModel::none()); }

}  // namespace

TEST_CASE("robust weight construction") {
    SUBCASE("exponents 2^i N tau") {
        WeightVector w = robust_weights(2, 0.5, 128);
        REQUIRE(w.log_entries().size() == 2);
        // ln v = [2 ln 3, 4 ln 3] -> v = [9, 81]
        CHECK(std::exp(w.log_entries()[0].second.to_double()) == doctest::Approx(9.0).epsilon(1e-12));
        CHECK(std::exp(w.log_entries()[1].second.to_double()) == doctest::Approx(81.0).epsilon(1e-12));
        WeightVector w1 = robust_weights(1, 1.0, 128);
        CHECK(std::exp(w1.log_entries()[0].second.to_double()) == doctest::Approx(9.0).epsilon(1e-12));
    }
    SUBCASE("log-domain entries strictly increase") {
        WeightVector w = robust_weights(10, 0.01, 256);
        for (std::size_t i = 0; i + 1 < 10; ++i)
            CHECK(w.log_entries()[i].second < w.log_entries()[i + 1].second);
    }
    SUBCASE("separation: all candidate scores more than 2 tau apart") {
        for (double tau : {0.05, 0.5}) {
            for (std::size_t n = 2; n <= 12; n += 5) {
                WeightVector w = robust_weights(n, tau, 512);
                LossGapReport gap = delta_loss_gap(w, 512);
                CHECK(gap.gap > Real(2.0 * tau, 64));
                // the construction's minimum gap is exactly 2 tau ln 3
                CHECK(gap.gap.to_double() == doctest::Approx(2.0 * tau * std::log(3.0)).epsilon(1e-9));
            }
        }
    }
    SUBCASE("parameter validation") {
        CHECK_THROWS_AS(robust_weights(0, 0.1, 128), std::invalid_argument);
        CHECK_THROWS_AS(robust_weights(3, 0.0, 128), std::invalid_argument);
    }
}

TEST_CASE("single-query robust attack") {
    SUBCASE("two labels under +0.4 noise with tau_max = 0.5") {
        // candidate scores from v = [9, 81] are pairwise >= ln 3 apart
        Oracle o = noisy_oracle(bits({0, 1}), NoiseModel::bounded_adversarial(0.4, {1}));
        BinaryRecovery rec = single_query_robust_attack(o, 2, 0.5);
        CHECK(rec.labels.bits == bits({0, 1}).bits);
        CHECK(rec.queries == 1);
    }
    SUBCASE("zero noise matches the exact single-query attack exhaustively") {
        for (std::size_t n = 1; n <= 8; ++n) {
            for (std::uint64_t code = 0; code < (1ull << n); ++code) {
                BinaryLabeling sigma = bits_of_code(code, n);
                Oracle o1 = clean_oracle(sigma);
                Oracle o2 = clean_oracle(sigma);
                BinaryRecovery robust = single_query_robust_attack(o1, n, 0.25);
                BinaryRecovery exact = single_query_binary_attack(o2, n);
                REQUIRE(robust.labels.bits == exact.labels.bits);
                REQUIRE(robust.labels.bits == sigma.bits);
            }
        }
    }
    SUBCASE("a loose upper bound on tau still works") {
        BinaryLabeling sigma = random_bits(8, 99);
        Oracle o = noisy_oracle(sigma, NoiseModel::bounded_uniform(0.1, 3));
        BinaryRecovery rec = single_query_robust_attack(o, 8, 0.2);  // tau_max = 2 tau
        CHECK(rec.labels.bits == sigma.bits);
    }
    SUBCASE("uniform noise across scales") {
        for (double tau : {0.01, 0.1, 1.0}) {
            for (std::uint64_t t = 0; t < 25; ++t) {
                BinaryLabeling sigma = random_bits(6, 17 * t + 1);
                Oracle o = noisy_oracle(sigma, NoiseModel::bounded_uniform(tau, 7000 + t));
                BinaryRecovery rec = single_query_robust_attack(o, 6, tau);
                REQUIRE(rec.labels.bits == sigma.bits);
            }
        }
    }
    SUBCASE("refuses past the exhaustive-scan cap") {
        Oracle o = clean_oracle(random_bits(30, 1));
        CHECK_THROWS_AS(single_query_robust_attack(o, 30, 0.1), infeasible_error);
        CHECK(o.queries_used() == 0);
    }
    SUBCASE("refuses when the guard precision is unattainable, with a report") {
        Oracle o = clean_oracle(random_bits(24, 2));
        try {
            single_query_robust_attack(o, 24, 1.0);
            FAIL("expected precision_error");
        } catch (const precision_error& e) {
            CHECK(e.required_bits > (1 << 20));
            CHECK(o.queries_used() == 0);
        }
    }
}

TEST_CASE("robust chunk planning") {
    SUBCASE("worked sizing example") {
        RobustPlan plan = robust_chunk_size(100, 0.01, 64);
        CHECK(plan.m == 6);
        CHECK(plan.query_count(100) == 17);
    }
    SUBCASE("log2(N) cap binds for tiny tau") {
        RobustPlan plan = robust_chunk_size(2, 1e-9, 4096);
        CHECK(plan.m == 1);
    }
    SUBCASE("m >= 1 at the feasibility boundary") {
        // ratio (phi-8)/(N tau ln 2) in [1,2) floors to zero; one label per
        // query remains available
        RobustPlan plan = robust_chunk_size(10, 0.1, 9);
        CHECK(plan.m == 1);
    }
    SUBCASE("precondition enforced") {
        CHECK_THROWS_AS(robust_chunk_size(1000, 1.0, 64), infeasible_error);
    }
}

TEST_CASE("multi-query robust attack") {
    SUBCASE("single chunk reproduces the single-query decode") {
        for (std::size_t n = 2; n <= 6; ++n) {
            for (std::uint64_t code = 0; code < (1ull << n); ++code) {
                BinaryLabeling sigma = bits_of_code(code, n);
                Oracle o1 = noisy_oracle(sigma, NoiseModel::bounded_adversarial(0.2, {1, -1}));
                Oracle o2 = noisy_oracle(sigma, NoiseModel::bounded_adversarial(0.2, {1, -1}));
                RobustPlan plan{0.2, n};
                BinaryRecovery multi = multi_query_robust_attack_with_plan(o1, n, plan);
                BinaryRecovery single = single_query_robust_attack(o2, n, 0.2);
                REQUIRE(multi.labels.bits == single.labels.bits);
                REQUIRE(multi.labels.bits == sigma.bits);
            }
        }
    }
    SUBCASE("chunked recovery under uniform noise") {
        for (double tau : {0.01, 0.1}) {
            BinaryLabeling sigma = random_bits(64, 31337);
            Oracle o = noisy_oracle(sigma, NoiseModel::bounded_uniform(tau, 5));
            int phi = 8 + static_cast<int>(std::ceil(64 * tau * M_LN2)) + 64;
            BinaryRecovery rec = multi_query_robust_attack(o, 64, tau, phi);
            RobustPlan plan = robust_chunk_size(64, tau, phi);
            REQUIRE(rec.labels.bits == sigma.bits);
            CHECK(rec.queries == plan.query_count(64));
            CHECK(o.queries_used() == rec.queries);
        }
    }
    SUBCASE("chunk weights separate exactly the labelings that differ in-chunk") {
        // N = 16, chunk of m = 8 at the front: the score is a function of
        // the chunk bits alone, and those 2^m values are pairwise > 2 tau
        // apart
        const std::size_t n = 16, m = 8;
        const double tau = 0.05;
        const mpfr_prec_t prec = 512;
        Real ln3 = Real::ln(Real(3.0, prec), prec);
        std::vector<std::pair<std::size_t, Real>> logs;
        for (std::size_t r = 1; r <= m; ++r)
            logs.emplace_back(r - 1, Real::mul_2exp(ln3 * Real(tau, prec) *
                                                        Real(static_cast<long>(n), prec),
                                                    static_cast<long>(r)));
        WeightVector w = WeightVector::log_domain(n, std::move(logs));
        ArithModel model = ArithModel::apa(prec);

        std::vector<Real> chunk_scores;
        Rng rng(5150);
        for (std::uint64_t chunk_code = 0; chunk_code < (1ull << m); ++chunk_code) {
            BinaryLabeling sigma = bits_of_code(chunk_code, n);  // zeros outside the chunk
            Real base = loss_from_weights(w, sigma, model).numeric;
            // any labeling agreeing on the chunk scores identically
            BinaryLabeling other = sigma;
            for (std::size_t i = m; i < n; ++i) other.bits[i] = rng.next() & 1;
            CHECK(loss_from_weights(w, other, model).numeric == base);
            chunk_scores.push_back(base);
        }
        std::sort(chunk_scores.begin(), chunk_scores.end());
        Real two_tau(2.0 * tau, 64);
        for (std::size_t i = 0; i + 1 < chunk_scores.size(); ++i)
            CHECK(chunk_scores[i + 1] - chunk_scores[i] > two_tau);
    }
    SUBCASE("an all-zero chunk decodes to the all-zero pattern") {
        BinaryLabeling sigma = bits({0, 0, 0, 1, 0, 1});
        Oracle o = noisy_oracle(sigma, NoiseModel::bounded_adversarial(0.15, {-1}));
        BinaryRecovery rec = multi_query_robust_attack_with_plan(o, 6, RobustPlan{0.15, 3});
        CHECK(rec.labels.bits == sigma.bits);
        CHECK(rec.queries == 2);
    }
    SUBCASE("worst-case endpoint noise never defeats the decode") {
        // every +-tau sign pattern over the queries, exhaustively for small N
        const double tau = 0.3;
        for (std::size_t n = 2; n <= 8; n += 3) {
            for (std::uint64_t code = 0; code < (1ull << n); ++code) {
                BinaryLabeling sigma = bits_of_code(code, n);
                std::size_t queries = RobustPlan{tau, 2}.query_count(n);
                for (std::uint64_t pat = 0; pat < (1ull << queries); ++pat) {
                    std::vector<std::int8_t> pattern;
                    for (std::size_t q = 0; q < queries; ++q)
                        pattern.push_back((pat >> q) & 1 ? 1 : -1);
                    Oracle o = noisy_oracle(sigma, NoiseModel::bounded_adversarial(tau, pattern));
                    BinaryRecovery rec =
                        multi_query_robust_attack_with_plan(o, n, RobustPlan{tau, 2});
                    REQUIRE(rec.labels.bits == sigma.bits);
                }
            }
        }
    }
    SUBCASE("decoder-aware adversarial endpoints, single query") {
        const double tau = 0.25;
        for (std::uint64_t code = 0; code < (1ull << 6); ++code) {
            BinaryLabeling sigma = bits_of_code(code, 6);
            Oracle o = noisy_oracle(sigma, NoiseModel::bounded_adversarial(tau));
            o.set_adversarial_chooser(
                make_worst_case_chooser(robust_candidate_scores(6, tau), tau));
            BinaryRecovery rec = single_query_robust_attack(o, 6, tau);
            REQUIRE(rec.labels.bits == sigma.bits);
        }
    }
}

TEST_CASE("noise-model reductions") {
    SUBCASE("bounded support") {
        CHECK(tau_for_bounded_support(-0.1, 0.1) == 0.1);
        CHECK(tau_for_bounded_support(0.0, 1.0) == 1.0);
        CHECK(tau_for_bounded_support(-3.0, 2.0) == 3.0);
        CHECK_THROWS_AS(tau_for_bounded_support(2.0, -3.0), std::invalid_argument);
    }
    SUBCASE("subexponential tail bound") {
        double t = tau_for_subexponential(2.0, 4.0, 0.1);
        CHECK(t == doctest::Approx(12.0 * std::sqrt(std::log(20.0))).epsilon(1e-12));
        CHECK(t == doctest::Approx(20.77).epsilon(1e-3));
        CHECK(tau_for_subexponential(1.0, 1.0, 0.5) ==
              doctest::Approx(4.0 * std::sqrt(std::log(4.0))).epsilon(1e-12));
        // shrinking delta only raises the bound
        CHECK(tau_for_subexponential(2.0, 4.0, 0.01) > t);
        CHECK_THROWS_AS(tau_for_subexponential(-1.0, 1.0, 0.1), std::invalid_argument);
        CHECK_THROWS_AS(tau_for_subexponential(1.0, 1.0, 1.5), std::invalid_argument);
    }
    SUBCASE("gaussian quantile") {
        // z_{1 - 0.0125} = 2.2414 for delta = 0.05
        CHECK(tau_for_gaussian(1.0, 0.05) == doctest::Approx(2.2414).epsilon(1e-3));
        CHECK(tau_for_gaussian(2.0, 0.05) == doctest::Approx(4.4828).epsilon(1e-3));
    }
    SUBCASE("multiplicative plan") {
        MultiplicativePlan p8 = plan_for_multiplicative(0.125);
        CHECK(p8.chunk == 1);
        CHECK(p8.tau == doctest::Approx(M_LN2 / 4.0).epsilon(1e-12));
        MultiplicativePlan p16 = plan_for_multiplicative(0.0625);
        CHECK(p16.chunk == 2);
        CHECK(p16.tau == doctest::Approx(M_LN2 / 8.0).epsilon(1e-12));
        CHECK_THROWS_AS(plan_for_multiplicative(0.25), std::invalid_argument);
        CHECK_THROWS_AS(plan_for_multiplicative(0.2), std::invalid_argument);  // unanalyzed zone
    }
    SUBCASE("multiplicative noise end to end") {
        const double alpha = 0.0625;
        MultiplicativePlan mp = plan_for_multiplicative(alpha);
        for (std::uint64_t t = 0; t < 40; ++t) {
            BinaryLabeling sigma = random_bits(12, 171 + t);
            Oracle o = noisy_oracle(sigma, NoiseModel::multiplicative(alpha, 900 + t));
            BinaryRecovery rec =
                multi_query_robust_attack_with_plan(o, 12, RobustPlan{mp.tau, mp.chunk});
            REQUIRE(rec.labels.bits == sigma.bits);
        }
    }
    SUBCASE("subexponential noise end to end") {
        // chi-squared-style noise; the tail bound holds with margin
        double tau = tau_for_subexponential(2.0, 4.0, 0.1);
        std::size_t ok = 0;
        const std::size_t trials = 1000;
        for (std::uint64_t t = 0; t < trials; ++t) {
            BinaryLabeling sigma = random_bits(6, 777 + t);
            Oracle o = noisy_oracle(sigma, NoiseModel::subexponential(2.0, 4.0, 4242 + t));
            BinaryRecovery rec = single_query_robust_attack(o, 6, tau);
            if (rec.labels.bits == sigma.bits) ++ok;
        }
        CHECK(static_cast<double>(ok) / trials >= 0.9);
    }
}
