#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "lli/core.hpp"
#include "lli/rng.hpp"

using namespace lli;

namespace {

const ArithModel kApa = ArithModel::apa();
const ArithModel kFpa64 = ArithModel::fpa(FpaFormat::binary64());

ExactVector exact_u(std::initializer_list<std::pair<long, long>> fracs) {
    ExactVector v;
    for (auto [n, d] : fracs) v.u.push_back(make_rational(n, d));
    return v;
}

BinaryLabeling bits(std::initializer_list<int> b) {
    BinaryLabeling l;
    for (int x : b) l.bits.push_back(static_cast<std::uint8_t>(x));
    return l;
}

WeightVector rational_weights(std::initializer_list<long> ws) {
    std::vector<Rational> v;
    for (long w : ws) v.push_back(Rational(w));
    return WeightVector::exact(std::move(v));
}

Rational random_weight(Rng& rng) {
    return make_rational(static_cast<long>(1 + rng.below(50)), static_cast<long>(1 + rng.below(50)));
}

}  // namespace

TEST_CASE("logistic map") {
    SUBCASE("f(1) = 1/2") {
        auto u = std::get<ExactVector>(logistic_map(rational_weights({1, 1, 1})));
        for (const auto& x : u.u) CHECK(x == make_rational(1, 2));
    }
    SUBCASE("prime weights") {
        auto u = std::get<ExactVector>(logistic_map(rational_weights({2, 3, 5, 7, 11})));
        CHECK(u.u == std::vector<Rational>{make_rational(2, 3), make_rational(3, 4),
                                           make_rational(5, 6), make_rational(7, 8),
                                           make_rational(11, 12)});
    }
    SUBCASE("geometric weights") {
        auto u = std::get<ExactVector>(logistic_map(rational_weights({9, 81})));
        CHECK(u.u == std::vector<Rational>{make_rational(9, 10), make_rational(81, 82)});
    }
    SUBCASE("strictly increasing in v") {
        auto u = std::get<ExactVector>(logistic_map(rational_weights({1, 2, 3, 9, 81})));
        CHECK(std::is_sorted(u.u.begin(), u.u.end()));
    }
    SUBCASE("non-positive weight rejected") {
        CHECK_THROWS_AS(WeightVector::exact({Rational(0)}), std::invalid_argument);
        CHECK_THROWS_AS(WeightVector::exact({Rational(-2)}), std::invalid_argument);
    }
}

TEST_CASE("binary log-loss, exact pathway") {
    SUBCASE("all-half predictions score ln 2 for every labeling") {
        ExactVector u = exact_u({{1, 2}, {1, 2}, {1, 2}});
        for (auto sigma : {bits({0, 0, 0}), bits({1, 0, 1}), bits({1, 1, 1})}) {
            Score s = binary_log_loss(PredictionVector(u), sigma, kApa);
            REQUIRE(s.exact_exp_neg_nl.has_value());
            CHECK(*s.exact_exp_neg_nl == make_rational(1, 8));
            CHECK(s.numeric.to_double() == doctest::Approx(std::log(2.0)).epsilon(1e-15));
        }
    }
    SUBCASE("worked five-point example") {
        auto u = std::get<ExactVector>(logistic_map(rational_weights({2, 3, 5, 7, 11})));
        Score s = binary_log_loss(PredictionVector(u), bits({0, 1, 1, 0, 1}), kApa);
        CHECK(*s.exact_exp_neg_nl == make_rational(55, 2304));
        CHECK(s.numeric.to_double() ==
              doctest::Approx(std::log(2304.0 / 55.0) / 5.0).epsilon(1e-15));
    }
    SUBCASE("two-point example") {
        Score s = binary_log_loss(PredictionVector(exact_u({{2, 3}, {3, 4}})), bits({1, 1}), kApa);
        CHECK(*s.exact_exp_neg_nl == make_rational(1, 2));
        CHECK(s.numeric.to_double() == doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-15));
    }
    SUBCASE("length mismatch") {
        CHECK_THROWS_AS(
            binary_log_loss(PredictionVector(exact_u({{1, 2}})), bits({0, 1}), kApa),
            std::invalid_argument);
    }
    SUBCASE("entries outside (0,1) rejected") {
        CHECK_THROWS_AS(
            binary_log_loss(PredictionVector(exact_u({{1, 1}})), bits({1}), kApa),
            std::invalid_argument);
        CHECK_THROWS_AS(
            binary_log_loss(PredictionVector(exact_u({{0, 1}})), bits({1}), kApa),
            std::invalid_argument);
    }
}

TEST_CASE("weight-space loss agrees with prediction-space loss exactly") {
    SUBCASE("worked example, unreduced product form") {
        Score s = loss_from_weights(rational_weights({2, 3, 5, 7, 11}), bits({0, 1, 1, 0, 1}), kApa);
        // 165/6912 reduces to 55/2304
        CHECK(*s.exact_exp_neg_nl == make_rational(165, 6912));
    }
    SUBCASE("all-ones weights score ln 2") {
        Score s = loss_from_weights(rational_weights({1, 1, 1, 1}), bits({1, 0, 1, 1}), kApa);
        CHECK(*s.exact_exp_neg_nl == make_rational(1, 16));
    }
    SUBCASE("[2,3] on [1,1]") {
        Score s = loss_from_weights(rational_weights({2, 3}), bits({1, 1}), kApa);
        CHECK(*s.exact_exp_neg_nl == make_rational(1, 2));
    }
    SUBCASE("identity over all labelings, random rational weights") {
        Rng rng(31);
        for (std::size_t n : {std::size_t(1), std::size_t(4), std::size_t(8), std::size_t(12)}) {
            std::vector<Rational> w;
            for (std::size_t i = 0; i < n; ++i) w.push_back(random_weight(rng));
            WeightVector wv = WeightVector::exact(w);
            PredictionVector u = logistic_map(wv);
            BinaryLabeling sigma;
            sigma.bits.assign(n, 0);
            for (std::uint64_t code = 0; code < (1ull << n); ++code) {
                for (std::size_t i = 0; i < n; ++i) sigma.bits[i] = (code >> i) & 1;
                Score a = loss_from_weights(wv, sigma, kApa);
                Score b = binary_log_loss(u, sigma, kApa);
                CHECK(*a.exact_exp_neg_nl == *b.exact_exp_neg_nl);
            }
        }
    }
}

TEST_CASE("score properties") {
    Rng rng(37);
    SUBCASE("unnoised scores are strictly positive") {
        for (int t = 0; t < 50; ++t) {
            std::size_t n = 1 + rng.below(6);
            std::vector<Rational> w;
            for (std::size_t i = 0; i < n; ++i) w.push_back(random_weight(rng));
            BinaryLabeling sigma;
            for (std::size_t i = 0; i < n; ++i) sigma.bits.push_back(rng.next() & 1);
            Score s = loss_from_weights(WeightVector::exact(w), sigma, kApa);
            CHECK(s.numeric.sign() > 0);
            CHECK(*s.exact_exp_neg_nl < 1);
        }
    }
    SUBCASE("permutation equivariance") {
        for (int t = 0; t < 30; ++t) {
            std::size_t n = 2 + rng.below(7);
            ExactVector u;
            BinaryLabeling sigma;
            for (std::size_t i = 0; i < n; ++i) {
                u.u.push_back(make_rational(static_cast<long>(1 + rng.below(20)),
                                            static_cast<long>(22 + rng.below(20))));
                sigma.bits.push_back(rng.next() & 1);
            }
            std::vector<std::size_t> perm(n);
            for (std::size_t i = 0; i < n; ++i) perm[i] = i;
            for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
            ExactVector pu;
            BinaryLabeling ps;
            for (std::size_t i = 0; i < n; ++i) {
                pu.u.push_back(u.u[perm[i]]);
                ps.bits.push_back(sigma.bits[perm[i]]);
            }
            Score a = binary_log_loss(PredictionVector(u), sigma, kApa);
            Score b = binary_log_loss(PredictionVector(pu), ps, kApa);
            CHECK(*a.exact_exp_neg_nl == *b.exact_exp_neg_nl);
        }
    }
    SUBCASE("flipping a label against the confident side increases the score") {
        ExactVector u = exact_u({{3, 4}, {1, 3}, {9, 10}});
        BinaryLabeling sigma = bits({1, 0, 1});
        Score base = binary_log_loss(PredictionVector(u), sigma, kApa);
        BinaryLabeling flipped = sigma;
        flipped.bits[0] = 0;  // u_0 = 3/4 > 1/2
        Score worse = binary_log_loss(PredictionVector(u), flipped, kApa);
        CHECK(worse.numeric > base.numeric);
    }
}

TEST_CASE("K-ary log-loss") {
    SUBCASE("uniform rows score ln K") {
        ExactMatrix u;
        u.rows = 3;
        u.cols = 4;
        for (std::size_t i = 0; i < 12; ++i) u.u.push_back(make_rational(1, 4));
        KaryLabeling sigma(4, {1, 3, 4});
        Score s = kary_log_loss(PredictionMatrix(u), sigma, kApa);
        CHECK(*s.exact_exp_neg_nl == make_rational(1, 64));
        CHECK(s.numeric.to_double() == doctest::Approx(std::log(4.0)).epsilon(1e-15));
    }
    SUBCASE("worked 3-class example") {
        ExactMatrix u;
        u.rows = 2;
        u.cols = 3;
        for (long x : {1, 2, 4}) u.u.push_back(make_rational(x, 7));
        for (long x : {1, 3, 9}) u.u.push_back(make_rational(x, 13));
        KaryLabeling sigma(3, {2, 3});
        Score s = kary_log_loss(PredictionMatrix(u), sigma, kApa);
        CHECK(*s.exact_exp_neg_nl == make_rational(18, 91));
        CHECK(s.numeric.to_double() == doctest::Approx(0.5 * std::log(91.0 / 18.0)).epsilon(1e-15));
    }
    SUBCASE("K = 2 matrix reproduces the binary loss") {
        Rng rng(41);
        for (int t = 0; t < 100; ++t) {
            std::size_t n = 1 + rng.below(8);
            ExactVector uv;
            ExactMatrix um;
            um.rows = n;
            um.cols = 2;
            BinaryLabeling sb;
            KaryLabeling sk(2, std::vector<std::uint32_t>(n, 1));
            for (std::size_t i = 0; i < n; ++i) {
                Rational p = make_rational(static_cast<long>(1 + rng.below(30)),
                                           static_cast<long>(32 + rng.below(30)));
                uv.u.push_back(p);
                um.u.push_back(Rational(1 - p));  // class 1 = label 0
                um.u.push_back(p);                // class 2 = label 1
                std::uint8_t b = rng.next() & 1;
                sb.bits.push_back(b);
                sk.classes[i] = 1 + b;
            }
            Score a = binary_log_loss(PredictionVector(uv), sb, kApa);
            Score b = kary_log_loss(PredictionMatrix(um), sk, kApa);
            CHECK(*a.exact_exp_neg_nl == *b.exact_exp_neg_nl);
        }
    }
    SUBCASE("non-stochastic rows rejected") {
        ExactMatrix u;
        u.rows = 1;
        u.cols = 2;
        u.u = {make_rational(1, 2), make_rational(1, 3)};
        KaryLabeling sigma(2, {1});
        CHECK_THROWS_AS(kary_log_loss(PredictionMatrix(u), sigma, kApa), std::invalid_argument);
    }
    SUBCASE("shape mismatch rejected") {
        ExactMatrix u;
        u.rows = 2;
        u.cols = 2;
        u.u.assign(4, make_rational(1, 2));
        KaryLabeling sigma(3, {1, 2});
        CHECK_THROWS_AS(kary_log_loss(PredictionMatrix(u), sigma, kApa), std::invalid_argument);
    }
}

TEST_CASE("FPA-mode loss pipelines") {
    Rng rng(43);
    SUBCASE("binary64 pipeline equals a plain double loop") {
        for (int t = 0; t < 50; ++t) {
            std::size_t n = 1 + rng.below(32);
            DenseF64Vector u;
            BinaryLabeling sigma;
            for (std::size_t i = 0; i < n; ++i) {
                u.u.push_back(0.05 + 0.9 * rng.uniform01());
                sigma.bits.push_back(rng.next() & 1);
            }
            Score s = binary_log_loss(PredictionVector(u), sigma, kFpa64);
            double acc = 0;
            for (std::size_t i = 0; i < n; ++i)
                acc += sigma.bits[i] ? std::log(u.u[i]) : std::log(1.0 - u.u[i]);
            double expect = -acc / static_cast<double>(n);
            CHECK(s.numeric.to_double() == expect);
            REQUIRE(s.fpa.has_value());
            CHECK(fpa_to_double(*s.fpa) == expect);
        }
    }
    SUBCASE("generic small-format pipeline rounds after every operation") {
        ArithModel small = ArithModel::fpa(FpaFormat{5, 8});
        ExactVector u = exact_u({{2, 3}, {3, 4}, {5, 6}});
        Score s = binary_log_loss(PredictionVector(u), bits({1, 0, 1}), small);
        REQUIRE(s.fpa.has_value());
        // reproduce by hand with the same op order
        const FpaFormat f{5, 8};
        FpaValue one = fpa_round(Rational(1), f);
        FpaValue acc = FpaValue::zero();
        for (std::size_t i = 0; i < 3; ++i) {
            FpaValue ui = fpa_round(u.u[i], f);
            FpaValue term = (i != 1) ? fpa_ln(ui, f) : fpa_ln(fpa_sub(one, ui, f), f);
            acc = fpa_add(acc, term, f);
        }
        FpaValue expect = fpa_div(fpa_neg(acc), fpa_round(Rational(3), f), f);
        CHECK(fpa_cmp(*s.fpa, expect) == 0);
    }
    SUBCASE("logit queries degenerate to 0/1 in coarse formats") {
        SparseLogitVector s;
        s.n = 2;
        s.logits.emplace_back(0, Real(60.0, 128));  // u = 1 - e^-60: rounds to 1 in binary64
        CHECK_THROWS_AS(binary_log_loss(PredictionVector(s), bits({0, 1}), kFpa64),
                        std::invalid_argument);
    }
    SUBCASE("log-domain scoring matches the exact pathway on rational weights") {
        // same weights presented both ways; scores agree to guard precision
        std::vector<Rational> w = {Rational(9), Rational(81), Rational(2)};
        WeightVector exact = WeightVector::exact(w);
        std::vector<std::pair<std::size_t, Real>> logs;
        for (std::size_t i = 0; i < w.size(); ++i)
            logs.emplace_back(i, Real::ln(w[i], 256));
        WeightVector logd = WeightVector::log_domain(3, std::move(logs));
        BinaryLabeling sigma = bits({0, 1, 1});
        double a = loss_from_weights(exact, sigma, kApa).numeric.to_double();
        double b = loss_from_weights(logd, sigma, kApa).numeric.to_double();
        CHECK(a == doctest::Approx(b).epsilon(1e-15));
    }
}

TEST_CASE("exact scalar arithmetic is exact") {
    Rng rng(47);
    for (int t = 0; t < 200; ++t) {
        Rational a = random_weight(rng), b = random_weight(rng);
        CHECK(Rational((a + b) - b) == a);
        CHECK(Rational((a * b) / b) == a);
    }
}
