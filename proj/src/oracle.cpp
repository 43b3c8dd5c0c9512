#include "lli/oracle.hpp"

#include <chrono>
#include <cmath>

#include "lli/rng.hpp"

namespace lli {

NoiseModel NoiseModel::bounded_uniform(double tau, std::uint64_t seed) {
    NoiseModel m;
    m.kind = Kind::BoundedAdditive;
    m.bounded_mode = BoundedMode::Uniform;
    m.tau = tau;
    m.seed = seed;
    m.validate();
    return m;
}

NoiseModel NoiseModel::bounded_adversarial(double tau, std::vector<std::int8_t> pattern) {
    NoiseModel m;
    m.kind = Kind::BoundedAdditive;
    m.bounded_mode = BoundedMode::Adversarial;
    m.tau = tau;
    m.sign_pattern = std::move(pattern);
    m.validate();
    return m;
}

NoiseModel NoiseModel::gaussian(double stddev, std::uint64_t seed) {
    NoiseModel m;
    m.kind = Kind::Gaussian;
    m.stddev = stddev;
    m.seed = seed;
    m.validate();
    return m;
}

NoiseModel NoiseModel::subexponential(double lambda, double nu, std::uint64_t seed) {
    NoiseModel m;
    m.kind = Kind::Subexponential;
    m.lambda = lambda;
    m.nu = nu;
    m.seed = seed;
    m.validate();
    return m;
}

NoiseModel NoiseModel::multiplicative(double alpha, std::uint64_t seed) {
    NoiseModel m;
    m.kind = Kind::Multiplicative;
    m.alpha = alpha;
    m.seed = seed;
    m.validate();
    return m;
}

void NoiseModel::validate() const {
    switch (kind) {
        case Kind::None:
            break;
        case Kind::BoundedAdditive:
            if (!(tau > 0)) throw std::invalid_argument("NoiseModel: tau must be > 0");
            for (auto s : sign_pattern)
                if (s != 1 && s != -1)
                    throw std::invalid_argument("NoiseModel: pattern entries must be +-1");
            break;
        case Kind::Gaussian:
            if (!(stddev > 0)) throw std::invalid_argument("NoiseModel: stddev must be > 0");
            break;
        case Kind::Subexponential:
            if (!(lambda > 0) || !(nu > 0))
                throw std::invalid_argument("NoiseModel: lambda, nu must be > 0");
            break;
        case Kind::Multiplicative:
            if (!(alpha >= 0) || alpha >= 1)
                throw std::invalid_argument("NoiseModel: alpha must lie in [0,1)");
            break;
    }
}

BinaryLabeling randomized_response(const BinaryLabeling& labels, double p, std::uint64_t seed) {
    if (!(p >= 0) || p >= 0.5)
        throw std::invalid_argument("randomized_response: p must lie in [0, 1/2)");
    Rng rng(seed);
    BinaryLabeling out = labels;
    for (auto& b : out.bits)
        if (rng.bernoulli(p)) b ^= 1;
    return out;
}

namespace {

std::uint64_t hash_bytes(const void* data, std::size_t len, std::uint64_t h = 1469598103934665603ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t hash_rational(const Rational& q, std::uint64_t h) {
    std::string s = q.get_str();
    return hash_bytes(s.data(), s.size(), h);
}

std::uint64_t hash_prediction(const PredictionVector& u) {
    std::uint64_t h = 1469598103934665603ull;
    if (const auto* d = std::get_if<DenseF64Vector>(&u))
        return hash_bytes(d->u.data(), d->u.size() * sizeof(double), h);
    if (const auto* e = std::get_if<ExactVector>(&u)) {
        for (const auto& q : e->u) h = hash_rational(q, h);
        return h;
    }
    if (const auto* f = std::get_if<DenseFpaVector>(&u))
        return hash_bytes(f->u.data(), f->u.size() * sizeof(FpaValue), h);
    const auto& s = std::get<SparseLogitVector>(u);
    h = hash_bytes(&s.n, sizeof(s.n), h);
    for (const auto& [i, t] : s.logits) {
        h = hash_bytes(&i, sizeof(i), h);
        double d = t.to_double();
        h = hash_bytes(&d, sizeof(d), h);
    }
    return h;
}

std::uint64_t hash_prediction(const PredictionMatrix& u) {
    std::uint64_t h = 1469598103934665603ull;
    if (const auto* d = std::get_if<DenseF64Matrix>(&u))
        return hash_bytes(d->u.data(), d->u.size() * sizeof(double), h);
    if (const auto* f = std::get_if<DenseFpaMatrix>(&u))
        return hash_bytes(f->u.data(), f->u.size() * sizeof(FpaValue), h);
    const auto& e = std::get<ExactMatrix>(u);
    for (const auto& q : e.u) h = hash_rational(q, h);
    return h;
}

}  // namespace

Oracle::Oracle(OracleConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.noise.validate();
    if (cfg_.query_budget && *cfg_.query_budget < 1)
        throw std::invalid_argument("OracleConfig: budget must be >= 1 when bounded");
    if (auto* b = std::get_if<BinaryLabeling>(&cfg_.labeling)) {
        b->validate();
        n_ = b->size();
        if (cfg_.defense)
            *b = randomized_response(*b, cfg_.defense->p, cfg_.defense->seed);
    } else {
        auto& k = std::get<KaryLabeling>(cfg_.labeling);
        k.validate();
        n_ = k.size();
        if (cfg_.defense)
            throw std::invalid_argument("OracleConfig: randomized response is binary-only");
    }
    rng_state_ = cfg_.noise.seed;
}

std::uint32_t Oracle::num_classes() const {
    if (is_binary()) return 2;
    return std::get<KaryLabeling>(cfg_.labeling).num_classes;
}

std::uint64_t Oracle::queries_used() const {
    std::lock_guard<std::mutex> lock(mu_);
    return used_;
}

std::uint64_t Oracle::scoring_time_ns() const {
    std::lock_guard<std::mutex> lock(mu_);
    return scoring_ns_;
}

void Oracle::set_adversarial_chooser(std::function<double(double)> chooser) {
    std::lock_guard<std::mutex> lock(mu_);
    chooser_ = std::move(chooser);
}

const BinaryLabeling& Oracle::scored_binary_labels() const {
    return std::get<BinaryLabeling>(cfg_.labeling);
}

const KaryLabeling& Oracle::scored_kary_labels() const {
    return std::get<KaryLabeling>(cfg_.labeling);
}

void Oracle::check_budget() const {
    if (cfg_.query_budget && used_ >= *cfg_.query_budget)
        throw budget_exhausted_error("oracle: query budget exhausted");
}

Score Oracle::apply_noise(Score s) {
    const NoiseModel& nm = cfg_.noise;
    if (nm.kind == NoiseModel::Kind::None) return s;
    Rng rng(rng_state_);
    double eta = 0.0;
    bool multiplicative = false;
    switch (nm.kind) {
        case NoiseModel::Kind::BoundedAdditive:
            if (nm.bounded_mode == NoiseModel::BoundedMode::Uniform) {
                eta = nm.tau * rng.uniform_sym();
            } else if (chooser_) {
                eta = chooser_(s.numeric.to_double());
                if (std::fabs(eta) > nm.tau)
                    eta = eta < 0 ? -nm.tau : nm.tau;
            } else if (!nm.sign_pattern.empty()) {
                eta = nm.tau * nm.sign_pattern[noise_index_ % nm.sign_pattern.size()];
            } else {
                eta = (noise_index_ % 2 == 0) ? nm.tau : -nm.tau;
            }
            break;
        case NoiseModel::Kind::Gaussian:
            eta = nm.stddev * rng.normal();
            break;
        case NoiseModel::Kind::Subexponential: {
            // scaled centered chi-squared: (lambda/2)(Z^2 - 1)
            double z = rng.normal();
            eta = 0.5 * nm.lambda * (z * z - 1.0);
            break;
        }
        case NoiseModel::Kind::Multiplicative:
            eta = nm.alpha * rng.uniform_sym();
            multiplicative = true;
            break;
        case NoiseModel::Kind::None:
            break;
    }
    rng_state_ = rng.state;
    ++noise_index_;
    Score out;
    out.model = s.model;
    out.fmt = s.fmt;
    out.noised = true;
    // perturbation applied exactly (precision grown), so the bound on
    // |returned - unnoised| is exact, not within-rounding
    if (multiplicative)
        out.numeric = Real::mul_exact(s.numeric, Real(1.0 + eta, 64));
    else
        out.numeric = Real::add_exact(s.numeric, Real(eta, 53));
    return out;
}

void Oracle::record(std::uint64_t hash, const Score& noised, const Score& unnoised,
                    const PredictionVector* q, const PredictionMatrix* m) {
    if (cfg_.transcript == TranscriptMode::Off) return;
    TranscriptEntry e;
    e.query_hash = hash;
    e.returned = noised.numeric.to_double();
    if (cfg_.transcript == TranscriptMode::Full) {
        if (q) e.query = *q;
        if (m) e.kary_query = *m;
        e.true_score = unnoised;
    }
    transcript_.entries.push_back(std::move(e));
}

Score Oracle::query(const PredictionVector& q) {
    std::lock_guard<std::mutex> lock(mu_);
    check_budget();
    if (!is_binary()) throw std::invalid_argument("oracle: binary query against K-ary labeling");
    auto t0 = std::chrono::steady_clock::now();
    if (prediction_size(q) != n_)
        throw std::invalid_argument("oracle: query dimension mismatch");
    Score truth = binary_log_loss(q, std::get<BinaryLabeling>(cfg_.labeling), cfg_.arith);
    Score out = apply_noise(truth);
    ++used_;
    record(hash_prediction(q), out, truth, &q, nullptr);
    auto t1 = std::chrono::steady_clock::now();
    scoring_ns_ += std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count();
    return out;
}

Score Oracle::query(const PredictionMatrix& q) {
    std::lock_guard<std::mutex> lock(mu_);
    check_budget();
    if (is_binary()) throw std::invalid_argument("oracle: K-ary query against binary labeling");
    auto t0 = std::chrono::steady_clock::now();
    auto [rows, cols] = prediction_shape(q);
    if (rows != n_ || cols != num_classes())
        throw std::invalid_argument("oracle: query shape mismatch");
    Score truth = kary_log_loss(q, std::get<KaryLabeling>(cfg_.labeling), cfg_.arith);
    Score out = apply_noise(truth);
    ++used_;
    record(hash_prediction(q), out, truth, nullptr, &q);
    auto t1 = std::chrono::steady_clock::now();
    scoring_ns_ += std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count();
    return out;
}

}  // namespace lli
