#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "lli/fpa.hpp"
#include "lli/labeling.hpp"
#include "lli/rational.hpp"
#include "lli/real.hpp"

namespace lli {

// Active arithmetic substrate for scoring. Apa computes exactly on rational
// inputs (and at guard_bits in log-domain otherwise); Fpa rounds after every
// elementary operation in the given format.
struct ArithModel {
    enum class Kind { Apa, Fpa };
    Kind kind = Kind::Apa;
    FpaFormat fmt{};
    mpfr_prec_t guard_bits = 256;

    static ArithModel apa(mpfr_prec_t guard = 256) { return ArithModel{Kind::Apa, {}, guard}; }
    static ArithModel fpa(FpaFormat f) {
        f.validate();
        return ArithModel{Kind::Fpa, f, 256};
    }
    bool is_apa() const { return kind == Kind::Apa; }
};

// Weight vector v: the pre-image of the prediction vector under
// f(x) = x / (1 + x). Entries are strictly positive, held either as exact
// rationals or in log-domain (ln v) when the magnitudes are astronomical.
class WeightVector {
public:
    static WeightVector exact(std::vector<Rational> v);
    // Entries not listed have ln v = 0 (v = 1). Indices are 0-based, ascending.
    static WeightVector log_domain(std::size_t n, std::vector<std::pair<std::size_t, Real>> ln_v);

    bool is_exact() const { return mode_ == Mode::Exact; }
    std::size_t size() const { return n_; }
    const std::vector<Rational>& exact_entries() const { return exact_; }
    const std::vector<std::pair<std::size_t, Real>>& log_entries() const { return logs_; }

private:
    enum class Mode { Exact, Log };
    Mode mode_ = Mode::Exact;
    std::size_t n_ = 0;
    std::vector<Rational> exact_;
    std::vector<std::pair<std::size_t, Real>> logs_;
};

// Prediction vector representations. Every entry is a probability strictly
// inside (0,1), so a loss is finite for either label.
struct ExactVector {
    std::vector<Rational> u;
};
struct DenseF64Vector {
    std::vector<double> u;  // entries are binary64 values, i.e. FpaFormat{11,53}
};
struct DenseFpaVector {
    FpaFormat fmt;
    std::vector<FpaValue> u;
};
// u given as logit = ln(u/(1-u)) = ln v; entries not listed default to
// logit 0 (u = 1/2). Canonically encodes probabilities in (0,1).
struct SparseLogitVector {
    std::size_t n = 0;
    std::vector<std::pair<std::size_t, Real>> logits;  // 0-based ascending indices
};
using PredictionVector = std::variant<ExactVector, DenseF64Vector, DenseFpaVector, SparseLogitVector>;

std::size_t prediction_size(const PredictionVector& u);
void validate_prediction(const PredictionVector& u);

// Row-stochastic prediction matrices for the K-ary loss, row-major.
struct ExactMatrix {
    std::size_t rows = 0, cols = 0;
    std::vector<Rational> u;
};
struct DenseF64Matrix {
    std::size_t rows = 0, cols = 0;
    std::vector<double> u;
};
struct DenseFpaMatrix {
    FpaFormat fmt;
    std::size_t rows = 0, cols = 0;
    std::vector<FpaValue> u;
};
using PredictionMatrix = std::variant<ExactMatrix, DenseF64Matrix, DenseFpaMatrix>;

std::pair<std::size_t, std::size_t> prediction_shape(const PredictionMatrix& u);
void validate_prediction_matrix(const PredictionMatrix& u);

// A log-loss score in the active arithmetic model. The exact pathway keeps
// the rational e^{-N*L} (the loss in product form), which stays exact for
// rational predictions; numeric is the materialized value of L, and is the
// only field that survives noise.
struct Score {
    ArithModel::Kind model = ArithModel::Kind::Apa;
    FpaFormat fmt{};
    std::optional<Rational> exact_exp_neg_nl;
    std::optional<FpaValue> fpa;
    Real numeric;
    bool noised = false;
};

// f(v) = v/(1+v) per entry, in the weight vector's own domain.
PredictionVector logistic_map(const WeightVector& v);

Score binary_log_loss(const PredictionVector& u, const BinaryLabeling& labels,
                      const ArithModel& model);
Score loss_from_weights(const WeightVector& v, const BinaryLabeling& labels,
                        const ArithModel& model);
Score kary_log_loss(const PredictionMatrix& u, const KaryLabeling& labels,
                    const ArithModel& model);

// Internal loss kernels, exposed for attacks and tests.
Rational exact_exp_neg_nl_binary(const ExactVector& u, const BinaryLabeling& labels);
Real logit_loss_binary(const SparseLogitVector& u, const BinaryLabeling& labels,
                       mpfr_prec_t prec);
double fpa_loss_binary_native(const std::vector<double>& u, const BinaryLabeling& labels);
FpaValue fpa_loss_binary_generic(const DenseFpaVector& u, const BinaryLabeling& labels);
Rational exact_exp_neg_nl_kary(const ExactMatrix& u, const KaryLabeling& labels);
double fpa_loss_kary_native(const DenseF64Matrix& u, const KaryLabeling& labels);
FpaValue fpa_loss_kary_generic(const DenseFpaMatrix& u, const KaryLabeling& labels);

ExactVector to_exact_vector(const PredictionVector& u);
ExactMatrix to_exact_matrix(const PredictionMatrix& u);
ExactMatrix normalize_rows(const ExactMatrix& weights);

// Materialize L = -ln(R)/N from the exact product form.
Real numeric_from_exp_neg_nl(const Rational& r, std::size_t n, mpfr_prec_t prec);

}  // namespace lli
