#include "lli/core.hpp"

#include <cmath>
#include <stdexcept>

namespace lli {

WeightVector WeightVector::exact(std::vector<Rational> v) {
    if (v.empty()) throw std::invalid_argument("WeightVector: N must be >= 1");
    for (const auto& x : v)
        if (sgn(x) <= 0) throw std::invalid_argument("WeightVector: entries must be > 0");
    WeightVector w;
    w.mode_ = Mode::Exact;
    w.n_ = v.size();
    w.exact_ = std::move(v);
    return w;
}

WeightVector WeightVector::log_domain(std::size_t n,
                                      std::vector<std::pair<std::size_t, Real>> ln_v) {
    if (n == 0) throw std::invalid_argument("WeightVector: N must be >= 1");
    std::size_t last = 0;
    bool first = true;
    for (const auto& [i, r] : ln_v) {
        if (i >= n) throw std::invalid_argument("WeightVector: index out of range");
        if (!first && i <= last) throw std::invalid_argument("WeightVector: indices must ascend");
        (void)r;
        last = i;
        first = false;
    }
    WeightVector w;
    w.mode_ = Mode::Log;
    w.n_ = n;
    w.logs_ = std::move(ln_v);
    return w;
}

std::size_t prediction_size(const PredictionVector& u) {
    return std::visit(
        [](const auto& v) -> std::size_t {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, SparseLogitVector>)
                return v.n;
            else
                return v.u.size();
        },
        u);
}

void validate_prediction(const PredictionVector& u) {
    if (prediction_size(u) == 0)
        throw std::invalid_argument("PredictionVector: N must be >= 1");
    if (const auto* e = std::get_if<ExactVector>(&u)) {
        for (const auto& x : e->u)
            if (sgn(x) <= 0 || cmp(x, Rational(1)) >= 0)
                throw std::invalid_argument("PredictionVector: entries must lie in (0,1)");
    } else if (const auto* d = std::get_if<DenseF64Vector>(&u)) {
        for (double x : d->u)
            if (!(x > 0.0) || !(x < 1.0))
                throw std::invalid_argument("PredictionVector: entries must lie in (0,1)");
    } else if (const auto* f = std::get_if<DenseFpaVector>(&u)) {
        f->fmt.validate();
        FpaValue one = fpa_round(Rational(1), f->fmt);
        for (const auto& x : f->u)
            if (x.is_zero() || x.is_overflow() || x.negative || fpa_cmp(x, one) >= 0)
                throw std::invalid_argument("PredictionVector: entries must lie in (0,1)");
    } else if (const auto* s = std::get_if<SparseLogitVector>(&u)) {
        std::size_t last = 0;
        bool first = true;
        for (const auto& [i, r] : s->logits) {
            if (i >= s->n) throw std::invalid_argument("PredictionVector: logit index out of range");
            if (!first && i <= last)
                throw std::invalid_argument("PredictionVector: logit indices must ascend");
            if (mpfr_number_p(r.raw()) == 0)
                throw std::invalid_argument("PredictionVector: logit must be finite");
            last = i;
            first = false;
        }
    }
}

std::pair<std::size_t, std::size_t> prediction_shape(const PredictionMatrix& u) {
    return std::visit([](const auto& m) { return std::make_pair(m.rows, m.cols); }, u);
}

void validate_prediction_matrix(const PredictionMatrix& u) {
    auto [rows, cols] = prediction_shape(u);
    if (rows == 0 || cols < 2)
        throw std::invalid_argument("PredictionMatrix: need N >= 1 rows and K >= 2 columns");
    if (const auto* e = std::get_if<ExactMatrix>(&u)) {
        if (e->u.size() != rows * cols) throw std::invalid_argument("PredictionMatrix: bad shape");
        for (std::size_t i = 0; i < rows; ++i) {
            Rational sum(0);
            for (std::size_t k = 0; k < cols; ++k) {
                const Rational& x = e->u[i * cols + k];
                if (sgn(x) <= 0 || cmp(x, Rational(1)) >= 0)
                    throw std::invalid_argument("PredictionMatrix: entries must lie in (0,1)");
                sum += x;
            }
            if (cmp(sum, Rational(1)) != 0)
                throw std::invalid_argument("PredictionMatrix: rows must sum to 1 exactly");
        }
    } else if (const auto* d = std::get_if<DenseF64Matrix>(&u)) {
        if (d->u.size() != rows * cols) throw std::invalid_argument("PredictionMatrix: bad shape");
        const double tol = std::ldexp(1.0, -53 + 2);
        for (std::size_t i = 0; i < rows; ++i) {
            double sum = 0;
            for (std::size_t k = 0; k < cols; ++k) {
                double x = d->u[i * cols + k];
                if (!(x > 0.0) || !(x < 1.0))
                    throw std::invalid_argument("PredictionMatrix: entries must lie in (0,1)");
                sum += x;
            }
            if (std::fabs(sum - 1.0) > tol)
                throw std::invalid_argument("PredictionMatrix: rows must be stochastic");
        }
    } else if (const auto* f = std::get_if<DenseFpaMatrix>(&u)) {
        f->fmt.validate();
        if (f->u.size() != rows * cols) throw std::invalid_argument("PredictionMatrix: bad shape");
        Rational tol = pow2_rational(-(f->fmt.mantissa_bits) + 2);
        FpaValue one = fpa_round(Rational(1), f->fmt);
        for (std::size_t i = 0; i < rows; ++i) {
            Rational sum(0);
            for (std::size_t k = 0; k < cols; ++k) {
                const FpaValue& x = f->u[i * cols + k];
                if (x.is_zero() || x.is_overflow() || x.negative || fpa_cmp(x, one) >= 0)
                    throw std::invalid_argument("PredictionMatrix: entries must lie in (0,1)");
                sum += fpa_to_rational(x);
            }
            Rational err = sum - 1;
            if (cmp(abs(err), tol) > 0)
                throw std::invalid_argument("PredictionMatrix: rows must be stochastic");
        }
    }
}

PredictionVector logistic_map(const WeightVector& v) {
    if (v.is_exact()) {
        ExactVector out;
        out.u.reserve(v.size());
        for (const auto& x : v.exact_entries()) out.u.push_back(make_rational(x.get_num(), x.get_num() + x.get_den()));
        return out;
    }
    // logit(f(v)) = ln v: the log-domain weights are already the logits
    SparseLogitVector out;
    out.n = v.size();
    out.logits = v.log_entries();
    return out;
}

Rational exact_exp_neg_nl_binary(const ExactVector& u, const BinaryLabeling& labels) {
    if (u.u.size() != labels.size())
        throw std::invalid_argument("binary_log_loss: length mismatch");
    Integer num(1), den(1);
    for (std::size_t i = 0; i < u.u.size(); ++i) {
        const Rational& p = u.u[i];
        if (labels.bits[i]) {
            num *= p.get_num();
            den *= p.get_den();
        } else {
            num *= p.get_den() - p.get_num();
            den *= p.get_den();
        }
    }
    return make_rational(num, den);
}

Real logit_loss_binary(const SparseLogitVector& u, const BinaryLabeling& labels,
                       mpfr_prec_t prec) {
    if (u.n != labels.size()) throw std::invalid_argument("binary_log_loss: length mismatch");
    // per element: -ln u = softplus(-t), -ln(1-u) = softplus(t), t = logit
    Real acc(prec);
    std::size_t explicit_count = 0;
    for (const auto& [i, t] : u.logits) {
        ++explicit_count;
        if (labels.bits[i])
            acc += Real::softplus(-t, prec);
        else
            acc += Real::softplus(t, prec);
    }
    Real ln2 = Real::pi_free_ln2(prec);
    Real rest(static_cast<long>(u.n - explicit_count), prec);
    acc += rest * ln2;
    acc /= Real(static_cast<long>(u.n), prec);
    return acc;
}

double fpa_loss_binary_native(const std::vector<double>& u, const BinaryLabeling& labels) {
    if (u.size() != labels.size()) throw std::invalid_argument("binary_log_loss: length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
        acc += labels.bits[i] ? std::log(u[i]) : std::log(1.0 - u[i]);
    return (-acc) / static_cast<double>(u.size());
}

FpaValue fpa_loss_binary_generic(const DenseFpaVector& u, const BinaryLabeling& labels) {
    if (u.u.size() != labels.size())
        throw std::invalid_argument("binary_log_loss: length mismatch");
    const FpaFormat& fmt = u.fmt;
    FpaValue one = fpa_round(Rational(1), fmt);
    FpaValue acc = FpaValue::zero();
    for (std::size_t i = 0; i < u.u.size(); ++i) {
        FpaValue term = labels.bits[i] ? fpa_ln(u.u[i], fmt)
                                       : fpa_ln(fpa_sub(one, u.u[i], fmt), fmt);
        acc = fpa_add(acc, term, fmt);
    }
    FpaValue n = fpa_round(Rational(static_cast<long>(u.u.size())), fmt);
    return fpa_div(fpa_neg(acc), n, fmt);
}

Rational exact_exp_neg_nl_kary(const ExactMatrix& u, const KaryLabeling& labels) {
    if (u.rows != labels.size() || u.cols != labels.num_classes)
        throw std::invalid_argument("kary_log_loss: shape mismatch");
    Integer num(1), den(1);
    for (std::size_t i = 0; i < u.rows; ++i) {
        const Rational& p = u.u[i * u.cols + (labels.classes[i] - 1)];
        num *= p.get_num();
        den *= p.get_den();
    }
    return make_rational(num, den);
}

double fpa_loss_kary_native(const DenseF64Matrix& u, const KaryLabeling& labels) {
    if (u.rows != labels.size() || u.cols != labels.num_classes)
        throw std::invalid_argument("kary_log_loss: shape mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < u.rows; ++i)
        acc += std::log(u.u[i * u.cols + (labels.classes[i] - 1)]);
    return (-acc) / static_cast<double>(u.rows);
}

FpaValue fpa_loss_kary_generic(const DenseFpaMatrix& u, const KaryLabeling& labels) {
    if (u.rows != labels.size() || u.cols != labels.num_classes)
        throw std::invalid_argument("kary_log_loss: shape mismatch");
    FpaValue acc = FpaValue::zero();
    for (std::size_t i = 0; i < u.rows; ++i) {
        FpaValue term = fpa_ln(u.u[i * u.cols + (labels.classes[i] - 1)], u.fmt);
        acc = fpa_add(acc, term, u.fmt);
    }
    FpaValue n = fpa_round(Rational(static_cast<long>(u.rows)), u.fmt);
    return fpa_div(fpa_neg(acc), n, u.fmt);
}

ExactVector to_exact_vector(const PredictionVector& u) {
    if (const auto* e = std::get_if<ExactVector>(&u)) return *e;
    ExactVector out;
    if (const auto* d = std::get_if<DenseF64Vector>(&u)) {
        out.u.reserve(d->u.size());
        for (double x : d->u) {
            Rational q;
            mpq_set_d(q.get_mpq_t(), x);
            out.u.push_back(q);
        }
        return out;
    }
    if (const auto* f = std::get_if<DenseFpaVector>(&u)) {
        out.u.reserve(f->u.size());
        for (const auto& x : f->u) out.u.push_back(fpa_to_rational(x));
        return out;
    }
    throw std::invalid_argument("to_exact_vector: logit-form predictions are not rational");
}

ExactMatrix to_exact_matrix(const PredictionMatrix& u) {
    if (const auto* e = std::get_if<ExactMatrix>(&u)) return *e;
    ExactMatrix out;
    if (const auto* d = std::get_if<DenseF64Matrix>(&u)) {
        out.rows = d->rows;
        out.cols = d->cols;
        out.u.reserve(d->u.size());
        for (double x : d->u) {
            Rational q;
            mpq_set_d(q.get_mpq_t(), x);
            out.u.push_back(q);
        }
        return out;
    }
    const auto& f = std::get<DenseFpaMatrix>(u);
    out.rows = f.rows;
    out.cols = f.cols;
    out.u.reserve(f.u.size());
    for (const auto& x : f.u) out.u.push_back(fpa_to_rational(x));
    return out;
}

ExactMatrix normalize_rows(const ExactMatrix& weights) {
    ExactMatrix out;
    out.rows = weights.rows;
    out.cols = weights.cols;
    out.u.resize(weights.u.size());
    for (std::size_t i = 0; i < weights.rows; ++i) {
        Rational sum(0);
        for (std::size_t k = 0; k < weights.cols; ++k) sum += weights.u[i * weights.cols + k];
        for (std::size_t k = 0; k < weights.cols; ++k)
            out.u[i * weights.cols + k] = Rational(weights.u[i * weights.cols + k] / sum);
    }
    return out;
}

Real numeric_from_exp_neg_nl(const Rational& r, std::size_t n, mpfr_prec_t prec) {
    Real l = Real::ln(r, prec);
    l.negate();
    l /= Real(static_cast<long>(n), prec);
    return l;
}

namespace {

Score make_exact_score(Rational r, std::size_t n, const ArithModel& model) {
    Score s;
    s.model = ArithModel::Kind::Apa;
    s.numeric = numeric_from_exp_neg_nl(r, n, model.guard_bits);
    s.exact_exp_neg_nl = std::move(r);
    return s;
}

Score make_fpa_score(FpaValue v, const FpaFormat& fmt) {
    Score s;
    s.model = ArithModel::Kind::Fpa;
    s.fmt = fmt;
    if (v.is_overflow()) {
        s.numeric = Real(fpa_to_double(v), 64);
    } else {
        s.numeric = Real(fpa_to_rational(v), 128);
    }
    s.fpa = v;
    return s;
}

DenseFpaVector round_into_format(const ExactVector& u, const FpaFormat& fmt) {
    DenseFpaVector out;
    out.fmt = fmt;
    out.u.reserve(u.u.size());
    for (const auto& x : u.u) out.u.push_back(fpa_round(x, fmt));
    return out;
}

}  // namespace

Score binary_log_loss(const PredictionVector& u, const BinaryLabeling& labels,
                      const ArithModel& model) {
    validate_prediction(u);
    if (prediction_size(u) != labels.size())
        throw std::invalid_argument("binary_log_loss: length mismatch");
    if (model.is_apa()) {
        if (const auto* s = std::get_if<SparseLogitVector>(&u)) {
            // the scoring side computes at its own configured precision,
            // regardless of how precisely the query was submitted
            Score out;
            out.model = ArithModel::Kind::Apa;
            out.numeric = logit_loss_binary(*s, labels, model.guard_bits);
            return out;
        }
        return make_exact_score(exact_exp_neg_nl_binary(to_exact_vector(u), labels),
                                labels.size(), model);
    }
    // FPA
    const FpaFormat& fmt = model.fmt;
    if (const auto* d = std::get_if<DenseF64Vector>(&u)) {
        if (fmt.is_binary64())
            return make_fpa_score(fpa_from_double(fpa_loss_binary_native(d->u, labels), fmt), fmt);
        ExactVector ev = to_exact_vector(u);
        return make_fpa_score(fpa_loss_binary_generic(round_into_format(ev, fmt), labels), fmt);
    }
    if (const auto* f = std::get_if<DenseFpaVector>(&u)) {
        if (!(f->fmt == fmt))
            throw std::invalid_argument("binary_log_loss: prediction format differs from oracle format");
        return make_fpa_score(fpa_loss_binary_generic(*f, labels), fmt);
    }
    if (const auto* e = std::get_if<ExactVector>(&u)) {
        DenseFpaVector fv = round_into_format(*e, fmt);
        for (const auto& x : fv.u) {
            FpaValue one = fpa_round(Rational(1), fmt);
            if (x.is_zero() || fpa_cmp(x, one) >= 0)
                throw std::invalid_argument(
                    "binary_log_loss: prediction degenerates to 0/1 in this format");
        }
        return make_fpa_score(fpa_loss_binary_generic(fv, labels), fmt);
    }
    // logit form: materialize u = 1/(1+e^-t) in the format
    const auto& s = std::get<SparseLogitVector>(u);
    DenseFpaVector fv;
    fv.fmt = fmt;
    FpaValue half = fpa_round(make_rational(1, 2), fmt);
    FpaValue one = fpa_round(Rational(1), fmt);
    fv.u.assign(s.n, half);
    for (const auto& [i, t] : s.logits) {
        FpaValue tf = fpa_round(t, fmt);
        FpaValue den = fpa_add(one, fpa_exp(fpa_neg(tf), fmt), fmt);
        FpaValue ui = fpa_div(one, den, fmt);
        if (ui.is_zero() || fpa_cmp(ui, one) >= 0)
            throw std::invalid_argument(
                "binary_log_loss: prediction degenerates to 0/1 in this format");
        fv.u[i] = ui;
    }
    return make_fpa_score(fpa_loss_binary_generic(fv, labels), fmt);
}

Score loss_from_weights(const WeightVector& v, const BinaryLabeling& labels,
                        const ArithModel& model) {
    if (v.size() != labels.size())
        throw std::invalid_argument("loss_from_weights: length mismatch");
    if (v.is_exact() && model.is_apa()) {
        // product form: e^{-N L} = prod_{sigma_i = 1} v_i / prod_i (1 + v_i)
        Integer num(1), den_num(1), den_den(1);
        Integer sel_num(1), sel_den(1);
        for (std::size_t i = 0; i < v.size(); ++i) {
            const Rational& x = v.exact_entries()[i];
            if (labels.bits[i]) {
                sel_num *= x.get_num();
                sel_den *= x.get_den();
            }
            den_num *= x.get_num() + x.get_den();
            den_den *= x.get_den();
        }
        Rational r = make_rational(sel_num * den_den, sel_den * den_num);
        return make_exact_score(std::move(r), v.size(), model);
    }
    if (!v.is_exact()) {
        // log-domain: per element sigma=1 -> softplus(-ln v); sigma=0 -> softplus(ln v)
        SparseLogitVector s;
        s.n = v.size();
        s.logits = v.log_entries();
        Score out;
        out.model = ArithModel::Kind::Apa;
        out.numeric = logit_loss_binary(s, labels, model.guard_bits);
        return out;
    }
    // exact weights under FPA: score f(v) in the format
    return binary_log_loss(logistic_map(v), labels, model);
}

Score kary_log_loss(const PredictionMatrix& u, const KaryLabeling& labels,
                    const ArithModel& model) {
    validate_prediction_matrix(u);
    auto [rows, cols] = prediction_shape(u);
    if (rows != labels.size() || cols != labels.num_classes)
        throw std::invalid_argument("kary_log_loss: shape mismatch");
    if (model.is_apa())
        return make_exact_score(exact_exp_neg_nl_kary(to_exact_matrix(u), labels), rows, model);
    const FpaFormat& fmt = model.fmt;
    if (const auto* d = std::get_if<DenseF64Matrix>(&u)) {
        if (fmt.is_binary64())
            return make_fpa_score(fpa_from_double(fpa_loss_kary_native(*d, labels), fmt), fmt);
        ExactMatrix em = to_exact_matrix(u);
        DenseFpaMatrix fm;
        fm.fmt = fmt;
        fm.rows = em.rows;
        fm.cols = em.cols;
        fm.u.reserve(em.u.size());
        for (const auto& x : em.u) fm.u.push_back(fpa_round(x, fmt));
        return make_fpa_score(fpa_loss_kary_generic(fm, labels), fmt);
    }
    if (const auto* f = std::get_if<DenseFpaMatrix>(&u)) {
        if (!(f->fmt == fmt))
            throw std::invalid_argument("kary_log_loss: prediction format differs from oracle format");
        return make_fpa_score(fpa_loss_kary_generic(*f, labels), fmt);
    }
    const auto& e = std::get<ExactMatrix>(u);
    DenseFpaMatrix fm;
    fm.fmt = fmt;
    fm.rows = e.rows;
    fm.cols = e.cols;
    fm.u.reserve(e.u.size());
    for (const auto& x : e.u) fm.u.push_back(fpa_round(x, fmt));
    return make_fpa_score(fpa_loss_kary_generic(fm, labels), fmt);
}

}  // namespace lli
