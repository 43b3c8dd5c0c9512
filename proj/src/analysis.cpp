#include "lli/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

namespace lli {

namespace {

constexpr std::size_t kEnumCap = 24;

template <typename Value>
struct SumEntry {
    Value sum;
    std::uint32_t mask;
};

// Sorted subset sums; adjacent differences carry the minimum gap.
template <typename Value, typename Less>
void min_adjacent_gap(std::vector<SumEntry<Value>>& sums, Less less, std::uint32_t& mask_a,
                      std::uint32_t& mask_b, Value& best, bool& first) {
    std::sort(sums.begin(), sums.end(),
              [&](const SumEntry<Value>& x, const SumEntry<Value>& y) { return less(x.sum, y.sum); });
    for (std::size_t i = 0; i + 1 < sums.size(); ++i) {
        Value d = sums[i + 1].sum - sums[i].sum;
        if (first || less(d, best)) {
            best = d;
            mask_a = sums[i + 1].mask;
            mask_b = sums[i].mask;
            first = false;
        }
    }
}

}  // namespace

GapReport mu_subset_sums(const std::vector<Real>& s) {
    const std::size_t n = s.size();
    if (n == 0) throw std::invalid_argument("mu_subset_sums: set must be nonempty");
    if (n > kEnumCap) throw std::invalid_argument("mu_subset_sums: set size exceeds cap 24");

    mpfr_prec_t prec = 64;
    for (const auto& x : s) prec = std::max(prec, x.prec());

    if (n <= 16) {
        std::vector<SumEntry<Real>> sums;
        sums.reserve(std::size_t(1) << n);
        sums.push_back({Real(prec), 0});
        // incremental doubling: sums of {s_0..s_i} = previous + (previous + s_i)
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t count = sums.size();
            for (std::size_t j = 0; j < count; ++j)
                sums.push_back({sums[j].sum + s[i], sums[j].mask | (1u << i)});
        }
        GapReport rep{Real(prec), 0, 0};
        bool first = true;
        min_adjacent_gap(
            sums, [](const Real& a, const Real& b) { return a < b; }, rep.subset_a, rep.subset_b,
            rep.gap, first);
        return rep;
    }

    // meet in the middle at double precision to keep n = 24 feasible;
    // gaps below ~1e-13 of the sum scale are not resolved here
    const std::size_t nl = n / 2, nr = n - nl;
    auto expand = [&](std::size_t off, std::size_t count) {
        std::vector<SumEntry<double>> out;
        out.reserve(std::size_t(1) << count);
        out.push_back({0.0, 0});
        for (std::size_t i = 0; i < count; ++i) {
            std::size_t sz = out.size();
            double v = s[off + i].to_double();
            for (std::size_t j = 0; j < sz; ++j)
                out.push_back({out[j].sum + v, out[j].mask | (1u << (off + i))});
        }
        std::sort(out.begin(), out.end(),
                  [](const SumEntry<double>& a, const SumEntry<double>& b) { return a.sum < b.sum; });
        return out;
    };
    auto left = expand(0, nl), right = expand(nl, nr);

    // merge the |left| sorted streams {l + right[j]} with a heap
    struct Node {
        double sum;
        std::size_t li, ri;
    };
    auto cmpn = [](const Node& a, const Node& b) { return a.sum > b.sum; };
    std::priority_queue<Node, std::vector<Node>, decltype(cmpn)> heap(cmpn);
    for (std::size_t li = 0; li < left.size(); ++li)
        heap.push({left[li].sum + right[0].sum, li, 0});
    GapReport rep{Real(prec), 0, 0};
    double best = 0.0;
    bool first = true;
    double prev_sum = 0.0;
    std::uint32_t prev_mask = 0;
    bool have_prev = false;
    while (!heap.empty()) {
        Node node = heap.top();
        heap.pop();
        std::uint32_t mask = left[node.li].mask | right[node.ri].mask;
        if (have_prev) {
            double d = node.sum - prev_sum;
            if (first || d < best) {
                best = d;
                rep.subset_a = mask;
                rep.subset_b = prev_mask;
                first = false;
            }
        }
        prev_sum = node.sum;
        prev_mask = mask;
        have_prev = true;
        if (node.ri + 1 < right.size())
            heap.push({left[node.li].sum + right[node.ri + 1].sum, node.li, node.ri + 1});
    }
    rep.gap = Real(best, 64);
    return rep;
}

IntGapReport mu_subset_sums_int(const std::vector<std::int64_t>& s) {
    const std::size_t n = s.size();
    if (n == 0) throw std::invalid_argument("mu_subset_sums_int: set must be nonempty");
    if (n > 20) throw std::invalid_argument("mu_subset_sums_int: set size exceeds cap 20");
    std::int64_t total = 0;
    for (auto v : s) {
        if (v <= 0) throw std::invalid_argument("mu_subset_sums_int: elements must be positive");
        if (total > (std::int64_t(1) << 62) - v)
            throw std::invalid_argument("mu_subset_sums_int: sums overflow");
        total += v;
    }
    std::vector<SumEntry<std::int64_t>> sums;
    sums.reserve(std::size_t(1) << n);
    sums.push_back({0, 0});
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t count = sums.size();
        for (std::size_t j = 0; j < count; ++j)
            sums.push_back({sums[j].sum + s[i], sums[j].mask | (1u << i)});
    }
    IntGapReport rep;
    bool first = true;
    min_adjacent_gap(
        sums, [](std::int64_t a, std::int64_t b) { return a < b; }, rep.subset_a, rep.subset_b,
        rep.gap, first);
    return rep;
}

LossGapReport delta_loss_gap(const WeightVector& v, mpfr_prec_t prec) {
    const std::size_t n = v.size();
    if (n > kEnumCap) throw std::invalid_argument("delta_loss_gap: N exceeds cap 24");
    if (n > 14) {
        // large N: scale the subset-sum enumeration (meet in the middle)
        // instead of scoring every labeling from scratch
        std::vector<Real> ln_v;
        ln_v.reserve(n);
        if (v.is_exact()) {
            for (const auto& x : v.exact_entries()) ln_v.push_back(Real::ln(x, prec));
        } else {
            std::size_t next = 0;
            for (const auto& [i, t] : v.log_entries()) {
                while (next < i) {
                    ln_v.emplace_back(prec);
                    ++next;
                }
                ln_v.push_back(t);
                ++next;
            }
            while (next < n) {
                ln_v.emplace_back(prec);
                ++next;
            }
        }
        GapReport g = mu_subset_sums(ln_v);
        LossGapReport rep{g.gap / Real(static_cast<long>(n), prec), g.subset_a, g.subset_b};
        return rep;
    }
    ArithModel model = ArithModel::apa(prec);
    std::vector<SumEntry<Real>> scores;
    scores.reserve(std::size_t(1) << n);
    BinaryLabeling sigma;
    sigma.bits.assign(n, 0);
    for (std::uint64_t code = 0; code < (std::uint64_t(1) << n); ++code) {
        for (std::size_t i = 0; i < n; ++i) sigma.bits[i] = (code >> i) & 1;
        Score s = loss_from_weights(v, sigma, model);
        scores.push_back({s.numeric, static_cast<std::uint32_t>(code)});
    }
    LossGapReport rep{Real(prec), 0, 0};
    bool first = true;
    min_adjacent_gap(
        scores, [](const Real& a, const Real& b) { return a < b; }, rep.labeling_a,
        rep.labeling_b, rep.gap, first);
    return rep;
}

RobustnessReport verify_robustness(const WeightVector& v, double tau, mpfr_prec_t prec) {
    if (!(tau > 0)) throw std::invalid_argument("verify_robustness: tau must be > 0");
    RobustnessReport rep;
    rep.gap = delta_loss_gap(v, prec);
    rep.robust = rep.gap.gap > Real(2.0 * tau, 64);
    if (!rep.robust) {
        // midpoint of the witness pair: within tau of both scores, so the
        // decoded labeling is ambiguous
        ArithModel model = ArithModel::apa(prec);
        auto score_of = [&](std::uint32_t code) {
            BinaryLabeling sigma;
            sigma.bits.assign(v.size(), 0);
            for (std::size_t i = 0; i < v.size(); ++i) sigma.bits[i] = (code >> i) & 1;
            return loss_from_weights(v, sigma, model).numeric;
        };
        Real mid = (score_of(rep.gap.labeling_a) + score_of(rep.gap.labeling_b)) /
                   Real(2l, prec);
        rep.ambiguous_score = mid;
    }
    return rep;
}

namespace {

// DFS over ascending positive integers with every subset-sum pair >= lambda
// apart; sums maintained sorted for an O(2^k) merge check per extension.
bool extend(std::vector<std::int64_t>& sums, std::vector<std::int64_t>& chosen, int depth,
            int n, std::int64_t lambda, std::int64_t max_element,
            std::vector<std::int64_t>& witness) {
    if (depth == n) {
        witness = chosen;
        return true;
    }
    std::int64_t low = chosen.empty() ? lambda : chosen.back() + lambda;
    for (std::int64_t a = low; a <= max_element; ++a) {
        // merged min-gap check between sums and sums + a
        bool ok = true;
        {
            std::size_t i = 0, j = 0;
            std::int64_t prev = 0;
            bool have = false;
            while (i < sums.size() || j < sums.size()) {
                std::int64_t next;
                if (j >= sums.size() || (i < sums.size() && sums[i] <= sums[j] + a))
                    next = sums[i++];
                else
                    next = sums[j++] + a;
                if (have && next - prev < lambda) {
                    ok = false;
                    break;
                }
                prev = next;
                have = true;
            }
        }
        if (!ok) continue;
        std::size_t old = sums.size();
        std::vector<std::int64_t> merged;
        merged.reserve(old * 2);
        std::size_t i = 0, j = 0;
        while (i < old || j < old) {
            if (j >= old || (i < old && sums[i] <= sums[j] + a))
                merged.push_back(sums[i++]);
            else
                merged.push_back(sums[j++] + a);
        }
        chosen.push_back(a);
        std::vector<std::int64_t> saved = std::move(sums);
        sums = std::move(merged);
        if (extend(sums, chosen, depth + 1, n, lambda, max_element, witness)) return true;
        sums = std::move(saved);
        chosen.pop_back();
    }
    return false;
}

}  // namespace

MinLinfResult min_linf_distinct_subset_sums(int n, std::int64_t lambda) {
    if (n < 1 || n > 6)
        throw std::invalid_argument("min_linf_distinct_subset_sums: n must lie in [1, 6]");
    if (lambda < 1)
        throw std::invalid_argument("min_linf_distinct_subset_sums: lambda must be >= 1");
    for (std::int64_t cap = lambda;; ++cap) {
        std::vector<std::int64_t> sums{0}, chosen, witness;
        if (extend(sums, chosen, 0, n, lambda, cap, witness)) {
            // the minimal cap that admits a witness is the answer
            MinLinfResult res;
            res.max_element = *std::max_element(witness.begin(), witness.end());
            res.witness = std::move(witness);
            return res;
        }
        if (cap > lambda * 256)
            throw std::runtime_error("min_linf_distinct_subset_sums: search exceeded bound");
    }
}

LowerBoundReport robust_vector_lower_bound_check(int n, double tau, double ln_threshold,
                                                 double resolution) {
    if (n < 1 || n > 6)
        throw std::invalid_argument("robust_vector_lower_bound_check: N must lie in [1, 6]");
    if (!(tau > 0)) throw std::invalid_argument("robust_vector_lower_bound_check: tau must be > 0");
    if (!(resolution > 0))
        throw std::invalid_argument("robust_vector_lower_bound_check: resolution must be > 0");
    LowerBoundReport rep;
    rep.resolution = resolution;
    rep.ln_threshold = ln_threshold > 0 ? ln_threshold : 2.0 * n * tau;

    // grid points: ln v in {r, 2r, ...} below the threshold; a candidate is
    // robust iff its log-space subset sums stay more than 2 N tau apart,
    // checked exactly in grid units
    const std::int64_t points = static_cast<std::int64_t>(rep.ln_threshold / resolution);
    if (points < 1) return rep;  // nothing below the threshold: vacuously respected
    double combos = 1.0;
    for (int i = 0; i < n; ++i) combos *= static_cast<double>(points - i) / (i + 1);
    if (combos > 5e6)
        throw std::invalid_argument(
            "robust_vector_lower_bound_check: grid too large; coarsen the resolution");

    const double needed_gap_units = 2.0 * n * tau / resolution;
    std::vector<std::int64_t> pick(static_cast<std::size_t>(n));
    std::vector<std::int64_t> units(static_cast<std::size_t>(n));

    // iterate strictly increasing n-tuples from {1..points}
    for (int i = 0; i < n; ++i) pick[static_cast<std::size_t>(i)] = i + 1;
    while (true) {
        for (int i = 0; i < n; ++i) units[static_cast<std::size_t>(i)] = pick[static_cast<std::size_t>(i)];
        ++rep.candidates_checked;
        IntGapReport g = mu_subset_sums_int(units);
        if (static_cast<double>(g.gap) > needed_gap_units) {
            rep.bound_respected = false;
            std::vector<double> ln_v;
            for (auto u : units) ln_v.push_back(static_cast<double>(u) * resolution);
            rep.counterexample_ln = std::move(ln_v);
            return rep;
        }
        // advance
        int i = n - 1;
        while (i >= 0 && pick[static_cast<std::size_t>(i)] == points - (n - 1 - i)) --i;
        if (i < 0) break;
        ++pick[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < n; ++j)
            pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
    }
    return rep;
}

}  // namespace lli
