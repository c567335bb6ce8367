#pragma once

// Certified column-subset selection: restriction-norm minimization (Lunin),
// restricted invertibility (Bourgain-Tzafriri) and zero-diagonal restriction
// (Kashin-Tzafriri). Each search is exact by enumeration when the number of
// candidate subsets fits the configured limit and greedy otherwise. Ties are
// always resolved toward the lexicographically smallest index set.

#include "framex/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>

namespace framex {

enum class SelectionMethod { exhaustive, greedy };

inline std::string_view to_string(SelectionMethod m)
{
    return m == SelectionMethod::exhaustive ? "exhaustive" : "greedy";
}

struct SubsetSelection {
    IndexList indices;  // sorted, 0-based
    double achieved_value = 0.0;
    SelectionMethod method = SelectionMethod::exhaustive;
    /// kt_select only: achieved_value <= c5 * sqrt(delta).
    bool meets_target = true;
};

/// Calibration for the non-explicit absolute constants.
struct SelectionConfig {
    double c1 = 2.0;
    double c2 = 0.5;
    double c5 = 0.75;
    std::uint64_t exhaustive_limit = 2'000'000;

    void validate() const
    {
        if (!(c1 > 0.0)) throw std::invalid_argument("c1 must be positive");
        if (!(c2 > 0.0 && c2 < 1.0)) throw std::invalid_argument("c2 must lie in (0, 1)");
        if (!(c5 > 0.0)) throw std::invalid_argument("c5 must be positive");
        if (exhaustive_limit < 1) throw std::invalid_argument("exhaustive_limit must be >= 1");
    }
};

enum class SubsetObjective { min_sigma_max, max_sigma_min, min_restricted_norm };

namespace detail {

inline double restricted_norm(const Matrix& t, std::span<const Index> idx)
{
    if (idx.empty()) return 0.0;
    const Matrix sub = linalg::principal_submatrix(t, idx);
    if (sub == sub.transpose()) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(sub, Eigen::EigenvaluesOnly);
        return es.eigenvalues().cwiseAbs().maxCoeff();
    }
    return linalg::sigma_max(sub);
}

inline double objective_value(const Matrix& a, std::span<const Index> idx, SubsetObjective obj)
{
    switch (obj) {
        case SubsetObjective::min_sigma_max:
            return linalg::sigma_max(linalg::select_columns(a, idx));
        case SubsetObjective::max_sigma_min:
            return linalg::sigma_min_columns(linalg::select_columns(a, idx));
        case SubsetObjective::min_restricted_norm:
            return restricted_norm(a, idx);
    }
    return 0.0;
}

inline bool minimizing(SubsetObjective obj) { return obj != SubsetObjective::max_sigma_min; }

/// Best subset of a fixed size by lexicographic enumeration. Returns false
/// when no subset passes `accept`.
template <typename Accept>
bool enumerate_best(const Matrix& a, Index m, Index size, SubsetObjective obj, Accept&& accept,
                    IndexList& best, double& best_value)
{
    bool found = false;
    const bool minimize = minimizing(obj);
    linalg::for_each_combination(m, size, [&](std::span<const Index> comb) {
        const double v = objective_value(a, comb, obj);
        if (!accept(v)) return true;
        // Strict improvement only; the first of a tied group wins.
        if (!found || (!linalg::nearly_equal(v, best_value) && (minimize ? v < best_value : v > best_value))) {
            best.assign(comb.begin(), comb.end());
            best_value = v;
            found = true;
        }
        return true;
    });
    return found;
}

inline void require_enumerable(Index m, Index size, const SelectionConfig& cfg, const char* who)
{
    if (linalg::binomial(m, size) > cfg.exhaustive_limit)
        throw std::invalid_argument(std::string(who) + ": enumeration of C(" + std::to_string(m) + ", " +
                                    std::to_string(size) + ") subsets exceeds exhaustive_limit");
}

/// Group id per column; bitwise-identical columns share an id.
inline IndexList identical_column_groups(const Matrix& a)
{
    const Index m = static_cast<Index>(a.cols());
    IndexList order(m);
    std::iota(order.begin(), order.end(), Index{0});
    const auto col_less = [&](Index x, Index y) {
        for (Eigen::Index r = 0; r < a.rows(); ++r) {
            const double ax = a(r, static_cast<Eigen::Index>(x));
            const double ay = a(r, static_cast<Eigen::Index>(y));
            if (ax != ay) return ax < ay;
        }
        return false;
    };
    std::stable_sort(order.begin(), order.end(), col_less);
    IndexList group(m, 0);
    for (Index k = 0; k < m; ++k)
        group[order[k]] = (k > 0 && !col_less(order[k - 1], order[k])) ? group[order[k - 1]] : order[k];
    return group;
}

inline bool power_set_fits(Index m, const SelectionConfig& cfg)
{
    return m < 63 && (std::uint64_t{1} << m) <= cfg.exhaustive_limit;
}

}  // namespace detail

/// Exact optimizer of `objective` over all subsets of the given size.
/// For min_restricted_norm `a` is a square matrix and subsets index both its
/// rows and columns.
inline SubsetSelection brute_force_subset_oracle(const Matrix& a, Index size, SubsetObjective objective,
                                                 const SelectionConfig& cfg = {})
{
    const Index m = static_cast<Index>(a.cols());
    if (size > m) throw std::invalid_argument("brute_force_subset_oracle: size exceeds column count");
    if (objective == SubsetObjective::min_restricted_norm && a.rows() != a.cols())
        throw std::invalid_argument("brute_force_subset_oracle: restricted norm needs a square matrix");
    detail::require_enumerable(m, size, cfg, "brute_force_subset_oracle");
    SubsetSelection out;
    out.method = SelectionMethod::exhaustive;
    detail::enumerate_best(a, m, size, objective, [](double) { return true; }, out.indices,
                           out.achieved_value);
    return out;
}

/// Picks target_size columns with small spectral norm.
///
/// Greedy mode adds, one at a time, the column whose inclusion gives the
/// smallest sigma_max. Each candidate value is the top eigenvalue of the
/// enlarged Gram operator S + y y^T, recomputed from scratch; identical
/// columns share one evaluation, and candidates whose lower bound
/// max(lambda_1 + <u_1, y>^2, |y|^2) already exceeds the best value are
/// skipped without changing the result. Ties go to the lowest index.
inline SubsetSelection lunin_select(const Matrix& columns, Index target_size, const SelectionConfig& cfg)
{
    cfg.validate();
    const Index m = static_cast<Index>(columns.cols());
    if (target_size > m)
        throw std::invalid_argument("lunin_select: target size " + std::to_string(target_size) +
                                    " exceeds column count " + std::to_string(m));
    if (linalg::binomial(m, target_size) <= cfg.exhaustive_limit) {
        SubsetSelection out;
        out.method = SelectionMethod::exhaustive;
        detail::enumerate_best(columns, m, target_size, SubsetObjective::min_sigma_max,
                               [](double) { return true; }, out.indices, out.achieved_value);
        return out;
    }

    const IndexList group = detail::identical_column_groups(columns);
    const auto n = columns.rows();
    Matrix gram_op = Matrix::Zero(n, n);
    std::vector<bool> used(m, false);
    IndexList chosen;

    while (chosen.size() < target_size) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(gram_op);
        const double l1 = std::max(es.eigenvalues()(n - 1), 0.0);
        const Vector u1 = es.eigenvectors().col(n - 1);
        const double slack = 1e-12 * std::max(l1, 1.0);

        // One candidate per group of identical unused columns: its lowest index.
        struct Candidate {
            double bound;
            Index j;
        };
        std::vector<Candidate> cands;
        std::vector<bool> group_seen(m, false);
        for (Index j = 0; j < m; ++j) {
            if (used[j] || group_seen[group[j]]) continue;
            group_seen[group[j]] = true;
            const auto col = columns.col(static_cast<Eigen::Index>(j));
            const double proj = u1.dot(col);
            cands.push_back({std::max(l1 + proj * proj, col.squaredNorm()) - slack, j});
        }
        std::stable_sort(cands.begin(), cands.end(),
                         [](const Candidate& a, const Candidate& b) { return a.bound < b.bound; });

        double best = kInf;
        Index best_j = m;
        for (const Candidate& c : cands) {
            if (c.bound > best && !linalg::nearly_equal(c.bound, best)) break;
            const auto col = columns.col(static_cast<Eigen::Index>(c.j));
            const double v = linalg::lambda_max_symmetric(gram_op + col * col.transpose());
            const bool tie = linalg::nearly_equal(v, best);
            if ((!tie && v < best) || (tie && c.j < best_j)) {
                best = v;
                best_j = c.j;
            }
        }
        const auto col = columns.col(static_cast<Eigen::Index>(best_j));
        gram_op += col * col.transpose();
        used[best_j] = true;
        chosen.push_back(best_j);
    }

    SubsetSelection out;
    out.method = SelectionMethod::greedy;
    std::sort(chosen.begin(), chosen.end());
    out.indices = chosen;
    out.achieved_value = chosen.empty() ? 0.0 : linalg::sigma_max(linalg::select_columns(columns, chosen));
    return out;
}

/// Largest set of unit columns whose submatrix has sigma_min >= min_sv_target.
/// Exact (maximum cardinality, then largest sigma_min) when all 2^m subsets
/// fit the limit; otherwise forward greedy maximizing sigma_min at each step.
/// An empty selection means no column is feasible.
inline SubsetSelection bt_select(const Matrix& columns, double min_sv_target, const SelectionConfig& cfg)
{
    cfg.validate();
    const Index m = static_cast<Index>(columns.cols());
    for (Index j = 0; j < m; ++j)
        if (std::abs(columns.col(static_cast<Eigen::Index>(j)).norm() - 1.0) > 1e-8)
            throw std::invalid_argument("bt_select: column " + std::to_string(j) + " is not unit norm");

    SubsetSelection out;
    const auto feasible = [&](double v) { return v >= min_sv_target; };
    if (detail::power_set_fits(m, cfg)) {
        out.method = SelectionMethod::exhaustive;
        const Index top = std::min<Index>(m, static_cast<Index>(columns.rows()));
        for (Index size = top; size >= 1; --size)
            if (detail::enumerate_best(columns, m, size, SubsetObjective::max_sigma_min, feasible, out.indices,
                                       out.achieved_value))
                return out;
        out.indices.clear();
        out.achieved_value = 0.0;
        return out;
    }

    out.method = SelectionMethod::greedy;
    IndexList chosen;
    std::vector<bool> used(m, false);
    double current = 0.0;
    while (chosen.size() < std::min<Index>(m, static_cast<Index>(columns.rows()))) {
        double best = -1.0;
        Index best_j = m;
        IndexList trial = chosen;
        trial.push_back(0);
        for (Index j = 0; j < m; ++j) {
            if (used[j]) continue;
            trial.back() = j;
            const double v = linalg::sigma_min_columns(linalg::select_columns(columns, trial));
            if (v > best && !linalg::nearly_equal(v, best)) {
                best = v;
                best_j = j;
            }
        }
        if (best_j == m || !feasible(best)) break;
        chosen.push_back(best_j);
        used[best_j] = true;
        current = best;
    }
    std::sort(chosen.begin(), chosen.end());
    out.indices = chosen;
    out.achieved_value = chosen.empty() ? 0.0 : current;
    return out;
}

/// Restriction of a zero-diagonal operator with ||T|| = 1 to a large
/// coordinate set with small norm. The set keeps at least ceil(delta n / 4)
/// indices; the search stops as soon as ||R T R|| <= c5 sqrt(delta).
inline SubsetSelection kt_select(const Matrix& t, double delta, const SelectionConfig& cfg)
{
    cfg.validate();
    if (t.rows() != t.cols() || t.rows() == 0)
        throw std::invalid_argument("kt_select: matrix must be square and nonempty");
    const Index n = static_cast<Index>(t.rows());
    if (t.diagonal().cwiseAbs().maxCoeff() > 1e-12)
        throw std::invalid_argument("kt_select: diagonal must be zero");
    if (!(delta >= 1.0 / static_cast<double>(n) - 1e-15 && delta < 1.0))
        throw std::invalid_argument("kt_select: delta must lie in [1/n, 1)");
    const double norm = linalg::sigma_max(t);
    if (norm != 0.0 && std::abs(norm - 1.0) > 1e-6)
        throw std::invalid_argument("kt_select: operator must be normalized to ||T|| = 1");

    const Index min_size =
        std::max<Index>(1, static_cast<Index>(std::ceil(delta * static_cast<double>(n) / 4.0 - 1e-12)));
    const double target = cfg.c5 * std::sqrt(delta);

    SubsetSelection out;
    if (detail::power_set_fits(n, cfg)) {
        out.method = SelectionMethod::exhaustive;
        for (Index size = n; size >= min_size; --size) {
            IndexList idx;
            double v = 0.0;
            detail::enumerate_best(t, n, size, SubsetObjective::min_restricted_norm, [](double) { return true; },
                                   idx, v);
            if (v <= target || size == min_size) {
                out.indices = idx;
                out.achieved_value = v;
                break;
            }
        }
    } else {
        out.method = SelectionMethod::greedy;
        IndexList alive(n);
        std::iota(alive.begin(), alive.end(), Index{0});
        double current = detail::restricted_norm(t, alive);
        while (alive.size() > min_size && current > target) {
            double best = kInf;
            Index best_pos = 0;
            IndexList trial;
            for (Index p = 0; p < alive.size(); ++p) {
                trial = alive;
                trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(p));
                const double v = detail::restricted_norm(t, trial);
                const bool tie = linalg::nearly_equal(v, best);
                if ((!tie && v < best) || (tie && p > best_pos)) {
                    best = v;
                    best_pos = p;
                }
            }
            alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(best_pos));
            current = best;
        }
        out.indices = alive;
        out.achieved_value = current;
    }
    out.meets_target = out.achieved_value <= target;
    return out;
}

/// Recomputes the objective of a stored selection from scratch.
inline double recompute_value(const Matrix& a, const SubsetSelection& sel, SubsetObjective obj)
{
    return detail::objective_value(a, sel.indices, obj);
}

}  // namespace framex
