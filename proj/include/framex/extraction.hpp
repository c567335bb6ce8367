#pragma once

// Extraction of a large, well-conditioned subsystem from a finite frame:
// tighten, split into nearly equal norms, then alternate restriction-norm
// selection (Lunin) and restricted invertibility (Bourgain-Tzafriri) against
// the residual of the span selected so far, until more than (1 - eps) n
// vectors are chosen. The result is certified by the singular values of the
// selected system.

#include "framex/frame.hpp"
#include "framex/selection.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

namespace framex {

struct ExtractionParams {
    double epsilon = 0.25;
    double nu = 0.05;
    double c1 = 2.0;
    double c2 = 0.5;
    /// 0 selects the default floor(4 c1^2 / (c2 eps^2)) + 2.
    Index max_steps = 0;

    double delta() const { return std::sqrt(epsilon / 2.0); }

    Index step_budget() const
    {
        if (max_steps != 0) return max_steps;
        return static_cast<Index>(std::floor(4.0 * c1 * c1 / (c2 * epsilon * epsilon))) + 2;
    }

    void validate() const
    {
        if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1)");
        if (!(nu >= 0.0)) throw std::invalid_argument("nu must be >= 0");
        if (!(c1 > 0.0)) throw std::invalid_argument("c1 must be positive");
        if (!(c2 > 0.0 && c2 < 1.0)) throw std::invalid_argument("c2 must lie in (0, 1)");
    }
};

/// Frame obtained by replacing x_j with multiplicity[j] copies of
/// x_j / sqrt(multiplicity[j]).
struct SplitFrame {
    Matrix vectors;
    IndexList origin;        // split index -> source index
    IndexList multiplicity;  // source index -> copies
    double lambda = 0.0;     // smallest split norm
    double nu_achieved = 0.0;  // max norm / min norm - 1
};

/// Splits a tight frame so that every norm lies in [lambda, (1 + nu) lambda]
/// with lambda as large as possible, then splits uniformly further until
/// there are at least ceil(2 n / eps) vectors.
///
/// For source norm r the admissible lambdas form the union over k of
/// [r / ((1 + nu) sqrt k), r / sqrt k]; the largest common point below the
/// cap min r / (1 + nu) is the cap itself or one of the right endpoints
/// r / sqrt k, which are visited in decreasing order.
inline SplitFrame split_equalize(const Frame& frame, const ExtractionParams& params)
{
    params.validate();
    if (!is_tight(frame, 1e-6)) throw std::invalid_argument("split_equalize: frame must be tight");
    const Index m = frame.size();
    std::vector<double> norms(m);
    for (Index j = 0; j < m; ++j) {
        norms[j] = frame.vector(j).norm();
        if (norms[j] == 0.0) throw std::invalid_argument("split_equalize: zero vectors must be dropped first");
    }
    const double r_min = *std::min_element(norms.begin(), norms.end());
    const double nu1 = 1.0 + params.nu;
    const double upper = r_min / nu1;
    constexpr double kRel = 1e-14;  // rounding of computed norms, far below any nu > 0
    constexpr double kMaxSplit = 1e7;

    // Smallest integer in [r^2 / (nu1 lambda)^2, r^2 / lambda^2], if any.
    const auto copies = [&](double r, double lambda) -> std::optional<Index> {
        const double hi = (r / lambda) * (r / lambda);
        const double lo = hi / (nu1 * nu1);
        const double k = std::max(1.0, std::ceil(lo * (1.0 - kRel)));
        if (k > hi * (1.0 + kRel)) return std::nullopt;
        return static_cast<Index>(k);
    };

    using Entry = std::pair<double, Index>;  // (r_j / sqrt(k), j)
    std::priority_queue<Entry> heap;
    std::vector<double> next_k(m, 1.0);
    for (Index j = 0; j < m; ++j) heap.emplace(norms[j], j);

    // The cap itself is admissible whenever every interval contains an integer.
    const auto all_copies = [&](double lambda) -> std::optional<IndexList> {
        IndexList ks(m);
        for (Index i = 0; i < m; ++i) {
            const auto k = copies(norms[i], lambda);
            if (!k) return std::nullopt;
            ks[i] = *k;
        }
        return ks;
    };
    IndexList mult;
    if (auto ks = all_copies(upper)) mult = std::move(*ks);
    while (mult.empty() && !heap.empty()) {
        auto [cand, j] = heap.top();
        heap.pop();
        next_k[j] += 1.0;
        heap.emplace(norms[j] / std::sqrt(next_k[j]), j);
        if (cand > upper * (1.0 + kRel)) continue;
        if (auto ks = all_copies(cand)) {
            mult = std::move(*ks);
            break;
        }
        if ((r_min / cand) * (r_min / cand) * static_cast<double>(m) > kMaxSplit)
            throw std::invalid_argument("split_equalize: norms cannot be equalized within nu = " +
                                        std::to_string(params.nu) + "; use nu > 0");
    }

    Index total = 0;
    for (Index k : mult) total += k;
    const auto needed = static_cast<Index>(std::ceil(2.0 * static_cast<double>(frame.dim()) / params.epsilon - 1e-12));
    const Index factor = total >= needed ? 1 : (needed + total - 1) / total;
    for (Index& k : mult) k *= factor;

    SplitFrame out;
    out.multiplicity = mult;
    Index count = 0;
    for (Index k : mult) count += k;
    out.vectors.resize(static_cast<Eigen::Index>(frame.dim()), static_cast<Eigen::Index>(count));
    Index pos = 0;
    double lo = kInf, hi = 0.0;
    for (Index j = 0; j < m; ++j) {
        const Vector y = frame.vector(j) / std::sqrt(static_cast<double>(mult[j]));
        lo = std::min(lo, y.norm());
        hi = std::max(hi, y.norm());
        for (Index c = 0; c < mult[j]; ++c) {
            out.vectors.col(static_cast<Eigen::Index>(pos++)) = y;
            out.origin.push_back(j);
        }
    }
    out.lambda = lo;
    out.nu_achieved = hi / lo - 1.0;
    return out;
}

enum class StopReason { target_reached, step_budget_exhausted };

inline std::string_view to_string(StopReason r)
{
    return r == StopReason::target_reached ? "target_reached" : "step_budget_exhausted";
}

struct StepRecord {
    Index k = 0;                 // 1-based step number
    Index tau_size = 0;
    double tau_lower_bound = 0;  // (1 - delta^2 - selected/n) m' - 1
    IndexList lunin_indices;     // split indices
    IndexList sigma;             // split indices appended at this step
    double lunin_value = 0.0;    // sigma_max of the Lunin subsystem scaled by sqrt(|tau|/n)
    double bt_value = 0.0;       // sigma_min of the normalized residuals over sigma
    double besselian_scale = 0.0;  // 1 / delta
    Index projection_rank = 0;   // rank of P_k before the step
    bool degraded = false;       // |tau| < n, Lunin target reduced
};

struct ExtractionReport {
    ExtractionParams params;
    Index dim = 0;
    Index frame_size = 0;
    Index split_size = 0;
    double split_lambda = 0.0;
    double split_nu_achieved = 0.0;
    std::vector<StepRecord> steps;
    IndexList selected_split;  // in selection order
    IndexList final_sigma;     // sorted original indices
    IndexList multiplicity;    // per original index (zeros for dropped vectors)
    EquivalenceCertificate certificate;
    StopReason stopped_reason = StopReason::step_budget_exhausted;
    std::vector<std::string> warnings;

    Index selected_count() const { return final_sigma.size(); }
};

namespace detail {

/// sqrt(m'/n) y_j over the given split indices.
inline Matrix scaled_split_system(const SplitFrame& split, const IndexList& idx, Index n)
{
    const double scale = std::sqrt(static_cast<double>(split.vectors.cols()) / static_cast<double>(n));
    return scale * linalg::select_columns(split.vectors, idx);
}

}  // namespace detail

inline ExtractionReport extract_orthogonal_subset(const Frame& input, const ExtractionParams& params)
{
    params.validate();
    ExtractionReport report;
    report.params = params;
    report.dim = input.dim();
    report.frame_size = input.size();

    auto [frame, kept] = drop_zero_vectors(input);
    for (Index j = 0, p = 0; j < input.size(); ++j) {
        if (p < kept.size() && kept[p] == j)
            ++p;
        else
            report.warnings.push_back("dropped zero vector " + std::to_string(j));
    }
    const Frame tight = tighten(frame);
    const SplitFrame split = split_equalize(tight, params);

    const Index n = input.dim();
    const Index m_split = static_cast<Index>(split.vectors.cols());
    const double nd = static_cast<double>(n);
    const double delta = params.delta();
    const double tau_threshold = delta * split.lambda;
    const double target = (1.0 - params.epsilon) * nd;
    const Index budget = params.step_budget();
    SelectionConfig cfg;
    cfg.c1 = params.c1;
    cfg.c2 = params.c2;

    report.split_size = m_split;
    report.split_lambda = split.lambda;
    report.split_nu_achieved = split.nu_achieved;

    IndexList selected;
    std::vector<bool> taken(m_split, false);
    report.stopped_reason = StopReason::step_budget_exhausted;
    for (Index k = 1; k <= budget; ++k) {
        const Matrix basis = linalg::orthonormal_basis(linalg::select_columns(split.vectors, selected));
        Matrix resid = split.vectors;
        if (basis.cols() > 0) resid -= basis * (basis.transpose() * split.vectors);

        StepRecord step;
        step.k = k;
        step.projection_rank = static_cast<Index>(basis.cols());
        step.besselian_scale = 1.0 / delta;
        step.tau_lower_bound =
            (1.0 - delta * delta - static_cast<double>(selected.size()) / nd) * static_cast<double>(m_split) - 1.0;

        IndexList tau;
        for (Index j = 0; j < m_split; ++j)
            if (!taken[j] && resid.col(static_cast<Eigen::Index>(j)).norm() >= tau_threshold) tau.push_back(j);
        step.tau_size = tau.size();
        if (tau.empty()) {
            report.warnings.push_back("step " + std::to_string(k) + ": no residual above threshold");
            report.steps.push_back(step);
            break;
        }

        const Index lunin_target = std::min(n, tau.size());
        step.degraded = tau.size() < n;
        const SubsetSelection lunin = lunin_select(linalg::select_columns(split.vectors, tau), lunin_target, cfg);
        for (Index i : lunin.indices) step.lunin_indices.push_back(tau[i]);
        step.lunin_value =
            lunin.achieved_value * std::sqrt(static_cast<double>(tau.size()) / nd);

        Matrix normalized = linalg::select_columns(resid, step.lunin_indices);
        for (Eigen::Index c = 0; c < normalized.cols(); ++c) normalized.col(c).normalize();
        const SubsetSelection bt = bt_select(normalized, params.c2 * delta, cfg);
        for (Index i : bt.indices) step.sigma.push_back(step.lunin_indices[i]);
        step.bt_value = bt.achieved_value;
        report.steps.push_back(step);

        if (step.sigma.empty()) {
            report.warnings.push_back("step " + std::to_string(k) + ": no feasible restricted-invertibility set");
            break;
        }
        for (Index j : step.sigma) {
            taken[j] = true;
            selected.push_back(j);
        }
        if (static_cast<double>(selected.size()) > target) {
            report.stopped_reason = StopReason::target_reached;
            break;
        }
    }

    report.selected_split = selected;
    for (Index j : selected) report.final_sigma.push_back(kept[split.origin[j]]);
    std::sort(report.final_sigma.begin(), report.final_sigma.end());
    if (std::adjacent_find(report.final_sigma.begin(), report.final_sigma.end()) != report.final_sigma.end())
        throw std::logic_error("extract_orthogonal_subset: duplicate original index selected");

    report.multiplicity.assign(input.size(), 0);
    for (Index p = 0; p < kept.size(); ++p) report.multiplicity[kept[p]] = split.multiplicity[p];
    if (!selected.empty()) report.certificate = equivalence_certificate(detail::scaled_split_system(split, selected, n));
    return report;
}

/// Rebuilds the certified system from the original frame and the report's
/// multiplicities and recomputes its certificate.
inline EquivalenceCertificate recertify(const Frame& input, const ExtractionReport& report)
{
    if (report.final_sigma.empty()) return {};
    auto [frame, kept] = drop_zero_vectors(input);
    const Frame tight = tighten(frame);
    std::vector<Index> position(input.size(), input.size());
    for (Index p = 0; p < kept.size(); ++p) position[kept[p]] = p;
    const double scale = std::sqrt(static_cast<double>(report.split_size) / static_cast<double>(input.dim()));
    Matrix system(static_cast<Eigen::Index>(input.dim()), static_cast<Eigen::Index>(report.final_sigma.size()));
    for (Index c = 0; c < report.final_sigma.size(); ++c) {
        const Index j = report.final_sigma[c];
        system.col(static_cast<Eigen::Index>(c)) =
            scale * tight.vector(position[j]) / std::sqrt(static_cast<double>(report.multiplicity[j]));
    }
    return equivalence_certificate(system);
}

struct RefinementResult {
    IndexList base_sigma;  // from the eps = 1/2 extraction
    EquivalenceCertificate base_certificate;  // normalized vectors over base_sigma
    SubsetSelection selection;  // indices into the original frame
    EquivalenceCertificate certificate;  // normalized vectors over selection
    double delta = 0.0;  // Kashin-Tzafriri parameter actually used
    double gram_deviation = 0.0;  // ||G - I|| over base_sigma
    double restricted_deviation = 0.0;  // ||G - I|| over the final selection
    double max_offdiagonal = 0.0;  // max |<z_i, z_j>|, i != j, over the final selection
    double bound = 0.0;  // ||G - I|| c5 sqrt(delta)
};

/// Normalized subsystem whose Gram matrix is close to the identity, obtained
/// by restricting the off-diagonal part of the Gram matrix of an
/// eps = 1/2 extraction. delta = 1 - epsilon, raised to 1/|base| when smaller.
inline RefinementResult refine_near_isometric(const Frame& frame, double epsilon, const SelectionConfig& cfg)
{
    cfg.validate();
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1)");
    ExtractionParams base;
    base.epsilon = 0.5;
    base.c1 = cfg.c1;
    base.c2 = cfg.c2;
    const ExtractionReport report = extract_orthogonal_subset(frame, base);

    RefinementResult out;
    out.base_sigma = report.final_sigma;
    const Index k = out.base_sigma.size();
    if (k == 0) throw std::runtime_error("refine_near_isometric: base extraction selected nothing");
    Matrix z = linalg::select_columns(frame.synthesis(), out.base_sigma);
    for (Eigen::Index c = 0; c < z.cols(); ++c) z.col(c).normalize();
    out.base_certificate = equivalence_certificate(z);

    Matrix dev = gram_matrix(z);
    dev.diagonal().setZero();
    out.gram_deviation = linalg::sigma_max(dev);
    const double dk = static_cast<double>(k);
    out.delta = std::max(1.0 - epsilon, 1.0 / dk);
    if (out.delta >= 1.0) out.delta = 1.0 - 1e-12;

    Matrix t = dev;
    if (out.gram_deviation > 0.0) t /= out.gram_deviation;
    SubsetSelection local = kt_select(t, out.delta, cfg);
    out.restricted_deviation = local.achieved_value * out.gram_deviation;
    out.bound = out.gram_deviation * cfg.c5 * std::sqrt(out.delta);
    for (Index a : local.indices)
        for (Index b : local.indices)
            if (a != b)
                out.max_offdiagonal = std::max(out.max_offdiagonal,
                                               std::abs(dev(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b))));
    out.certificate = equivalence_certificate(linalg::select_columns(z, local.indices));
    out.selection = local;
    for (Index& i : out.selection.indices) i = out.base_sigma[i];
    return out;
}

}  // namespace framex
