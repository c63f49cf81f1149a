#pragma once

#include "trivine/margin.hpp"
#include "trivine/numerics.hpp"
#include "trivine/vine.hpp"

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace trivine {

/// One study's 3x2 table: rows are test negative / positive / non-evaluable,
/// columns are disease absent (0) / present (1).
struct StudyData {
    std::string id;
    long y00 = 0;  // true negatives
    long y01 = 0;  // false negatives
    long y10 = 0;  // false positives
    long y11 = 0;  // true positives
    long y20 = 0;  // non-evaluable, non-diseased
    long y21 = 0;  // non-evaluable, diseased

    long diseased_evaluable() const noexcept { return y01 + y11; }       // y_{+1}
    long healthy_evaluable() const noexcept { return y00 + y10; }        // y_{+0}
    long diseased_total() const noexcept { return y01 + y11 + y21; }     // y*_{+1}
    long healthy_total() const noexcept { return y00 + y10 + y20; }      // y*_{+0}
    long total() const noexcept { return diseased_total() + healthy_total(); }  // y*_{++}
};

/// Throws std::invalid_argument for negative counts or an empty table.
void validate(const StudyData& s);

/// Margins for sensitivity, specificity, prevalence plus their vine.
struct ModelSpec {
    std::array<MarginSpec, 3> margins;
    VineSpec vine;
};

void validate(const ModelSpec& m);

struct CellProbs {
    double w00, w01, w10, w11, w20, w21;
};

/// Multinomial cell probabilities from sensitivity p1, specificity p2,
/// prevalence p3 and non-evaluable probabilities p4 (diseased), p5
/// (non-diseased). Inputs must lie in [0,1].
CellProbs cell_probs(double p1, double p2, double p3, double p4, double p5);

/// log C(n,y) + y log p + (n-y) log(1-p). Boundary p in {0,1} is allowed
/// and yields 0 or -inf as appropriate.
double binomial_log_pmf(long y, long n, double p);

/// Precomputed dependent quadrature grid for one parameter value: the
/// log-weights and per-variable log(t), log(1-t) at all n_q^3 nodes.
class LikelihoodGrid {
public:
    LikelihoodGrid(const ModelSpec& m, const QuadratureRule& q);

    /// log of the triple quadrature sum for one study (first MAR factor).
    double study_log_lik(const StudyData& s) const;

    std::size_t nodes() const noexcept { return log_w_.size(); }

private:
    std::vector<double> log_w_;
    std::array<std::vector<double>, 3> log_p_;
    std::array<std::vector<double>, 3> log_q_;
};

/// Study log-likelihood contribution (first factor of the MAR factorization).
double study_log_lik(const StudyData& s, const ModelSpec& m, const QuadratureRule& q);

/// Sum of study contributions, reduced in input order. Throws
/// std::invalid_argument for an empty dataset.
double dataset_log_lik(std::span<const StudyData> data, const ModelSpec& m, const QuadratureRule& q);

/// Log of the full multinomial likelihood of a study: the accuracy factor
/// plus the non-evaluable binomial factors at fixed p4, p5.
double complete_study_log_lik(const StudyData& s, const ModelSpec& m, const QuadratureRule& q, double p4, double p5);

/// Pooled non-evaluable proportions sum(y21)/sum(y*_{+1}) and
/// sum(y20)/sum(y*_{+0}); std::nullopt when a denominator is zero.
struct PooledNonEvaluable {
    std::optional<double> diseased;
    std::optional<double> healthy;
};
PooledNonEvaluable pooled_nonevaluable_probs(std::span<const StudyData> data);

/// Pooled sensitivity, specificity and prevalence of the evaluable cells.
std::array<double, 3> pooled_accuracy(std::span<const StudyData> data);

}  // namespace trivine
