#pragma once

#include "trivine/model.hpp"

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace trivine {

/// Family choices of a model without parameter values.
struct ModelTemplate {
    MarginFamily margin = MarginFamily::Normal;
    Link link = Link::Logit;
    VinePermutation permutation = VinePermutation::P12_13_23g1;
    std::array<CopulaFamily, 3> edges{};  // edge_a, edge_b, edge_cond
    bool truncated = false;
    std::string label;

    /// Free parameters: 3 pi + 3 delta + one tau per non-independence edge.
    int parameter_count() const;
    /// Whether edge k (0 = a, 1 = b, 2 = cond) carries a free parameter.
    bool edge_free(int k) const;
};

void validate(const ModelTemplate& t);

/// Label derived from the edge families when `label` is empty, e.g. "BVN",
/// "Frank" or "cln90/cln0/cln90".
std::string display_label(const ModelTemplate& t);

/// Natural-scale values: pi (sens, spec, prev), delta (sigma or gamma) and
/// Kendall's tau of edge_a, edge_b, edge_cond.
struct NaturalParams {
    std::array<double, 3> pi{0.5, 0.5, 0.5};
    std::array<double, 3> delta{1.0, 1.0, 1.0};
    std::array<double, 3> tau{0.0, 0.0, 0.0};
};

/// Builds a model; tau values are converted to copula parameters. Throws
/// std::domain_error when a tau is outside the edge family's range.
ModelSpec make_model(const ModelTemplate& t, const NaturalParams& p);
NaturalParams natural_params(const ModelSpec& m);
ModelTemplate template_of(const ModelSpec& m);

/// Unconstrained coordinates: logit(pi); log(sigma) or logit(gamma);
/// atanh(tau) for BVN/Frank, logit(|tau|) for Clayton edges whose rotation
/// fixes the sign. Edges without a free parameter are skipped.
Eigen::VectorXd transform_params(const ModelSpec& m, const ModelTemplate& t);
ModelSpec untransform_params(const Eigen::VectorXd& z, const ModelTemplate& t);

struct FitConfig {
    std::size_t n_q = 15;
    std::optional<NaturalParams> start;
    int max_iters = 500;
    double tolerance = 1e-6;
    int restarts = 3;
};

struct FitResult {
    ModelTemplate model_template;
    ModelSpec model;
    NaturalParams estimates;
    NaturalParams standard_errors;  // NaN where unavailable
    bool se_available = false;
    double log_lik = 0.0;
    bool converged = false;
    int iterations = 0;
    int evaluations = 0;
    int starts_used = 1;
    std::size_t n_studies = 0;
    std::size_t n_q = 15;
    Eigen::VectorXd argmin;
    Eigen::MatrixXd hessian;  // of the negative log-likelihood, transformed scale
};

/// Names of the nine reported quantities in the order
/// pi1 pi2 pi3 delta1 delta2 delta3 tau_a tau_b tau_cond.
std::array<std::string, 9> parameter_names(const ModelTemplate& t);
std::array<double, 9> flatten(const NaturalParams& p);

/// Maximum-likelihood fit. Throws std::invalid_argument for fewer than two
/// studies or an invalid template.
FitResult fit(std::span<const StudyData> data, const ModelTemplate& t, const FitConfig& cfg = {});

/// Start values: pooled proportions, sigma 0.5 or gamma 0.05, tau 0 (or
/// +-0.1 for Clayton edges whose range excludes 0).
NaturalParams default_start(std::span<const StudyData> data, const ModelTemplate& t);

enum class ScanStatus { Ok, NotConverged, Failed };

struct ScanEntry {
    std::size_t candidate = 0;
    ScanStatus status = ScanStatus::Failed;
    std::optional<FitResult> result;
    std::string message;
    bool best = false;
};

/// Fits every candidate and ranks converged fits by log-likelihood
/// (descending), ties by fewer parameters then candidate order. Failed and
/// non-converged candidates follow. A candidate failure never aborts.
std::vector<ScanEntry> model_scan(std::span<const StudyData> data, std::span<const ModelTemplate> candidates,
                                  const FitConfig& cfg = {}, unsigned threads = 1);

std::string to_string(ScanStatus s);

}  // namespace trivine
