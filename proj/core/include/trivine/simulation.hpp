#pragma once

#include "trivine/estimation.hpp"

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

namespace trivine {

/// Non-evaluable probabilities for diseased (v4) and non-diseased (v5)
/// subjects.
struct Scenario {
    double v4 = 0.1;
    double v5 = 0.2;
};

/// Shifted gamma law for study sizes: lag + Gamma(shape, rate), rounded.
struct SizeLaw {
    double shape = 1.2;
    double rate = 0.01;
    double lag = 30.0;
};

long draw_study_size(const SizeLaw& law, std::mt19937_64& rng);

/// Simulates `n_studies` 3x2 tables from the trivariate vine mixed model.
std::vector<StudyData> simulate_dataset(const ModelSpec& truth, const Scenario& scenario, std::size_t n_studies,
                                        std::mt19937_64& rng, const SizeLaw& law = {});

/// Deterministic substream for a replicate: seeded from (seed, index).
std::mt19937_64 replicate_stream(std::uint64_t seed, std::uint64_t index);

struct SimStudyConfig {
    ModelSpec truth;
    Scenario scenario;
    std::size_t n_studies = 30;
    std::size_t replicates = 500;
    std::size_t n_q = 15;
    SizeLaw size_law;
    std::vector<ModelTemplate> fitted_templates;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    int max_iters = 500;
};

/// Per-template summary; every statistic is scaled by 100. Bias and RMSE
/// are NaN for delta when the fitted margin family differs from the truth.
struct TemplateSummary {
    ModelTemplate model_template;
    std::array<double, 9> bias{};
    std::array<double, 9> sd{};
    std::array<double, 9> sqrt_mean_var{};
    std::array<double, 9> rmse{};
    std::size_t converged = 0;
    std::size_t failures = 0;
};

struct ReplicateFit {
    bool converged = false;
    std::array<double, 9> estimate{};
    std::array<double, 9> se{};
};

struct SimStudyReport {
    NaturalParams truth;
    MarginFamily truth_margin = MarginFamily::Normal;
    std::size_t replicates = 0;
    std::vector<TemplateSummary> summaries;
    /// fits[template][replicate]
    std::vector<std::vector<ReplicateFit>> fits;
};

SimStudyReport run_sim_study(const SimStudyConfig& cfg);

/// Aggregates replicate fits against the truth (used by run_sim_study).
TemplateSummary summarize(const ModelTemplate& t, const std::vector<ReplicateFit>& fits, const NaturalParams& truth,
                          MarginFamily truth_margin);

/// CSV with columns statistic,margin,copula,pi1,pi2,pi3,delta1,delta2,
/// delta3,tau12,tau13,tau23_1 (x100). A trailing "converged" row per
/// template carries the count of converged replicates.
void write_sim_report_csv(std::ostream& os, const SimStudyReport& report);

}  // namespace trivine
