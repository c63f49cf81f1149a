#include <trivine/estimation.hpp>
#include <trivine/simulation.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace trivine;

namespace {

ModelTemplate tmpl(MarginFamily margin, const char* a, const char* b, const char* c) {
    ModelTemplate t;
    t.margin = margin;
    t.link = margin == MarginFamily::Beta ? Link::Identity : Link::Logit;
    t.edges = {parse_family(a), parse_family(b), parse_family(c)};
    return t;
}

NaturalParams truth_params(MarginFamily margin) {
    NaturalParams p;
    p.pi = {0.7, 0.9, 0.25};
    p.delta = margin == MarginFamily::Normal ? std::array<double, 3>{1.0, 1.0, 1.0}
                                             : std::array<double, 3>{0.1, 0.1, 0.1};
    p.tau = {-0.5, 0.5, -0.5};
    return p;
}

std::vector<StudyData> simulated(const ModelSpec& truth, std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng = replicate_stream(seed, 0);
    return simulate_dataset(truth, Scenario{}, n, rng);
}

}  // namespace

TEST(Template, ParameterCountAndLabels) {
    ModelTemplate t = tmpl(MarginFamily::Normal, "bvn", "bvn", "bvn");
    EXPECT_EQ(t.parameter_count(), 9);
    EXPECT_EQ(display_label(t), "BVN");
    t.truncated = true;
    t.edges[2] = CopulaFamily{};
    EXPECT_EQ(t.parameter_count(), 8);
    EXPECT_FALSE(t.edge_free(2));
    const ModelTemplate c = tmpl(MarginFamily::Beta, "cln90", "cln0", "cln90");
    EXPECT_EQ(display_label(c), "Cln90/Cln0/Cln90");
    const auto names = parameter_names(c);
    EXPECT_EQ(names[3], "gamma1");
    EXPECT_EQ(names[8], "tau23|1");
    const auto nn = parameter_names(t);
    EXPECT_EQ(nn[4], "sigma2");
}

TEST(Transform, RoundTripForAllEdgeKinds) {
    for (const ModelTemplate& t :
         {tmpl(MarginFamily::Normal, "bvn", "frank", "bvn"), tmpl(MarginFamily::Beta, "cln90", "cln0", "cln270"),
          tmpl(MarginFamily::Normal, "cln180", "indep", "frank")}) {
        NaturalParams p;
        p.pi = {0.82, 0.63, 0.41};
        p.delta = t.margin == MarginFamily::Normal ? std::array<double, 3>{0.7, 1.3, 0.4}
                                                   : std::array<double, 3>{0.05, 0.2, 0.12};
        for (std::size_t k = 0; k < 3; ++k) {
            const TauRange r = admissible_tau(t.edges[k]);
            p.tau[k] = t.edge_free(static_cast<int>(k)) ? (r.upper > 0 ? 0.35 : -0.35) : 0.0;
        }
        const ModelSpec m = make_model(t, p);
        const Eigen::VectorXd z = transform_params(m, t);
        EXPECT_EQ(z.size(), t.parameter_count());
        const NaturalParams back = natural_params(untransform_params(z, t));
        for (std::size_t k = 0; k < 3; ++k) {
            EXPECT_NEAR(back.pi[k], p.pi[k], 1e-12);
            EXPECT_NEAR(back.delta[k], p.delta[k], 1e-12);
            EXPECT_NEAR(back.tau[k], p.tau[k], 1e-10);
        }
    }
    const ModelTemplate t = tmpl(MarginFamily::Normal, "bvn", "bvn", "bvn");
    EXPECT_THROW(untransform_params(Eigen::VectorXd::Zero(4), t), std::invalid_argument);
}

TEST(Transform, TemplateOfModel) {
    const ModelTemplate t = tmpl(MarginFamily::Beta, "cln90", "cln0", "cln90");
    const ModelSpec m = make_model(t, truth_params(MarginFamily::Beta));
    const ModelTemplate back = template_of(m);
    EXPECT_EQ(back.margin, t.margin);
    EXPECT_EQ(back.edges, t.edges);
    EXPECT_FALSE(back.truncated);
}

TEST(MakeModel, RejectsOutOfRangeTau) {
    const ModelTemplate t = tmpl(MarginFamily::Normal, "cln90", "cln0", "cln90");
    NaturalParams p = truth_params(MarginFamily::Normal);
    p.tau[0] = 0.3;
    EXPECT_THROW(make_model(t, p), std::domain_error);
}

TEST(Fit, RecoversTruthOnLargeSample) {
    const ModelTemplate t = tmpl(MarginFamily::Normal, "cln90", "cln0", "cln90");
    const ModelSpec truth = make_model(t, truth_params(MarginFamily::Normal));
    const std::vector<StudyData> data = simulated(truth, 150, 99);
    const FitResult r = fit(data, t);
    ASSERT_TRUE(r.converged);
    EXPECT_TRUE(r.se_available);
    EXPECT_NEAR(r.estimates.pi[0], 0.7, 0.06);
    EXPECT_NEAR(r.estimates.pi[1], 0.9, 0.03);
    EXPECT_NEAR(r.estimates.pi[2], 0.25, 0.05);
    for (std::size_t k = 0; k < 3; ++k) {
        EXPECT_NEAR(r.estimates.tau[k], truth_params(MarginFamily::Normal).tau[k], 4 * r.standard_errors.tau[k] + 0.05);
    }
    for (std::size_t k = 0; k < 3; ++k) {
        EXPECT_GT(r.standard_errors.pi[k], 0.0);
        EXPECT_LT(r.standard_errors.pi[k], 0.1);
    }
    EXPECT_EQ(r.n_studies, 150u);
    // the optimum is a stationary point of the log-likelihood
    const QuadratureRule q = gauss_legendre_01(r.n_q);
    const double at_opt = dataset_log_lik(data, r.model, q);
    EXPECT_NEAR(at_opt, r.log_lik, 1e-8 * std::abs(at_opt));
    Eigen::VectorXd z = r.argmin;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        for (double step : {-1e-3, 1e-3}) {
            Eigen::VectorXd zz = z;
            zz[i] += step;
            EXPECT_LE(dataset_log_lik(data, untransform_params(zz, t), q), r.log_lik + 1e-6);
        }
    }
}

TEST(Fit, BetaMarginsAndTruncation) {
    const ModelTemplate t = tmpl(MarginFamily::Beta, "cln90", "cln0", "cln90");
    const ModelSpec truth = make_model(t, truth_params(MarginFamily::Beta));
    const std::vector<StudyData> data = simulated(truth, 40, 5);
    const FitResult full = fit(data, t);
    EXPECT_TRUE(full.converged);
    ModelTemplate tt = t;
    tt.truncated = true;
    tt.edges[2] = CopulaFamily{};
    const FitResult trunc = fit(data, tt);
    EXPECT_TRUE(trunc.converged);
    EXPECT_EQ(trunc.argmin.size(), 8);
    EXPECT_DOUBLE_EQ(trunc.estimates.tau[2], 0.0);
    // nested model: the truncated vine cannot fit better
    EXPECT_LE(trunc.log_lik, full.log_lik + 1e-4);
}

TEST(Fit, ExplicitStartAndErrors) {
    const ModelTemplate t = tmpl(MarginFamily::Normal, "bvn", "bvn", "bvn");
    const ModelSpec truth = make_model(t, truth_params(MarginFamily::Normal));
    std::vector<StudyData> data = simulated(truth, 25, 3);
    FitConfig cfg;
    cfg.start = natural_params(truth);
    const FitResult r = fit(data, t, cfg);
    EXPECT_TRUE(r.converged);
    const std::vector<StudyData> one{data.front()};
    EXPECT_THROW(fit(one, t), std::invalid_argument);
}

TEST(DefaultStart, ClaytonSignsAndPooledProportions) {
    const ModelTemplate t = tmpl(MarginFamily::Normal, "cln90", "cln0", "bvn");
    const std::vector<StudyData> d{{"a", 10, 2, 3, 20, 4, 1}, {"b", 5, 0, 5, 10, 0, 2}};
    const NaturalParams p = default_start(d, t);
    EXPECT_NEAR(p.pi[0], 30.0 / 32.0, 1e-15);
    EXPECT_DOUBLE_EQ(p.tau[0], -0.1);
    EXPECT_DOUBLE_EQ(p.tau[1], 0.1);
    EXPECT_DOUBLE_EQ(p.tau[2], 0.0);
    EXPECT_DOUBLE_EQ(p.delta[0], 0.5);
}

TEST(Scan, RanksByLogLikelihoodAndSurvivesFailures) {
    const ModelTemplate truth_t = tmpl(MarginFamily::Normal, "cln90", "cln0", "cln90");
    const ModelSpec truth = make_model(truth_t, truth_params(MarginFamily::Normal));
    const std::vector<StudyData> data = simulated(truth, 30, 11);
    ModelTemplate broken = tmpl(MarginFamily::Normal, "bvn", "bvn", "bvn");
    broken.link = Link::Identity;  // invalid for normal margins
    const std::vector<ModelTemplate> cands{tmpl(MarginFamily::Normal, "bvn", "bvn", "bvn"), broken, truth_t};
    const std::vector<ScanEntry> res = model_scan(data, cands);
    ASSERT_EQ(res.size(), 3u);
    EXPECT_EQ(res.back().candidate, 1u);
    EXPECT_EQ(res.back().status, ScanStatus::Failed);
    EXPECT_FALSE(res.back().message.empty());
    ASSERT_TRUE(res[0].result && res[1].result);
    EXPECT_GE(res[0].result->log_lik, res[1].result->log_lik);
    EXPECT_TRUE(res[0].best);
    EXPECT_FALSE(res[1].best);

    // a one-candidate scan is the same computation as a fit
    const std::vector<ModelTemplate> single{truth_t};
    const auto one = model_scan(data, single);
    const FitResult direct = fit(data, truth_t);
    ASSERT_TRUE(one[0].result);
    EXPECT_DOUBLE_EQ(one[0].result->log_lik, direct.log_lik);
}
