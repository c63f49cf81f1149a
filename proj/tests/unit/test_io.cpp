#include <trivine/io.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace trivine;

namespace {

const std::string kData = TRIVINE_TEST_DATA_DIR;

ParseError csv_error(const std::string& file) {
    try {
        read_dataset_file(kData + "/" + file);
    } catch (const ParseError& e) {
        return e;
    }
    ADD_FAILURE() << file << " was accepted";
    return ParseError("", 0, 0, "");
}

RunConfig config(const std::string& text) {
    std::istringstream is(text);
    return parse_config(is, "test.cfg");
}

ParseError config_error(const std::string& text) {
    try {
        config(text);
    } catch (const ParseError& e) {
        return e;
    }
    ADD_FAILURE() << "config accepted:\n" << text;
    return ParseError("", 0, 0, "");
}

}  // namespace

TEST(DatasetCsv, ReadsValidFileAndRoundTrips) {
    const auto d = read_dataset_file(kData + "/valid_small.csv");
    ASSERT_EQ(d.size(), 3u);
    EXPECT_EQ(d[1].id, "B");
    EXPECT_EQ(d[1].y00, 83);
    EXPECT_EQ(d[2].y21, 2);
    std::ostringstream os;
    write_dataset_csv(os, d);
    std::istringstream is(os.str());
    const auto back = read_dataset_csv(is);
    ASSERT_EQ(back.size(), 3u);
    EXPECT_EQ(back[2].y10, d[2].y10);
}

TEST(DatasetCsv, ColumnOrderQuotesAndBlankLines) {
    std::istringstream is("y21,y20,y11,y10,y01,y00,study_id\r\n1,2,3,4,5,6,\"Smith, 2004\"\r\n\r\n");
    const auto d = read_dataset_csv(is);
    ASSERT_EQ(d.size(), 1u);
    EXPECT_EQ(d[0].id, "Smith, 2004");
    EXPECT_EQ(d[0].y00, 6);
    EXPECT_EQ(d[0].y21, 1);
}

TEST(DatasetCsv, RejectsMalformedFixturesWithLocation) {
    EXPECT_NE(std::string(csv_error("empty.csv").what()).find("empty file"), std::string::npos);
    EXPECT_NE(std::string(csv_error("header_only.csv").what()).find("no data rows"), std::string::npos);

    const ParseError neg = csv_error("negative_count.csv");
    EXPECT_EQ(neg.line(), 3u);
    EXPECT_EQ(neg.column(), 3u);
    EXPECT_NE(std::string(neg.what()).find("y01"), std::string::npos);

    const ParseError frac = csv_error("non_integer.csv");
    EXPECT_EQ(frac.line(), 2u);
    EXPECT_EQ(frac.column(), 5u);

    const ParseError text = csv_error("text_count.csv");
    EXPECT_EQ(text.line(), 2u);
    EXPECT_EQ(text.column(), 2u);

    const ParseError dup = csv_error("duplicate_id.csv");
    EXPECT_EQ(dup.line(), 3u);
    EXPECT_NE(std::string(dup.what()).find("duplicate"), std::string::npos);

    EXPECT_NE(std::string(csv_error("missing_column.csv").what()).find("y21"), std::string::npos);
    EXPECT_NE(std::string(csv_error("no_header_id.csv").what()).find("study_id"), std::string::npos);
    EXPECT_EQ(csv_error("ragged_row.csv").line(), 2u);
}

TEST(TemplateLine, ParsesMarginsEdgesAndOptions) {
    const ModelTemplate t = parse_template_line("normal:probit cln90 cln0 bvn perm=2 label=custom");
    EXPECT_EQ(t.margin, MarginFamily::Normal);
    EXPECT_EQ(t.link, Link::Probit);
    EXPECT_EQ(t.permutation, VinePermutation::P12_23_13g2);
    EXPECT_EQ(t.edges[0], make_family(CopulaKind::Clayton, Rotation::R90));
    EXPECT_EQ(t.label, "custom");
    const ModelTemplate b = parse_template_line("beta frank frank frank truncated");
    EXPECT_EQ(b.link, Link::Identity);
    EXPECT_TRUE(b.truncated);
    EXPECT_EQ(b.edges[2].kind, CopulaKind::Independence);
    EXPECT_THROW(parse_template_line("normal bvn bvn"), std::invalid_argument);
    EXPECT_THROW(parse_template_line("beta:logit bvn bvn bvn"), std::invalid_argument);
    EXPECT_THROW(parse_template_line("normal bvn bvn bvn extra"), std::invalid_argument);
}

TEST(Presets, TemplateGridsUseTheirEdgeLabelling) {
    const auto app = preset_templates("application");
    ASSERT_EQ(app.size(), 8u);
    // beta margins, Clayton cell: edge 12 unrotated, edges 13 and 23|1 rotated by 90
    EXPECT_EQ(app[5].margin, MarginFamily::Beta);
    EXPECT_EQ(app[5].edges[0], make_family(CopulaKind::Clayton, Rotation::R0));
    EXPECT_EQ(app[5].edges[1], make_family(CopulaKind::Clayton, Rotation::R90));
    EXPECT_EQ(app[5].edges[2], make_family(CopulaKind::Clayton, Rotation::R90));
    const auto sim = preset_templates("simulation");
    EXPECT_EQ(sim[1].edges[0], make_family(CopulaKind::Clayton, Rotation::R90));
    EXPECT_EQ(sim[1].edges[1], make_family(CopulaKind::Clayton, Rotation::R0));
    EXPECT_THROW(preset_templates("nope"), std::invalid_argument);

    const ModelSpec truth = preset_truth("normal");
    EXPECT_EQ(template_of(truth).edges, sim[1].edges);
    const NaturalParams p = natural_params(truth);
    EXPECT_NEAR(p.tau[0], -0.5, 1e-12);
    EXPECT_NEAR(p.tau[1], 0.5, 1e-12);
    EXPECT_NEAR(p.pi[2], 0.25, 1e-15);
    EXPECT_NEAR(natural_params(preset_truth("beta")).delta[0], 0.1, 1e-15);
}

TEST(Config, ParsesAllSections) {
    const RunConfig c = config(R"(# comment
model.margin = beta
model.edge_a = cln0   # trailing comment
model.edge_b = cln90
model.edge_cond = cln90
start.pi1 = 0.9
start.tau_b = -0.2
fit.nq = 21
fit.max_iters = 300
scan.preset = application
scan.candidate = normal bvn bvn bvn truncated
truth.preset = beta
truth.pi1 = 0.8
sim.v4 = 0.2
sim.v5 = 0.1
sim.n_studies = 40
sim.seed = 99
sim.replicates = 10
sim.threads = 2
sim.size_lag = 20
sim.template = normal bvn bvn bvn
)");
    EXPECT_EQ(c.model.margin, MarginFamily::Beta);
    EXPECT_EQ(c.model.link, Link::Identity);
    EXPECT_EQ(c.model.edges[1], make_family(CopulaKind::Clayton, Rotation::R90));
    EXPECT_DOUBLE_EQ(*c.start.pi[0], 0.9);
    EXPECT_FALSE(c.start.pi[1].has_value());
    EXPECT_EQ(c.fit.n_q, 21u);
    EXPECT_EQ(c.fit.max_iters, 300);
    EXPECT_EQ(c.scan_candidates.size(), 9u);
    EXPECT_TRUE(c.scan_candidates.back().truncated);
    ASSERT_TRUE(c.truth.has_value());
    EXPECT_DOUBLE_EQ(c.truth->margins[0].pi, 0.8);
    EXPECT_EQ(c.truth->margins[0].family, MarginFamily::Beta);
    EXPECT_DOUBLE_EQ(c.scenario.v4, 0.2);
    EXPECT_EQ(c.n_studies, 40u);
    EXPECT_EQ(*c.seed, 99u);
    EXPECT_EQ(c.threads, 2u);
    EXPECT_DOUBLE_EQ(c.size_law.lag, 20.0);
    EXPECT_EQ(c.sim_templates.size(), 1u);
}

TEST(Config, DefaultModelIsNormalBvn) {
    const RunConfig c = config("");
    EXPECT_EQ(c.model.margin, MarginFamily::Normal);
    EXPECT_EQ(c.model.edges[2], make_family(CopulaKind::BVN));
    EXPECT_FALSE(c.seed.has_value());
    EXPECT_FALSE(c.truth.has_value());
}

TEST(Config, LinePreciseErrors) {
    EXPECT_EQ(config_error("model.margin = normal\nmodel.edge_a = gumbel\n").line(), 2u);
    EXPECT_EQ(config_error("\n\nmodel.color = red\n").line(), 3u);
    EXPECT_EQ(config_error("fit.nq = abc\n").line(), 1u);
    EXPECT_EQ(config_error("fit.nq = 1\n").line(), 1u);
    EXPECT_EQ(config_error("just text\n").line(), 1u);
    EXPECT_EQ(config_error("nosection = 1\n").line(), 1u);
    EXPECT_EQ(config_error("sim.v4 = 1.5\n").line(), 1u);
    EXPECT_EQ(config_error("x.y = 1\n").line(), 1u);
    EXPECT_EQ(config_error("truth.preset = normal\ntruth.tau_a = 0.4\n").line(), 2u);
    const ParseError e = config_error("model.edge_a = frank\nmodel.edge_b = frank\nmodel.edge_cond = frank\n"
                                      "model.truncated = true\nstart.tau_cond = 0.2\n");
    EXPECT_EQ(e.line(), 5u);
}

TEST(Config, ClaytonStartOutsideRangeNamesInterval) {
    try {
        read_config_file(kData + "/clayton90_bad_start.cfg");
        FAIL() << "accepted";
    } catch (const ParseError& e) {
        const std::string msg = e.what();
        EXPECT_EQ(e.line(), 6u);
        EXPECT_NE(msg.find("(-1, 0]"), std::string::npos) << msg;
        EXPECT_NE(msg.find("12"), std::string::npos) << msg;
    }
}

TEST(StartValues, MergeOverDefaults) {
    const std::vector<StudyData> d{{"a", 10, 2, 3, 20, 4, 1}, {"b", 5, 0, 5, 10, 0, 2}};
    const ModelTemplate t = parse_template_line("normal cln90 cln0 cln90");
    StartValues s;
    s.pi[1] = 0.6;
    s.tau[0] = -0.3;
    const NaturalParams p = resolve_start(s, d, t);
    EXPECT_DOUBLE_EQ(p.pi[1], 0.6);
    EXPECT_DOUBLE_EQ(p.tau[0], -0.3);
    EXPECT_DOUBLE_EQ(p.tau[1], 0.1);
    s.tau[1] = -0.3;
    EXPECT_THROW(resolve_start(s, d, t), std::domain_error);
}

TEST(FitJson, RoundTrip) {
    const ModelTemplate t = parse_template_line("beta cln0 cln90 cln90");
    FitResult f;
    f.model_template = t;
    f.estimates.pi = {0.977, 0.865, 0.483};
    f.estimates.delta = {0.01, 0.07, 0.12};
    f.estimates.tau = {0.2, -0.3, -0.1};
    f.standard_errors.pi = {0.006, 0.02, 0.03};
    f.standard_errors.delta = {0.01, 0.03, 0.02};
    f.standard_errors.tau = {NAN, 0.1, 0.2};
    f.model = make_model(t, f.estimates);
    f.log_lik = -193.9;
    f.converged = true;
    f.n_studies = 26;
    f.argmin = Eigen::VectorXd::Zero(9);
    const std::string js = fit_to_json(f);
    EXPECT_NE(js.find("\"schema\": \"trivine.fit/1\""), std::string::npos);
    EXPECT_NE(js.find("\"theta\""), std::string::npos);
    EXPECT_NE(js.find("\"tau12\": null"), std::string::npos);
    const FitResult back = fit_from_json(js);
    EXPECT_EQ(back.model_template.edges, t.edges);
    EXPECT_DOUBLE_EQ(back.estimates.pi[0], 0.977);
    EXPECT_DOUBLE_EQ(back.estimates.tau[1], -0.3);
    EXPECT_TRUE(std::isnan(back.standard_errors.tau[0]));
    EXPECT_DOUBLE_EQ(back.log_lik, -193.9);
    EXPECT_EQ(back.n_studies, 26u);
    EXPECT_NEAR(back.model.vine.edge_b.theta, f.model.vine.edge_b.theta, 1e-15);
    FitResult again = back;
    again.argmin = f.argmin;
    EXPECT_EQ(fit_to_json(again), js);
    EXPECT_THROW(fit_from_json("{\"schema\": \"other\"}"), std::invalid_argument);
    EXPECT_THROW(fit_from_json("not json"), std::invalid_argument);
}

TEST(ScanOutput, JsonAndCsvCarryStatus) {
    const std::vector<ModelTemplate> cands{parse_template_line("normal bvn bvn bvn"),
                                           parse_template_line("beta frank frank frank")};
    std::vector<ScanEntry> e(2);
    e[0].candidate = 1;
    e[0].status = ScanStatus::Failed;
    e[0].message = "boom";
    e[1].candidate = 0;
    e[1].status = ScanStatus::NotConverged;
    const std::string js = scan_to_json(e, cands);
    EXPECT_NE(js.find("\"status\": \"failed\""), std::string::npos);
    EXPECT_NE(js.find("\"message\": \"boom\""), std::string::npos);
    std::ostringstream csv;
    write_scan_csv(csv, e, cands);
    EXPECT_NE(csv.str().find(",failed,no,NA"), std::string::npos);
}
