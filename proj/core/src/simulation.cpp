#include "trivine/simulation.hpp"

#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace trivine {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string format_value(double v) {
    if (!std::isfinite(v)) {
        return "NA";
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    return out + "\"";
}

}  // namespace

long draw_study_size(const SizeLaw& law, std::mt19937_64& rng) {
    std::gamma_distribution<double> gamma(law.shape, 1.0 / law.rate);
    const double n = std::round(law.lag + gamma(rng));
    return static_cast<long>(std::max(n, std::round(law.lag)));
}

std::vector<StudyData> simulate_dataset(const ModelSpec& truth, const Scenario& scenario, std::size_t n_studies,
                                        std::mt19937_64& rng, const SizeLaw& law) {
    validate(truth);
    std::vector<StudyData> out;
    out.reserve(n_studies);
    for (std::size_t i = 0; i < n_studies; ++i) {
        const std::array<double, 3> u = sample_vine(truth.vine, rng);
        const double p1 = margin_quantile(truth.margins[0], u[0]);
        const double p2 = margin_quantile(truth.margins[1], u[1]);
        const double p3 = margin_quantile(truth.margins[2], u[2]);
        const CellProbs w = cell_probs(p1, p2, p3, scenario.v4, scenario.v5);
        const long n = draw_study_size(law, rng);

        // Multinomial draw as a chain of conditional binomials.
        const std::array<double, 6> probs{w.w00, w.w01, w.w10, w.w11, w.w20, w.w21};
        std::array<long, 6> counts{};
        long remaining = n;
        double mass = 1.0;
        for (std::size_t c = 0; c < 5; ++c) {
            if (remaining == 0) {
                break;
            }
            const double p = mass > 0.0 ? std::clamp(probs[c] / mass, 0.0, 1.0) : 0.0;
            std::binomial_distribution<long> binom(remaining, p);
            counts[c] = binom(rng);
            remaining -= counts[c];
            mass -= probs[c];
        }
        counts[5] = remaining;

        StudyData s;
        char id[32];
        std::snprintf(id, sizeof id, "S%03zu", i + 1);
        s.id = id;
        s.y00 = counts[0];
        s.y01 = counts[1];
        s.y10 = counts[2];
        s.y11 = counts[3];
        s.y20 = counts[4];
        s.y21 = counts[5];
        out.push_back(std::move(s));
    }
    return out;
}

std::mt19937_64 replicate_stream(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), 0x7269u};
    return std::mt19937_64(seq);
}

TemplateSummary summarize(const ModelTemplate& t, const std::vector<ReplicateFit>& fits, const NaturalParams& truth,
                          MarginFamily truth_margin) {
    TemplateSummary s;
    s.model_template = t;
    const std::array<double, 9> target = flatten(truth);
    std::array<double, 9> sum{};
    std::array<double, 9> sum_sq_err{};
    std::array<double, 9> sum_var{};
    std::array<std::size_t, 9> n_var{};
    std::size_t n = 0;
    for (const ReplicateFit& f : fits) {
        if (!f.converged) {
            ++s.failures;
            continue;
        }
        ++n;
        for (std::size_t k = 0; k < 9; ++k) {
            sum[k] += f.estimate[k];
            const double err = f.estimate[k] - target[k];
            sum_sq_err[k] += err * err;
            if (std::isfinite(f.se[k])) {
                sum_var[k] += f.se[k] * f.se[k];
                ++n_var[k];
            }
        }
    }
    s.converged = n;
    for (std::size_t k = 0; k < 9; ++k) {
        if (n == 0) {
            s.bias[k] = s.sd[k] = s.rmse[k] = s.sqrt_mean_var[k] = kNaN;
            continue;
        }
        const double mean = sum[k] / static_cast<double>(n);
        double ss = 0.0;
        for (const ReplicateFit& f : fits) {
            if (f.converged) {
                ss += (f.estimate[k] - mean) * (f.estimate[k] - mean);
            }
        }
        s.sd[k] = 100.0 * std::sqrt(ss / static_cast<double>(n));
        s.bias[k] = 100.0 * (mean - target[k]);
        s.rmse[k] = 100.0 * std::sqrt(sum_sq_err[k] / static_cast<double>(n));
        s.sqrt_mean_var[k] = n_var[k] > 0 ? 100.0 * std::sqrt(sum_var[k] / static_cast<double>(n_var[k])) : kNaN;
        const bool is_delta = k >= 3 && k < 6;
        const bool is_tau = k >= 6;
        if ((is_delta && t.margin != truth_margin) || (is_tau && !t.edge_free(static_cast<int>(k) - 6))) {
            s.bias[k] = kNaN;
            s.rmse[k] = kNaN;
        }
    }
    return s;
}

SimStudyReport run_sim_study(const SimStudyConfig& cfg) {
    validate(cfg.truth);
    SimStudyReport report;
    report.truth = natural_params(cfg.truth);
    report.truth_margin = cfg.truth.margins[0].family;
    report.replicates = cfg.replicates;
    const std::size_t nt = cfg.fitted_templates.size();
    report.fits.assign(nt, std::vector<ReplicateFit>(cfg.replicates));

    FitConfig fc;
    fc.n_q = cfg.n_q;
    fc.max_iters = cfg.max_iters;

    detail::parallel_for(cfg.replicates, cfg.threads, [&](std::size_t r) {
        std::mt19937_64 rng = replicate_stream(cfg.seed, r);
        const std::vector<StudyData> data = simulate_dataset(cfg.truth, cfg.scenario, cfg.n_studies, rng, cfg.size_law);
        for (std::size_t t = 0; t < nt; ++t) {
            ReplicateFit& out = report.fits[t][r];
            try {
                const FitResult fr = fit(data, cfg.fitted_templates[t], fc);
                out.converged = fr.converged;
                out.estimate = flatten(fr.estimates);
                out.se = flatten(fr.standard_errors);
            } catch (const std::exception&) {
                out.converged = false;
            }
        }
    });

    for (std::size_t t = 0; t < nt; ++t) {
        report.summaries.push_back(summarize(cfg.fitted_templates[t], report.fits[t], report.truth, report.truth_margin));
    }
    return report;
}

void write_sim_report_csv(std::ostream& os, const SimStudyReport& report) {
    os << "statistic,margin,copula,pi1,pi2,pi3,delta1,delta2,delta3,tau12,tau13,tau23_1\n";
    struct Stat {
        const char* name;
        std::array<double, 9> TemplateSummary::*field;
    };
    const Stat stats[] = {{"Bias", &TemplateSummary::bias},
                          {"SD", &TemplateSummary::sd},
                          {"sqrtVbar", &TemplateSummary::sqrt_mean_var},
                          {"RMSE", &TemplateSummary::rmse}};
    for (const Stat& st : stats) {
        for (const TemplateSummary& s : report.summaries) {
            os << st.name << ',' << to_string(s.model_template.margin) << ',' << csv_field(display_label(s.model_template));
            for (double v : s.*(st.field)) {
                os << ',' << format_value(v);
            }
            os << '\n';
        }
    }
    for (const TemplateSummary& s : report.summaries) {
        os << "converged," << to_string(s.model_template.margin) << ',' << csv_field(display_label(s.model_template));
        for (int k = 0; k < 9; ++k) {
            os << ',' << s.converged;
        }
        os << '\n';
    }
}

}  // namespace trivine
