#include "commands.hpp"

#include <trivine/io.hpp>
#include <trivine/sroc.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

namespace trivine::cli {

namespace {

class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input-side failures (files, configs, flags) map to exit code 2.
template <class F>
auto guarded_input(F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const ParseError& e) {
        throw InputError(e.what());
    } catch (const std::invalid_argument& e) {
        throw InputError(e.what());
    } catch (const std::domain_error& e) {
        throw InputError(e.what());
    }
}

void emit(const std::string& path, const std::function<void(std::ostream&)>& write) {
    if (path.empty() || path == "-") {
        write(std::cout);
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write '" + path + "'");
    }
    write(out);
}

RunConfig load_config(const Options& o) {
    if (o.config.empty()) {
        return RunConfig{};
    }
    return guarded_input([&] { return read_config_file(o.config); });
}

std::vector<StudyData> load_data(const Options& o) {
    if (o.data.empty()) {
        throw InputError("--data is required");
    }
    return guarded_input([&] { return read_dataset_file(o.data); });
}

void apply_overrides(const Options& o, RunConfig& cfg) {
    if (o.nq) {
        if (*o.nq < 2) {
            throw InputError("--nq must be at least 2");
        }
        cfg.fit.n_q = *o.nq;
        cfg.sim_nq = *o.nq;
    }
    if (o.seed) {
        cfg.seed = *o.seed;
    }
    if (o.replicates) {
        cfg.replicates = *o.replicates;
    }
    if (o.threads) {
        cfg.threads = std::max(1u, *o.threads);
    }
}

int run(const std::function<int()>& body) {
    try {
        return body();
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kError;
    }
}

FitResult fit_from_config(const RunConfig& cfg, const std::vector<StudyData>& data) {
    FitConfig fc = cfg.fit;
    fc.start = guarded_input([&] { return resolve_start(cfg.start, data, cfg.model); });
    return fit(data, cfg.model, fc);
}

}  // namespace

int cmd_fit(const Options& o) {
    return run([&] {
        RunConfig cfg = load_config(o);
        apply_overrides(o, cfg);
        const std::vector<StudyData> data = load_data(o);
        const FitResult r = fit_from_config(cfg, data);
        emit(o.out, [&](std::ostream& os) { os << fit_to_json(r); });
        if (!r.converged) {
            std::cerr << "warning: optimizer did not converge; best point written\n";
            return static_cast<int>(kNotConverged);
        }
        return static_cast<int>(kOk);
    });
}

int cmd_scan(const Options& o) {
    return run([&] {
        RunConfig cfg = load_config(o);
        apply_overrides(o, cfg);
        const std::vector<StudyData> data = load_data(o);
        std::vector<ModelTemplate> candidates = cfg.scan_candidates;
        if (candidates.empty()) {
            candidates.push_back(cfg.model);
        }
        const std::vector<ScanEntry> entries = model_scan(data, candidates, cfg.fit, cfg.threads);
        emit(o.out, [&](std::ostream& os) { os << scan_to_json(entries, candidates); });
        std::string csv = o.csv;
        if (csv.empty() && !o.out.empty() && o.out != "-") {
            csv = std::filesystem::path(o.out).replace_extension(".csv").string();
        }
        if (!csv.empty()) {
            emit(csv, [&](std::ostream& os) { write_scan_csv(os, entries, candidates); });
        }
        return static_cast<int>(kOk);
    });
}

int cmd_simulate(const Options& o) {
    return run([&] {
        RunConfig cfg = load_config(o);
        apply_overrides(o, cfg);
        if (!cfg.seed) {
            throw InputError("a seed is required (--seed or sim.seed)");
        }
        if (!cfg.truth) {
            throw InputError("the configuration defines no truth.* model");
        }
        std::mt19937_64 rng = replicate_stream(*cfg.seed, 0);
        const std::vector<StudyData> data = simulate_dataset(*cfg.truth, cfg.scenario, cfg.n_studies, rng, cfg.size_law);
        emit(o.out, [&](std::ostream& os) { write_dataset_csv(os, data); });
        return static_cast<int>(kOk);
    });
}

int cmd_simstudy(const Options& o) {
    return run([&] {
        RunConfig cfg = load_config(o);
        apply_overrides(o, cfg);
        if (!cfg.seed) {
            throw InputError("a seed is required (--seed or sim.seed)");
        }
        if (!cfg.truth) {
            throw InputError("the configuration defines no truth.* model");
        }
        SimStudyConfig sc;
        sc.truth = *cfg.truth;
        sc.scenario = cfg.scenario;
        sc.n_studies = cfg.n_studies;
        sc.replicates = cfg.replicates;
        sc.n_q = cfg.sim_nq;
        sc.size_law = cfg.size_law;
        sc.fitted_templates = cfg.sim_templates;
        if (sc.fitted_templates.empty()) {
            sc.fitted_templates.push_back(template_of(sc.truth));
        }
        sc.seed = *cfg.seed;
        sc.threads = cfg.threads;
        sc.max_iters = cfg.fit.max_iters;
        const SimStudyReport report = run_sim_study(sc);
        emit(o.out, [&](std::ostream& os) { write_sim_report_csv(os, report); });
        return static_cast<int>(kOk);
    });
}

int cmd_sroc(const Options& o) {
    return run([&] {
        if (o.fit.empty()) {
            throw InputError("--fit (fit JSON or model config) is required");
        }
        if (o.out.empty()) {
            throw InputError("--out (output prefix) is required");
        }
        const std::vector<StudyData> data = load_data(o);
        std::ifstream in(o.fit, std::ios::binary);
        if (!in) {
            throw InputError("cannot open '" + o.fit + "'");
        }
        std::stringstream buf;
        buf << in.rdbuf();
        const std::string text = buf.str();
        const auto first = text.find_first_not_of(" \t\r\n");
        FitResult r;
        if (first != std::string::npos && text[first] == '{') {
            r = guarded_input([&] { return fit_from_json(text); });
        } else {
            std::istringstream cs(text);
            RunConfig cfg = guarded_input([&] { return parse_config(cs, o.fit); });
            apply_overrides(o, cfg);
            r = fit_from_config(cfg, data);
        }
        std::vector<CurveSet> curves;
        for (CurveDirection d : {CurveDirection::X1OnX2, CurveDirection::X2OnX1}) {
            for (double q : {0.01, 0.5, 0.99}) {
                curves.push_back(quantile_curve(r, q, d));
            }
        }
        const DensityGrid grid = density_contours(r);
        emit(o.out + "_curves.csv", [&](std::ostream& os) { write_curves_csv(os, curves); });
        emit(o.out + "_grid.csv", [&](std::ostream& os) { write_grid_csv(os, grid); });
        emit(o.out + ".svg", [&](std::ostream& os) { write_sroc_svg(os, r, data, curves, grid); });
        return static_cast<int>(kOk);
    });
}

}  // namespace trivine::cli
