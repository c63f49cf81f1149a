#include "commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    using namespace trivine::cli;

    CLI::App app{"Trivariate vine copula mixed model for diagnostic accuracy studies with non-evaluable outcomes"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App* sub, bool data, bool config_required) {
        if (data) {
            sub->add_option("--data", o.data, "Study table CSV (study_id,y00,y01,y10,y11,y20,y21)")->required();
        }
        auto* c = sub->add_option("--config", o.config, "Configuration file (section.key = value)");
        if (config_required) {
            c->required();
        }
        sub->add_option("--out", o.out, "Output file (default: stdout)");
        sub->add_option("--nq", o.nq, "Gauss-Legendre nodes per dimension");
        sub->add_option("--threads", o.threads, "Worker threads");
    };

    auto* fit = app.add_subcommand("fit", "Maximum-likelihood fit of one model; JSON output");
    add_common(fit, true, false);

    auto* scan = app.add_subcommand("scan", "Fit and rank candidate models; JSON and CSV output");
    add_common(scan, true, false);
    scan->add_option("--csv", o.csv, "CSV table path (default: --out with .csv extension)");

    auto* simulate = app.add_subcommand("simulate", "Simulate one dataset from the configured truth");
    add_common(simulate, false, true);
    simulate->add_option("--seed", o.seed, "RNG seed (required unless sim.seed is set)");

    auto* simstudy = app.add_subcommand("simstudy", "Simulation study: bias/SD/sqrt(Vbar)/RMSE table (x100)");
    add_common(simstudy, false, true);
    simstudy->add_option("--seed", o.seed, "RNG seed (required unless sim.seed is set)");
    simstudy->add_option("--replicates", o.replicates, "Number of simulated datasets");

    auto* sroc = app.add_subcommand("sroc", "SROC quantile curves, density grid and SVG");
    sroc->add_option("--data", o.data, "Study table CSV")->required();
    sroc->add_option("--fit", o.fit, "Fit JSON from 'fit', or a model configuration")->required();
    sroc->add_option("--out", o.out, "Output prefix (writes _curves.csv, _grid.csv, .svg)")->required();
    sroc->add_option("--nq", o.nq, "Gauss-Legendre nodes when fitting from a configuration");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kInputError;
    }

    if (*fit) {
        return cmd_fit(o);
    }
    if (*scan) {
        return cmd_scan(o);
    }
    if (*simulate) {
        return cmd_simulate(o);
    }
    if (*simstudy) {
        return cmd_simstudy(o);
    }
    return cmd_sroc(o);
}
