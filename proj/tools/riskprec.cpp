#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "riskprec/errors.hpp"
#include "riskprec/reporting.hpp"

using namespace riskprec;

namespace {

struct GridFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<Eigen::Index> trials;
    std::vector<std::string> measures;
    std::vector<double> alphas;
    std::vector<double> aras;
    std::vector<Eigen::Index> sizes;
    std::string conventions;

    void attach(CLI::App* app, bool with_sizes = true) {
        app->add_option("--config", config, "JSON experiment config")->check(CLI::ExistingFile);
        app->add_option("--seed", seed, "master seed");
        app->add_option("--trials", trials, "Monte Carlo trials per cell");
        app->add_option("--measures", measures, "subset of var, es, srm")->delimiter(',');
        app->add_option("--alphas", alphas, "confidence levels")->delimiter(',');
        app->add_option("--aras", aras, "absolute risk aversions")->delimiter(',');
        if (with_sizes) app->add_option("--n,--sizes", sizes, "sample sizes")->delimiter(',');
        app->add_option("--conventions", conventions, "exact or classic");
    }

    [[nodiscard]] std::optional<std::filesystem::path> config_path() const {
        if (config.empty()) return std::nullopt;
        return std::filesystem::path(config);
    }

    [[nodiscard]] GridOverrides overrides() const {
        GridOverrides o;
        o.seed = seed;
        o.trials = trials;
        for (const auto& m : measures) {
            if (m == "var") {
                o.measures.push_back(MeasureKind::var);
            } else if (m == "es") {
                o.measures.push_back(MeasureKind::es);
            } else if (m == "srm") {
                o.measures.push_back(MeasureKind::srm);
            } else {
                throw ConfigError("unknown measure '" + m + "'");
            }
        }
        o.alphas = alphas;
        o.aras = aras;
        o.sample_sizes = sizes;
        if (!conventions.empty()) o.conventions = conventions;
        return o;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Precision of VaR, ES and spectral risk measure estimators by Monte Carlo"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    GridFlags run_grid;
    RunOptions run_opts;
    std::string run_out = run_opts.out.string();
    std::vector<std::string> run_formats;
    auto* run = app.add_subcommand("run", "run the experiment grid and write tables");
    run_grid.attach(run);
    run->add_option("--out", run_out, "output directory")->capture_default_str();
    run->add_option("--threads", run_opts.threads, "worker threads (0: auto)");
    run->add_option("--format", run_formats, "csv, json or markdown (repeatable)");
    run->add_flag("--dump-estimates", run_opts.dump_estimates, "write every per-trial estimate");

    GridFlags tv_grid;
    TrueValuesOptions tv_opts;
    std::string tv_format = "markdown";
    std::string tv_out;
    auto* tv = app.add_subcommand("true-values", "population risk measures of each distribution");
    tv_grid.attach(tv);
    tv->add_option("--format", tv_format, "csv, json or markdown")->capture_default_str();
    tv->add_option("--out", tv_out, "output file (default: stdout)");

    GridFlags hist_grid;
    HistogramOptions hist_opts;
    std::string hist_format = "csv";
    std::string hist_out;
    std::string hist_measure;
    std::optional<double> hist_param;
    std::optional<Eigen::Index> hist_n;
    auto* hist = app.add_subcommand("histogram", "histogram of one cell's estimates");
    hist_grid.attach(hist, false);
    hist->add_option("--distribution", hist_opts.distribution, "label, family or index");
    hist->add_option("--measure", hist_measure, "var, es or srm");
    hist->add_option("--param", hist_param, "alpha or ARA");
    hist->add_option("--n", hist_n, "sample size");
    hist->add_option("--bins", hist_opts.bins, "number of bins (>= 10)")->capture_default_str();
    hist->add_option("--threads", hist_opts.threads, "worker threads (0: auto)");
    hist->add_option("--format", hist_format, "csv, json or markdown")->capture_default_str();
    hist->add_option("--out", hist_out, "output file (default: stdout)");

    EstimateOptions est_opts;
    std::string est_file;
    auto* est = app.add_subcommand("estimate", "risk measures of a loss sample, one number per line");
    est->add_option("--file", est_file, "loss file")->required()->check(CLI::ExistingFile);
    est->add_option("--alpha", est_opts.alphas, "confidence levels")->delimiter(',');
    est->add_option("--k", est_opts.aras, "absolute risk aversions")->delimiter(',');
    est->add_option("--conventions", est_opts.conventions, "exact or classic")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*run) {
            run_opts.config = run_grid.config_path();
            run_opts.overrides = run_grid.overrides();
            run_opts.out = run_out;
            for (const auto& f : run_formats) run_opts.formats.push_back(parse_output_format(f));
            return cmd_run(run_opts, std::cout, std::cerr);
        }
        if (*tv) {
            tv_opts.config = tv_grid.config_path();
            tv_opts.overrides = tv_grid.overrides();
            tv_opts.format = parse_output_format(tv_format);
            if (!tv_out.empty()) tv_opts.out = tv_out;
            return cmd_true_values(tv_opts, std::cout, std::cerr);
        }
        if (*hist) {
            hist_opts.config = hist_grid.config_path();
            hist_opts.overrides = hist_grid.overrides();
            hist_opts.format = parse_output_format(hist_format);
            if (!hist_out.empty()) hist_opts.out = hist_out;
            if (!hist_measure.empty()) {
                if (hist_measure == "var") {
                    hist_opts.selector.measure = MeasureKind::var;
                } else if (hist_measure == "es") {
                    hist_opts.selector.measure = MeasureKind::es;
                } else if (hist_measure == "srm") {
                    hist_opts.selector.measure = MeasureKind::srm;
                } else {
                    throw ConfigError("unknown measure '" + hist_measure + "'");
                }
            }
            hist_opts.selector.param = hist_param;
            hist_opts.selector.n = hist_n;
            if (hist_n) hist_opts.overrides.sample_sizes = {*hist_n};
            return cmd_histogram(hist_opts, std::cout, std::cerr);
        }
        if (*est) {
            est_opts.file = est_file;
            return cmd_estimate(est_opts, std::cout, std::cerr);
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
