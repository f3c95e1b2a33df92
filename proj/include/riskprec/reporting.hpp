#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "riskprec/analytic.hpp"
#include "riskprec/mc_engine.hpp"
#include "riskprec/precision.hpp"

namespace riskprec {

inline constexpr std::string_view kVersion = "1.0.0";

enum class OutputFormat { csv, json, markdown };

[[nodiscard]] std::string_view to_string(OutputFormat f);
[[nodiscard]] std::string_view file_extension(OutputFormat f);
[[nodiscard]] OutputFormat parse_output_format(std::string_view s);

struct RatioPair {
    std::size_t numerator = 0;
    std::size_t denominator = 0;
};

/// Partial cell selector; unset fields match anything.
struct CellSelector {
    std::vector<std::size_t> dist_indices;  // empty: any distribution
    std::optional<MeasureKind> measure;
    std::optional<double> param;
    std::optional<Eigen::Index> n;
};

struct HistogramRequest {
    CellSelector selector;
    int bins = 40;
};

/// Everything a `run` reads from its config file.
struct RunConfig {
    ExperimentConfig experiment;
    std::vector<std::string> labels;  // one per distribution
    std::vector<RatioPair> ratios;
    bool default_ratios = true;  // derive ratios in finalize()
    std::vector<HistogramRequest> histograms;
    double ci_level = 0.90;
    bool dump_estimates = false;
};

/// The full three-stage grid: N(0,1), N(5,1), N(0,5), the zero-mean 2PN and
/// t(5), with 2PN/N(0,1) and t(5)/N(0,1) ratio tables.
[[nodiscard]] RunConfig full_run_config();
/// ExperimentConfig defaults (N(0,1), 2PN, t(5)) with default labels and ratios.
[[nodiscard]] RunConfig default_run_config();

/// Parses a JSON config. Errors carry the line/column of a syntax error or
/// the path of the offending field.
[[nodiscard]] RunConfig parse_run_config(std::string_view text);
[[nodiscard]] RunConfig load_run_config(const std::filesystem::path& path);
[[nodiscard]] nlohmann::json to_json(const RunConfig& config);

[[nodiscard]] nlohmann::json distribution_to_json(const DistributionSpec& spec);
[[nodiscard]] DistributionSpec distribution_from_json(const nlohmann::json& j, const std::string& path = "distribution");

/// Fills default labels and ratio pairs and validates the whole config.
void finalize(RunConfig& config);

// ---------------------------------------------------------------- tables

enum class TableKind { moments, precision, ratio, histogram, true_values };

/// One number of a table in long form. `n` is empty for population values.
struct StatRecord {
    std::string family;
    std::string params;
    MeasureKind measure = MeasureKind::var;
    double param = 0.0;
    std::optional<Eigen::Index> n;
    std::string stat;
    std::optional<double> value;
    std::string note;  // e.g. the method of a true value; not part of csv
};

struct TableArtifact {
    TableKind kind = TableKind::moments;
    std::string name;   // file stem
    std::string title;
    std::vector<StatRecord> rows;
};

[[nodiscard]] TableArtifact moments_table(const std::string& label, const DistributionSpec& dist,
                                          const std::vector<PrecisionReport>& reports);
[[nodiscard]] TableArtifact precision_table(const std::string& label, const DistributionSpec& dist,
                                            const std::vector<PrecisionReport>& reports);
[[nodiscard]] TableArtifact ratio_table(const std::string& num_label, const DistributionSpec& num,
                                        const std::string& den_label, const DistributionSpec& den,
                                        const std::vector<RatioEntry>& entries);
[[nodiscard]] TableArtifact true_values_table(const RunConfig& config);

/// csv: columns family,params,measure,param,n,stat,value at full precision.
/// json: {"title", "kind", "rows": [...]} at full precision.
/// markdown: one sub-table per (measure, stat), rows by parameter, one column
/// per n, four decimals.
[[nodiscard]] std::string render(const TableArtifact& table, OutputFormat format);

/// Shortest decimal that round-trips to `v`.
[[nodiscard]] std::string format_full(double v);

struct Histogram {
    std::vector<double> edges;  // bins + 1
    std::vector<Eigen::Index> counts;
    MomentStats moments;
};

/// Equal-width bins over [min, max]; a constant input occupies one bin of a
/// unit-width range centred on the value.
[[nodiscard]] Histogram make_histogram(const Eigen::VectorXd& values, int bins);
[[nodiscard]] std::string render_histogram(const Histogram& h, const std::string& title, OutputFormat format);

struct CellMatch {
    std::size_t dist_index = 0;
    RiskMeasureSpec measure;
    Eigen::Index n = 0;
};

/// Distribution indices matching a label, an index, or a family tag.
[[nodiscard]] std::vector<std::size_t> resolve_distribution(const RunConfig& config, const std::string& name);

[[nodiscard]] std::vector<CellMatch> match_cells(const RunConfig& config, const CellSelector& selector);

// -------------------------------------------------------------- commands

struct GridOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<Eigen::Index> trials;
    std::vector<MeasureKind> measures;
    std::vector<double> alphas;
    std::vector<double> aras;
    std::vector<Eigen::Index> sample_sizes;
    std::optional<std::string> conventions;
    std::optional<bool> common_random_numbers;
};

void apply_overrides(RunConfig& config, const GridOverrides& overrides);

struct RunOptions {
    std::optional<std::filesystem::path> config;
    std::filesystem::path out = "riskprec-out";
    GridOverrides overrides;
    unsigned threads = 0;
    std::vector<OutputFormat> formats;  // empty: all three
    bool dump_estimates = false;
};

struct TrueValuesOptions {
    std::optional<std::filesystem::path> config;
    GridOverrides overrides;
    OutputFormat format = OutputFormat::markdown;
    std::optional<std::filesystem::path> out;
};

struct HistogramOptions {
    std::optional<std::filesystem::path> config;
    GridOverrides overrides;
    CellSelector selector;
    std::string distribution;  // label, family tag, or index; empty matches all
    int bins = 40;
    unsigned threads = 0;
    OutputFormat format = OutputFormat::csv;
    std::optional<std::filesystem::path> out;
};

struct EstimateOptions {
    std::filesystem::path file;
    std::vector<double> alphas;
    std::vector<double> aras;
    std::string conventions = "exact";
};

/// Loss sample from newline-delimited text; blank lines are skipped. Throws
/// ParseError naming the first bad line.
[[nodiscard]] std::vector<double> parse_loss_text(std::string_view text);

[[nodiscard]] EstimatorConventions parse_conventions(std::string_view name);

/// Each command returns a process exit status and reports problems on `err`.
int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err);
int cmd_true_values(const TrueValuesOptions& options, std::ostream& out, std::ostream& err);
int cmd_histogram(const HistogramOptions& options, std::ostream& out, std::ostream& err);
int cmd_estimate(const EstimateOptions& options, std::ostream& out, std::ostream& err);

}  // namespace riskprec
