#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "riskprec/distributions.hpp"
#include "riskprec/estimators.hpp"
#include "riskprec/random_stream.hpp"
#include "riskprec/stats.hpp"

namespace riskprec {

inline constexpr std::uint64_t kDefaultSeed = 20070501;

struct ExperimentConfig {
    std::uint64_t master_seed = kDefaultSeed;
    Eigen::Index trials = 10000;
    std::vector<Eigen::Index> sample_sizes{250, 500, 1000, 2000};
    std::vector<double> alphas{0.90, 0.95, 0.99};
    std::vector<double> aras{5.0, 25.0, 100.0};
    std::vector<MeasureKind> measure_kinds{MeasureKind::var, MeasureKind::es, MeasureKind::srm};
    std::vector<DistributionSpec> distributions{
        Normal{0.0, 1.0},
        TwoPieceNormal::with_mean(0.0, 0.65, 1.3),
        StandardizedT{5},
    };
    bool common_random_numbers = true;
    EstimatorConventions conventions = EstimatorConventions::classic();

    /// VaR(alpha) for every alpha, then ES(alpha), then SRM(k), in the order
    /// of measure_kinds.
    [[nodiscard]] std::vector<RiskMeasureSpec> measures() const;

    /// Checks grid invariants (T >= 100, non-empty grids, every measure
    /// defined at every n); throws ConfigError.
    void validate() const;
};

/// Identifies one Monte Carlo cell.
struct CellKey {
    std::size_t dist_index = 0;
    DistributionSpec dist;
    Eigen::Index n = 0;
    RiskMeasureSpec measure;
};

/// The T per-trial estimates of one cell, in trial-index order.
struct TrialEstimates {
    CellKey cell;
    EstimateSeries estimates;

    [[nodiscard]] Eigen::VectorXd values() const { return estimates.values(); }
    [[nodiscard]] Eigen::Index size() const noexcept { return estimates.size(); }
};

/// Stream coordinates for trial t of (distribution, n). Under common random
/// numbers every distribution reads the same per-trial stream.
[[nodiscard]] StreamId trial_stream_id(const ExperimentConfig& config, std::size_t dist_index,
                                       Eigen::Index n, Eigen::Index trial);

/// Worker threads to use when the caller passes 0: RISKPREC_THREADS, else
/// the hardware concurrency.
[[nodiscard]] unsigned resolve_threads(unsigned requested);

class EstimateCache;

/// Runs T trials of one (distribution, n) cell and evaluates every measure on
/// each sorted trial sample. Output is identical for any thread count.
[[nodiscard]] std::vector<TrialEstimates> run_cell(const ExperimentConfig& config, std::size_t dist_index,
                                                   Eigen::Index n, const std::vector<RiskMeasureSpec>& measures,
                                                   unsigned threads = 0, EstimateCache* cache = nullptr);

class ExperimentResult {
public:
    std::vector<TrialEstimates> cells;

    /// Throws std::out_of_range when no such cell exists.
    [[nodiscard]] const TrialEstimates& at(std::size_t dist_index, Eigen::Index n,
                                           const RiskMeasureSpec& measure) const;
};

/// Every (distribution, n, measure) cell of the configured grid.
[[nodiscard]] ExperimentResult run_experiment(const ExperimentConfig& config, unsigned threads = 0);

}  // namespace riskprec
