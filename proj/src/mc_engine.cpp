#include "riskprec/mc_engine.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "riskprec/errors.hpp"

namespace riskprec {

std::vector<RiskMeasureSpec> ExperimentConfig::measures() const {
    std::vector<RiskMeasureSpec> out;
    for (MeasureKind kind : measure_kinds) {
        const auto& grid = (kind == MeasureKind::srm) ? aras : alphas;
        for (double p : grid) out.push_back({kind, p});
    }
    return out;
}

void ExperimentConfig::validate() const {
    auto fail = [](const std::string& msg) { throw ConfigError(msg); };
    if (trials < 100) fail("trials must be >= 100, got " + std::to_string(trials));
    if (trials > 0xFFFFFFFFLL) fail("trials exceeds the 2^32 stream budget");
    if (sample_sizes.empty()) fail("sample_sizes must not be empty");
    if (distributions.empty()) fail("distributions must not be empty");
    if (measure_kinds.empty()) fail("measures must not be empty");
    const bool needs_alpha = std::any_of(measure_kinds.begin(), measure_kinds.end(),
                                         [](MeasureKind k) { return k != MeasureKind::srm; });
    const bool needs_k = std::find(measure_kinds.begin(), measure_kinds.end(), MeasureKind::srm) !=
                         measure_kinds.end();
    if (needs_alpha && alphas.empty()) fail("alphas must not be empty");
    if (needs_k && aras.empty()) fail("aras must not be empty");
    for (std::size_t i = 0; i < distributions.size(); ++i) {
        try {
            riskprec::validate(distributions[i]);
        } catch (const DomainError& e) {
            fail("distributions[" + std::to_string(i) + "]: " + e.what());
        }
    }
    for (Eigen::Index n : sample_sizes) {
        if (n < 2 || n > 0xFFFFFFFFLL) fail("sample size out of range: " + std::to_string(n));
        for (const auto& m : measures()) {
            try {
                BoundEstimator(m, n, conventions);
            } catch (const Error& e) {
                fail("measure grid invalid at n=" + std::to_string(n) + ": " + e.what());
            }
        }
    }
}

StreamId trial_stream_id(const ExperimentConfig& config, std::size_t dist_index, Eigen::Index n,
                         Eigen::Index trial) {
    StreamId id;
    id.master_seed = config.master_seed;
    id.group = config.common_random_numbers ? 0u : static_cast<std::uint32_t>(dist_index + 1);
    id.sample_size = static_cast<std::uint32_t>(n);
    id.trial = static_cast<std::uint32_t>(trial);
    return id;
}

unsigned resolve_threads(unsigned requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("RISKPREC_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

// Standardized estimates of location-scale families, shared by every member
// of the family that reads the same streams.
class EstimateCache {
public:
    using Key = std::tuple<std::uint32_t, Eigen::Index, double, int>;  // group, n, param, kind
    std::map<Key, Eigen::VectorXd> entries;
};

namespace {

Eigen::VectorXd& cache_slot(EstimateCache& cache, std::uint32_t group, Eigen::Index n,
                            const RiskMeasureSpec& m) {
    return cache.entries[{group, n, m.param, static_cast<int>(m.kind)}];
}

template <typename Body>
void parallel_trials(Eigen::Index trials, unsigned threads, Body&& body) {
    constexpr Eigen::Index kChunk = 64;
    std::atomic<Eigen::Index> next{0};
    auto worker = [&] {
        for (;;) {
            const Eigen::Index begin = next.fetch_add(kChunk);
            if (begin >= trials) return;
            body(begin, std::min(trials, begin + kChunk));
        }
    };
    const unsigned count = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>((trials + kChunk - 1) / kChunk)));
    if (count == 1) {
        worker();
        return;
    }
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    pool.reserve(count);
    for (unsigned i = 0; i < count; ++i) {
        pool.emplace_back([&] {
            try {
                worker();
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(trials);
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace

std::vector<TrialEstimates> run_cell(const ExperimentConfig& config, std::size_t dist_index, Eigen::Index n,
                                     const std::vector<RiskMeasureSpec>& measures, unsigned threads,
                                     EstimateCache* cache) {
    if (dist_index >= config.distributions.size()) throw ConfigError("distribution index out of range");
    if (config.trials < 1) throw ConfigError("trials must be >= 1");
    if (measures.empty()) throw ConfigError("no measures requested");
    const DistributionSpec& dist = config.distributions[dist_index];
    try {
        validate(dist);
    } catch (const DomainError& e) {
        throw ConfigError(std::string("distributions[") + std::to_string(dist_index) + "]: " + e.what());
    }

    std::vector<BoundEstimator> estimators;
    estimators.reserve(measures.size());
    for (const auto& m : measures) {
        try {
            estimators.emplace_back(m, n, config.conventions);
        } catch (const Error& e) {
            throw ConfigError("cell n=" + std::to_string(n) + ": " + e.what());
        }
    }

    // Normal specs are simulated as standard draws; their estimates are the
    // exact affine image mu * c + sigma * estimate(z) of the standard ones.
    const auto ls = location_scale(dist);
    const DistributionSpec sampled = ls ? DistributionSpec{Normal{0.0, 1.0}} : dist;
    const std::uint32_t group = trial_stream_id(config, dist_index, n, 0).group;

    std::vector<TrialEstimates> out;
    out.reserve(measures.size());
    for (const auto& est : estimators) {
        TrialEstimates te;
        te.cell = CellKey{dist_index, dist, n, est.measure()};
        if (ls) {
            te.estimates.location = ls->location * est.location_weight();
            te.estimates.scale = ls->scale;
        }
        out.push_back(std::move(te));
    }

    std::vector<std::size_t> pending;
    for (std::size_t j = 0; j < estimators.size(); ++j) {
        if (ls && cache) {
            auto it = cache->entries.find({group, n, measures[j].param, static_cast<int>(measures[j].kind)});
            if (it != cache->entries.end() && it->second.size() == config.trials) {
                out[j].estimates.base = it->second;
                continue;
            }
        }
        out[j].estimates.base.resize(config.trials);
        pending.push_back(j);
    }
    if (pending.empty()) return out;

    parallel_trials(config.trials, resolve_threads(threads), [&](Eigen::Index begin, Eigen::Index end) {
        Eigen::VectorXd buffer(n);
        for (Eigen::Index t = begin; t < end; ++t) {
            RandomStream stream(trial_stream_id(config, dist_index, n, t));
            sample_into(sampled, stream, buffer);
            std::sort(buffer.data(), buffer.data() + n);
            for (std::size_t j : pending) out[j].estimates.base[t] = estimators[j](buffer);
        }
    });

    for (std::size_t j : pending) {
        const auto& b = out[j].estimates.base;
        for (Eigen::Index t = 0; t < b.size(); ++t) {
            if (!std::isfinite(b[t])) {
                std::ostringstream msg;
                msg << "non-finite estimate in cell dist=" << dist_index << " n=" << n
                    << " measure=" << to_string(measures[j].kind) << "(" << measures[j].param << ") trial=" << t;
                throw NumericalError(msg.str());
            }
        }
        if (ls && cache) cache_slot(*cache, group, n, measures[j]) = b;
    }
    return out;
}

const TrialEstimates& ExperimentResult::at(std::size_t dist_index, Eigen::Index n,
                                           const RiskMeasureSpec& measure) const {
    for (const auto& c : cells) {
        if (c.cell.dist_index == dist_index && c.cell.n == n && c.cell.measure == measure) return c;
    }
    throw std::out_of_range("no such cell in experiment result");
}

ExperimentResult run_experiment(const ExperimentConfig& config, unsigned threads) {
    config.validate();
    const auto measures = config.measures();
    ExperimentResult result;
    EstimateCache cache;
    for (std::size_t d = 0; d < config.distributions.size(); ++d) {
        for (Eigen::Index n : config.sample_sizes) {
            auto cell = run_cell(config, d, n, measures, threads, &cache);
            for (auto& te : cell) result.cells.push_back(std::move(te));
        }
    }
    return result;
}

}  // namespace riskprec
