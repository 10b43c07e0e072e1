#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bandwagon/core_model.hpp"
#include "bandwagon/estimators.hpp"
#include "bandwagon/rng.hpp"

namespace bandwagon {

/// Indices round(10^(k/20)), k = 0, 1, ..., deduplicated and capped at
/// `samples`; `samples` itself is appended when the grid misses it.
std::vector<std::size_t> geometric_checkpoints(std::size_t samples);

struct EnsembleConfig {
    TruePreference p;
    LambdaSchedule schedule;
    std::size_t runs = 1000;
    std::size_t samples_per_run = 1000;
    std::uint64_t base_seed = 0;
    std::vector<std::size_t> checkpoints;  // empty: geometric_checkpoints(samples_per_run)

    void validate() const;
    std::vector<std::size_t> resolved_checkpoints() const;
    std::uint64_t run_seed(std::size_t run) const noexcept { return derive_run_seed(base_seed, run); }
    static std::uint64_t derive_run_seed(std::uint64_t base_seed, std::size_t run) noexcept;
};

/// Which estimators to evaluate and under which lambda-hat.
struct EstimatorSetup {
    std::vector<EstimatorKind> estimators{EstimatorKind::SampleMean};
    std::optional<LambdaSchedule> lambda_hat;  // empty: the true schedule
    std::optional<ClipConfig> clip;
    NewtonConfig newton;

    /// lambda-hat after clipping, as a table of length n.
    std::vector<double> lambda_hat_table(const LambdaSchedule& truth, std::size_t n) const;
};

struct CheckpointValue {
    std::size_t n;
    double value;
};

struct EstimateTrace {
    std::size_t run_id;
    EstimatorKind estimator;
    std::vector<CheckpointValue> points;
};

/// Traces ordered run-major, estimators in the order of EstimatorSetup.
struct EnsembleResult {
    std::vector<std::size_t> checkpoints;
    std::vector<EstimatorKind> estimators;
    std::size_t runs = 0;
    std::vector<EstimateTrace> traces;

    const EstimateTrace& trace(std::size_t run, std::size_t estimator_index) const {
        return traces[run * estimators.size() + estimator_index];
    }
    /// Values of one estimator at one checkpoint index across all runs.
    std::vector<double> column(std::size_t estimator_index, std::size_t checkpoint_index) const;
};

/// n_samples ratings from the bandwagon process; identical seed, identical sequence.
RatingSequence simulate_run(const TruePreference& p, const LambdaSchedule& schedule, std::size_t n_samples,
                            std::uint64_t seed);

/// Runs in parallel (OpenMP); run r uses seed derive_run_seed(base_seed, r).
EnsembleResult simulate_ensemble(const EnsembleConfig& config, const EstimatorSetup& setup);

struct BinDataset {
    std::size_t items = 0;
    std::size_t bins = 0;
    std::size_t per_bin = 0;
    /// Flat [item][bin][index] array of 0/1.
    std::vector<std::uint8_t> ratings;
    /// Known in simulation; empty when loaded from data.
    std::vector<double> true_preferences;

    std::span<const std::uint8_t> cell(std::size_t item, std::size_t bin) const {
        return std::span<const std::uint8_t>(ratings).subspan((item * bins + bin) * per_bin, per_bin);
    }
    std::span<std::uint8_t> cell(std::size_t item, std::size_t bin) {
        return std::span<std::uint8_t>(ratings).subspan((item * bins + bin) * per_bin, per_bin);
    }
};

std::uint64_t derive_cell_seed(std::uint64_t seed, std::size_t item, std::size_t bin) noexcept;

BinDataset simulate_bin_dataset(std::size_t items, std::size_t bins, std::size_t per_bin,
                                std::span<const double> preferences, const LambdaSchedule& schedule,
                                std::uint64_t seed);

/// Loads columns item,bin,index,rating (0-based item/bin, 1-based index).
BinDataset read_bin_dataset_csv(const std::filesystem::path& path);
std::string bin_dataset_csv(const BinDataset& data);

namespace reference {

/// Serial ensemble built from simulate_run and the batch estimators; same
/// output as bandwagon::simulate_ensemble.
EnsembleResult simulate_ensemble(const EnsembleConfig& config, const EstimatorSetup& setup);

}  // namespace reference

}  // namespace bandwagon
