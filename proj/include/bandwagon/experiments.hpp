#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bandwagon/core_model.hpp"
#include "bandwagon/estimators.hpp"
#include "bandwagon/simulator.hpp"

namespace bandwagon {

/// `none`, `weak`, `strong` or `misestimated` (the fitted strong-setting curve
/// 0.33 + 0.67 * 0.92^(i-1)); anything else goes through parse_schedule.
LambdaSchedule schedule_from_name(std::string_view text);

/// Linear-interpolation (type 7) quantile of unsorted values.
double empirical_quantile(std::vector<double> values, double q);

struct SummaryRow {
    std::size_t n;
    double mean;
    double q05;
    double q95;

    double band_width() const noexcept { return q95 - q05; }
};

struct EnsembleSummary {
    EstimatorKind estimator;
    std::size_t runs = 0;
    std::vector<SummaryRow> rows;

    const SummaryRow& at_checkpoint(std::size_t n) const;
};

std::vector<EnsembleSummary> summarize(const EnsembleResult& result);

struct ThresholdReport {
    EstimatorKind estimator;
    double threshold;
    /// First checkpoint from which [q05, q95] stays inside [p - t, p + t].
    std::optional<std::size_t> n_cross;
};

std::optional<std::size_t> threshold_crossing(const EnsembleSummary& summary, double p, double threshold);

struct Figure3Config {
    double p = 0.4;
    LambdaSchedule schedule = LambdaSchedule::none();
    std::size_t runs = 1000;
    std::size_t samples = 100000;
    std::uint64_t seed = 1;
    std::vector<double> thresholds{0.05, 0.01};
};

struct Figure3Result {
    EnsembleSummary summary;
    std::vector<ThresholdReport> thresholds;
};

Figure3Result run_figure3(const Figure3Config& config);

struct Figure4Config {
    double p = 0.4;
    LambdaSchedule schedule = LambdaSchedule::strong();
    std::optional<LambdaSchedule> lambda_hat;
    std::optional<ClipConfig> clip;
    std::size_t runs = 1000;
    std::size_t samples = 10000;
    std::uint64_t seed = 1;
    std::vector<EstimatorKind> estimators{EstimatorKind::SampleMean, EstimatorKind::AffineUniform,
                                          EstimatorKind::AffineWeighted, EstimatorKind::Mle};
    NewtonConfig newton;
};

/// All estimators see the same simulated runs.
std::vector<EnsembleSummary> run_figure4(const Figure4Config& config);

struct VarianceRow {
    std::size_t n;
    double variance;
    /// Jackknife standard error of the sample variance.
    double standard_error;
};

std::vector<VarianceRow> variance_summary(const EnsembleResult& result, std::size_t estimator_index);

struct OverlayRow {
    std::size_t n;
    double empirical_variance;
    double theory;
    double z_score;
};

/// Throws std::invalid_argument when the checkpoints differ.
std::vector<OverlayRow> overlay_theory(std::span<const VarianceRow> empirical,
                                       std::span<const CheckpointValue> theory_curve);

/// efficiency_exact sampled at the given checkpoints.
std::vector<CheckpointValue> efficiency_at(double p, const LambdaSchedule& schedule,
                                           std::span<const std::size_t> checkpoints);

std::string traces_csv(const EnsembleResult& result);
std::string summary_csv(std::span<const EnsembleSummary> summaries);
std::string thresholds_csv(std::span<const ThresholdReport> reports);
std::string overlay_csv(std::span<const OverlayRow> rows);

}  // namespace bandwagon
