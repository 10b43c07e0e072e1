#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bandwagon/core_model.hpp"
#include "bandwagon/estimators.hpp"
#include "bandwagon/simulator.hpp"

namespace bandwagon {

/// lambda-hat_i = a + (1 - a) * b^(i-1), a in [0,1], b in (0,1).
struct CurveFit {
    double a;
    double b;

    LambdaSchedule schedule() const { return LambdaSchedule::geometric_affine(a, b); }
};

double extrapolate(const CurveFit& curve, std::size_t i);

enum class FitMode { Joint, Plugin };

struct LambdaFitOptions {
    FitMode mode = FitMode::Joint;
    NewtonConfig newton;
    std::size_t grid_points = 41;
    double b_floor = 0.5;
    double b_ceiling = 0.999;
    /// Floor used when the best grid point sits on b_floor.
    double b_floor_widened = 0.01;
    int max_rounds = 50;
    double improvement_tolerance = 1e-9;
    double refine_step_floor = 1e-9;
    bool free_lambda_diagnostic = true;
};

struct LambdaFitReport {
    /// Per-index lambda estimates with the preferences held at their fitted values.
    std::optional<std::vector<double>> per_step_estimates;
    CurveFit curve;
    /// Fitted p^k (joint) or pooled means p-bar^k (plugin).
    std::vector<double> preference_estimates;
    double log_likelihood;
    int rounds;
    bool degenerate = false;
    std::string warning;
};

/// Sufficient statistics of a BinDataset: for every (item, index i, prefix
/// sum j) the counts of ones and zeros observed at step i after j ones.
class BinStatistics {
public:
    struct Entry {
        std::size_t index;  // 1-based rating index i
        double p_bar_prev;  // j / (i-1), 0 for i = 1
        double ones;
        double zeros;
    };

    explicit BinStatistics(const BinDataset& data);

    std::size_t items() const noexcept { return entries_.size(); }
    std::size_t per_bin() const noexcept { return per_bin_; }
    std::span<const Entry> item(std::size_t k) const { return entries_[k]; }
    /// (1/Mn) sum_m sum_i r_kmi
    double pooled_mean(std::size_t k) const { return pooled_[k]; }
    /// True when every cell holds a single repeated value.
    bool degenerate() const noexcept { return degenerate_; }

    double log_likelihood(const CurveFit& curve, std::span<const double> preferences) const;

private:
    std::size_t per_bin_;
    std::vector<std::vector<Entry>> entries_;
    std::vector<double> pooled_;
    bool degenerate_ = true;
};

/// Direct sum over every rating of the dataset; no aggregation.
double bin_log_likelihood(const BinDataset& data, const CurveFit& curve, std::span<const double> preferences);

LambdaFitReport fit_lambda_mle(const BinDataset& data, const LambdaFitOptions& options = {});

std::string fit_report_json(const LambdaFitReport& report, FitMode mode);
/// index,lambda_curve[,lambda_free] for i = 1..rows.
std::string lambda_table_csv(const LambdaFitReport& report, std::size_t rows);

}  // namespace bandwagon
