#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bandwagon/core_model.hpp"

namespace bandwagon {

enum class EstimatorKind { SampleMean, AffineUniform, AffineWeighted, Mle };

/// CLI names: sample-mean, affine-uniform, affine-weighted, mle.
std::string_view estimator_name(EstimatorKind kind) noexcept;
EstimatorKind parse_estimator(std::string_view name);
/// Comma separated list of estimator names; rejects empty lists and duplicates.
std::vector<EstimatorKind> parse_estimator_list(std::string_view csv);

/// Positive weights omega_i for the affine weighted mean.
class WeightScheme {
public:
    enum class Kind { Uniform, LambdaProportional, Explicit };

    static WeightScheme uniform() { return WeightScheme(Kind::Uniform, {}); }
    static WeightScheme lambda_proportional() { return WeightScheme(Kind::LambdaProportional, {}); }
    static WeightScheme explicit_values(std::vector<double> weights);

    Kind kind() const noexcept { return kind_; }

    /// omega_i; `lambda_hat_i` is only read for LambdaProportional.
    double at(std::size_t i, double lambda_hat_i) const;

private:
    WeightScheme(Kind kind, std::vector<double> w) : kind_(kind), weights_(std::move(w)) {}
    Kind kind_;
    std::vector<double> weights_;
};

struct ClipConfig {
    double tau;
};

/// Pointwise max(lambda_i, tau).
LambdaSchedule clip_schedule(const LambdaSchedule& schedule, ClipConfig clip);

struct NewtonConfig {
    double boundary_margin = 1e-6;
    int max_iterations = 100;
    double tolerance = 1e-12;
    int max_halvings = 60;

    void validate() const;
};

/// Mean of a nonempty 0/1 prefix, from an exact integer sum.
double sample_mean(std::span<const std::uint8_t> ratings);

/// (r_i - (1 - lambda_hat_i) * p-bar_{i-1}) / lambda_hat_i; not clipped to [0,1].
double affine_single(std::uint8_t rating, double p_bar_prev, double lambda_hat_i);

/// p-hat_1..p-hat_n: running weighted mean of affine_single over the prefix.
std::vector<double> affine_mean(std::span<const std::uint8_t> ratings, const LambdaSchedule& schedule_hat,
                                const WeightScheme& weights);

struct Interval {
    double lo;
    double hi;
    bool empty() const noexcept { return lo > hi; }
    double clamp(double x) const noexcept { return x < lo ? lo : (x > hi ? hi : x); }
};

/// Concave objective sum_t ones_t ln(q_t(x)) + zeros_t ln(1 - q_t(x)) with
/// q_t(x) = slope_t * x + intercept_t. Shared by the preference MLE and the
/// lambda fit.
class AffineLogLikelihood {
public:
    struct Term {
        double ones;
        double zeros;
        double slope;
        double intercept;
    };
    struct Derivatives {
        double value;
        double first;
        double second;
    };

    void clear() noexcept { terms_.clear(); }
    void reserve(std::size_t n) { terms_.reserve(n); }
    void add(double ones, double zeros, double slope, double intercept) {
        terms_.push_back({ones, zeros, slope, intercept});
    }
    std::span<const Term> terms() const noexcept { return terms_; }

    /// Points of `domain` where every term keeps margin <= q_t(x) <= 1 - margin.
    Interval feasible(double margin, Interval domain) const noexcept;

    /// -inf where some weighted q_t leaves (0,1).
    double value(double x) const noexcept;
    Derivatives derivatives(double x) const noexcept;

private:
    std::vector<Term> terms_;
};

enum class MleStatus { Converged, MaxIterations, EmptyFeasibleInterval };

struct MleResult {
    double estimate;
    MleStatus status;
    int iterations;
    double log_likelihood;
    Interval feasible;
};

/// Safeguarded Newton ascent on a concave objective restricted to `domain`:
/// start at domain.clamp(start), clamp every iterate, halve steps that lower
/// the objective.
MleResult maximize_concave(const AffineLogLikelihood& objective, Interval domain, double start,
                           const NewtonConfig& config);

/// Log-likelihood of a preference p* for a rating prefix under lambda-hat.
double mle_log_likelihood(std::span<const std::uint8_t> ratings, std::span<const double> lambda_hat,
                          double p_star);

/// Maximum likelihood p*_n; `lambda_hat` holds at least ratings.size() entries.
MleResult mle_newton(std::span<const std::uint8_t> ratings, std::span<const double> lambda_hat,
                     const NewtonConfig& config = {});
MleResult mle_newton(std::span<const std::uint8_t> ratings, const LambdaSchedule& schedule_hat,
                     const NewtonConfig& config = {});

/// O(1)-per-step state for all four estimators along one sequence. The MLE
/// is re-solved from the stored prefix when requested.
class StreamingEstimators {
public:
    /// Tracks only what `estimators` need; value() of any other kind throws.
    StreamingEstimators(std::span<const double> lambda_hat, NewtonConfig newton,
                        std::span<const EstimatorKind> estimators);

    void push(std::uint8_t rating);
    std::size_t count() const noexcept { return state_.n; }

    double value(EstimatorKind kind);

private:
    std::span<const double> lambda_hat_;
    NewtonConfig newton_;
    bool track_affine_ = false;
    bool keep_prefix_ = false;
    ProcessState state_;
    double uniform_sum_ = 0.0;
    double weighted_sum_ = 0.0;
    double weight_total_ = 0.0;
    std::vector<std::uint8_t> prefix_;
    AffineLogLikelihood scratch_;
};

}  // namespace bandwagon
