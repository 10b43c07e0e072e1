#include "bandwagon/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace bandwagon {

std::string_view estimator_name(EstimatorKind kind) noexcept {
    switch (kind) {
        case EstimatorKind::SampleMean: return "sample-mean";
        case EstimatorKind::AffineUniform: return "affine-uniform";
        case EstimatorKind::AffineWeighted: return "affine-weighted";
        case EstimatorKind::Mle: return "mle";
    }
    return "unknown";
}

EstimatorKind parse_estimator(std::string_view name) {
    for (auto k : {EstimatorKind::SampleMean, EstimatorKind::AffineUniform, EstimatorKind::AffineWeighted,
                   EstimatorKind::Mle}) {
        if (estimator_name(k) == name) return k;
    }
    throw std::invalid_argument("unknown estimator '" + std::string(name) + "'");
}

std::vector<EstimatorKind> parse_estimator_list(std::string_view csv) {
    std::vector<EstimatorKind> out;
    while (!csv.empty()) {
        const auto comma = csv.find(',');
        const auto kind = parse_estimator(csv.substr(0, comma));
        if (std::find(out.begin(), out.end(), kind) != out.end()) {
            throw std::invalid_argument("estimator listed twice: " + std::string(estimator_name(kind)));
        }
        out.push_back(kind);
        if (comma == std::string_view::npos) break;
        csv.remove_prefix(comma + 1);
    }
    if (out.empty()) throw std::invalid_argument("estimator set must be nonempty");
    return out;
}

WeightScheme WeightScheme::explicit_values(std::vector<double> weights) {
    if (weights.empty()) throw std::invalid_argument("explicit weights must be nonempty");
    for (double w : weights) {
        if (!(w > 0.0) || !std::isfinite(w)) throw std::invalid_argument("weights must be positive and finite");
    }
    return WeightScheme(Kind::Explicit, std::move(weights));
}

double WeightScheme::at(std::size_t i, double lambda_hat_i) const {
    switch (kind_) {
        case Kind::Uniform: return 1.0;
        case Kind::LambdaProportional: return lambda_hat_i;
        case Kind::Explicit:
            if (i == 0 || i > weights_.size()) throw std::out_of_range("weight index beyond explicit list");
            return weights_[i - 1];
    }
    return 1.0;
}

LambdaSchedule clip_schedule(const LambdaSchedule& schedule, ClipConfig clip) {
    return schedule.with_floor(clip.tau);
}

void NewtonConfig::validate() const {
    if (!(boundary_margin > 0.0 && boundary_margin < 0.5)) {
        throw std::invalid_argument("Newton boundary margin must be in (0, 0.5)");
    }
    if (max_iterations < 1) throw std::invalid_argument("Newton needs at least one iteration");
    if (!(tolerance > 0.0)) throw std::invalid_argument("Newton tolerance must be positive");
}

double sample_mean(std::span<const std::uint8_t> ratings) {
    if (ratings.empty()) throw std::invalid_argument("sample mean of an empty prefix");
    std::uint64_t sum = 0;
    for (auto r : ratings) sum += r;
    return static_cast<double>(sum) / static_cast<double>(ratings.size());
}

double affine_single(std::uint8_t rating, double p_bar_prev, double lambda_hat_i) {
    if (!(lambda_hat_i > 0.0)) throw std::invalid_argument("affine inversion needs lambda-hat > 0");
    return (static_cast<double>(rating) - (1.0 - lambda_hat_i) * p_bar_prev) / lambda_hat_i;
}

std::vector<double> affine_mean(std::span<const std::uint8_t> ratings, const LambdaSchedule& schedule_hat,
                                const WeightScheme& weights) {
    std::vector<double> trace;
    trace.reserve(ratings.size());
    ProcessState state;
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 1; i <= ratings.size(); ++i) {
        const double lam = schedule_hat.at(i);
        const double w = weights.at(i, lam);
        num += w * affine_single(ratings[i - 1], state.mean(), lam);
        den += w;
        trace.push_back(num / den);
        state.push(ratings[i - 1] != 0);
    }
    return trace;
}

Interval AffineLogLikelihood::feasible(double margin, Interval domain) const noexcept {
    Interval out = domain;
    for (const auto& t : terms_) {
        if (t.slope > 0.0) {
            out.lo = std::max(out.lo, (margin - t.intercept) / t.slope);
            out.hi = std::min(out.hi, (1.0 - margin - t.intercept) / t.slope);
        } else if (t.slope < 0.0) {
            out.lo = std::max(out.lo, (1.0 - margin - t.intercept) / t.slope);
            out.hi = std::min(out.hi, (margin - t.intercept) / t.slope);
        }
    }
    return out;
}

double AffineLogLikelihood::value(double x) const noexcept {
    double total = 0.0;
    for (const auto& t : terms_) {
        const double q = t.slope * x + t.intercept;
        if (t.ones > 0.0) total += t.ones * std::log(q);
        if (t.zeros > 0.0) total += t.zeros * std::log1p(-q);
    }
    return std::isnan(total) ? -std::numeric_limits<double>::infinity() : total;
}

AffineLogLikelihood::Derivatives AffineLogLikelihood::derivatives(double x) const noexcept {
    Derivatives d{value(x), 0.0, 0.0};
    for (const auto& t : terms_) {
        const double q = t.slope * x + t.intercept;
        const double a = t.ones / q;
        const double b = t.zeros / (1.0 - q);
        d.first += t.slope * (a - b);
        d.second -= t.slope * t.slope * (a / q + b / (1.0 - q));
    }
    return d;
}

MleResult maximize_concave(const AffineLogLikelihood& objective, Interval domain, double start,
                           const NewtonConfig& config) {
    const double margin = config.boundary_margin;
    const Interval feasible = objective.feasible(margin, domain);
    if (feasible.empty()) {
        const double mid = 0.5 * (domain.lo + domain.hi);
        return {mid, MleStatus::EmptyFeasibleInterval, 0, objective.value(mid), feasible};
    }

    double x = feasible.clamp(start);
    auto d = objective.derivatives(x);
    int it = 0;
    MleStatus status = MleStatus::MaxIterations;
    for (; it < config.max_iterations; ++it) {
        if (!(d.second < 0.0)) {
            // Flat objective: no term depends on x.
            status = MleStatus::Converged;
            break;
        }
        double step = feasible.clamp(x - d.first / d.second) - x;
        if (std::abs(step) <= config.tolerance) {
            x += step;
            status = MleStatus::Converged;
            break;
        }
        double candidate = x + step;
        double value = objective.value(candidate);
        for (int h = 0; value < d.value && h < config.max_halvings; ++h) {
            step *= 0.5;
            candidate = x + step;
            value = objective.value(candidate);
        }
        if (value < d.value) {
            status = MleStatus::Converged;
            break;
        }
        x = candidate;
        d = objective.derivatives(x);
        if (std::abs(step) <= config.tolerance) {
            status = MleStatus::Converged;
            ++it;
            break;
        }
    }
    return {x, status, it, objective.value(x), feasible};
}

double mle_log_likelihood(std::span<const std::uint8_t> ratings, std::span<const double> lambda_hat,
                          double p_star) {
    double total = 0.0;
    ProcessState state;
    for (std::size_t i = 0; i < ratings.size(); ++i) {
        const double q = lambda_hat[i] * p_star + (1.0 - lambda_hat[i]) * state.mean();
        total += ratings[i] ? std::log(q) : std::log1p(-q);
        state.push(ratings[i] != 0);
    }
    return total;
}

namespace {

MleResult mle_with_scratch(std::span<const std::uint8_t> ratings, std::span<const double> lambda_hat,
                           const NewtonConfig& config, AffineLogLikelihood& scratch) {
    if (ratings.empty()) throw std::invalid_argument("MLE needs at least one rating");
    if (lambda_hat.size() < ratings.size()) throw std::invalid_argument("lambda-hat table shorter than ratings");
    scratch.clear();
    scratch.reserve(ratings.size());
    ProcessState state;
    for (std::size_t i = 0; i < ratings.size(); ++i) {
        const double lam = lambda_hat[i];
        const double r = ratings[i] ? 1.0 : 0.0;
        if (lam > 0.0) scratch.add(r, 1.0 - r, lam, (1.0 - lam) * state.mean());
        state.push(ratings[i] != 0);
    }
    const double margin = config.boundary_margin;
    return maximize_concave(scratch, {margin, 1.0 - margin}, state.mean(), config);
}

}  // namespace

MleResult mle_newton(std::span<const std::uint8_t> ratings, std::span<const double> lambda_hat,
                     const NewtonConfig& config) {
    config.validate();
    AffineLogLikelihood scratch;
    return mle_with_scratch(ratings, lambda_hat, config, scratch);
}

MleResult mle_newton(std::span<const std::uint8_t> ratings, const LambdaSchedule& schedule_hat,
                     const NewtonConfig& config) {
    const auto table = schedule_hat.table(ratings.size());
    return mle_newton(ratings, table, config);
}

StreamingEstimators::StreamingEstimators(std::span<const double> lambda_hat, NewtonConfig newton,
                                         std::span<const EstimatorKind> estimators)
    : lambda_hat_(lambda_hat), newton_(newton) {
    newton_.validate();
    for (auto k : estimators) {
        track_affine_ |= k == EstimatorKind::AffineUniform || k == EstimatorKind::AffineWeighted;
        keep_prefix_ |= k == EstimatorKind::Mle;
    }
}

void StreamingEstimators::push(std::uint8_t rating) {
    if (!track_affine_) {
        state_.push(rating != 0);
        if (keep_prefix_) prefix_.push_back(rating);
        return;
    }
    const std::size_t i = state_.n;
    if (i >= lambda_hat_.size()) throw std::out_of_range("lambda-hat table exhausted");
    const double lam = lambda_hat_[i];
    if (lam > 0.0) {
        const double r_hat = affine_single(rating, state_.mean(), lam);
        uniform_sum_ += 1.0 * r_hat;
        weighted_sum_ += lam * r_hat;
        weight_total_ += lam;
    } else {
        uniform_sum_ = std::numeric_limits<double>::quiet_NaN();
        weighted_sum_ = std::numeric_limits<double>::quiet_NaN();
    }
    state_.push(rating != 0);
    if (keep_prefix_) prefix_.push_back(rating);
}

double StreamingEstimators::value(EstimatorKind kind) {
    if (state_.n == 0) throw std::logic_error("no ratings pushed yet");
    switch (kind) {
        case EstimatorKind::SampleMean: return state_.mean();
        case EstimatorKind::AffineUniform:
            if (!track_affine_) throw std::logic_error("affine estimator was not tracked");
            return uniform_sum_ / static_cast<double>(state_.n);
        case EstimatorKind::AffineWeighted:
            if (!track_affine_) throw std::logic_error("affine estimator was not tracked");
            return weighted_sum_ / weight_total_;
        case EstimatorKind::Mle:
            if (!keep_prefix_) throw std::logic_error("MLE requested without a stored prefix");
            return mle_with_scratch(prefix_, lambda_hat_, newton_, scratch_).estimate;
    }
    return 0.0;
}

}  // namespace bandwagon
