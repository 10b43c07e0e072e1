#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace bandwagon {

/// Fraction of users who like the item absent any social signal. Always in (0,1).
class TruePreference {
public:
    explicit TruePreference(double p);

    double value() const noexcept { return p_; }
    double variance() const noexcept { return p_ * (1.0 - p_); }

private:
    double p_;
};

/// Bandwagon-strength sequence lambda_1, lambda_2, ... (1-based index).
///
/// Every constructible schedule has lambda_1 = 1, is nonincreasing and stays
/// in [0,1]. An optional floor (see clip_schedule) raises every value to at
/// least tau without breaking either property.
class LambdaSchedule {
public:
    /// lambda_1 = 1, lambda_i = c for i >= 2.
    struct Constant {
        double c;
        bool operator==(const Constant&) const = default;
    };
    /// lambda_i = a + (1 - a) * b^(i-1).
    struct GeometricAffine {
        double a;
        double b;
        bool operator==(const GeometricAffine&) const = default;
    };
    /// lambda_i = c^(i-1).
    struct Geometric {
        double c;
        bool operator==(const Geometric&) const = default;
    };
    /// lambda_i = i^(-q).
    struct PowerLaw {
        double q;
        bool operator==(const PowerLaw&) const = default;
    };
    /// Finite list; lambda_i for i > size() is undefined.
    struct Explicit {
        std::vector<double> values;
        bool operator==(const Explicit&) const = default;
    };
    using Kind = std::variant<Constant, GeometricAffine, Geometric, PowerLaw, Explicit>;

    static LambdaSchedule constant(double c);
    static LambdaSchedule geometric_affine(double a, double b);
    static LambdaSchedule geometric(double c);
    static LambdaSchedule power_law(double q);
    static LambdaSchedule explicit_values(std::vector<double> values);

    /// Shorthands for the three experimental settings.
    static LambdaSchedule none() { return constant(1.0); }
    static LambdaSchedule weak() { return geometric_affine(0.6, 0.9); }
    static LambdaSchedule strong() { return geometric_affine(0.1, 0.95); }

    /// Throws std::out_of_range for i = 0 or beyond an explicit list.
    double at(std::size_t i) const;

    /// lambda_1..lambda_n, each entry equal to at(i) bit for bit.
    std::vector<double> table(std::size_t n) const;

    /// Number of defined entries; SIZE_MAX for analytic kinds.
    std::size_t horizon() const noexcept;

    const Kind& kind() const noexcept { return kind_; }
    double floor() const noexcept { return floor_; }
    LambdaSchedule with_floor(double tau) const;

    bool operator==(const LambdaSchedule&) const = default;

private:
    explicit LambdaSchedule(Kind kind) : kind_(std::move(kind)) {}
    double raw_at(std::size_t i) const;

    Kind kind_;
    double floor_ = 0.0;
};

/// Parses `const:<c>`, `geom-affine:<a>,<b>`, `geom:<c>`, `power:<q>` and
/// `explicit:<v1>,<v2>,...`. Throws std::invalid_argument on malformed text.
LambdaSchedule parse_schedule(std::string_view text);

/// Inverse of parse_schedule (shortest round-trip numbers). Floors are not encoded.
std::string format_schedule(const LambdaSchedule& schedule);

/// Running count and integer sum of binary ratings.
struct ProcessState {
    std::uint64_t n = 0;
    std::uint64_t sum = 0;

    /// p-bar_n; 0 when no ratings have been seen.
    double mean() const noexcept { return n == 0 ? 0.0 : static_cast<double>(sum) / static_cast<double>(n); }

    void push(bool rating) noexcept {
        ++n;
        sum += rating ? 1u : 0u;
    }
};

/// P(r_n = 1) = lambda_n * p + (1 - lambda_n) * p-bar_{n-1}.
inline double next_rating_probability(double p, const ProcessState& state, double lambda_n) noexcept {
    return lambda_n * p + (1.0 - lambda_n) * state.mean();
}

double next_rating_probability(const TruePreference& p, const ProcessState& state, double lambda_n);

struct RatingSequence {
    std::vector<std::uint8_t> ratings;
    LambdaSchedule schedule;
    std::uint64_t seed = 0;

    /// State after the first `prefix` ratings.
    ProcessState state_after(std::size_t prefix) const;
};

}  // namespace bandwagon
