#include "bandwagon/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bandwagon::theory {

namespace {

void check_p(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("p must be in (0,1)");
}

}  // namespace

std::vector<double> efficiency_curve(double p, const LambdaSchedule& schedule, std::size_t n) {
    check_p(p);
    if (n < 1) throw std::invalid_argument("efficiency needs n >= 1");
    const double var = p * (1.0 - p);
    std::vector<double> v(n);
    v[0] = var;
    for (std::size_t k = 2; k <= n; ++k) {
        const auto d = static_cast<double>(k);
        const double lam = schedule.at(k);
        v[k - 1] = ((d - 1.0) * (d + 1.0 - 2.0 * lam) / (d * d)) * v[k - 2] + var / (d * d);
    }
    return v;
}

double efficiency_exact(double p, const LambdaSchedule& schedule, std::size_t n) {
    return efficiency_curve(p, schedule, n).back();
}

double efficiency_asymptotic_partial(double p, const LambdaSchedule& schedule, std::size_t n) {
    check_p(p);
    if (n < 2) throw std::invalid_argument("asymptotic partial form needs n >= 2");
    double t = 0.0;
    for (std::size_t m = 1; m <= n - 1; ++m) {
        const auto d = static_cast<double>(m);
        const double factor = m == 1 ? 1.0 : 1.0 - 2.0 * schedule.at(m) / (d + 1.0);
        t = factor * t + 1.0 / (d * (d + 1.0));
    }
    return p * (1.0 - p) * t;
}

std::string_view verdict_name(Verdict v) noexcept {
    switch (v) {
        case Verdict::Consistent: return "consistent";
        case Verdict::Inconsistent: return "inconsistent";
        case Verdict::Indeterminate: return "indeterminate";
    }
    return "unknown";
}

ConsistencyVerdict consistency_classify(const LambdaSchedule& schedule, std::size_t probe_horizon) {
    if (probe_horizon < 1) throw std::invalid_argument("probe horizon must be >= 1");
    ConsistencyVerdict out{Verdict::Indeterminate, "", 1.0, 0.0};
    const std::size_t last = std::min(probe_horizon, schedule.horizon());
    for (std::size_t i = 1; i <= last; ++i) {
        const double lam = schedule.at(i);
        out.probed_infimum = std::min(out.probed_infimum, lam);
        out.probed_square_sum += lam * lam;
    }

    const auto consistent = [&](double floor) {
        out.verdict = Verdict::Consistent;
        out.reason = "sufficient condition: inf lambda = " + std::to_string(floor) + " > 0";
    };
    const auto inconsistent = [&](const char* why) {
        out.verdict = Verdict::Inconsistent;
        out.reason = std::string("necessary condition violated: sum lambda^2 converges (") + why + ")";
    };
    const auto indeterminate = [&](const char* why) {
        out.verdict = Verdict::Indeterminate;
        out.reason = why;
    };

    if (schedule.floor() > 0.0) {
        consistent(schedule.floor());
        return out;
    }
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, LambdaSchedule::Constant>) {
                if (s.c > 0.0) consistent(s.c);
                else inconsistent("lambda_i = 0 for i > 1");
            } else if constexpr (std::is_same_v<T, LambdaSchedule::GeometricAffine>) {
                if (s.a > 0.0) consistent(s.a);
                else inconsistent("geometric decay");
            } else if constexpr (std::is_same_v<T, LambdaSchedule::Geometric>) {
                if (s.c >= 1.0) consistent(1.0);
                else inconsistent("geometric decay");
            } else if constexpr (std::is_same_v<T, LambdaSchedule::PowerLaw>) {
                if (s.q == 0.0) consistent(1.0);
                else if (s.q > 0.5) inconsistent("p-series with exponent 2q > 1");
                else indeterminate("sum lambda^2 diverges but inf lambda = 0; neither condition decides");
            } else {
                if (s.values.back() == 0.0) inconsistent("monotone list ends at 0, tail vanishes");
                else indeterminate("explicit schedule has no analytic tail");
            }
        },
        schedule.kind());
    return out;
}

double conditional_bias(double p, const LambdaSchedule& schedule, double p_bar_m, std::size_t m, std::size_t n) {
    check_p(p);
    if (m < 1 || m >= n) throw std::invalid_argument("conditional bias needs 1 <= m < n");
    double prod = 1.0;
    for (std::size_t i = m + 1; i <= n; ++i) prod *= 1.0 - schedule.at(i) / static_cast<double>(i);
    return (p_bar_m - p) * prod;
}

double conditional_rating_bias(double p, const LambdaSchedule& schedule, double p_bar_m, std::size_t m,
                               std::size_t n) {
    check_p(p);
    if (m < 1 || m >= n) throw std::invalid_argument("conditional rating bias needs 1 <= m < n");
    const double prev = (n - 1 == m) ? p_bar_m - p : conditional_bias(p, schedule, p_bar_m, m, n - 1);
    return (1.0 - schedule.at(n)) * prev;
}

LerchResult lerch(double z, double s, double a, double tol) {
    if (!(z >= 0.0 && z < 1.0)) throw std::invalid_argument("lerch needs 0 <= z < 1");
    if (!(s >= 1.0)) throw std::invalid_argument("lerch needs s >= 1");
    if (!(a > 0.0)) throw std::invalid_argument("lerch needs a > 0");
    if (!(tol > 0.0)) throw std::invalid_argument("lerch tolerance must be positive");
    constexpr std::size_t kMaxTerms = 100'000'000;
    constexpr double kTiny = std::numeric_limits<double>::min();
    double sum = 0.0;
    double zk = 1.0;
    double term = 0.0;
    std::size_t k = 0;
    for (; k < kMaxTerms; ++k) {
        term = zk / std::pow(a + static_cast<double>(k), s);
        sum += term;
        if (term < tol * (sum + kTiny)) break;
        zk *= z;
    }
    return {sum, term * z / (1.0 - z), k + 1};
}

double error_lower_bound(double p, double c) {
    check_p(p);
    if (!(c > 0.0 && c < 1.0)) throw std::invalid_argument("error bound needs c in (0,1)");
    const double first = lerch(c, 1.0, 2.0).value;
    const double second = lerch(c * c, 2.0, 2.0).value;
    return 2.0 * p * (1.0 - p) * std::exp(-c * first - c * c * second);
}

double affine_variance(double p, const LambdaSchedule& schedule, const WeightScheme& weights, std::size_t n) {
    check_p(p);
    if (n < 1) throw std::invalid_argument("affine variance needs n >= 1");
    const auto v = efficiency_curve(p, schedule, n);
    const double var = p * (1.0 - p);
    double wsum = 0.0;
    double acc = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        const double lam = schedule.at(i);
        if (!(lam > 0.0)) throw std::invalid_argument("affine variance needs lambda_i > 0");
        const double w = weights.at(i, lam);
        const double v_prev = i == 1 ? 0.0 : v[i - 2];
        acc += (w * w) / (lam * lam) * (var - (1.0 - lam) * (1.0 - lam) * v_prev);
        wsum += w;
    }
    return acc / (wsum * wsum);
}

namespace {

void check_query(const ConvergenceQuery& q) {
    if (!(q.epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
    if (!(q.alpha > 0.0 && q.alpha < 1.0)) throw std::invalid_argument("alpha must be in (0,1)");
}

}  // namespace

std::optional<std::size_t> azuma_min_samples(const ConvergenceQuery& query, std::size_t horizon) {
    check_query(query);
    const double k = std::log(2.0 / query.alpha) / (2.0 * query.epsilon * query.epsilon);
    const std::size_t last = std::min(horizon, query.schedule.horizon());
    double wsum = 0.0;
    double dsum = 0.0;
    for (std::size_t n = 1; n <= last; ++n) {
        const double lam = query.schedule.at(n);
        const double w = query.weights.at(n, lam);
        const double d = w / lam;
        wsum += w;
        dsum += d * d;
        if (wsum * wsum >= k * dsum) return n;
    }
    return std::nullopt;
}

double azuma_failure_bound(const ConvergenceQuery& query, std::size_t n) {
    check_query(query);
    double wsum = 0.0;
    double dsum = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        const double lam = query.schedule.at(i);
        const double w = query.weights.at(i, lam);
        wsum += w;
        dsum += (w / lam) * (w / lam);
    }
    const double eps = query.epsilon;
    return std::min(1.0, 2.0 * std::exp(-2.0 * eps * eps * wsum * wsum / dsum));
}

}  // namespace bandwagon::theory
