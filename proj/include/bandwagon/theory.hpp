#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "bandwagon/core_model.hpp"
#include "bandwagon/estimators.hpp"

namespace bandwagon::theory {

/// E[(p-bar_n - p)^2] via V_n = ((n-1)(n+1-2 lambda_n)/n^2) V_{n-1} + p(1-p)/n^2, V_1 = p(1-p).
double efficiency_exact(double p, const LambdaSchedule& schedule, std::size_t n);

/// V_1..V_n from the same recurrence.
std::vector<double> efficiency_curve(double p, const LambdaSchedule& schedule, std::size_t n);

/// p(1-p) sum_{i<n} 1/(i(i+1)) prod_{j=i+1}^{n-1} (1 - 2 lambda_j/(j+1)).
///
/// This is the finite-n expression whose limit equals the limit of
/// efficiency_exact. Factors may be negative for small j; the sum is
/// accumulated by the recurrence T_m = f_m T_{m-1} + 1/(m(m+1)) in linear
/// space, so signs carry through.
double efficiency_asymptotic_partial(double p, const LambdaSchedule& schedule, std::size_t n);

enum class Verdict { Consistent, Inconsistent, Indeterminate };

std::string_view verdict_name(Verdict v) noexcept;

struct ConsistencyVerdict {
    Verdict verdict;
    std::string reason;
    /// min lambda_i and partial sum of lambda_i^2 over i <= probe horizon.
    double probed_infimum;
    double probed_square_sum;
};

/// Decided from the schedule's closed form, never from the probe values.
ConsistencyVerdict consistency_classify(const LambdaSchedule& schedule, std::size_t probe_horizon = 1000000);

/// E[p-bar_n - p | p-bar_m] = (p-bar_m - p) prod_{i=m+1}^n (1 - lambda_i/i), 1 <= m < n.
double conditional_bias(double p, const LambdaSchedule& schedule, double p_bar_m, std::size_t m, std::size_t n);

/// E[r_n - p | p-bar_m] = (1 - lambda_n) E[p-bar_{n-1} - p | p-bar_m], 1 <= m < n.
double conditional_rating_bias(double p, const LambdaSchedule& schedule, double p_bar_m, std::size_t m,
                               std::size_t n);

struct LerchResult {
    double value;
    /// Certified bound on the omitted tail: last_term * z / (1 - z).
    double tail_bound;
    std::size_t terms;
};

/// phi(z, s, a) = sum_{k>=0} z^k / (a+k)^s for 0 <= z < 1, s >= 1, a > 0.
LerchResult lerch(double z, double s, double a, double tol = 1e-14);

/// 2p(1-p) exp(-c phi(c,1,2) - c^2 phi(c^2,2,2)): lower bound on the limiting
/// E|p-bar_n - p| when lambda_i = c^(i-1).
double error_lower_bound(double p, double c);

/// (sum w)^-2 sum (w_i^2/lambda_i^2)(p(1-p) - (1-lambda_i)^2 V[p-bar_{i-1}]) for
/// the affine weighted mean with correct lambda.
double affine_variance(double p, const LambdaSchedule& schedule, const WeightScheme& weights, std::size_t n);

struct ConvergenceQuery {
    double epsilon;
    double alpha;
    WeightScheme weights = WeightScheme::uniform();
    LambdaSchedule schedule = LambdaSchedule::none();
};

/// Smallest n with (sum w)^2 >= ln(2/alpha)/(2 eps^2) * sum (w_i/lambda_i)^2,
/// or nothing when no n <= horizon qualifies.
std::optional<std::size_t> azuma_min_samples(const ConvergenceQuery& query, std::size_t horizon = 1000000);

/// Azuma bound on Pr(|p-hat_n - p| > eps) at a given n.
double azuma_failure_bound(const ConvergenceQuery& query, std::size_t n);

/// Exact moments from enumerating all 2^n rating sequences.
struct OracleMoments {
    std::size_t n = 0;
    double mean_sample_mean = 0.0;
    double mse_sample_mean = 0.0;
    double mean_affine = 0.0;
    double var_affine = 0.0;
    /// prob_prefix_sum[m][s] = Pr(S_m = s); cond_sample_mean[m][s] = E[p-bar_n | S_m = s]
    /// (NaN where the event is impossible). Index m runs 1..n-1; row 0 is empty.
    std::vector<std::vector<double>> prob_prefix_sum;
    std::vector<std::vector<double>> cond_sample_mean;
};

struct OracleOptions {
    WeightScheme weights = WeightScheme::uniform();
    /// Schedule used inside the affine estimator; the true one when empty.
    std::optional<LambdaSchedule> lambda_hat;
};

inline constexpr std::size_t kOracleMaxN = 16;

/// Parallel over the sequence space with a fixed-chunk ordered reduce.
OracleMoments brute_force_oracle(double p, const LambdaSchedule& schedule, std::size_t n,
                                 const OracleOptions& options = {});

}  // namespace bandwagon::theory

namespace bandwagon::reference {

/// Plain serial enumeration; same moments as theory::brute_force_oracle.
theory::OracleMoments brute_force_oracle(double p, const LambdaSchedule& schedule, std::size_t n,
                                         const theory::OracleOptions& options = {});

}  // namespace bandwagon::reference
