#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bandwagon/experiments.hpp"
#include "bandwagon/lambda_estimation.hpp"
#include "bandwagon/simulator.hpp"
#include "bandwagon/theory.hpp"
#include "support.hpp"

using namespace bandwagon;
using namespace bandwagon::theory;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o{false, ""};
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += o.pass ? 0 : 1;
    std::printf("%s %2d %s [%.1fs] %s\n", o.pass ? "PASS" : "FAIL", id, title.c_str(), secs, o.detail.c_str());
    std::fflush(stdout);
}

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(10);
    s << v;
    return s.str();
}

std::string crossing_text(const std::optional<std::size_t>& n) { return n ? std::to_string(*n) : "none"; }

/// Neighbour of `n` on the checkpoint grid, `step` = -1 or +1; n itself at the ends.
std::size_t grid_neighbour(const std::vector<std::size_t>& grid, std::size_t n, int step) {
    const auto it = std::find(grid.begin(), grid.end(), n);
    if (it == grid.end()) return n;
    if (step < 0) return it == grid.begin() ? n : *(it - 1);
    return it + 1 == grid.end() ? n : *(it + 1);
}

/// Direct partial sums of sum_k z^k/(a+k)^s in long double.
double series(double z, double s, double a) {
    long double acc = 0.0L;
    long double zk = 1.0L;
    for (int k = 0; k < 1000000; ++k) {
        const long double t = zk / std::pow(static_cast<long double>(a + k), static_cast<long double>(s));
        acc += t;
        if (t < 1e-22L) break;
        zk *= z;
    }
    return static_cast<double>(acc);
}

Outcome oracle_equivalence() {
    std::mt19937_64 g(2024);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    double worst = 0.0;
    double worst_rel = 0.0;
    std::size_t comparisons = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const double p = u(g);
        const bool positive = trial % 2 == 0;
        const auto lam = positive ? support::random_positive_schedule(g, 12) : support::random_schedule(g, 12);
        const auto weights = trial % 4 == 0 ? WeightScheme::lambda_proportional() : WeightScheme::uniform();
        for (std::size_t n = 1; n <= 12; ++n) {
            const auto m = brute_force_oracle(p, lam, n, OracleOptions{weights, std::nullopt});
            worst = std::max(worst, std::abs(efficiency_exact(p, lam, n) - m.mse_sample_mean));
            ++comparisons;
            for (std::size_t k = 1; k < n; ++k) {
                for (std::size_t s = 0; s <= k; ++s) {
                    if (!(m.prob_prefix_sum[k][s] > 0.0)) continue;
                    const double pb = static_cast<double>(s) / static_cast<double>(k);
                    worst = std::max(worst, std::abs(conditional_bias(p, lam, pb, k, n) - (m.cond_sample_mean[k][s] - p)));
                    ++comparisons;
                }
            }
            // Affine variance scales like 1/lambda_n^2; absolute 1e-10 needs lambda bounded away from 0.
            if (positive) {
                worst = std::max(worst, std::abs(affine_variance(p, lam, weights, n) - m.var_affine));
                ++comparisons;
            } else {
                bool invertible = true;
                for (std::size_t i = 1; i <= n; ++i) invertible = invertible && lam.at(i) > 0.0;
                if (invertible) {
                    const double v = affine_variance(p, lam, weights, n);
                    worst_rel = std::max(worst_rel, std::abs(v - m.var_affine) / std::max(1.0, std::abs(v)));
                }
            }
        }
    }
    return {worst <= 1e-10 && worst_rel <= 1e-12, "max abs diff " + fmt(worst) + " over " +
                                                       std::to_string(comparisons) + " comparisons; affine rel diff " +
                                                       "on unbounded schedules " + fmt(worst_rel)};
}

Outcome hand_point() {
    const double v = efficiency_exact(0.4, LambdaSchedule::explicit_values({1.0, 0.5}), 2);
    const double o = brute_force_oracle(0.4, LambdaSchedule::explicit_values({1.0, 0.5}), 2).mse_sample_mean;
    return {std::abs(v - 0.18) <= 1e-15 && std::abs(o - 0.18) <= 1e-15, "efficiency " + fmt(v) + ", enumeration " + fmt(o)};
}

Outcome unbiasedness() {
    const std::vector<std::pair<std::string, LambdaSchedule>> settings{
        {"none", LambdaSchedule::none()}, {"weak", LambdaSchedule::weak()}, {"strong", LambdaSchedule::strong()}};
    EstimatorSetup setup;
    setup.estimators = {EstimatorKind::SampleMean, EstimatorKind::AffineUniform, EstimatorKind::AffineWeighted,
                        EstimatorKind::Mle};
    bool ok = true;
    double worst_z = 0.0;
    std::string mle;
    for (const auto& [name, lam] : settings) {
        const EnsembleConfig c{TruePreference(0.4), lam, 100000, 100, 3, {1, 10, 100}};
        const auto r = simulate_ensemble(c, setup);
        for (std::size_t e = 0; e < setup.estimators.size(); ++e) {
            for (std::size_t k = 0; k < r.checkpoints.size(); ++k) {
                const auto ms = support::mean_se(r.column(e, k));
                const double z = ms.se > 0.0 ? std::abs(ms.mean - 0.4) / ms.se : (ms.mean == 0.4 ? 0.0 : INFINITY);
                if (setup.estimators[e] == EstimatorKind::Mle) {
                    mle += " " + name + "@" + std::to_string(r.checkpoints[k]) + ":z=" + fmt(std::round(z * 100) / 100);
                    continue;
                }
                worst_z = std::max(worst_z, z);
                ok = ok && z <= 4.0;
            }
        }
    }
    return {ok, "max |mean-p|/SE " + fmt(worst_z) + "; mle (informational)" + mle};
}

Outcome figure3() {
    struct Check {
        std::string label;
        bool pass;
    };
    std::vector<Check> checks;
    const auto run = [](const LambdaSchedule& lam, std::size_t samples, double thr) {
        Figure3Config c;
        c.schedule = lam;
        c.samples = samples;
        c.thresholds = {thr};
        return run_figure3(c).thresholds.front().n_cross;
    };
    const auto grid5 = geometric_checkpoints(100000);
    const auto grid6 = geometric_checkpoints(1000000);
    // Upper bound n < hi: the crossing or the checkpoint before it satisfies it.
    const auto below = [](const std::vector<std::size_t>& grid, std::optional<std::size_t> n, double hi) {
        return n && static_cast<double>(grid_neighbour(grid, *n, -1)) < hi;
    };
    // Lower bound n > lo: the crossing or the checkpoint after it satisfies it.
    const auto above = [](const std::vector<std::size_t>& grid, std::optional<std::size_t> n, double lo) {
        return !n || static_cast<double>(grid_neighbour(grid, *n, +1)) > lo;
    };

    const auto none05 = run(LambdaSchedule::none(), 100000, 0.05);
    checks.push_back({"none 0.05=" + crossing_text(none05), below(grid5, none05, 300.0)});
    const auto none01 = run(LambdaSchedule::none(), 1000000, 0.01);
    checks.push_back({"none 0.01=" + crossing_text(none01),
                      above(grid6, none01, 4000.0 - 1.0) && below(grid6, none01, 16000.0 + 1.0)});
    const auto weak05 = run(LambdaSchedule::weak(), 100000, 0.05);
    checks.push_back({"weak 0.05=" + crossing_text(weak05),
                      above(grid5, weak05, 1000.0) && below(grid5, weak05, 4000.0 + 1.0)});
    const auto weak01 = run(LambdaSchedule::weak(), 1000000, 0.01);
    checks.push_back({"weak 0.01=" + crossing_text(weak01), above(grid6, weak01, 33000.0)});

    bool ok = true;
    std::string detail;
    for (const auto& c : checks) {
        ok = ok && c.pass;
        detail += c.label + (c.pass ? " ok; " : " OUT; ");
    }
    return {ok, detail};
}

Outcome strong_nonconvergence() {
    Figure3Config c;
    c.schedule = LambdaSchedule::strong();
    c.samples = 1000000;
    const auto r = run_figure3(c);
    const auto& last = r.summary.rows.back();
    const bool outside = last.q05 < 0.4 - 0.05 || last.q95 > 0.4 + 0.05;
    return {outside, "n=" + std::to_string(last.n) + " band [" + fmt(last.q05) + ", " + fmt(last.q95) + "]"};
}

Outcome figure4() {
    const auto s = run_figure4(Figure4Config{});
    const auto& sm = s[0];
    const auto& au = s[1];
    const auto& aw = s[2];
    const auto& ml = s[3];
    std::size_t in_range = 0;
    std::size_t narrower = 0;
    double worst_ratio = 0.0;
    for (std::size_t k = 0; k < sm.rows.size(); ++k) {
        const std::size_t n = sm.rows[k].n;
        if (n >= 10 && n <= 1000) {
            ++in_range;
            narrower += aw.rows[k].band_width() < au.rows[k].band_width();
        }
        const double base = sm.rows[k].band_width();
        const double w = ml.rows[k].band_width();
        worst_ratio = std::max(worst_ratio, base > 0.0 ? w / base : (w > 0.0 ? INFINITY : 1.0));
    }
    const double frac = static_cast<double>(narrower) / static_cast<double>(in_range);
    const auto& sm4 = sm.at_checkpoint(10000);
    const bool tail = au.at_checkpoint(10000).band_width() < sm4.band_width() &&
                      aw.at_checkpoint(10000).band_width() < sm4.band_width();
    const bool ok = frac >= 0.8 && worst_ratio <= 1.1 && tail;
    return {ok, "weighted<uniform at " + fmt(frac) + " of [10,1e3]; max mle/sample-mean width " + fmt(worst_ratio) +
                    "; widths at 1e4 sm=" + fmt(sm4.band_width()) + " au=" +
                    fmt(au.at_checkpoint(10000).band_width()) + " aw=" + fmt(aw.at_checkpoint(10000).band_width())};
}

Outcome error_bound() {
    const double bound = error_lower_bound(0.4, 0.9);
    const double oracle = 0.48 * std::exp(-0.9 * series(0.9, 1, 2) - 0.81 * series(0.81, 2, 2));
    const EnsembleConfig c{TruePreference(0.4), LambdaSchedule::geometric(0.9), 10000, 100000, 7, {100000}};
    const auto r = simulate_ensemble(c, EstimatorSetup{});
    double mae = 0.0;
    for (double v : r.column(0, 0)) mae += std::abs(v - 0.4);
    mae /= static_cast<double>(c.runs);
    const bool ok = std::abs(bound - oracle) <= 1e-9 && mae >= bound;
    return {ok, "bound " + fmt(bound) + ", series oracle " + fmt(oracle) + ", Monte Carlo E|err| " + fmt(mae)};
}

Outcome consistency() {
    const auto a = consistency_classify(LambdaSchedule::power_law(1.0)).verdict;
    const auto b = consistency_classify(LambdaSchedule::strong()).verdict;
    const auto c = consistency_classify(LambdaSchedule::power_law(0.5)).verdict;
    const auto g = LambdaSchedule::geometric(0.9);
    const double gap = std::abs(efficiency_exact(0.4, g, 200000) - efficiency_exact(0.4, g, 1000000));
    const bool ok = a == Verdict::Inconsistent && b == Verdict::Consistent && c == Verdict::Indeterminate && gap < 1e-6;
    return {ok, std::string(verdict_name(a)) + "/" + std::string(verdict_name(b)) + "/" + std::string(verdict_name(c)) +
                    ", plateau gap " + fmt(gap)};
}

Outcome azuma() {
    const auto n = azuma_min_samples(ConvergenceQuery{0.05, 0.1});
    if (!n) return {false, "no finite n"};
    const EnsembleConfig c{TruePreference(0.4), LambdaSchedule::none(), 10000, *n, 11, {*n}};
    const auto r = simulate_ensemble(c, EstimatorSetup{});
    std::size_t miss = 0;
    for (double v : r.column(0, 0)) miss += std::abs(v - 0.4) > 0.05;
    const double frac = static_cast<double>(miss) / static_cast<double>(c.runs);
    return {*n == 600 && frac <= 0.1, "n=" + std::to_string(*n) + ", miss fraction " + fmt(frac)};
}

Outcome lambda_recovery() {
    int hits = 0;
    std::string detail;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto data = simulate_bin_dataset(1, 2000, 100, std::vector<double>{0.4}, LambdaSchedule::strong(), seed);
        LambdaFitOptions opt;
        opt.free_lambda_diagnostic = false;
        const auto rep = fit_lambda_mle(data, opt);
        const bool hit = rep.curve.a >= 0.05 && rep.curve.a <= 0.15 && rep.curve.b >= 0.93 && rep.curve.b <= 0.97;
        hits += hit;
        detail += "(" + fmt(std::round(rep.curve.a * 1000) / 1000) + "," + fmt(std::round(rep.curve.b * 1000) / 1000) +
                  ")";
    }
    return {hits >= 9, std::to_string(hits) + "/10 in box " + detail};
}

}  // namespace

int main() {
    report(1, "oracle equivalence n<=12", oracle_equivalence);
    report(2, "efficiency hand point 0.18", hand_point);
    report(3, "unbiasedness suite", unbiasedness);
    report(4, "threshold crossings, no and weak herding", figure3);
    report(5, "strong herding band at 1e6", strong_nonconvergence);
    report(6, "estimator band structure", figure4);
    report(7, "absolute error lower bound", error_bound);
    report(8, "consistency verdicts and plateau", consistency);
    report(9, "azuma sample size and coverage", azuma);
    report(10, "lambda curve recovery", lambda_recovery);
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
