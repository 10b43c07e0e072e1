#include "bandwagon/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "bandwagon/io.hpp"
#include "bandwagon/theory.hpp"

namespace bandwagon {

LambdaSchedule schedule_from_name(std::string_view text) {
    if (text == "none") return LambdaSchedule::none();
    if (text == "weak") return LambdaSchedule::weak();
    if (text == "strong") return LambdaSchedule::strong();
    if (text == "misestimated") return LambdaSchedule::geometric_affine(0.33, 0.92);
    return parse_schedule(text);
}

double empirical_quantile(std::vector<double> values, double q) {
    if (values.empty()) throw std::invalid_argument("quantile of an empty sample");
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile level must be in [0,1]");
    const double h = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, values.size() - 1);
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(lo), values.end());
    const double v_lo = values[lo];
    if (hi == lo) return v_lo;
    const double v_hi = *std::min_element(values.begin() + static_cast<std::ptrdiff_t>(lo) + 1, values.end());
    return v_lo + (h - static_cast<double>(lo)) * (v_hi - v_lo);
}

const SummaryRow& EnsembleSummary::at_checkpoint(std::size_t n) const {
    for (const auto& row : rows) {
        if (row.n == n) return row;
    }
    throw std::out_of_range("checkpoint " + std::to_string(n) + " not in summary");
}

std::vector<EnsembleSummary> summarize(const EnsembleResult& result) {
    std::vector<EnsembleSummary> out;
    for (std::size_t e = 0; e < result.estimators.size(); ++e) {
        EnsembleSummary s{result.estimators[e], result.runs, {}};
        for (std::size_t c = 0; c < result.checkpoints.size(); ++c) {
            auto col = result.column(e, c);
            const double mean = std::accumulate(col.begin(), col.end(), 0.0) / static_cast<double>(col.size());
            const double q05 = empirical_quantile(col, 0.05);
            const double q95 = empirical_quantile(std::move(col), 0.95);
            s.rows.push_back({result.checkpoints[c], mean, q05, q95});
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::optional<std::size_t> threshold_crossing(const EnsembleSummary& summary, double p, double threshold) {
    std::optional<std::size_t> cross;
    for (const auto& row : summary.rows) {
        const bool inside = row.q05 >= p - threshold && row.q95 <= p + threshold;
        if (!inside) cross.reset();
        else if (!cross) cross = row.n;
    }
    return cross;
}

Figure3Result run_figure3(const Figure3Config& config) {
    EnsembleConfig ens{TruePreference(config.p), config.schedule, config.runs, config.samples, config.seed, {}};
    EstimatorSetup setup;
    setup.estimators = {EstimatorKind::SampleMean};
    const auto result = simulate_ensemble(ens, setup);
    Figure3Result out{summarize(result).front(), {}};
    for (double t : config.thresholds) {
        out.thresholds.push_back({EstimatorKind::SampleMean, t, threshold_crossing(out.summary, config.p, t)});
    }
    return out;
}

std::vector<EnsembleSummary> run_figure4(const Figure4Config& config) {
    EnsembleConfig ens{TruePreference(config.p), config.schedule, config.runs, config.samples, config.seed, {}};
    EstimatorSetup setup{config.estimators, config.lambda_hat, config.clip, config.newton};
    return summarize(simulate_ensemble(ens, setup));
}

std::vector<VarianceRow> variance_summary(const EnsembleResult& result, std::size_t estimator_index) {
    if (result.runs < 3) throw std::invalid_argument("jackknife variance needs at least 3 runs");
    const auto r = static_cast<double>(result.runs);
    std::vector<VarianceRow> out;
    for (std::size_t c = 0; c < result.checkpoints.size(); ++c) {
        auto x = result.column(estimator_index, c);
        const double mean = std::accumulate(x.begin(), x.end(), 0.0) / r;
        double s1 = 0.0;
        double s2 = 0.0;
        for (auto& v : x) {
            v -= mean;
            s1 += v;
            s2 += v * v;
        }
        const double variance = (s2 - s1 * s1 / r) / (r - 1.0);
        double loo_mean = 0.0;
        std::vector<double> loo(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double a = s1 - x[i];
            loo[i] = ((s2 - x[i] * x[i]) - a * a / (r - 1.0)) / (r - 2.0);
            loo_mean += loo[i];
        }
        loo_mean /= r;
        double ss = 0.0;
        for (double v : loo) ss += (v - loo_mean) * (v - loo_mean);
        out.push_back({result.checkpoints[c], variance, std::sqrt((r - 1.0) / r * ss)});
    }
    return out;
}

std::vector<OverlayRow> overlay_theory(std::span<const VarianceRow> empirical,
                                       std::span<const CheckpointValue> theory_curve) {
    if (empirical.size() != theory_curve.size()) throw std::invalid_argument("checkpoint count mismatch");
    std::vector<OverlayRow> out;
    for (std::size_t i = 0; i < empirical.size(); ++i) {
        if (empirical[i].n != theory_curve[i].n) {
            throw std::invalid_argument("checkpoint mismatch at position " + std::to_string(i));
        }
        const double diff = empirical[i].variance - theory_curve[i].value;
        double z = 0.0;
        if (empirical[i].standard_error > 0.0) z = diff / empirical[i].standard_error;
        else if (diff != 0.0) z = std::copysign(std::numeric_limits<double>::infinity(), diff);
        out.push_back({empirical[i].n, empirical[i].variance, theory_curve[i].value, z});
    }
    return out;
}

std::vector<CheckpointValue> efficiency_at(double p, const LambdaSchedule& schedule,
                                           std::span<const std::size_t> checkpoints) {
    if (checkpoints.empty()) return {};
    const auto curve = theory::efficiency_curve(p, schedule, checkpoints.back());
    std::vector<CheckpointValue> out;
    for (auto n : checkpoints) out.push_back({n, curve[n - 1]});
    return out;
}

std::string traces_csv(const EnsembleResult& result) {
    std::string out = "run_id,estimator,n,value\n";
    for (const auto& tr : result.traces) {
        const auto name = std::string(estimator_name(tr.estimator));
        for (const auto& pt : tr.points) {
            out += std::to_string(tr.run_id) + ',' + name + ',' + std::to_string(pt.n) + ',' +
                   format_number(pt.value) + '\n';
        }
    }
    return out;
}

std::string summary_csv(std::span<const EnsembleSummary> summaries) {
    std::string out = "estimator,n,mean,q05,q95\n";
    for (const auto& s : summaries) {
        const auto name = std::string(estimator_name(s.estimator));
        for (const auto& row : s.rows) {
            out += name + ',' + std::to_string(row.n) + ',' + format_number(row.mean) + ',' +
                   format_number(row.q05) + ',' + format_number(row.q95) + '\n';
        }
    }
    return out;
}

std::string thresholds_csv(std::span<const ThresholdReport> reports) {
    std::string out = "estimator,threshold,n_cross\n";
    for (const auto& r : reports) {
        out += std::string(estimator_name(r.estimator)) + ',' + format_number(r.threshold) + ',' +
               (r.n_cross ? std::to_string(*r.n_cross) : std::string("none")) + '\n';
    }
    return out;
}

std::string overlay_csv(std::span<const OverlayRow> rows) {
    std::string out = "n,empirical_variance,theory,z\n";
    for (const auto& r : rows) {
        out += std::to_string(r.n) + ',' + format_number(r.empirical_variance) + ',' + format_number(r.theory) +
               ',' + format_number(r.z_score) + '\n';
    }
    return out;
}

}  // namespace bandwagon
