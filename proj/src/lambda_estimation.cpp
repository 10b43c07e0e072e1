#include "bandwagon/lambda_estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "bandwagon/io.hpp"
#include "json.hpp"

namespace bandwagon {

double extrapolate(const CurveFit& curve, std::size_t i) {
    if (i < 1) throw std::out_of_range("lambda index is 1-based");
    if (i == 1) return 1.0;
    return curve.a + (1.0 - curve.a) * std::pow(curve.b, static_cast<double>(i - 1));
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<double> curve_table(const CurveFit& curve, std::size_t n) {
    std::vector<double> out(n);
    for (std::size_t i = 1; i <= n; ++i) out[i - 1] = extrapolate(curve, i);
    return out;
}

double term(double ones, double zeros, double q) {
    double v = 0.0;
    if (ones > 0.0) v += ones * std::log(q);
    if (zeros > 0.0) v += zeros * std::log1p(-q);
    return std::isnan(v) ? kNegInf : v;
}

}  // namespace

BinStatistics::BinStatistics(const BinDataset& data) : per_bin_(data.per_bin) {
    if (data.items < 1 || data.bins < 1 || data.per_bin < 1) throw std::invalid_argument("empty bin dataset");
    const std::size_t n = data.per_bin;
    // Triangular layout: slot (i, j) at i(i-1)/2 + j for 0 <= j < i.
    const std::size_t slots = n * (n + 1) / 2;
    entries_.resize(data.items);
    pooled_.resize(data.items);
    for (std::size_t k = 0; k < data.items; ++k) {
        std::vector<double> ones(slots, 0.0);
        std::vector<double> zeros(slots, 0.0);
        std::uint64_t total = 0;
        for (std::size_t m = 0; m < data.bins; ++m) {
            const auto cell = data.cell(k, m);
            std::size_t sum = 0;
            for (std::size_t i = 1; i <= n; ++i) {
                const auto slot = i * (i - 1) / 2 + sum;
                (cell[i - 1] ? ones : zeros)[slot] += 1.0;
                sum += cell[i - 1];
            }
            total += sum;
            if (sum != 0 && sum != n) degenerate_ = false;
        }
        pooled_[k] = static_cast<double>(total) / static_cast<double>(data.bins * n);
        for (std::size_t i = 1; i <= n; ++i) {
            for (std::size_t j = 0; j < i; ++j) {
                const auto slot = i * (i - 1) / 2 + j;
                if (ones[slot] + zeros[slot] == 0.0) continue;
                const double p_bar = i == 1 ? 0.0 : static_cast<double>(j) / static_cast<double>(i - 1);
                entries_[k].push_back({i, p_bar, ones[slot], zeros[slot]});
            }
        }
    }
}

double BinStatistics::log_likelihood(const CurveFit& curve, std::span<const double> preferences) const {
    if (preferences.size() != items()) throw std::invalid_argument("need one preference per item");
    const auto lambda = curve_table(curve, per_bin_);
    double total = 0.0;
    for (std::size_t k = 0; k < items(); ++k) {
        const double p = preferences[k];
        for (const auto& e : entries_[k]) {
            const double lam = lambda[e.index - 1];
            total += term(e.ones, e.zeros, lam * p + (1.0 - lam) * e.p_bar_prev);
        }
    }
    return total;
}

double bin_log_likelihood(const BinDataset& data, const CurveFit& curve, std::span<const double> preferences) {
    if (preferences.size() != data.items) throw std::invalid_argument("need one preference per item");
    const auto lambda = curve_table(curve, data.per_bin);
    double total = 0.0;
    for (std::size_t k = 0; k < data.items; ++k) {
        for (std::size_t m = 0; m < data.bins; ++m) {
            ProcessState state;
            for (auto r : data.cell(k, m)) {
                const double lam = lambda[state.n];
                const double q = lam * preferences[k] + (1.0 - lam) * state.mean();
                total += r ? std::log(q) : std::log1p(-q);
                state.push(r != 0);
            }
        }
    }
    return total;
}

namespace {

struct CurveSearch {
    const BinStatistics& stats;
    const LambdaFitOptions& opt;

    double eval(double a, double b, std::span<const double> prefs) const {
        if (a < 0.0 || a > 1.0 || !(b > 0.0) || !(b < 1.0)) return kNegInf;
        return stats.log_likelihood({a, b}, prefs);
    }

    std::pair<CurveFit, double> grid(std::span<const double> prefs, double b_lo) const {
        const std::size_t g = opt.grid_points;
        const auto coord = [&](std::size_t idx, double lo, double hi) {
            return lo + (hi - lo) * static_cast<double>(idx) / static_cast<double>(g - 1);
        };
        std::vector<double> values(g * g);
        const auto total = static_cast<std::ptrdiff_t>(g * g);
#pragma omp parallel for schedule(dynamic, 8)
        for (std::ptrdiff_t t = 0; t < total; ++t) {
            const auto ia = static_cast<std::size_t>(t) / g;
            const auto ib = static_cast<std::size_t>(t) % g;
            values[static_cast<std::size_t>(t)] = eval(coord(ia, 0.0, 1.0), coord(ib, b_lo, opt.b_ceiling), prefs);
        }
        // Ties go to the larger a: scan a upward and accept equal values.
        std::size_t best = 0;
        for (std::size_t t = 1; t < values.size(); ++t) {
            if (values[t] > values[best] || (values[t] == values[best] && t / g > best / g)) best = t;
        }
        return {{coord(best / g, 0.0, 1.0), coord(best % g, b_lo, opt.b_ceiling)}, values[best]};
    }

    std::pair<CurveFit, double> refine(CurveFit start, double value, std::span<const double> prefs,
                                       double b_lo) const {
        const auto g = static_cast<double>(opt.grid_points - 1);
        double step_a = 1.0 / g;
        double step_b = (opt.b_ceiling - b_lo) / g;
        CurveFit cur = start;
        double best = value;
        while (step_a > opt.refine_step_floor || step_b > opt.refine_step_floor) {
            bool moved = false;
            const CurveFit moves[] = {{cur.a + step_a, cur.b},
                                      {cur.a - step_a, cur.b},
                                      {cur.a, cur.b + step_b},
                                      {cur.a, cur.b - step_b}};
            for (auto cand : moves) {
                cand.a = std::clamp(cand.a, 0.0, 1.0);
                cand.b = std::clamp(cand.b, b_lo, opt.b_ceiling);
                const double v = eval(cand.a, cand.b, prefs);
                if (v > best) {
                    best = v;
                    cur = cand;
                    moved = true;
                }
            }
            if (!moved) {
                step_a *= 0.5;
                step_b *= 0.5;
            }
        }
        return {cur, best};
    }

    std::pair<CurveFit, double> fit_curve(std::span<const double> prefs) const {
        double b_lo = opt.b_floor;
        auto [fit, value] = grid(prefs, b_lo);
        // At a = 1 every b gives the same curve, so the floor is not binding.
        if (fit.b <= b_lo && fit.a < 1.0 && opt.b_floor_widened < b_lo) {
            b_lo = opt.b_floor_widened;
            std::tie(fit, value) = grid(prefs, b_lo);
        }
        return refine(fit, value, prefs, b_lo);
    }
};

void fit_preferences(const BinStatistics& stats, const CurveFit& curve, const NewtonConfig& newton,
                     std::vector<double>& prefs) {
    const auto lambda = curve_table(curve, stats.per_bin());
    AffineLogLikelihood objective;
    for (std::size_t k = 0; k < stats.items(); ++k) {
        objective.clear();
        for (const auto& e : stats.item(k)) {
            const double lam = lambda[e.index - 1];
            objective.add(e.ones, e.zeros, lam, (1.0 - lam) * e.p_bar_prev);
        }
        const double margin = newton.boundary_margin;
        prefs[k] = maximize_concave(objective, {margin, 1.0 - margin}, prefs[k], newton).estimate;
    }
}

std::vector<double> free_lambdas(const BinStatistics& stats, std::span<const double> prefs,
                                 const NewtonConfig& newton) {
    const std::size_t n = stats.per_bin();
    std::vector<AffineLogLikelihood> per_index(n);
    for (std::size_t k = 0; k < stats.items(); ++k) {
        for (const auto& e : stats.item(k)) {
            per_index[e.index - 1].add(e.ones, e.zeros, prefs[k] - e.p_bar_prev, e.p_bar_prev);
        }
    }
    std::vector<double> out(n, 1.0);
    for (std::size_t i = 2; i <= n; ++i) {
        const auto res = maximize_concave(per_index[i - 1], {0.0, 1.0}, 0.5, newton);
        out[i - 1] = std::clamp(res.estimate, 0.0, 1.0);
    }
    return out;
}

}  // namespace

LambdaFitReport fit_lambda_mle(const BinDataset& data, const LambdaFitOptions& options) {
    options.newton.validate();
    if (options.grid_points < 2) throw std::invalid_argument("grid needs at least 2 points per axis");
    if (!(options.b_floor > 0.0 && options.b_floor < options.b_ceiling && options.b_ceiling < 1.0)) {
        throw std::invalid_argument("b grid must satisfy 0 < floor < ceiling < 1");
    }
    const BinStatistics stats(data);
    const CurveSearch search{stats, options};
    const double margin = options.newton.boundary_margin;

    std::vector<double> prefs(stats.items());
    for (std::size_t k = 0; k < stats.items(); ++k) prefs[k] = std::clamp(stats.pooled_mean(k), margin, 1.0 - margin);

    LambdaFitReport report{};
    double previous = kNegInf;
    for (int round = 1; round <= options.max_rounds; ++round) {
        auto [curve, value] = search.fit_curve(prefs);
        report.curve = curve;
        report.rounds = round;
        if (options.mode == FitMode::Plugin) {
            report.log_likelihood = value;
            break;
        }
        fit_preferences(stats, curve, options.newton, prefs);
        const double current = stats.log_likelihood(curve, prefs);
        report.log_likelihood = current;
        if (current - previous < options.improvement_tolerance) break;
        previous = current;
    }
    report.preference_estimates = prefs;
    if (options.free_lambda_diagnostic) report.per_step_estimates = free_lambdas(stats, prefs, options.newton);
    if (stats.degenerate()) {
        report.degenerate = true;
        report.warning = "every bin holds identical ratings; lambda is not identifiable and the fit sits on a boundary";
    }
    return report;
}

std::string fit_report_json(const LambdaFitReport& report, FitMode mode) {
    nlohmann::ordered_json j;
    j["a"] = report.curve.a;
    j["b"] = report.curve.b;
    j["mode"] = mode == FitMode::Joint ? "joint" : "plugin";
    j["preferences"] = report.preference_estimates;
    j["log_likelihood"] = report.log_likelihood;
    j["rounds"] = report.rounds;
    j["degenerate"] = report.degenerate;
    if (!report.warning.empty()) j["warning"] = report.warning;
    return j.dump(2) + "\n";
}

std::string lambda_table_csv(const LambdaFitReport& report, std::size_t rows) {
    const bool free = report.per_step_estimates.has_value();
    std::string out = free ? "index,lambda_curve,lambda_free\n" : "index,lambda_curve\n";
    for (std::size_t i = 1; i <= rows; ++i) {
        out += std::to_string(i) + ',' + format_number(extrapolate(report.curve, i));
        if (free) {
            const auto& f = *report.per_step_estimates;
            out += ',';
            if (i <= f.size()) out += format_number(f[i - 1]);
        }
        out += '\n';
    }
    return out;
}

}  // namespace bandwagon
