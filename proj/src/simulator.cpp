#include "bandwagon/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "bandwagon/io.hpp"

namespace bandwagon {

std::vector<std::size_t> geometric_checkpoints(std::size_t samples) {
    if (samples == 0) throw std::invalid_argument("samples must be >= 1");
    std::vector<std::size_t> out;
    for (int k = 0;; ++k) {
        const auto v = static_cast<std::size_t>(std::llround(std::pow(10.0, k / 20.0)));
        if (v > samples) break;
        if (out.empty() || out.back() != v) out.push_back(v);
    }
    if (out.back() != samples) out.push_back(samples);
    return out;
}

void EnsembleConfig::validate() const {
    if (runs < 1) throw std::invalid_argument("runs must be >= 1");
    if (samples_per_run < 1) throw std::invalid_argument("samples per run must be >= 1");
    if (samples_per_run > schedule.horizon()) {
        throw std::invalid_argument("schedule defines fewer lambdas than samples per run");
    }
    for (std::size_t i = 0; i < checkpoints.size(); ++i) {
        if (checkpoints[i] < 1) throw std::invalid_argument("checkpoints are 1-based");
        if (i > 0 && checkpoints[i] <= checkpoints[i - 1]) {
            throw std::invalid_argument("checkpoints must be strictly increasing");
        }
    }
    if (!checkpoints.empty() && checkpoints.back() > samples_per_run) {
        throw std::invalid_argument("checkpoint beyond samples per run");
    }
}

std::vector<std::size_t> EnsembleConfig::resolved_checkpoints() const {
    return checkpoints.empty() ? geometric_checkpoints(samples_per_run) : checkpoints;
}

std::uint64_t EnsembleConfig::derive_run_seed(std::uint64_t base_seed, std::size_t run) noexcept {
    return derive_seed(base_seed, {static_cast<std::uint64_t>(run)});
}

std::vector<double> EstimatorSetup::lambda_hat_table(const LambdaSchedule& truth, std::size_t n) const {
    LambdaSchedule hat = lambda_hat.value_or(truth);
    if (clip) hat = clip_schedule(hat, *clip);
    if (n > hat.horizon()) {
        throw std::invalid_argument("lambda-hat schedule is shorter than the run; fit a curve to extrapolate");
    }
    auto table = hat.table(n);
    const bool affine = std::any_of(estimators.begin(), estimators.end(), [](EstimatorKind k) {
        return k == EstimatorKind::AffineUniform || k == EstimatorKind::AffineWeighted;
    });
    if (affine && std::any_of(table.begin(), table.end(), [](double v) { return !(v > 0.0); })) {
        throw std::invalid_argument("affine estimators need lambda-hat > 0 everywhere; use --clip");
    }
    return table;
}

std::vector<double> EnsembleResult::column(std::size_t estimator_index, std::size_t checkpoint_index) const {
    std::vector<double> out(runs);
    for (std::size_t r = 0; r < runs; ++r) out[r] = trace(r, estimator_index).points[checkpoint_index].value;
    return out;
}

RatingSequence simulate_run(const TruePreference& p, const LambdaSchedule& schedule, std::size_t n_samples,
                            std::uint64_t seed) {
    if (n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");
    const auto lambda = schedule.table(n_samples);
    RatingSequence seq{std::vector<std::uint8_t>(n_samples), schedule, seed};
    Rng rng(seed);
    ProcessState state;
    for (std::size_t i = 0; i < n_samples; ++i) {
        const bool r = rng.bernoulli(next_rating_probability(p.value(), state, lambda[i]));
        seq.ratings[i] = r ? 1 : 0;
        state.push(r);
    }
    return seq;
}

namespace {

void check_setup(const EnsembleConfig& config, const EstimatorSetup& setup) {
    config.validate();
    if (setup.estimators.empty()) throw std::invalid_argument("estimator set must be nonempty");
    setup.newton.validate();
}

EnsembleResult empty_result(const EnsembleConfig& config, const EstimatorSetup& setup) {
    EnsembleResult result;
    result.checkpoints = config.resolved_checkpoints();
    result.estimators = setup.estimators;
    result.runs = config.runs;
    result.traces.resize(config.runs * setup.estimators.size());
    return result;
}

}  // namespace

EnsembleResult simulate_ensemble(const EnsembleConfig& config, const EstimatorSetup& setup) {
    check_setup(config, setup);
    auto result = empty_result(config, setup);
    const std::size_t n = config.samples_per_run;
    const auto lambda = config.schedule.table(n);
    const auto lambda_hat = setup.lambda_hat_table(config.schedule, n);
    const double p = config.p.value();
    const auto& checkpoints = result.checkpoints;
    const std::size_t n_est = setup.estimators.size();
    const auto runs = static_cast<std::ptrdiff_t>(config.runs);

#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t run = 0; run < runs; ++run) {
        const auto r = static_cast<std::size_t>(run);
        Rng rng(config.run_seed(r));
        StreamingEstimators est(lambda_hat, setup.newton, setup.estimators);
        ProcessState state;
        for (std::size_t e = 0; e < n_est; ++e) {
            auto& tr = result.traces[r * n_est + e];
            tr.run_id = r;
            tr.estimator = setup.estimators[e];
            tr.points.reserve(checkpoints.size());
        }
        std::size_t next = 0;
        for (std::size_t i = 0; i < n && next < checkpoints.size(); ++i) {
            const bool rating = rng.bernoulli(next_rating_probability(p, state, lambda[i]));
            state.push(rating);
            est.push(rating ? 1 : 0);
            if (i + 1 == checkpoints[next]) {
                for (std::size_t e = 0; e < n_est; ++e) {
                    result.traces[r * n_est + e].points.push_back({i + 1, est.value(setup.estimators[e])});
                }
                ++next;
            }
        }
    }
    return result;
}

std::uint64_t derive_cell_seed(std::uint64_t seed, std::size_t item, std::size_t bin) noexcept {
    return derive_seed(seed, {static_cast<std::uint64_t>(item), static_cast<std::uint64_t>(bin)});
}

BinDataset simulate_bin_dataset(std::size_t items, std::size_t bins, std::size_t per_bin,
                                std::span<const double> preferences, const LambdaSchedule& schedule,
                                std::uint64_t seed) {
    if (items < 1 || bins < 1 || per_bin < 1) throw std::invalid_argument("K, M and n must be >= 1");
    if (preferences.size() != items) throw std::invalid_argument("need one preference per item");
    std::vector<TruePreference> prefs;
    for (double v : preferences) prefs.emplace_back(v);

    BinDataset data;
    data.items = items;
    data.bins = bins;
    data.per_bin = per_bin;
    data.ratings.resize(items * bins * per_bin);
    data.true_preferences.assign(preferences.begin(), preferences.end());
    const auto cells = static_cast<std::ptrdiff_t>(items * bins);

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t c = 0; c < cells; ++c) {
        const auto k = static_cast<std::size_t>(c) / bins;
        const auto m = static_cast<std::size_t>(c) % bins;
        const auto seq = simulate_run(prefs[k], schedule, per_bin, derive_cell_seed(seed, k, m));
        std::copy(seq.ratings.begin(), seq.ratings.end(), data.cell(k, m).begin());
    }
    return data;
}

BinDataset read_bin_dataset_csv(const std::filesystem::path& path) {
    const auto table = read_csv(path);
    const auto ci = table.column("item");
    const auto cb = table.column("bin");
    const auto cx = table.column("index");
    const auto cr = table.column("rating");
    struct Row {
        std::size_t item, bin, index;
        std::uint8_t rating;
    };
    std::vector<Row> rows;
    rows.reserve(table.rows.size());
    BinDataset data;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& f = table.rows[i];
        try {
            Row row{std::stoul(f[ci]), std::stoul(f[cb]), std::stoul(f[cx]), 0};
            const auto rating = std::stoul(f[cr]);
            if (rating > 1 || row.index < 1) throw std::invalid_argument("range");
            row.rating = static_cast<std::uint8_t>(rating);
            data.items = std::max(data.items, row.item + 1);
            data.bins = std::max(data.bins, row.bin + 1);
            data.per_bin = std::max(data.per_bin, row.index);
            rows.push_back(row);
        } catch (const std::exception&) {
            throw std::invalid_argument("bin dataset row " + std::to_string(i + 2) +
                                        ": expected item,bin >= 0, index >= 1, rating in {0,1}");
        }
    }
    if (rows.empty()) throw std::invalid_argument("bin dataset has no rows");
    const std::size_t total = data.items * data.bins * data.per_bin;
    if (rows.size() != total) {
        throw std::invalid_argument("bin dataset must be a full K x M x n grid (" + std::to_string(total) +
                                    " rows), got " + std::to_string(rows.size()));
    }
    data.ratings.assign(total, 0);
    std::vector<std::uint8_t> seen(total, 0);
    for (const auto& row : rows) {
        const auto at = (row.item * data.bins + row.bin) * data.per_bin + (row.index - 1);
        if (seen[at]) throw std::invalid_argument("duplicate bin dataset entry");
        seen[at] = 1;
        data.ratings[at] = row.rating;
    }
    return data;
}

std::string bin_dataset_csv(const BinDataset& data) {
    std::string out = "item,bin,index,rating\n";
    for (std::size_t k = 0; k < data.items; ++k) {
        for (std::size_t m = 0; m < data.bins; ++m) {
            const auto cell = data.cell(k, m);
            for (std::size_t i = 0; i < cell.size(); ++i) {
                out += std::to_string(k) + ',' + std::to_string(m) + ',' + std::to_string(i + 1) + ',' +
                       (cell[i] ? '1' : '0') + '\n';
            }
        }
    }
    return out;
}

}  // namespace bandwagon
