#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bandwagon/core_model.hpp"
#include "bandwagon/estimators.hpp"
#include "bandwagon/experiments.hpp"
#include "bandwagon/io.hpp"
#include "bandwagon/lambda_estimation.hpp"
#include "bandwagon/simulator.hpp"
#include "bandwagon/theory.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace bandwagon;
using nlohmann::ordered_json;

namespace {

/// Every setting a subcommand may read. Unset fields fall back to the config
/// file, then to the subcommand default.
struct Settings {
    std::optional<double> p;
    std::optional<std::string> schedule;
    std::optional<std::size_t> runs;
    std::optional<std::size_t> samples;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> estimators;
    std::optional<std::string> lambda_hat;
    std::optional<double> clip;
    std::optional<std::string> out;
    std::optional<bool> extended;
    std::optional<bool> traces;
    std::optional<bool> overlay;
    // theory
    std::optional<std::string> quantity;
    std::optional<std::size_t> n;
    std::optional<std::string> weights;
    std::optional<double> epsilon;
    std::optional<double> alpha;
    std::optional<double> c;
    // estimate-lambda
    std::optional<std::string> input;
    std::optional<std::string> mode;
    std::optional<std::size_t> items;
    std::optional<std::size_t> bins;
    std::optional<std::size_t> per_bin;
    std::optional<std::size_t> table_rows;
    std::optional<bool> write_data;

    void fill_from(const Settings& other) {
        const auto take = [](auto& dst, const auto& src) {
            if (!dst && src) dst = src;
        };
        take(p, other.p);
        take(schedule, other.schedule);
        take(runs, other.runs);
        take(samples, other.samples);
        take(seed, other.seed);
        take(estimators, other.estimators);
        take(lambda_hat, other.lambda_hat);
        take(clip, other.clip);
        take(out, other.out);
        take(extended, other.extended);
        take(traces, other.traces);
        take(overlay, other.overlay);
        take(quantity, other.quantity);
        take(n, other.n);
        take(weights, other.weights);
        take(epsilon, other.epsilon);
        take(alpha, other.alpha);
        take(c, other.c);
        take(input, other.input);
        take(mode, other.mode);
        take(items, other.items);
        take(bins, other.bins);
        take(per_bin, other.per_bin);
        take(table_rows, other.table_rows);
        take(write_data, other.write_data);
    }
};

template <class T>
void read_key(const ordered_json& j, const char* key, std::optional<T>& dst) {
    if (j.contains(key)) dst = j.at(key).get<T>();
}

Settings load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path.string());
    ordered_json j;
    try {
        j = ordered_json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("config " + path.string() + ": " + e.what());
    }
    if (!j.is_object()) throw std::runtime_error("config must be a JSON object");
    static const char* const known[] = {"p",        "schedule", "runs",     "samples",   "seed",       "estimators",
                                        "lambda-hat", "clip",   "out",      "extended",  "traces",     "overlay",
                                        "quantity", "n",        "weights",  "epsilon",   "alpha",      "c",
                                        "input",    "mode",     "items",    "bins",      "per-bin",    "table-rows",
                                        "write-data"};
    for (const auto& item : j.items()) {
        if (std::find(std::begin(known), std::end(known), item.key()) == std::end(known)) {
            throw std::runtime_error("unknown config key '" + item.key() + "'");
        }
    }
    Settings s;
    try {
        read_key(j, "p", s.p);
        read_key(j, "schedule", s.schedule);
        read_key(j, "runs", s.runs);
        read_key(j, "samples", s.samples);
        read_key(j, "seed", s.seed);
        if (j.contains("estimators") && j["estimators"].is_array()) {
            std::string joined;
            for (const auto& e : j["estimators"]) joined += (joined.empty() ? "" : ",") + e.get<std::string>();
            s.estimators = joined;
        } else {
            read_key(j, "estimators", s.estimators);
        }
        read_key(j, "lambda-hat", s.lambda_hat);
        read_key(j, "clip", s.clip);
        read_key(j, "out", s.out);
        read_key(j, "extended", s.extended);
        read_key(j, "traces", s.traces);
        read_key(j, "overlay", s.overlay);
        read_key(j, "quantity", s.quantity);
        read_key(j, "n", s.n);
        read_key(j, "weights", s.weights);
        read_key(j, "epsilon", s.epsilon);
        read_key(j, "alpha", s.alpha);
        read_key(j, "c", s.c);
        read_key(j, "input", s.input);
        read_key(j, "mode", s.mode);
        read_key(j, "items", s.items);
        read_key(j, "bins", s.bins);
        read_key(j, "per-bin", s.per_bin);
        read_key(j, "table-rows", s.table_rows);
        read_key(j, "write-data", s.write_data);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("config " + path.string() + ": " + e.what());
    }
    return s;
}

struct Command {
    Settings flags;
    std::string config;
};

void add_common(CLI::App* sub, Command& cmd) {
    auto& f = cmd.flags;
    sub->add_option("--config", cmd.config, "JSON file with any of these settings; flags take precedence");
    sub->add_option("--p", f.p, "true preference in (0,1)");
    sub->add_option("--schedule", f.schedule,
                    "none|weak|strong|misestimated or const:<c>, geom-affine:<a>,<b>, geom:<c>, power:<q>, "
                    "explicit:<v1>,...");
    sub->add_option("--runs", f.runs, "independent runs");
    sub->add_option("--samples", f.samples, "ratings per run");
    sub->add_option("--seed", f.seed, "base seed");
    sub->add_option("--estimators", f.estimators, "sample-mean,affine-uniform,affine-weighted,mle");
    sub->add_option("--lambda-hat", f.lambda_hat, "schedule assumed by the estimators (default: the true one)");
    sub->add_option("--clip", f.clip, "floor tau applied to lambda-hat");
    sub->add_option("--out", f.out, "output directory (or file for theory/oracle)");
    sub->add_flag("--extended", f.extended, "long sample budget");
}

Settings resolve(const Command& cmd) {
    Settings s = cmd.flags;
    if (!cmd.config.empty()) s.fill_from(load_config(cmd.config));
    return s;
}

std::optional<LambdaSchedule> lambda_hat_of(const Settings& s) {
    if (!s.lambda_hat) return std::nullopt;
    return schedule_from_name(*s.lambda_hat);
}

std::optional<ClipConfig> clip_of(const Settings& s) {
    if (!s.clip) return std::nullopt;
    return ClipConfig{*s.clip};
}

fs::path out_dir(const Settings& s) { return s.out.value_or("bandwagon-out"); }

void announce(const fs::path& path) { std::cout << "wrote " << path.string() << '\n'; }

void write(const fs::path& path, const std::string& text) {
    write_text_file(path, text);
    announce(path);
}

std::vector<ThresholdReport> thresholds_for(const std::vector<EnsembleSummary>& summaries, double p) {
    std::vector<ThresholdReport> out;
    for (const auto& s : summaries) {
        for (double t : {0.05, 0.01}) out.push_back({s.estimator, t, threshold_crossing(s, p, t)});
    }
    return out;
}

int cmd_simulate(const Settings& s) {
    const double p = s.p.value_or(0.4);
    const auto schedule = schedule_from_name(s.schedule.value_or("none"));
    EnsembleConfig config{TruePreference(p), schedule, s.runs.value_or(1000), s.samples.value_or(1000),
                          s.seed.value_or(1), {}};
    EstimatorSetup setup;
    setup.estimators = parse_estimator_list(s.estimators.value_or("sample-mean"));
    setup.lambda_hat = lambda_hat_of(s);
    setup.clip = clip_of(s);
    const auto result = simulate_ensemble(config, setup);
    const auto dir = out_dir(s);
    write(dir / "traces.csv", traces_csv(result));
    const auto summaries = summarize(result);
    write(dir / "summary.csv", summary_csv(summaries));
    write(dir / "thresholds.csv", thresholds_csv(thresholds_for(summaries, p)));
    if (s.overlay.value_or(false)) {
        const auto it = std::find(setup.estimators.begin(), setup.estimators.end(), EstimatorKind::SampleMean);
        if (it == setup.estimators.end()) throw std::invalid_argument("--overlay needs the sample-mean estimator");
        const auto variance = variance_summary(result, static_cast<std::size_t>(it - setup.estimators.begin()));
        const auto curve = efficiency_at(p, schedule, result.checkpoints);
        write(dir / "overlay.csv", overlay_csv(overlay_theory(variance, curve)));
    }
    return 0;
}

int cmd_figure3(const Settings& s) {
    Figure3Config config;
    config.p = s.p.value_or(config.p);
    config.schedule = schedule_from_name(s.schedule.value_or("none"));
    config.runs = s.runs.value_or(config.runs);
    config.samples = s.samples.value_or(s.extended.value_or(false) ? 1000000 : config.samples);
    config.seed = s.seed.value_or(config.seed);
    if (s.estimators && parse_estimator_list(*s.estimators) != std::vector{EstimatorKind::SampleMean}) {
        throw std::invalid_argument("figure3 tracks the sample mean only");
    }
    if (s.lambda_hat || s.clip) throw std::invalid_argument("figure3 takes no --lambda-hat or --clip");
    const auto result = run_figure3(config);
    const auto dir = out_dir(s);
    write(dir / "summary.csv", summary_csv(std::span(&result.summary, 1)));
    write(dir / "thresholds.csv", thresholds_csv(result.thresholds));
    return 0;
}

int cmd_figure4(const Settings& s) {
    Figure4Config config;
    config.p = s.p.value_or(config.p);
    if (s.schedule) config.schedule = schedule_from_name(*s.schedule);
    config.lambda_hat = lambda_hat_of(s);
    config.clip = clip_of(s);
    config.runs = s.runs.value_or(config.runs);
    config.samples = s.samples.value_or(s.extended.value_or(false) ? 100000 : config.samples);
    config.seed = s.seed.value_or(config.seed);
    if (s.estimators) config.estimators = parse_estimator_list(*s.estimators);
    const auto summaries = run_figure4(config);
    const auto dir = out_dir(s);
    write(dir / "summary.csv", summary_csv(summaries));
    write(dir / "thresholds.csv", thresholds_csv(thresholds_for(summaries, config.p)));
    return 0;
}

WeightScheme weights_of(const Settings& s) {
    const auto w = s.weights.value_or("uniform");
    if (w == "uniform") return WeightScheme::uniform();
    if (w == "lambda") return WeightScheme::lambda_proportional();
    throw std::invalid_argument("weights must be 'uniform' or 'lambda'");
}

void emit(const Settings& s, const std::string& text, const std::string& default_name) {
    if (!s.out) {
        std::cout << text;
        return;
    }
    fs::path path(*s.out);
    if (fs::is_directory(path) || path.extension().empty()) path /= default_name;
    write(path, text);
}

int cmd_theory(const Settings& s) {
    const double p = s.p.value_or(0.4);
    const auto schedule = schedule_from_name(s.schedule.value_or("none"));
    const auto quantity = s.quantity.value_or("efficiency");
    const std::size_t n = s.n.value_or(1000);

    const auto curve_csv = [&](auto&& f, std::size_t first) {
        std::string out = "n,value\n";
        for (const auto k : geometric_checkpoints(n)) {
            if (k >= first) out += std::to_string(k) + ',' + format_number(f(k)) + '\n';
        }
        return out;
    };

    if (quantity == "efficiency") {
        const auto curve = theory::efficiency_curve(p, schedule, n);
        emit(s, curve_csv([&](std::size_t k) { return curve[k - 1]; }, 1), "efficiency.csv");
    } else if (quantity == "asymptotic") {
        emit(s, curve_csv([&](std::size_t k) { return theory::efficiency_asymptotic_partial(p, schedule, k); }, 2),
             "asymptotic.csv");
    } else if (quantity == "affine-variance") {
        const auto w = weights_of(s);
        emit(s, curve_csv([&](std::size_t k) { return theory::affine_variance(p, schedule, w, k); }, 1),
             "affine_variance.csv");
    } else if (quantity == "consistency") {
        const auto v = theory::consistency_classify(schedule);
        ordered_json j;
        j["schedule"] = format_schedule(schedule);
        j["verdict"] = theory::verdict_name(v.verdict);
        j["reason"] = v.reason;
        emit(s, j.dump(2) + "\n", "consistency.json");
    } else if (quantity == "error-bound") {
        const double c = s.c.value_or(0.9);
        ordered_json j;
        j["p"] = p;
        j["c"] = c;
        j["lower_bound"] = theory::error_lower_bound(p, c);
        emit(s, j.dump(2) + "\n", "error_bound.json");
    } else if (quantity == "azuma") {
        theory::ConvergenceQuery q{s.epsilon.value_or(0.05), s.alpha.value_or(0.1), weights_of(s), schedule};
        const auto m = theory::azuma_min_samples(q, n < 1000000 ? 1000000 : n);
        ordered_json j;
        j["epsilon"] = q.epsilon;
        j["alpha"] = q.alpha;
        j["schedule"] = format_schedule(schedule);
        if (m) j["min_samples"] = *m;
        else j["min_samples"] = nullptr;
        emit(s, j.dump(2) + "\n", "azuma.json");
    } else {
        throw std::invalid_argument("unknown quantity '" + quantity +
                                    "' (efficiency, asymptotic, affine-variance, consistency, error-bound, azuma)");
    }
    return 0;
}

int cmd_oracle(const Settings& s) {
    const double p = s.p.value_or(0.4);
    const auto schedule = schedule_from_name(s.schedule.value_or("strong"));
    const std::size_t n = s.n.value_or(10);
    theory::OracleOptions options{weights_of(s), lambda_hat_of(s)};
    if (s.clip) {
        options.lambda_hat = clip_schedule(options.lambda_hat.value_or(schedule), ClipConfig{*s.clip});
    }
    const auto m = theory::brute_force_oracle(p, schedule, n, options);
    ordered_json j;
    j["p"] = p;
    j["schedule"] = format_schedule(schedule);
    j["n"] = n;
    j["mean_sample_mean"] = m.mean_sample_mean;
    j["mse_sample_mean"] = m.mse_sample_mean;
    j["efficiency_exact"] = theory::efficiency_exact(p, schedule, n);
    j["mean_affine"] = m.mean_affine;
    j["var_affine"] = m.var_affine;
    if (!options.lambda_hat) j["affine_variance"] = theory::affine_variance(p, schedule, options.weights, n);
    emit(s, j.dump(2) + "\n", "oracle.json");
    return 0;
}

int cmd_estimate_lambda(const Settings& s) {
    BinDataset data;
    if (s.input) {
        data = read_bin_dataset_csv(*s.input);
    } else {
        const std::size_t items = s.items.value_or(1);
        std::vector<double> prefs(items, s.p.value_or(0.4));
        data = simulate_bin_dataset(items, s.bins.value_or(20), s.per_bin.value_or(100), prefs,
                                    schedule_from_name(s.schedule.value_or("strong")), s.seed.value_or(1));
    }
    LambdaFitOptions options;
    const auto mode = s.mode.value_or("joint");
    if (mode == "joint") options.mode = FitMode::Joint;
    else if (mode == "plugin") options.mode = FitMode::Plugin;
    else throw std::invalid_argument("mode must be 'joint' or 'plugin'");
    const auto report = fit_lambda_mle(data, options);
    const auto dir = out_dir(s);
    if (s.write_data.value_or(false) && !s.input) write(dir / "bins.csv", bin_dataset_csv(data));
    write(dir / "fit.json", fit_report_json(report, options.mode));
    write(dir / "lambda_table.csv", lambda_table_csv(report, s.table_rows.value_or(data.per_bin)));
    if (report.degenerate) std::cerr << "warning: " << report.warning << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Herding-aware rating estimators: simulation, theory and lambda fitting"};
    app.require_subcommand(1);

    Command simulate, figure3, figure4, theory_cmd, estimate, oracle;

    auto* sim = app.add_subcommand("simulate", "simulate an ensemble and write traces and summaries");
    add_common(sim, simulate);
    sim->add_flag("--overlay", simulate.flags.overlay, "also write sample-mean variance against theory");

    auto* f3 = app.add_subcommand("figure3", "sample-mean convergence bands and threshold crossings");
    add_common(f3, figure3);

    auto* f4 = app.add_subcommand("figure4", "all estimators on common runs");
    add_common(f4, figure4);

    auto* th = app.add_subcommand("theory", "closed-form quantities");
    add_common(th, theory_cmd);
    th->add_option("--quantity", theory_cmd.flags.quantity,
                   "efficiency|asymptotic|affine-variance|consistency|error-bound|azuma");
    th->add_option("--n", theory_cmd.flags.n, "horizon");
    th->add_option("--weights", theory_cmd.flags.weights, "uniform|lambda");
    th->add_option("--epsilon", theory_cmd.flags.epsilon, "azuma tolerance");
    th->add_option("--alpha", theory_cmd.flags.alpha, "azuma failure probability");
    th->add_option("--c", theory_cmd.flags.c, "geometric ratio for the error bound");

    auto* el = app.add_subcommand("estimate-lambda", "fit a + (1-a) b^(i-1) to bin data");
    add_common(el, estimate);
    el->add_option("--input", estimate.flags.input, "CSV with columns item,bin,index,rating");
    el->add_option("--mode", estimate.flags.mode, "joint|plugin");
    el->add_option("--items", estimate.flags.items, "simulated items K");
    el->add_option("--bins", estimate.flags.bins, "simulated bins M");
    el->add_option("--per-bin", estimate.flags.per_bin, "simulated ratings per bin n");
    el->add_option("--table-rows", estimate.flags.table_rows, "rows of the lambda table");
    el->add_flag("--write-data", estimate.flags.write_data, "also write the simulated bins");

    auto* orc = app.add_subcommand("oracle", "exact moments by enumerating all 2^n sequences");
    add_common(orc, oracle);
    orc->add_option("--n", oracle.flags.n, "sequence length (<= 16)");
    orc->add_option("--weights", oracle.flags.weights, "uniform|lambda");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (sim->parsed()) return cmd_simulate(resolve(simulate));
        if (f3->parsed()) return cmd_figure3(resolve(figure3));
        if (f4->parsed()) return cmd_figure4(resolve(figure4));
        if (th->parsed()) return cmd_theory(resolve(theory_cmd));
        if (el->parsed()) return cmd_estimate_lambda(resolve(estimate));
        if (orc->parsed()) return cmd_oracle(resolve(oracle));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
