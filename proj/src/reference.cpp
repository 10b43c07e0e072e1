// Serial reference implementations. They share no loop code with the
// OpenMP kernels beyond the process definition and the batch estimators.

#include <span>
#include <stdexcept>
#include <vector>

#include "bandwagon/simulator.hpp"
#include "bandwagon/theory.hpp"
#include "oracle_kernel.hpp"

namespace bandwagon::reference {

EnsembleResult simulate_ensemble(const EnsembleConfig& config, const EstimatorSetup& setup) {
    config.validate();
    setup.newton.validate();
    if (setup.estimators.empty()) throw std::invalid_argument("estimator set must be nonempty");
    EnsembleResult result;
    result.checkpoints = config.resolved_checkpoints();
    result.estimators = setup.estimators;
    result.runs = config.runs;
    result.traces.resize(config.runs * setup.estimators.size());
    const std::size_t n = config.samples_per_run;
    LambdaSchedule hat = setup.lambda_hat.value_or(config.schedule);
    if (setup.clip) hat = clip_schedule(hat, *setup.clip);
    const auto hat_table = hat.table(n);

    for (std::size_t r = 0; r < config.runs; ++r) {
        const auto seq = simulate_run(config.p, config.schedule, n, config.run_seed(r));
        const std::span<const std::uint8_t> ratings(seq.ratings);
        for (std::size_t e = 0; e < setup.estimators.size(); ++e) {
            auto& tr = result.traces[r * setup.estimators.size() + e];
            tr.run_id = r;
            tr.estimator = setup.estimators[e];
            std::vector<double> affine;
            if (tr.estimator == EstimatorKind::AffineUniform) {
                affine = affine_mean(ratings, hat, WeightScheme::uniform());
            } else if (tr.estimator == EstimatorKind::AffineWeighted) {
                affine = affine_mean(ratings, hat, WeightScheme::lambda_proportional());
            }
            for (auto cp : result.checkpoints) {
                const auto prefix = ratings.first(cp);
                double v = 0.0;
                switch (tr.estimator) {
                    case EstimatorKind::SampleMean: v = sample_mean(prefix); break;
                    case EstimatorKind::AffineUniform:
                    case EstimatorKind::AffineWeighted: v = affine[cp - 1]; break;
                    case EstimatorKind::Mle: v = mle_newton(prefix, hat_table, setup.newton).estimate; break;
                }
                tr.points.push_back({cp, v});
            }
        }
    }
    return result;
}


theory::OracleMoments brute_force_oracle(double p, const LambdaSchedule& schedule, std::size_t n,
                                         const theory::OracleOptions& options) {
    const detail::OracleInputs in(p, schedule, n, options);
    detail::OracleAccumulator acc(n);
    std::vector<unsigned> prefix(n + 1, 0);
    for (std::uint32_t bits = 0; bits < (1u << n); ++bits) acc.add(in, bits, prefix);
    return acc.finish(in);
}

}  // namespace bandwagon::reference
