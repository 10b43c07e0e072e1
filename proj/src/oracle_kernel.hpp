#pragma once

// Per-sequence accumulation shared by the parallel and serial oracles.

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "bandwagon/theory.hpp"

namespace bandwagon::detail {

struct OracleInputs {
    double p;
    std::size_t n;
    std::vector<double> lambda;
    std::vector<double> lambda_hat;
    std::vector<double> weights;
    double weight_total;

    OracleInputs(double p_, const LambdaSchedule& schedule, std::size_t n_, const theory::OracleOptions& opt)
        : p(p_), n(n_) {
        if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("p must be in (0,1)");
        if (n < 1) throw std::invalid_argument("oracle needs n >= 1");
        if (n > theory::kOracleMaxN) throw std::invalid_argument("oracle limited to n <= 16 (2^n enumeration)");
        lambda = schedule.table(n);
        lambda_hat = opt.lambda_hat ? opt.lambda_hat->table(n) : lambda;
        weight_total = 0.0;
        for (std::size_t i = 1; i <= n; ++i) {
            if (!(lambda_hat[i - 1] > 0.0)) throw std::invalid_argument("oracle affine moments need lambda-hat > 0");
            weights.push_back(opt.weights.at(i, lambda_hat[i - 1]));
            weight_total += weights.back();
        }
    }
};

struct OracleAccumulator {
    double total_prob = 0.0;
    double mean_dev = 0.0;     // E[p-bar_n - p]
    double mse = 0.0;          // E[(p-bar_n - p)^2]
    double affine_dev = 0.0;   // E[p-hat_n - p]
    double affine_dev2 = 0.0;  // E[(p-hat_n - p)^2]
    std::vector<std::vector<double>> cond_prob;
    std::vector<std::vector<double>> cond_num;

    explicit OracleAccumulator(std::size_t n) : cond_prob(n), cond_num(n) {
        for (std::size_t m = 1; m < n; ++m) {
            cond_prob[m].assign(m + 1, 0.0);
            cond_num[m].assign(m + 1, 0.0);
        }
    }

    /// Sequence `bits`: bit i-1 holds r_i.
    void add(const OracleInputs& in, std::uint32_t bits, std::vector<unsigned>& prefix_sums) {
        double prob = 1.0;
        unsigned sum = 0;
        double affine = 0.0;
        for (std::size_t i = 1; i <= in.n; ++i) {
            const double mean_prev = i == 1 ? 0.0 : static_cast<double>(sum) / static_cast<double>(i - 1);
            const double q = in.lambda[i - 1] * in.p + (1.0 - in.lambda[i - 1]) * mean_prev;
            const unsigned r = (bits >> (i - 1)) & 1u;
            prob *= r ? q : 1.0 - q;
            const double lam_hat = in.lambda_hat[i - 1];
            affine += in.weights[i - 1] * ((static_cast<double>(r) - (1.0 - lam_hat) * mean_prev) / lam_hat);
            sum += r;
            prefix_sums[i] = sum;
        }
        const double mean = static_cast<double>(sum) / static_cast<double>(in.n);
        const double p_hat = affine / in.weight_total;
        total_prob += prob;
        mean_dev += prob * (mean - in.p);
        mse += prob * (mean - in.p) * (mean - in.p);
        affine_dev += prob * (p_hat - in.p);
        affine_dev2 += prob * (p_hat - in.p) * (p_hat - in.p);
        for (std::size_t m = 1; m < in.n; ++m) {
            cond_prob[m][prefix_sums[m]] += prob;
            cond_num[m][prefix_sums[m]] += prob * mean;
        }
    }

    void merge(const OracleAccumulator& o) {
        total_prob += o.total_prob;
        mean_dev += o.mean_dev;
        mse += o.mse;
        affine_dev += o.affine_dev;
        affine_dev2 += o.affine_dev2;
        for (std::size_t m = 1; m < cond_prob.size(); ++m) {
            for (std::size_t s = 0; s <= m; ++s) {
                cond_prob[m][s] += o.cond_prob[m][s];
                cond_num[m][s] += o.cond_num[m][s];
            }
        }
    }

    theory::OracleMoments finish(const OracleInputs& in) const {
        theory::OracleMoments out;
        out.n = in.n;
        out.mean_sample_mean = in.p + mean_dev;
        out.mse_sample_mean = mse;
        out.mean_affine = in.p + affine_dev;
        out.var_affine = affine_dev2 - affine_dev * affine_dev;
        out.prob_prefix_sum = cond_prob;
        out.cond_sample_mean.resize(in.n);
        for (std::size_t m = 1; m < in.n; ++m) {
            out.cond_sample_mean[m].resize(m + 1);
            for (std::size_t s = 0; s <= m; ++s) {
                out.cond_sample_mean[m][s] = cond_prob[m][s] > 0.0 ? cond_num[m][s] / cond_prob[m][s]
                                                                  : std::numeric_limits<double>::quiet_NaN();
            }
        }
        return out;
    }
};

}  // namespace bandwagon::detail
