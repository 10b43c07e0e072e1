#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

#include "bandwagon/core_model.hpp"

namespace support {

using bandwagon::LambdaSchedule;

/// Random constructible schedule of any analytic kind or an explicit list of length `len`.
inline LambdaSchedule random_schedule(std::mt19937_64& g, std::size_t len = 16) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    switch (g() % 5) {
        case 0: return LambdaSchedule::constant(u(g));
        case 1: return LambdaSchedule::geometric_affine(u(g), 0.05 + 0.9 * u(g));
        case 2: return LambdaSchedule::geometric(0.05 + 0.95 * u(g));
        case 3: return LambdaSchedule::power_law(2.0 * u(g));
        default: {
            std::vector<double> v{1.0};
            for (std::size_t i = 1; i < len; ++i) v.push_back(v.back() * (0.5 + 0.5 * u(g)));
            return LambdaSchedule::explicit_values(v);
        }
    }
}

/// Same as random_schedule but with every lambda_i bounded away from 0.
inline LambdaSchedule random_positive_schedule(std::mt19937_64& g, std::size_t len = 16) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    switch (g() % 3) {
        case 0: return LambdaSchedule::constant(0.2 + 0.8 * u(g));
        case 1: return LambdaSchedule::geometric_affine(0.2 + 0.8 * u(g), 0.05 + 0.9 * u(g));
        default: {
            std::vector<double> v{1.0};
            for (std::size_t i = 1; i < len; ++i) v.push_back(v.back() * (0.8 + 0.2 * u(g)));
            return LambdaSchedule::explicit_values(v);
        }
    }
}

/// Distribution of the prefix sum S_i, i = 0..n, as a Markov chain on s.
/// dist[i][s] = Pr(S_i = s).
inline std::vector<std::vector<double>> prefix_sum_distribution(double p, const LambdaSchedule& lam, std::size_t n,
                                                                std::size_t start_m = 0, std::size_t start_s = 0) {
    std::vector<std::vector<double>> dist(n + 1);
    dist[start_m].assign(start_m + 1, 0.0);
    dist[start_m][start_s] = 1.0;
    for (std::size_t i = start_m + 1; i <= n; ++i) {
        dist[i].assign(i + 1, 0.0);
        const double l = lam.at(i);
        for (std::size_t s = 0; s < i; ++s) {
            const double mass = dist[i - 1][s];
            if (mass == 0.0) continue;
            const double prev = i == 1 ? 0.0 : static_cast<double>(s) / static_cast<double>(i - 1);
            const double q = l * p + (1.0 - l) * prev;
            dist[i][s + 1] += mass * q;
            dist[i][s] += mass * (1.0 - q);
        }
    }
    return dist;
}

/// E[(p-bar_n - p)^2] from the chain.
inline double chain_mse(double p, const LambdaSchedule& lam, std::size_t n) {
    const auto d = prefix_sum_distribution(p, lam, n);
    double acc = 0.0;
    for (std::size_t s = 0; s <= n; ++s) {
        const double e = static_cast<double>(s) / static_cast<double>(n) - p;
        acc += d[n][s] * e * e;
    }
    return acc;
}

/// E[p-bar_n | S_m = s] from the chain started at (m, s).
inline double chain_conditional_mean(double p, const LambdaSchedule& lam, std::size_t m, std::size_t s,
                                     std::size_t n) {
    const auto d = prefix_sum_distribution(p, lam, n, m, s);
    double acc = 0.0;
    for (std::size_t k = 0; k <= n; ++k) acc += d[n][k] * static_cast<double>(k) / static_cast<double>(n);
    return acc;
}

/// Recursive enumeration of every sequence, calling visit(probability, ratings).
inline void enumerate(double p, const LambdaSchedule& lam, std::size_t n,
                      const std::function<void(double, const std::vector<int>&)>& visit) {
    std::vector<int> r;
    std::function<void(double, std::size_t)> rec = [&](double prob, std::size_t sum) {
        if (r.size() == n) {
            visit(prob, r);
            return;
        }
        const std::size_t i = r.size() + 1;
        const double prev = i == 1 ? 0.0 : static_cast<double>(sum) / static_cast<double>(i - 1);
        const double q = lam.at(i) * p + (1.0 - lam.at(i)) * prev;
        r.push_back(1);
        rec(prob * q, sum + 1);
        r.back() = 0;
        rec(prob * (1.0 - q), sum);
        r.pop_back();
    };
    rec(1.0, 0);
}

/// Exact mean and variance of the affine weighted mean (weights from `weight(i, lambda_hat_i)`).
inline std::pair<double, double> enumerated_affine_moments(double p, const LambdaSchedule& lam,
                                                           const LambdaSchedule& lam_hat, std::size_t n,
                                                           const std::function<double(std::size_t, double)>& weight) {
    double m1 = 0.0;
    double m2 = 0.0;
    enumerate(p, lam, n, [&](double prob, const std::vector<int>& r) {
        double num = 0.0;
        double den = 0.0;
        double sum = 0.0;
        for (std::size_t i = 1; i <= n; ++i) {
            const double lh = lam_hat.at(i);
            const double prev = i == 1 ? 0.0 : sum / static_cast<double>(i - 1);
            const double w = weight(i, lh);
            num += w * (r[i - 1] - (1.0 - lh) * prev) / lh;
            den += w;
            sum += r[i - 1];
        }
        const double est = num / den;
        m1 += prob * est;
        m2 += prob * est * est;
    });
    return {m1, m2 - m1 * m1};
}

/// Mean and standard error of a sample.
struct MeanSe {
    double mean;
    double se;
};

inline MeanSe mean_se(const std::vector<double>& x) {
    double m = 0.0;
    for (double v : x) m += v;
    m /= static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    const double var = ss / static_cast<double>(x.size() - 1);
    return {m, std::sqrt(var / static_cast<double>(x.size()))};
}

}  // namespace support
