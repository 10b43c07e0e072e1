#include <algorithm>
#include <cstdint>
#include <vector>

#include "bandwagon/theory.hpp"
#include "oracle_kernel.hpp"

namespace bandwagon::theory {

OracleMoments brute_force_oracle(double p, const LambdaSchedule& schedule, std::size_t n,
                                 const OracleOptions& options) {
    const detail::OracleInputs in(p, schedule, n, options);
    const std::uint32_t total = 1u << n;
    // Chunk boundaries depend on n only, so the reduce order is fixed.
    const std::uint32_t chunks = std::min<std::uint32_t>(64, total);
    const std::uint32_t per_chunk = total / chunks;
    std::vector<detail::OracleAccumulator> partial(chunks, detail::OracleAccumulator(n));

#pragma omp parallel for schedule(static)
    for (std::int64_t c = 0; c < static_cast<std::int64_t>(chunks); ++c) {
        std::vector<unsigned> prefix(n + 1, 0);
        auto& acc = partial[static_cast<std::size_t>(c)];
        const auto begin = static_cast<std::uint32_t>(c) * per_chunk;
        for (std::uint32_t bits = begin; bits < begin + per_chunk; ++bits) acc.add(in, bits, prefix);
    }

    detail::OracleAccumulator total_acc(n);
    for (const auto& part : partial) total_acc.merge(part);
    return total_acc.finish(in);
}

}  // namespace bandwagon::theory
