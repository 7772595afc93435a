#pragma once

#include <limits>

#include <omp.h>

namespace diver::kernels {

template <class F>
SubsetMin min_over_subsets_serial(std::size_t m, std::size_t k, F&& objective) {
    const std::uint64_t total = binomial(m, k);
    std::vector<std::size_t> subset(k);
    SubsetMin best{0, std::numeric_limits<double>::infinity()};
    if (total == 0) {
        return best;
    }
    // lexicographic successor instead of unranking every subset
    for (std::size_t i = 0; i < k; ++i) {
        subset[i] = i;
    }
    for (std::uint64_t rank = 0; rank < total; ++rank) {
        const double v = objective(std::span<const std::size_t>(subset));
        if (v < best.value) {
            best = {rank, v};
        }
        std::size_t i = k;
        while (i > 0 && subset[i - 1] == m - k + i - 1) {
            --i;
        }
        if (i == 0) {
            break;
        }
        ++subset[i - 1];
        for (std::size_t j = i; j < k; ++j) {
            subset[j] = subset[j - 1] + 1;
        }
    }
    return best;
}

template <class F>
SubsetMin min_over_subsets_omp(std::size_t m, std::size_t k, F&& objective) {
    const std::uint64_t total = binomial(m, k);
    SubsetMin best{0, std::numeric_limits<double>::infinity()};
    if (total == 0) {
        return best;
    }
    const auto count = static_cast<std::int64_t>(total);
#pragma omp parallel
    {
        SubsetMin local{0, std::numeric_limits<double>::infinity()};
        std::vector<std::size_t> subset(k);
#pragma omp for schedule(dynamic, 16) nowait
        for (std::int64_t rank = 0; rank < count; ++rank) {
            unrank_combination(static_cast<std::uint64_t>(rank), m, k, subset);
            const double v = objective(std::span<const std::size_t>(subset));
            if (v < local.value ||
                (v == local.value && static_cast<std::uint64_t>(rank) < local.rank)) {
                local = {static_cast<std::uint64_t>(rank), v};
            }
        }
#pragma omp critical(diver_subset_min)
        {
            if (local.value < best.value ||
                (local.value == best.value && local.rank < best.rank)) {
                best = local;
            }
        }
    }
    return best;
}

} // namespace diver::kernels
