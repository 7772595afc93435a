#pragma once

#include <algorithm>
#include <random>

#include "diver/kernels.hpp"

namespace diver::kernels::detail {

inline double unit_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Samples a transition out of the row whose header sits at `row`.
inline const WalkCell& next_cell(const WalkTable& t, std::uint32_t row, std::mt19937_64& rng) {
    const WalkCell* header = t.cells.data() + row;
    const WalkCell* it = header + 1;
    const WalkCell* last = it + header->next - 1;
    const double u = unit_uniform(rng) * header->cumulative;
    // rows are short; a linear scan beats bisection and hits the leading self-loop first
    while (it < last && it->cumulative <= u) {
        ++it;
    }
    return *it;
}

} // namespace diver::kernels::detail
