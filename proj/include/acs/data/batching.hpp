#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "acs/data/types.hpp"

namespace acs::data {

using Batch = std::vector<std::size_t>;

/// Shuffled index batches covering every slice once. The permutation is a
/// pure function of (seed, epoch); the final partial batch is kept.
std::vector<Batch> make_batches(std::size_t n_slices, int batch_size, std::uint64_t seed, int epoch);

inline std::vector<Batch> make_batches(const Dataset& ds, int batch_size, std::uint64_t seed, int epoch) {
    return make_batches(ds.size(), batch_size, seed, epoch);
}

}  // namespace acs::data
