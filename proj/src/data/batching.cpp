#include "acs/data/batching.hpp"

#include <algorithm>
#include <numeric>

#include "acs/data/rng.hpp"
#include "acs/errors.hpp"

namespace acs::data {

std::vector<Batch> make_batches(std::size_t n_slices, int batch_size, std::uint64_t seed, int epoch) {
    if (batch_size < 1) throw InvalidArgument("batch_size must be >= 1");
    if (n_slices == 0) throw InvalidArgument("cannot batch an empty dataset");

    std::vector<std::size_t> order(n_slices);
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto rng = keyed_engine({seed, static_cast<std::uint64_t>(epoch), 0xBA7C});
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<Batch> batches;
    const auto step = static_cast<std::size_t>(batch_size);
    for (std::size_t start = 0; start < n_slices; start += step) {
        const std::size_t end = std::min(n_slices, start + step);
        batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                             order.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return batches;
}

}  // namespace acs::data
