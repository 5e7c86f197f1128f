#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace acs::data {

/// Engine seeded from an ordered tuple of keys, so independent streams
/// (per subject, per epoch, per purpose) never depend on draw order.
inline std::mt19937_64 keyed_engine(std::initializer_list<std::uint64_t> keys) {
    std::vector<std::uint32_t> words;
    words.reserve(keys.size() * 2);
    for (std::uint64_t k : keys) {
        words.push_back(static_cast<std::uint32_t>(k & 0xffffffffU));
        words.push_back(static_cast<std::uint32_t>(k >> 32));
    }
    std::seed_seq seq(words.begin(), words.end());
    return std::mt19937_64(seq);
}

}  // namespace acs::data
