#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace acs::data {

struct Shape {
    std::int64_t height = 0;
    std::int64_t width = 0;

    friend bool operator==(const Shape&, const Shape&) = default;
};

/// Row-major 2-D array.
template <typename T>
struct Grid {
    std::int64_t height = 0;
    std::int64_t width = 0;
    std::vector<T> values;

    Grid() = default;
    Grid(std::int64_t h, std::int64_t w, T fill = T{})
        : height(h), width(w), values(static_cast<std::size_t>(h * w), fill) {}

    [[nodiscard]] Shape shape() const { return {height, width}; }
    [[nodiscard]] std::size_t size() const { return values.size(); }

    T& at(std::int64_t row, std::int64_t col) { return values[static_cast<std::size_t>(row * width + col)]; }
    const T& at(std::int64_t row, std::int64_t col) const {
        return values[static_cast<std::size_t>(row * width + col)];
    }

    friend bool operator==(const Grid&, const Grid&) = default;
};

using Image = Grid<float>;
using Mask = Grid<std::uint8_t>;

/// One 2-D grayscale slice with its binary foreground mask.
struct LabeledSlice {
    Image image;
    Mask mask;
    int domain_id = 0;
    int subject_id = 0;

    friend bool operator==(const LabeledSlice&, const LabeledSlice&) = default;
};

/// Acquisition characteristics of a synthetic domain. Applied to images only.
struct DomainSpec {
    double intensity_gain = 1.0;
    double intensity_offset = 0.0;
    double noise_sigma = 0.0;
    double bias_field_strength = 0.0;
    double texture_frequency = 1.0;
    double lesion_probability = 0.0;

    friend bool operator==(const DomainSpec&, const DomainSpec&) = default;
};

struct Dataset {
    std::string name;
    int domain_id = 0;
    std::vector<LabeledSlice> slices;

    [[nodiscard]] std::vector<int> subject_ids() const;
    [[nodiscard]] std::size_t size() const { return slices.size(); }
    [[nodiscard]] bool empty() const { return slices.empty(); }

    friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct SplitSpec {
    double train_fraction = 0.70;
    double test_fraction = 0.20;
    double val_fraction = 0.10;
    std::uint64_t seed = 0;
};

struct SplitResult {
    Dataset train;
    Dataset test;
    Dataset val;
};

/// Throws if any LabeledSlice invariant (matching shapes, binary mask,
/// intensities in [0,1]) is violated.
void validate_slice(const LabeledSlice& slice);

}  // namespace acs::data
