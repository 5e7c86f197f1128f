#include "acs/data/types.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "acs/errors.hpp"

namespace acs::data {

std::vector<int> Dataset::subject_ids() const {
    std::set<int> ids;
    for (const auto& s : slices) ids.insert(s.subject_id);
    return {ids.begin(), ids.end()};
}

void validate_slice(const LabeledSlice& slice) {
    if (slice.image.shape() != slice.mask.shape()) {
        throw ShapeError("image is " + std::to_string(slice.image.height) + "x" + std::to_string(slice.image.width) +
                         " but mask is " + std::to_string(slice.mask.height) + "x" +
                         std::to_string(slice.mask.width));
    }
    if (slice.image.size() != static_cast<std::size_t>(slice.image.height * slice.image.width) ||
        slice.mask.size() != static_cast<std::size_t>(slice.mask.height * slice.mask.width)) {
        throw ShapeError("grid storage does not match its declared shape");
    }
    if (std::any_of(slice.mask.values.begin(), slice.mask.values.end(), [](auto v) { return v > 1; })) {
        throw InvalidArgument("mask values must be 0 or 1");
    }
    if (std::any_of(slice.image.values.begin(), slice.image.values.end(),
                    [](float v) { return !std::isfinite(v) || v < 0.0F || v > 1.0F; })) {
        throw InvalidArgument("image intensities must lie in [0,1]");
    }
}

}  // namespace acs::data
