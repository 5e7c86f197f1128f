#pragma once

#include <array>

#include "acs/data/types.hpp"

namespace acs::data {

/// Number of subjects assigned to (train, test, val) for n subjects.
std::array<int, 3> split_counts(int n_subjects, const SplitSpec& split);

/// Subject-disjoint partition. Slice order inside each part follows `ds`.
SplitResult split_dataset(const Dataset& ds, const SplitSpec& split);

}  // namespace acs::data
