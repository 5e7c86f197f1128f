#include "acs/data/split.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_map>

#include "acs/data/rng.hpp"
#include "acs/errors.hpp"

namespace acs::data {

std::array<int, 3> split_counts(int n_subjects, const SplitSpec& split) {
    const double total = split.train_fraction + split.test_fraction + split.val_fraction;
    if (std::abs(total - 1.0) > 1e-9) throw InvalidArgument("split fractions must sum to 1");
    if (split.train_fraction < 0.0 || split.test_fraction < 0.0 || split.val_fraction < 0.0) {
        throw InvalidArgument("split fractions must be non-negative");
    }
    if (n_subjects < 10) {
        throw InvalidArgument("splitting needs at least 10 subjects, got " + std::to_string(n_subjects));
    }
    const int train = static_cast<int>(std::lround(split.train_fraction * n_subjects));
    const int test = static_cast<int>(std::lround(split.test_fraction * n_subjects));
    return {train, test, n_subjects - train - test};
}

SplitResult split_dataset(const Dataset& ds, const SplitSpec& split) {
    std::vector<int> subjects = ds.subject_ids();
    const auto counts = split_counts(static_cast<int>(subjects.size()), split);

    auto rng = keyed_engine({split.seed, 0x5917});
    std::shuffle(subjects.begin(), subjects.end(), rng);

    std::unordered_map<int, int> part_of;
    for (std::size_t i = 0; i < subjects.size(); ++i) {
        const int idx = static_cast<int>(i);
        part_of[subjects[i]] = idx < counts[0] ? 0 : (idx < counts[0] + counts[1] ? 1 : 2);
    }

    SplitResult out;
    Dataset* parts[3] = {&out.train, &out.test, &out.val};
    for (Dataset* p : parts) {
        p->name = ds.name;
        p->domain_id = ds.domain_id;
    }
    for (const auto& slice : ds.slices) parts[part_of.at(slice.subject_id)]->slices.push_back(slice);
    return out;
}

}  // namespace acs::data
