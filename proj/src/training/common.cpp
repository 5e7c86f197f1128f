#include "acs/training/common.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "acs/data/batching.hpp"

namespace acs::training {

std::vector<MixedBatch> interleaved_batches(const std::vector<std::size_t>& dataset_sizes,
                                            const std::vector<int>& dataset_keys, int batch_size,
                                            std::uint64_t seed, int epoch) {
    if (dataset_sizes.empty()) throw InvalidArgument("no datasets to batch");
    if (dataset_keys.size() != dataset_sizes.size()) throw InvalidArgument("one key per dataset is required");
    const int per_dataset = std::max(1, batch_size / static_cast<int>(dataset_sizes.size()));

    std::vector<std::vector<data::Batch>> parts;
    std::size_t steps = 0;
    for (std::size_t k = 0; k < dataset_sizes.size(); ++k) {
        const std::uint64_t key_seed = seed * 1000003ULL + static_cast<std::uint64_t>(dataset_keys[k]);
        parts.push_back(data::make_batches(dataset_sizes[k], per_dataset, key_seed, epoch));
        steps = std::max(steps, parts.back().size());
    }
    std::vector<MixedBatch> out(steps);
    for (std::size_t s = 0; s < steps; ++s) {
        out[s].per_dataset.resize(parts.size());
        for (std::size_t k = 0; k < parts.size(); ++k) {
            if (s < parts[k].size()) out[s].per_dataset[k] = parts[k][s];
        }
    }
    return out;
}

TensorBatch collate(const std::vector<const data::Dataset*>& datasets, const MixedBatch& batch, torch::Dtype dtype) {
    std::int64_t n = 0;
    for (const auto& idx : batch.per_dataset) n += static_cast<std::int64_t>(idx.size());
    if (n == 0) throw InvalidArgument("empty batch");
    const auto& first = datasets.front()->slices.front().image;
    const auto h = first.height;
    const auto w = first.width;

    auto images = torch::empty({n, 1, h, w}, torch::kFloat32);
    auto masks = torch::empty({n, 1, h, w}, torch::kFloat32);
    std::vector<std::int64_t> domains;
    domains.reserve(static_cast<std::size_t>(n));
    float* img = images.data_ptr<float>();
    float* msk = masks.data_ptr<float>();
    std::int64_t row = 0;
    for (std::size_t k = 0; k < batch.per_dataset.size(); ++k) {
        for (std::size_t i : batch.per_dataset[k]) {
            const auto& s = datasets[k]->slices.at(i);
            if (s.image.height != h || s.image.width != w) throw ShapeError("slices in one batch differ in shape");
            std::copy(s.image.values.begin(), s.image.values.end(), img + row * h * w);
            std::transform(s.mask.values.begin(), s.mask.values.end(), msk + row * h * w,
                           [](std::uint8_t m) { return static_cast<float>(m); });
            domains.push_back(static_cast<std::int64_t>(k));
            ++row;
        }
    }
    return {images.to(dtype), masks.to(dtype), torch::tensor(domains, torch::kLong)};
}

TensorBatch collate_range(const data::Dataset& ds, std::size_t begin, std::size_t end, torch::Dtype dtype) {
    MixedBatch b;
    b.per_dataset.emplace_back();
    for (std::size_t i = begin; i < end; ++i) b.per_dataset[0].push_back(i);
    std::vector<const data::Dataset*> sets{&ds};
    return collate(sets, b, dtype);
}

losses::OverlapCounts evaluate(const LogitsFn& logits, const data::Dataset& ds, double threshold) {
    torch::NoGradGuard no_grad;
    losses::OverlapCounts total;
    constexpr std::size_t kChunk = 64;
    for (std::size_t begin = 0; begin < ds.size(); begin += kChunk) {
        const auto end = std::min(ds.size(), begin + kChunk);
        const auto batch = collate_range(ds, begin, end);
        const auto prob = torch::sigmoid(logits(batch.images));
        total += losses::overlap(losses::threshold(prob, threshold), batch.masks);
    }
    return total;
}

void TrainingLog::append(const TrainingLog& other) {
    steps.insert(steps.end(), other.steps.begin(), other.steps.end());
    evals.insert(evals.end(), other.evals.begin(), other.evals.end());
}

std::string format_number(double v) {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
    return os.str();
}

std::string TrainingLog::steps_csv() const {
    std::ostringstream os;
    os << "step,stage,epoch,seg,vae,gan_g,lr,adv_e,d_d,d_c,reg\n";
    for (const auto& r : steps) {
        os << r.step << ',' << r.stage << ',' << r.epoch;
        for (double v : {r.seg, r.vae, r.gan_g, r.lr, r.adv_e, r.d_d, r.d_c, r.reg}) os << ',' << format_number(v);
        os << '\n';
    }
    return os.str();
}

std::string TrainingLog::evals_csv() const {
    std::ostringstream os;
    os << "stage,epoch,dataset,split,iou,dice\n";
    for (const auto& r : evals) {
        os << r.stage << ',' << r.epoch << ',' << r.dataset << ',' << r.split << ',' << format_number(r.iou) << ','
           << format_number(r.dice) << '\n';
    }
    return os.str();
}

void TrainingLog::write(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    std::ofstream steps_out(dir / "train_log.csv", std::ios::binary | std::ios::trunc);
    std::ofstream evals_out(dir / "eval_log.csv", std::ios::binary | std::ios::trunc);
    if (!steps_out || !evals_out) throw IoError("cannot write logs to " + dir.string());
    steps_out << steps_csv();
    evals_out << evals_csv();
}

NonFiniteLossError::NonFiniteLossError(const std::string& component, double value)
    : Error("loss component '" + component + "' is not finite (" + format_number(value) + ")"),
      component_(component) {}

void check_finite(const std::string& component, double value) {
    if (!std::isfinite(value)) throw NonFiniteLossError(component, value);
}

}  // namespace acs::training
