#include "acs/training/data_pool.hpp"

#include <algorithm>

#include "acs/data/io.hpp"
#include "acs/data/resample.hpp"
#include "acs/data/split.hpp"
#include "acs/data/synthetic.hpp"

namespace acs::training {

const char* split_name(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Test: return "test";
        case Split::Val: return "val";
    }
    return "?";
}

void DataPool::add(const std::string& name, data::SplitResult splits) { sets_[name] = std::move(splits); }

std::vector<std::string> DataPool::names() const {
    std::vector<std::string> out;
    for (const auto& [name, _] : sets_) out.push_back(name);
    return out;
}

int DataPool::domain_id(const std::string& name) const {
    const auto it = sets_.find(name);
    if (it == sets_.end()) throw InvalidArgument("unknown dataset '" + name + "'");
    return it->second.train.domain_id;
}

const data::Dataset& DataPool::get(const std::string& name, Split split) {
    const auto it = sets_.find(name);
    if (it == sets_.end()) throw InvalidArgument("unknown dataset '" + name + "'");
    if (split != Split::Test && released(name)) {
        throw DataReleasedError("dataset '" + name + "' was released and its " + split_name(split) +
                                " split is no longer available");
    }
    log_.push_back({stage_, name, split});
    switch (split) {
        case Split::Train: return it->second.train;
        case Split::Test: return it->second.test;
        case Split::Val: return it->second.val;
    }
    return it->second.train;
}

const data::Dataset& DataPool::train(const std::string& name) { return get(name, Split::Train); }
const data::Dataset& DataPool::val(const std::string& name) { return get(name, Split::Val); }
const data::Dataset& DataPool::test(const std::string& name) { return get(name, Split::Test); }

void DataPool::release(const std::string& name) {
    if (!contains(name)) throw InvalidArgument("unknown dataset '" + name + "'");
    released_.insert(name);
}

void DataPool::release_all_except(const std::vector<std::string>& keep) {
    for (const auto& [name, _] : sets_) {
        if (std::find(keep.begin(), keep.end(), name) == keep.end()) released_.insert(name);
    }
}

void DataPool::reset() {
    released_.clear();
    log_.clear();
    stage_ = 0;
}

DataPool build_data_pool(const TrainConfig& cfg) {
    DataPool pool;
    const data::Shape shape{cfg.data.height, cfg.data.width};
    for (std::size_t i = 0; i < cfg.data.names.size(); ++i) {
        const auto& name = cfg.data.names[i];
        const int domain_id = static_cast<int>(i);
        data::Dataset ds;
        if (cfg.data.root.empty()) {
            ds = data::generate_synthetic_domain(cfg.data.domains.at(name), cfg.data.n_subjects,
                                                 cfg.data.slices_per_subject, shape, cfg.data.seed + 1000 * i, name,
                                                 domain_id);
        } else {
            ds = data::conform_dataset(data::load_dataset(std::filesystem::path(cfg.data.root) / name), shape);
            ds.name = name;
            ds.domain_id = domain_id;
            for (auto& s : ds.slices) s.domain_id = domain_id;
        }
        data::SplitSpec split;
        split.seed = cfg.data.split_seed + i;
        pool.add(name, data::split_dataset(ds, split));
    }
    return pool;
}

}  // namespace acs::training
