#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "acs/data/types.hpp"
#include "acs/errors.hpp"
#include "acs/training/config.hpp"

namespace acs::training {

/// Raised when training code touches a dataset that is no longer available.
class DataReleasedError : public Error {
public:
    using Error::Error;
};

enum class Split { Train, Test, Val };
const char* split_name(Split s);

struct DataAccess {
    int stage = 0;
    std::string dataset;
    Split split = Split::Train;
};

/// Named, split datasets plus an audit log of every access. Releasing a
/// dataset revokes its train/val splits; test splits stay readable because
/// evaluation covers every dataset at every evaluation epoch.
class DataPool {
public:
    DataPool() = default;
    void add(const std::string& name, data::SplitResult splits);

    [[nodiscard]] bool contains(const std::string& name) const { return sets_.count(name) != 0; }
    [[nodiscard]] std::vector<std::string> names() const;
    /// Global domain id of a dataset.
    [[nodiscard]] int domain_id(const std::string& name) const;

    const data::Dataset& train(const std::string& name);
    const data::Dataset& val(const std::string& name);
    const data::Dataset& test(const std::string& name);

    void release(const std::string& name);
    void release_all_except(const std::vector<std::string>& keep);
    [[nodiscard]] bool released(const std::string& name) const { return released_.count(name) != 0; }
    /// Makes every dataset available again (new run on the same pool).
    void reset();

    void set_stage(int stage) { stage_ = stage; }
    [[nodiscard]] int stage() const { return stage_; }
    [[nodiscard]] const std::vector<DataAccess>& access_log() const { return log_; }

private:
    const data::Dataset& get(const std::string& name, Split split);

    std::map<std::string, data::SplitResult> sets_;
    std::set<std::string> released_;
    std::vector<DataAccess> log_;
    int stage_ = 0;
};

/// Builds the pool described by cfg.data: synthetic generation when
/// data.root is empty, otherwise loads <root>/<name> and conforms it to the
/// configured slice shape. Domain ids follow the order of cfg.data.names.
DataPool build_data_pool(const TrainConfig& cfg);

}  // namespace acs::training
