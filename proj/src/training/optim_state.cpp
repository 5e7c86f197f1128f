#include "acs/training/optim_state.hpp"

#include <ATen/CPUGeneratorImpl.h>

#include <sstream>

#include "acs/errors.hpp"

namespace acs::training {

OptimState::OptimState(OptimConfig cfg, std::uint64_t seed)
    : cfg_(cfg), rng_(at::detail::createCPUGenerator(seed)) {}

void OptimState::add_group(const std::string& name, const models::NamedTensors& params) {
    std::vector<torch::Tensor> tensors;
    std::vector<std::string> names;
    for (const auto& [n, t] : params) {
        tensors.push_back(t);
        names.push_back(n);
    }
    auto options = torch::optim::AdamOptions(cfg_.lr).betas({cfg_.beta1, cfg_.beta2}).eps(cfg_.eps);
    optimizers_[name] = std::make_unique<torch::optim::Adam>(tensors, options);
    names_[name] = std::move(names);
}

torch::optim::Adam& OptimState::group(const std::string& name) {
    const auto it = optimizers_.find(name);
    if (it == optimizers_.end()) throw InvalidArgument("no optimiser group '" + name + "'");
    return *it->second;
}

const std::vector<std::string>& OptimState::group_names(const std::string& name) const {
    const auto it = names_.find(name);
    if (it == names_.end()) throw InvalidArgument("no optimiser group '" + name + "'");
    return it->second;
}

void OptimState::reseed(std::uint64_t seed) { rng_ = at::detail::createCPUGenerator(seed); }

void OptimState::save(const std::filesystem::path& path) {
    torch::serialize::OutputArchive archive;
    for (auto& [name, opt] : optimizers_) {
        torch::serialize::OutputArchive sub;
        opt->save(sub);
        archive.write("optim/" + name, sub);
    }
    archive.write("step", torch::tensor(step_, torch::kLong));
    archive.write("rng", rng_.get_state());
    archive.save_to(path.string());
}

void OptimState::load(const std::filesystem::path& path) {
    torch::serialize::InputArchive archive;
    archive.load_from(path.string());
    for (auto& [name, opt] : optimizers_) {
        torch::serialize::InputArchive sub;
        if (!archive.try_read("optim/" + name, sub)) throw IoError("optimiser state lacks group '" + name + "'");
        opt->load(sub);
    }
    torch::Tensor step;
    archive.read("step", step);
    step_ = step.item<std::int64_t>();
    torch::Tensor rng_state;
    archive.read("rng", rng_state);
    rng_.set_state(rng_state);
}

std::string OptimState::serialize() {
    torch::serialize::OutputArchive archive;
    for (auto& [name, opt] : optimizers_) {
        torch::serialize::OutputArchive sub;
        opt->save(sub);
        archive.write("optim/" + name, sub);
    }
    archive.write("step", torch::tensor(step_, torch::kLong));
    archive.write("rng", rng_.get_state());
    std::ostringstream os;
    archive.save_to(os);
    return os.str();
}

}  // namespace acs::training
