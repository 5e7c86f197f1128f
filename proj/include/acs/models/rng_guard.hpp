#pragma once

#include <ATen/CPUGeneratorImpl.h>
#include <torch/torch.h>

namespace acs::models {

/// Restores the global CPU generator on scope exit, so building throwaway
/// modules (clones, checkpoint loads) never perturbs seeded runs.
class GlobalRngGuard {
public:
    GlobalRngGuard() : state_(at::detail::getDefaultCPUGenerator().get_state()) {}
    ~GlobalRngGuard() {
        auto gen = at::detail::getDefaultCPUGenerator();
        gen.set_state(state_);
    }
    GlobalRngGuard(const GlobalRngGuard&) = delete;
    GlobalRngGuard& operator=(const GlobalRngGuard&) = delete;

private:
    at::Tensor state_;
};

}  // namespace acs::models
