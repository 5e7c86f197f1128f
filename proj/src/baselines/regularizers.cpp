#include "acs/baselines/regularizers.hpp"

#include <algorithm>
#include <limits>
#include <map>

#include "acs/errors.hpp"
#include "acs/training/common.hpp"

namespace acs::baselines {

double ImportanceMap::min() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& [_, t] : values) m = std::min(m, t.min().item<double>());
    return m;
}

double ImportanceMap::max() const {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& [_, t] : values) m = std::max(m, t.max().item<double>());
    return m;
}

ImportanceMap mas_raw_importance(SegmentationNet& net, const torch::Tensor& images, double surrogate_scale) {
    if (images.dim() != 4 || images.size(0) == 0) throw InvalidArgument("MAS importance needs at least one sample");
    auto params = net.named_parameters();
    const auto count = static_cast<double>(net.parameter_count());
    std::vector<bool> previous;
    ImportanceMap out;
    for (auto& [name, p] : params) {
        previous.push_back(p.requires_grad());
        p.requires_grad_(true);
        out.values.emplace_back(name, torch::zeros_like(p, torch::TensorOptions().dtype(torch::kFloat64)));
    }
    const auto n = images.size(0);
    for (std::int64_t i = 0; i < n; ++i) {
        for (auto& [_, p] : params) p.mutable_grad() = torch::Tensor();
        const auto y = net.logits(images.slice(0, i, i + 1));
        const auto surrogate = surrogate_scale * y.pow(2).sum() / count;
        surrogate.backward();
        torch::NoGradGuard no_grad;
        for (std::size_t k = 0; k < params.size(); ++k) {
            const auto& g = params[k].second.grad();
            if (g.defined()) out.values[k].second.add_(g.abs().to(torch::kFloat64));
        }
    }
    for (std::size_t k = 0; k < params.size(); ++k) {
        params[k].second.mutable_grad() = torch::Tensor();
        params[k].second.requires_grad_(previous[k]);
        out.values[k].second.div_(static_cast<double>(n));
    }
    return out;
}

ImportanceMap normalize_importance(const ImportanceMap& raw) {
    const double lo = raw.min();
    const double hi = raw.max();
    ImportanceMap out;
    for (const auto& [name, t] : raw.values) {
        if (hi > lo) {
            out.values.emplace_back(name, (t - lo) / (hi - lo));
        } else {
            out.values.emplace_back(name, hi > 0 ? torch::ones_like(t) : torch::zeros_like(t));
        }
    }
    return out;
}

ImportanceMap mas_importance(SegmentationNet& net, const torch::Tensor& images, double surrogate_scale) {
    return normalize_importance(mas_raw_importance(net, images, surrogate_scale));
}

ImportanceMap mas_importance(SegmentationNet& net, const std::vector<const data::Dataset*>& old_data) {
    std::vector<torch::Tensor> parts;
    for (const auto* ds : old_data) {
        if (ds->empty()) continue;
        parts.push_back(training::collate_range(*ds, 0, ds->size()).images);
    }
    if (parts.empty()) throw InvalidArgument("MAS importance needs old-data samples");
    const auto dtype = net.named_parameters().front().second.scalar_type();
    return mas_importance(net, torch::cat(parts, 0).to(dtype));
}

torch::Tensor mas_penalty(const models::NamedTensors& params, const models::NamedTensors& anchor,
                          const ImportanceMap& importance, double lambda) {
    if (params.size() != anchor.size() || params.size() != importance.values.size()) {
        throw InvalidArgument("MAS penalty: parameter, anchor and importance lists differ in length");
    }
    auto total = torch::zeros({}, params.empty() ? torch::TensorOptions() : params.front().second.options());
    for (std::size_t k = 0; k < params.size(); ++k) {
        const auto& [name, p] = params[k];
        if (anchor[k].first != name || importance.values[k].first != name) {
            throw InvalidArgument("MAS penalty: name mismatch at '" + name + "'");
        }
        if (!p.sizes().equals(anchor[k].second.sizes()) || !p.sizes().equals(importance.values[k].second.sizes())) {
            throw ShapeError("MAS penalty: shape mismatch at '" + name + "'");
        }
        const auto imp = importance.values[k].second.to(p.scalar_type());
        total = total + (imp * (p - anchor[k].second).pow(2)).sum();
    }
    return lambda * total;
}

models::NamedTensors snapshot_parameters(const models::NamedTensors& params) {
    models::NamedTensors out;
    for (const auto& [name, p] : params) out.emplace_back(name, p.detach().clone());
    return out;
}

torch::Tensor kd_output_loss(const torch::Tensor& student_logits, const torch::Tensor& teacher_logits,
                             double temperature) {
    if (!(temperature > 0)) throw InvalidArgument("distillation temperature must be positive");
    if (!student_logits.sizes().equals(teacher_logits.sizes())) {
        throw ShapeError("student and teacher logits differ in shape");
    }
    const auto s = student_logits / temperature;
    const auto p_t = torch::sigmoid(teacher_logits / temperature);
    const auto ce = -(p_t * torch::log_sigmoid(s) + (1 - p_t) * torch::log_sigmoid(-s));
    return ce.mean();
}

TeacherSnapshot::TeacherSnapshot(SegmentationNet& net) : net_(net.clone()) { net_->set_requires_grad(false); }

torch::Tensor TeacherSnapshot::logits(const torch::Tensor& images) const {
    torch::NoGradGuard no_grad;
    return net_->logits(images);
}

}  // namespace acs::baselines
