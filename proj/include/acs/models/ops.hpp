#pragma once

#include <torch/torch.h>

#include "acs/models/bundle.hpp"

namespace acs::models {

ContentRepresentation content_encode(ModelBundle& bundle, const torch::Tensor& images);
DomainLatent domain_encode(ModelBundle& bundle, const torch::Tensor& images);

/// z = mu + exp(0.5 log_var) * noise, differentiable in mu and log_var.
torch::Tensor reparam_sample(const DomainLatent& latent, const torch::Tensor& noise);

/// f_ds on z_c's spatial grid (height/16 x width/16 of the configured input).
torch::Tensor latent_scale(ModelBundle& bundle, const torch::Tensor& z);
torch::Tensor latent_scale(ModelBundle& bundle, const torch::Tensor& z, std::int64_t grid_h, std::int64_t grid_w);

torch::Tensor generate(ModelBundle& bundle, const torch::Tensor& z_c, const torch::Tensor& f_ds,
                       const torch::Tensor& code);

/// Per-image realness probability, shape [N].
torch::Tensor discriminate_domain(ModelBundle& bundle, const torch::Tensor& images, const torch::Tensor& code);

/// Logits over n_domains + 1 classes; the last class is the generated-image placeholder.
torch::Tensor discriminate_content(ModelBundle& bundle, const ContentRepresentation& rep);

torch::Tensor segment_logits(ModelBundle& bundle, const ContentRepresentation& rep);
/// Per-pixel foreground probability, shape [N, 1, H, W].
torch::Tensor segment(ModelBundle& bundle, const ContentRepresentation& rep);

}  // namespace acs::models
