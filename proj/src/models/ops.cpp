#include "acs/models/ops.hpp"

#include "acs/errors.hpp"

namespace acs::models {

ContentRepresentation content_encode(ModelBundle& bundle, const torch::Tensor& images) {
    check_image_batch(images);
    return bundle.content_encoder->forward(images);
}

DomainLatent domain_encode(ModelBundle& bundle, const torch::Tensor& images) {
    check_image_batch(images);
    return bundle.domain_encoder->forward(images);
}

torch::Tensor reparam_sample(const DomainLatent& latent, const torch::Tensor& noise) {
    return latent.mu + torch::exp(0.5 * latent.log_var) * noise;
}

torch::Tensor latent_scale(ModelBundle& bundle, const torch::Tensor& z) {
    const auto& cfg = bundle.config();
    return latent_scale(bundle, z, cfg.height / kSpatialDivisor, cfg.width / kSpatialDivisor);
}

torch::Tensor latent_scale(ModelBundle& bundle, const torch::Tensor& z, std::int64_t grid_h, std::int64_t grid_w) {
    return bundle.latent_scale->forward(z, grid_h, grid_w);
}

torch::Tensor generate(ModelBundle& bundle, const torch::Tensor& z_c, const torch::Tensor& f_ds,
                       const torch::Tensor& code) {
    check_domain_codes(code, bundle.config().n_domains);
    return bundle.generator->forward(z_c, f_ds, code);
}

torch::Tensor discriminate_domain(ModelBundle& bundle, const torch::Tensor& images, const torch::Tensor& code) {
    check_image_batch(images);
    check_domain_codes(code, bundle.config().n_domains);
    if (code.size(0) != images.size(0)) throw ShapeError("one domain code per image is required");
    return torch::sigmoid(bundle.domain_discriminator->forward(images, code));
}

torch::Tensor discriminate_content(ModelBundle& bundle, const ContentRepresentation& rep) {
    return bundle.content_discriminator->forward(rep);
}

torch::Tensor segment_logits(ModelBundle& bundle, const ContentRepresentation& rep) {
    return bundle.segmenter->forward(rep);
}

torch::Tensor segment(ModelBundle& bundle, const ContentRepresentation& rep) {
    return torch::sigmoid(segment_logits(bundle, rep));
}

}  // namespace acs::models
