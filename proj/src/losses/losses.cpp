#include "acs/losses/losses.hpp"

#include <cmath>

#include "acs/errors.hpp"

namespace acs::losses {

void validate(const LossWeights& w) {
    const double values[] = {w.eta, w.w_vae, w.w_gan, w.w_lr, w.w_adv_c, w.w_seg, w.w_dice};
    for (double v : values) {
        if (!std::isfinite(v) || v < 0.0) throw ConfigError("loss weights must be finite and non-negative");
    }
    if (w.w_dice > 1.0) throw ConfigError("loss.w_dice must lie in [0,1]");
}

torch::Tensor kl_standard_normal(const torch::Tensor& mu, const torch::Tensor& log_var) {
    return 0.5 * (mu * mu + torch::exp(log_var) - 1.0 - log_var);
}

double kl_standard_normal(double mu, double log_var) {
    return 0.5 * (mu * mu + std::exp(log_var) - 1.0 - log_var);
}

torch::Tensor loss_vae(const torch::Tensor& x, const torch::Tensor& x_hat, const models::DomainLatent& latent,
                       double eta) {
    if (x.sizes() != x_hat.sizes()) throw ShapeError("reconstruction shape differs from input shape");
    const auto diff = x_hat - x;
    const auto per_image = (diff * diff).flatten(1).sum(1);
    return per_image.mean() + eta * kl_standard_normal(latent.mu, latent.log_var).mean();
}

torch::Tensor loss_gan_d(const torch::Tensor& d_real, const torch::Tensor& d_fake, double clamp) {
    return -torch::log(d_real.clamp(clamp, 1.0 - clamp)).mean() -
           torch::log(1.0 - d_fake.clamp(clamp, 1.0 - clamp)).mean();
}

torch::Tensor loss_gan_g(const torch::Tensor& d_fake, double clamp) {
    return -torch::log(d_fake.clamp(clamp, 1.0 - clamp)).mean();
}

torch::Tensor loss_latent_regression(const torch::Tensor& z_in, const torch::Tensor& z_recovered) {
    if (z_in.sizes() != z_recovered.sizes()) throw ShapeError("latent regression inputs differ in length");
    return (z_in - z_recovered).abs().mean();
}

torch::Tensor loss_content_adv_d(const torch::Tensor& logits_real, const torch::Tensor& real_domains,
                                 const torch::Tensor& logits_fake) {
    const auto classes = logits_real.size(1);
    if (logits_fake.size(1) != classes) throw ShapeError("real and generated logits differ in width");
    const auto targets_real = real_domains.to(torch::kLong);
    if (targets_real.numel() > 0 &&
        (targets_real.min().item<std::int64_t>() < 0 || targets_real.max().item<std::int64_t>() >= classes - 1)) {
        throw InvalidArgument("real-domain target index out of range");
    }
    const auto targets_fake = torch::full({logits_fake.size(0)}, classes - 1, torch::kLong);
    const auto logits = torch::cat({logits_real, logits_fake}, 0);
    const auto targets = torch::cat({targets_real, targets_fake}, 0);
    return torch::nn::functional::cross_entropy(logits, targets);
}

torch::Tensor loss_content_adv_e(const torch::Tensor& logits) {
    const auto real_classes = logits.size(1) - 1;
    if (real_classes < 1) throw ShapeError("content logits need at least one real class");
    const auto log_p = torch::log_softmax(logits, 1);
    return -log_p.narrow(1, 0, real_classes).mean(1).mean();
}

torch::Tensor soft_dice(const torch::Tensor& prob, const torch::Tensor& target, double smoothing) {
    const auto p = prob.flatten(1);
    const auto t = target.flatten(1);
    const auto num = 2.0 * (p * t).sum(1) + smoothing;
    const auto den = p.sum(1) + t.sum(1) + smoothing;
    return (num / den).mean();
}

torch::Tensor loss_segmentation(const torch::Tensor& prob, const torch::Tensor& target, double w_dice,
                                const LossConstants& constants) {
    if (prob.sizes() != target.sizes()) throw ShapeError("prediction and mask shapes differ");
    if (!((target == 0) | (target == 1)).all().item<bool>()) throw InvalidArgument("segmentation target must be binary");
    const auto t = target.to(prob.scalar_type());
    const auto p = prob.clamp(constants.prob_clamp, 1.0 - constants.prob_clamp);
    const auto bce = -(t * torch::log(p) + (1.0 - t) * torch::log(1.0 - p)).mean();
    const auto dice_term = 1.0 - soft_dice(prob, t, constants.dice_smoothing);
    return w_dice * dice_term + (1.0 - w_dice) * bce;
}

torch::Tensor loss_segmentation_logits(const torch::Tensor& logits, const torch::Tensor& target, double w_dice,
                                       const LossConstants& constants) {
    if (logits.sizes() != target.sizes()) throw ShapeError("prediction and mask shapes differ");
    if (!((target == 0) | (target == 1)).all().item<bool>()) throw InvalidArgument("segmentation target must be binary");
    const auto t = target.to(logits.scalar_type());
    const auto bce = -(t * torch::log_sigmoid(logits) + (1.0 - t) * torch::log_sigmoid(-logits)).mean();
    const auto dice_term = 1.0 - soft_dice(torch::sigmoid(logits), t, constants.dice_smoothing);
    return w_dice * dice_term + (1.0 - w_dice) * bce;
}

}  // namespace acs::losses
