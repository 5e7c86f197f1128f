#pragma once

#include <cstdint>

#include <torch/torch.h>

#include "acs/models/architecture.hpp"

namespace acs::losses {

struct LossWeights {
    double eta = 1.0;    ///< KL weight inside the VAE term
    double w_vae = 1.0;  ///< weight of the whole VAE term in the main objective
    double w_gan = 1.0;
    double w_lr = 1.0;
    double w_adv_c = 1.0;
    double w_seg = 1.0;
    double w_dice = 0.5;  ///< Dice share inside the segmentation loss, in [0,1]
};

/// Throws ConfigError unless every weight is finite and non-negative and w_dice <= 1.
void validate(const LossWeights& w);

/// Numerical conventions shared by losses and metrics.
struct LossConstants {
    double prob_clamp = 1e-7;
    double dice_smoothing = 1.0;
    double threshold = 0.5;
};

/// KL(N(mu, exp(log_var)) || N(0, 1)) per element.
torch::Tensor kl_standard_normal(const torch::Tensor& mu, const torch::Tensor& log_var);
double kl_standard_normal(double mu, double log_var);

/// Batch mean of the pixel-summed squared reconstruction error plus eta * mean KL.
torch::Tensor loss_vae(const torch::Tensor& x, const torch::Tensor& x_hat, const models::DomainLatent& latent,
                       double eta);

/// -mean log d_real - mean log(1 - d_fake), probabilities clamped to [c, 1 - c].
torch::Tensor loss_gan_d(const torch::Tensor& d_real, const torch::Tensor& d_fake, double clamp = 1e-7);

/// -mean log d_fake: the generator pushes generated images toward "real".
torch::Tensor loss_gan_g(const torch::Tensor& d_fake, double clamp = 1e-7);

/// Mean absolute error between injected and recovered domain samples.
torch::Tensor loss_latent_regression(const torch::Tensor& z_in, const torch::Tensor& z_recovered);

/// Cross-entropy for D_c: real rows target their domain index, generated rows
/// target the placeholder class (the last logit). Mean over all rows.
torch::Tensor loss_content_adv_d(const torch::Tensor& logits_real, const torch::Tensor& real_domains,
                                 const torch::Tensor& logits_fake);

/// Cross-entropy of D_c's prediction against the uniform distribution over
/// the real-domain classes (the placeholder class is excluded from the target).
torch::Tensor loss_content_adv_e(const torch::Tensor& logits);

/// Per-image soft Dice with additive smoothing, averaged over the batch.
torch::Tensor soft_dice(const torch::Tensor& prob, const torch::Tensor& target, double smoothing = 1.0);

/// w_dice * (1 - soft_dice) + (1 - w_dice) * mean BCE.
torch::Tensor loss_segmentation(const torch::Tensor& prob, const torch::Tensor& target, double w_dice,
                                const LossConstants& constants = {});

/// Same loss from logits. The BCE term uses log-sigmoid instead of clamped
/// logs, so saturated logits keep a gradient; for |logit| below ~16 it equals
/// loss_segmentation(sigmoid(logits), ...) to rounding.
torch::Tensor loss_segmentation_logits(const torch::Tensor& logits, const torch::Tensor& target, double w_dice,
                                       const LossConstants& constants = {});

}  // namespace acs::losses
