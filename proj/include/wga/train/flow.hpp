#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace wga::train {

// Rectified-flow convention used throughout: the state interpolates
// linearly from data to noise, z_t = (1-t)*z0 + t*eps, with constant
// target velocity u* = eps - z0.
struct FlowTarget {
    std::vector<double> z_t;
    std::vector<double> u_star;
};

inline FlowTarget flow_interpolate_and_target(std::span<const double> clean_latent,
                                              std::span<const double> noise, double t) {
    if (clean_latent.size() != noise.size())
        throw std::invalid_argument("clean latent and noise must have the same length");
    if (t < 0.0 || t > 1.0) throw std::invalid_argument("t must lie in [0,1]");
    FlowTarget out;
    out.z_t.resize(clean_latent.size());
    out.u_star.resize(clean_latent.size());
    for (size_t i = 0; i < clean_latent.size(); ++i) {
        out.z_t[i] = (1.0 - t) * clean_latent[i] + t * noise[i];
        out.u_star[i] = noise[i] - clean_latent[i];
    }
    return out;
}

// Mean squared difference between the predicted and target velocity.
inline double flow_matching_loss(std::span<const double> predicted,
                                 std::span<const double> u_star) {
    if (predicted.size() != u_star.size())
        throw std::invalid_argument("predicted and target must have the same length");
    if (predicted.empty()) return 0.0;
    double acc = 0.0;
    for (size_t i = 0; i < predicted.size(); ++i) {
        double d = predicted[i] - u_star[i];
        acc += d * d;
    }
    return acc / static_cast<double>(predicted.size());
}

// Weighted mean negative log-likelihood, normalized by total weight so
// the loss scale is stable as the special-token fraction varies.
inline double weighted_nll(std::span<const double> token_probs, std::span<const double> weights) {
    if (token_probs.size() != weights.size())
        throw std::invalid_argument("probs and weights must have the same length");
    if (token_probs.empty()) return 0.0;
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < token_probs.size(); ++i) {
        double p = token_probs[i];
        if (p <= 0.0 || p > 1.0) throw std::invalid_argument("token probability outside (0,1]");
        if (weights[i] <= 0.0) throw std::invalid_argument("weights must be positive");
        num += weights[i] * (-std::log(p));
        den += weights[i];
    }
    return num / den;
}

inline double sft_loss(double text_loss, double image_loss, double ce_weight = 1.0,
                       double mse_weight = 1.0) {
    return ce_weight * text_loss + mse_weight * image_loss;
}

}  // namespace wga::train
