#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "henn/data.hpp"
#include "henn/gdd.hpp"
#include "henn/loss.hpp"
#include "henn/opinion.hpp"

namespace henn {

enum class Activation { Relu, Tanh };

std::string_view to_string(Activation a);
std::optional<Activation> parse_activation(std::string_view name);

/// Fully connected layer; `weights` is row-major (out x in).
struct DenseLayer {
    std::size_t in = 0;
    std::size_t out = 0;
    std::vector<double> weights;
    std::vector<double> bias;

    friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// Feed-forward evidence network: hidden layers use `hidden_activation`, the
/// head applies softplus so every evidence output is strictly positive.
struct MlpParams {
    std::vector<DenseLayer> layers;
    Activation hidden_activation = Activation::Relu;

    std::size_t input_dim() const { return layers.front().in; }
    std::size_t output_dim() const { return layers.back().out; }
    std::size_t num_parameters() const;

    friend bool operator==(const MlpParams&, const MlpParams&) = default;
};

/// Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
MlpParams init_mlp(std::size_t input_dim, const std::vector<std::size_t>& hidden, std::size_t output_dim,
                   Activation activation, std::uint64_t seed);

/// Same shapes, all zeros.
MlpParams zeros_like(const MlpParams& params);

/// Flat views in layer order (weights then bias per layer), for optimizers
/// and finite-difference checks.
std::vector<double> flatten(const MlpParams& params);
void unflatten(std::span<const double> flat, MlpParams& params);

double softplus(double z);
double sigmoid(double z);

/// Head pre-activations (logits) for input x.
std::vector<double> forward_logits(const MlpParams& params, std::span<const double> x);
/// Evidence e = softplus(logits).
std::vector<double> forward(const MlpParams& params, std::span<const double> x);

struct BackwardResult {
    MlpParams grad;
    LossBreakdown loss;
};

/// Loss of one example and its gradient w.r.t. every network parameter,
/// through alpha = e + 1, c = e and the softplus head.
BackwardResult backward(const MlpParams& params, std::span<const double> x, const LabelVector& y,
                        const std::shared_ptr<const Partition>& partition, double lambda,
                        RegMode mode = RegMode::Kl);

/// Scalar loss only; the function backward() differentiates.
LossBreakdown example_loss(const MlpParams& params, std::span<const double> x, const LabelVector& y,
                           const std::shared_ptr<const Partition>& partition, double lambda,
                           RegMode mode = RegMode::Kl);

struct AdamState {
    MlpParams first_moment;
    MlpParams second_moment;
    std::uint64_t step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    explicit AdamState(const MlpParams& like);
};

/// One bias-corrected Adam update (no weight decay).
void adam_step(MlpParams& params, const MlpParams& grads, AdamState& state, double lr);

struct TrainConfig {
    double learning_rate = 5e-3;
    double lambda = kDefaultLambda;
    std::size_t epochs = 100;
    std::size_t batch_size = 64;
    std::uint64_t seed = 1;
    std::vector<std::size_t> hidden = {32, 32};
    Activation activation = Activation::Relu;
    RegMode reg_mode = RegMode::Kl;
};

/// One pass over `data`: shuffle with a permutation derived from (seed, epoch),
/// average per-example losses within each mini-batch, one Adam step per batch.
/// Returns the mean loss over all examples of the epoch.
LossBreakdown train_epoch(MlpParams& params, AdamState& state, std::span<const Sample> data,
                          const std::shared_ptr<const Partition>& partition, const TrainConfig& cfg,
                          std::size_t epoch);

struct Prediction {
    std::vector<double> evidence;
    GddParams params;
    SetPrediction set_prediction;
    ClassIndex singleton_prediction;
    double vacuity;
    double vagueness;
    double dissonance;
};

/// Uncertainty measures come from the hyper-opinion over singletons plus the
/// composite groups.
Prediction predict_from_evidence(std::span<const double> evidence, const std::shared_ptr<const Partition>& partition);
Prediction predict(const MlpParams& params, std::span<const double> x,
                   const std::shared_ptr<const Partition>& partition);

/// Network plus the domain it was trained on.
struct Model {
    MlpParams params;
    std::shared_ptr<const Partition> partition;
};

Model make_model(std::size_t input_dim, std::shared_ptr<const Partition> partition, const TrainConfig& cfg);

/// JSON checkpoint with dims, activation, partition and row-major weights as
/// shortest round-trip decimal text.
void save_checkpoint(const Model& model, const std::filesystem::path& path);
Model load_checkpoint(const std::filesystem::path& path);
std::string checkpoint_to_string(const Model& model);
Model checkpoint_from_string(const std::string& text);

}  // namespace henn
