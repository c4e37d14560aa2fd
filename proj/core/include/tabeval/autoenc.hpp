#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "tabeval/dataio.hpp"
#include "tabeval/matrix.hpp"

namespace tabeval {

struct AutoencoderConfig {
  /// 0 selects min(32, ceil(input_width / 4)).
  std::size_t latent_dim = 0;
  std::vector<std::size_t> hidden_dims{128, 64};
  std::size_t epochs = 30;
  std::size_t batch_size = 256;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;

  /// Copy with latent_dim filled in for the given input width.
  AutoencoderConfig resolved(std::size_t input_width) const;
  /// Throws InvalidArgument on a config that cannot be trained.
  void validate(std::size_t input_width) const;
};

nlohmann::json to_json(const AutoencoderConfig& cfg);
AutoencoderConfig autoencoder_config_from_json(const nlohmann::json& doc);

/// Fully connected layer computing act(x * weights + bias) for row vectors x.
struct DenseLayer {
  Eigen::MatrixXd weights;  // fan_in x fan_out
  Vector bias;              // fan_out
  bool relu = false;
};

/// Encoder input -> hidden_dims -> latent (linear) and the mirrored decoder
/// latent -> reversed hidden_dims -> input (linear output). ReLU everywhere
/// else.
struct AutoencoderModel {
  std::size_t input_width = 0;
  AutoencoderConfig config;  // resolved
  std::vector<DenseLayer> layers;
  std::size_t encoder_layers = 0;  // layers[0, encoder_layers) form the encoder
  double final_train_loss = 0.0;
  std::vector<double> epoch_losses;

  std::size_t latent_dim() const { return config.latent_dim; }
};

/// Seeded Glorot-uniform weights, zero biases.
AutoencoderModel init_autoencoder(std::size_t input_width, const AutoencoderConfig& cfg);

/// Mini-batch Adam on mean squared reconstruction error. Deterministic for a
/// fixed seed. Throws NonFiniteLoss (with the epoch index) on divergence and
/// InvalidArgument when rows < 2 * batch_size.
AutoencoderModel train_autoencoder(const Matrix& x, const AutoencoderConfig& cfg);
inline AutoencoderModel train_autoencoder(const EncodedMatrix& x, const AutoencoderConfig& cfg) {
  return train_autoencoder(x.values, cfg);
}

/// Latent features, one row per input row. Throws DimensionMismatch.
Matrix encode_latent(const AutoencoderModel& m, const Matrix& x);
inline Matrix encode_latent(const AutoencoderModel& m, const EncodedMatrix& x) {
  return encode_latent(m, x.values);
}

Matrix reconstruct(const AutoencoderModel& m, const Matrix& x);

/// Mean squared error over all cells. Throws EmptyInput and DimensionMismatch.
double reconstruction_error(const AutoencoderModel& m, const Matrix& x);
inline double reconstruction_error(const AutoencoderModel& m, const EncodedMatrix& x) {
  return reconstruction_error(m, x.values);
}

// Flat parameter view, used by the optimizer and by gradient checks. Order:
// for each layer, weights row by row, then bias.
std::size_t parameter_count(const AutoencoderModel& m);
std::vector<double> flatten_parameters(const AutoencoderModel& m);
void assign_parameters(AutoencoderModel& m, std::span<const double> params);

/// Mean squared reconstruction loss of `x`; when `grad` is non-null it receives
/// the analytic gradient in flatten_parameters order.
double loss_and_gradient(const AutoencoderModel& m, const Matrix& x, std::vector<double>* grad);

nlohmann::json to_json(const AutoencoderModel& m);
AutoencoderModel autoencoder_from_json(const nlohmann::json& doc);
void save_autoencoder(const AutoencoderModel& m, const std::filesystem::path& path);
AutoencoderModel load_autoencoder(const std::filesystem::path& path);

}  // namespace tabeval
