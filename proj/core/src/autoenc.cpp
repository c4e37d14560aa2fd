#include "tabeval/autoenc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tabeval/canonical_json.hpp"
#include "tabeval/error.hpp"
#include "tabeval/rng.hpp"

namespace tabeval {
namespace {

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

struct Gradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Vector> bias;

  explicit Gradients(const AutoencoderModel& m) {
    for (const auto& l : m.layers) {
      weights.push_back(Eigen::MatrixXd::Zero(l.weights.rows(), l.weights.cols()));
      bias.push_back(Vector::Zero(l.bias.size()));
    }
  }
};

Matrix forward_layer(const DenseLayer& layer, const Matrix& in) {
  Matrix z = in * layer.weights;
  z.rowwise() += layer.bias.transpose();
  if (layer.relu) z = z.cwiseMax(0.0);
  return z;
}

Matrix run_layers(const AutoencoderModel& m, const Matrix& x, std::size_t first, std::size_t last) {
  Matrix a = x;
  for (std::size_t l = first; l < last; ++l) a = forward_layer(m.layers[l], a);
  return a;
}

void check_width(const AutoencoderModel& m, const Matrix& x) {
  if (static_cast<std::size_t>(x.cols()) != m.input_width) {
    throw Error(ErrorCode::DimensionMismatch, "input width " + std::to_string(x.cols()) +
                                                  " differs from model width " + std::to_string(m.input_width));
  }
}

// Forward + backward pass over one batch. Returns the batch MSE.
double backprop(const AutoencoderModel& m, const Matrix& x, Gradients& g) {
  const std::size_t n_layers = m.layers.size();
  std::vector<Matrix> acts;
  acts.reserve(n_layers + 1);
  acts.push_back(x);
  for (std::size_t l = 0; l < n_layers; ++l) acts.push_back(forward_layer(m.layers[l], acts.back()));

  const Matrix diff = acts.back() - x;
  const double cells = static_cast<double>(x.rows()) * static_cast<double>(x.cols());
  const double loss = diff.squaredNorm() / cells;

  Matrix delta = diff * (2.0 / cells);
  for (std::size_t l = n_layers; l-- > 0;) {
    const DenseLayer& layer = m.layers[l];
    if (layer.relu) {
      // ReLU output is positive exactly where the pre-activation was.
      delta = delta.cwiseProduct((acts[l + 1].array() > 0.0).cast<double>().matrix());
    }
    g.weights[l].noalias() = acts[l].transpose() * delta;
    g.bias[l] = delta.colwise().sum().transpose();
    if (l > 0) delta = (delta * layer.weights.transpose()).eval();
  }
  return loss;
}

}  // namespace

AutoencoderConfig AutoencoderConfig::resolved(std::size_t input_width) const {
  AutoencoderConfig cfg = *this;
  if (cfg.latent_dim == 0) {
    cfg.latent_dim = std::min<std::size_t>(32, (input_width + 3) / 4);
  }
  return cfg;
}

void AutoencoderConfig::validate(std::size_t input_width) const {
  const std::size_t latent = resolved(input_width).latent_dim;
  if (latent < 1) throw Error(ErrorCode::InvalidArgument, "latent_dim must be >= 1");
  if (latent >= input_width) {
    throw Error(ErrorCode::InvalidArgument, "latent_dim " + std::to_string(latent) +
                                                " must be smaller than input width " + std::to_string(input_width));
  }
  if (epochs < 1) throw Error(ErrorCode::InvalidArgument, "epochs must be >= 1");
  if (batch_size < 1) throw Error(ErrorCode::InvalidArgument, "batch_size must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw Error(ErrorCode::InvalidArgument, "learning_rate must be positive");
  }
  for (auto h : hidden_dims) {
    if (h < 1) throw Error(ErrorCode::InvalidArgument, "hidden layer widths must be >= 1");
  }
}

nlohmann::json to_json(const AutoencoderConfig& cfg) {
  return {{"latent_dim", cfg.latent_dim},       {"hidden_dims", cfg.hidden_dims},
          {"epochs", cfg.epochs},               {"batch_size", cfg.batch_size},
          {"learning_rate", cfg.learning_rate}, {"seed", cfg.seed}};
}

AutoencoderConfig autoencoder_config_from_json(const nlohmann::json& doc) {
  AutoencoderConfig cfg;
  if (!doc.is_object()) throw Error(ErrorCode::InvalidArgument, "autoencoder config must be an object");
  cfg.latent_dim = doc.value("latent_dim", cfg.latent_dim);
  cfg.hidden_dims = doc.value("hidden_dims", cfg.hidden_dims);
  cfg.epochs = doc.value("epochs", cfg.epochs);
  cfg.batch_size = doc.value("batch_size", cfg.batch_size);
  cfg.learning_rate = doc.value("learning_rate", cfg.learning_rate);
  cfg.seed = doc.value("seed", cfg.seed);
  return cfg;
}

AutoencoderModel init_autoencoder(std::size_t input_width, const AutoencoderConfig& config) {
  config.validate(input_width);
  AutoencoderModel m;
  m.input_width = input_width;
  m.config = config.resolved(input_width);

  std::vector<std::size_t> dims{input_width};
  dims.insert(dims.end(), m.config.hidden_dims.begin(), m.config.hidden_dims.end());
  dims.push_back(m.config.latent_dim);
  m.encoder_layers = dims.size() - 1;
  for (std::size_t i = dims.size() - 1; i-- > 0;) dims.push_back(dims[i]);

  Rng rng(m.config.seed);
  const std::size_t n_layers = dims.size() - 1;
  for (std::size_t l = 0; l < n_layers; ++l) {
    DenseLayer layer;
    const auto fan_in = static_cast<Eigen::Index>(dims[l]);
    const auto fan_out = static_cast<Eigen::Index>(dims[l + 1]);
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    layer.weights.resize(fan_in, fan_out);
    for (Eigen::Index i = 0; i < fan_in; ++i) {
      for (Eigen::Index j = 0; j < fan_out; ++j) layer.weights(i, j) = (2.0 * rng.uniform() - 1.0) * limit;
    }
    layer.bias = Vector::Zero(fan_out);
    layer.relu = !(l + 1 == m.encoder_layers || l + 1 == n_layers);
    m.layers.push_back(std::move(layer));
  }
  return m;
}

std::size_t parameter_count(const AutoencoderModel& m) {
  std::size_t n = 0;
  for (const auto& l : m.layers) n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
  return n;
}

std::vector<double> flatten_parameters(const AutoencoderModel& m) {
  std::vector<double> out;
  out.reserve(parameter_count(m));
  for (const auto& l : m.layers) {
    for (Eigen::Index i = 0; i < l.weights.rows(); ++i) {
      for (Eigen::Index j = 0; j < l.weights.cols(); ++j) out.push_back(l.weights(i, j));
    }
    for (Eigen::Index j = 0; j < l.bias.size(); ++j) out.push_back(l.bias[j]);
  }
  return out;
}

void assign_parameters(AutoencoderModel& m, std::span<const double> params) {
  if (params.size() != parameter_count(m)) {
    throw Error(ErrorCode::LengthMismatch, "parameter vector has the wrong length");
  }
  std::size_t k = 0;
  for (auto& l : m.layers) {
    for (Eigen::Index i = 0; i < l.weights.rows(); ++i) {
      for (Eigen::Index j = 0; j < l.weights.cols(); ++j) l.weights(i, j) = params[k++];
    }
    for (Eigen::Index j = 0; j < l.bias.size(); ++j) l.bias[j] = params[k++];
  }
}

double loss_and_gradient(const AutoencoderModel& m, const Matrix& x, std::vector<double>* grad) {
  check_width(m, x);
  if (x.rows() == 0) throw Error(ErrorCode::EmptyInput, "no rows");
  Gradients g(m);
  const double loss = backprop(m, x, g);
  if (grad) {
    grad->clear();
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
      for (Eigen::Index i = 0; i < g.weights[l].rows(); ++i) {
        for (Eigen::Index j = 0; j < g.weights[l].cols(); ++j) grad->push_back(g.weights[l](i, j));
      }
      for (Eigen::Index j = 0; j < g.bias[l].size(); ++j) grad->push_back(g.bias[l][j]);
    }
  }
  return loss;
}

AutoencoderModel train_autoencoder(const Matrix& x, const AutoencoderConfig& cfg) {
  const auto width = static_cast<std::size_t>(x.cols());
  const auto n = static_cast<std::size_t>(x.rows());
  if (n < 2 * cfg.batch_size) {
    throw Error(ErrorCode::InvalidArgument, "need at least 2 * batch_size = " + std::to_string(2 * cfg.batch_size) +
                                                " rows, got " + std::to_string(n));
  }
  AutoencoderModel m = init_autoencoder(width, cfg);
  const std::size_t n_layers = m.layers.size();

  Gradients g(m);
  Gradients first_moment(m);
  Gradients second_moment(m);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t step = 0;

  for (std::size_t epoch = 0; epoch < m.config.epochs; ++epoch) {
    Rng shuffle_rng(derive_seed(m.config.seed, std::uint64_t{1} << 32 | epoch));
    shuffle_rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += m.config.batch_size) {
      const std::size_t stop = std::min(n, start + m.config.batch_size);
      std::vector<Eigen::Index> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                    order.begin() + static_cast<std::ptrdiff_t>(stop));
      const Matrix batch = x(idx, Eigen::all);
      const double loss = backprop(m, batch, g);
      if (!std::isfinite(loss)) {
        throw Error(ErrorCode::NonFiniteLoss, "training diverged in epoch " + std::to_string(epoch));
      }
      epoch_loss += loss * static_cast<double>(stop - start);

      ++step;
      const double correction1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(step));
      const double correction2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(step));
      const double lr = m.config.learning_rate;
      auto update = [&](auto& param, const auto& grad, auto& m1, auto& m2) {
        m1 = kAdamBeta1 * m1 + (1.0 - kAdamBeta1) * grad;
        m2 = kAdamBeta2 * m2 + (1.0 - kAdamBeta2) * grad.cwiseProduct(grad);
        param.array() -= lr * (m1.array() / correction1) /
                         ((m2.array() / correction2).sqrt() + kAdamEps);
      };
      for (std::size_t l = 0; l < n_layers; ++l) {
        update(m.layers[l].weights, g.weights[l], first_moment.weights[l], second_moment.weights[l]);
        update(m.layers[l].bias, g.bias[l], first_moment.bias[l], second_moment.bias[l]);
      }
    }
    epoch_loss /= static_cast<double>(n);
    if (!std::isfinite(epoch_loss)) {
      throw Error(ErrorCode::NonFiniteLoss, "training diverged in epoch " + std::to_string(epoch));
    }
    m.epoch_losses.push_back(epoch_loss);
  }
  m.final_train_loss = reconstruction_error(m, x);
  if (!std::isfinite(m.final_train_loss)) {
    throw Error(ErrorCode::NonFiniteLoss, "non-finite loss after epoch " + std::to_string(m.config.epochs - 1));
  }
  return m;
}

Matrix encode_latent(const AutoencoderModel& m, const Matrix& x) {
  check_width(m, x);
  if (x.rows() == 0) return Matrix(0, static_cast<Eigen::Index>(m.latent_dim()));
  return run_layers(m, x, 0, m.encoder_layers);
}

Matrix reconstruct(const AutoencoderModel& m, const Matrix& x) {
  check_width(m, x);
  return run_layers(m, x, 0, m.layers.size());
}

double reconstruction_error(const AutoencoderModel& m, const Matrix& x) {
  check_width(m, x);
  if (x.rows() == 0) throw Error(ErrorCode::EmptyInput, "reconstruction error of 0 rows");
  const Matrix diff = reconstruct(m, x) - x;
  return diff.squaredNorm() / (static_cast<double>(x.rows()) * static_cast<double>(x.cols()));
}

// ---------------------------------------------------------------------------

nlohmann::json to_json(const AutoencoderModel& m) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : m.layers) {
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(l.weights.size()));
    for (Eigen::Index i = 0; i < l.weights.rows(); ++i) {
      for (Eigen::Index j = 0; j < l.weights.cols(); ++j) w.push_back(l.weights(i, j));
    }
    layers.push_back({{"fan_in", l.weights.rows()},
                      {"fan_out", l.weights.cols()},
                      {"relu", l.relu},
                      {"weights", w},
                      {"bias", std::vector<double>(l.bias.data(), l.bias.data() + l.bias.size())}});
  }
  return {{"format", "tabeval-autoencoder-v1"},
          {"input_width", m.input_width},
          {"config", to_json(m.config)},
          {"encoder_layers", m.encoder_layers},
          {"final_train_loss", m.final_train_loss},
          {"epoch_losses", m.epoch_losses},
          {"layers", layers}};
}

AutoencoderModel autoencoder_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("format") != "tabeval-autoencoder-v1") {
      throw Error(ErrorCode::InvalidArgument, "unsupported autoencoder format");
    }
    AutoencoderModel m;
    m.input_width = doc.at("input_width").get<std::size_t>();
    m.config = autoencoder_config_from_json(doc.at("config"));
    m.encoder_layers = doc.at("encoder_layers").get<std::size_t>();
    m.final_train_loss = doc.at("final_train_loss").get<double>();
    m.epoch_losses = doc.at("epoch_losses").get<std::vector<double>>();
    for (const auto& jl : doc.at("layers")) {
      DenseLayer l;
      const auto fan_in = jl.at("fan_in").get<Eigen::Index>();
      const auto fan_out = jl.at("fan_out").get<Eigen::Index>();
      const auto w = jl.at("weights").get<std::vector<double>>();
      const auto b = jl.at("bias").get<std::vector<double>>();
      if (w.size() != static_cast<std::size_t>(fan_in * fan_out) || b.size() != static_cast<std::size_t>(fan_out)) {
        throw Error(ErrorCode::InvalidArgument, "layer weight shape mismatch");
      }
      l.weights.resize(fan_in, fan_out);
      std::size_t k = 0;
      for (Eigen::Index i = 0; i < fan_in; ++i) {
        for (Eigen::Index j = 0; j < fan_out; ++j) l.weights(i, j) = w[k++];
      }
      l.bias = Eigen::Map<const Vector>(b.data(), fan_out);
      l.relu = jl.at("relu").get<bool>();
      m.layers.push_back(std::move(l));
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("malformed autoencoder file: ") + e.what());
  }
}

void save_autoencoder(const AutoencoderModel& m, const std::filesystem::path& path) {
  write_file_atomic(path, canonical_dump(to_json(m)));
}

AutoencoderModel load_autoencoder(const std::filesystem::path& path) {
  try {
    return autoencoder_from_json(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::InvalidArgument, path.string() + ": " + e.what());
  }
}

}  // namespace tabeval
