#include "s2r/policy.hpp"

#include <zlib.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numbers>

#include "s2r/errors.hpp"
#include "s2r/io.hpp"

namespace s2r {
namespace {

std::vector<int> layer_sizes(int in, std::span<const int> hidden, int out) {
  std::vector<int> sizes{in};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  return sizes;
}

template <typename Fn>
void for_each_block(const Mlp& mlp, Fn&& fn) {
  for (const auto& l : mlp.layers()) {
    fn(l.weight.data(), l.weight.size());
    fn(l.bias.data(), l.bias.size());
  }
}

}  // namespace

PolicyParameters PolicyParameters::initialize(std::span<const int> hidden, double log_std_init,
                                              Rng& rng) {
  PolicyParameters p;
  const auto actor_sizes = layer_sizes(kObsDim, hidden, kActDim);
  const auto critic_sizes = layer_sizes(kObsDim, hidden, 1);
  p.actor = Mlp::orthogonal(actor_sizes, 0.01, rng);
  p.critic = Mlp::orthogonal(critic_sizes, 1.0, rng);
  p.log_std.setConstant(log_std_init);
  return p;
}

PolicyParameters PolicyParameters::zeros(std::span<const int> hidden) {
  PolicyParameters p;
  const auto actor_sizes = layer_sizes(kObsDim, hidden, kActDim);
  const auto critic_sizes = layer_sizes(kObsDim, hidden, 1);
  p.actor = Mlp::zeros(actor_sizes);
  p.critic = Mlp::zeros(critic_sizes);
  return p;
}

PolicyParameters PolicyParameters::zeros_like() const {
  return {actor.zeros_like(), Eigen::Vector2d::Zero(), critic.zeros_like()};
}

void PolicyParameters::validate() const {
  actor.validate();
  critic.validate();
  if (actor.input_dim() != static_cast<int>(kObsDim) ||
      actor.output_dim() != static_cast<int>(kActDim)) {
    throw ShapeError("actor must map 5 observations to 2 action means");
  }
  if (critic.input_dim() != static_cast<int>(kObsDim) || critic.output_dim() != 1) {
    throw ShapeError("critic must map 5 observations to 1 value");
  }
}

bool PolicyParameters::all_finite() const {
  bool ok = log_std.allFinite();
  auto check = [&](const double* p, Eigen::Index n) {
    ok = ok && Eigen::Map<const Eigen::VectorXd>(p, n).allFinite();
  };
  for_each_block(actor, check);
  for_each_block(critic, check);
  return ok;
}

std::size_t PolicyParameters::parameter_count() const {
  return actor.parameter_count() + 2 + critic.parameter_count();
}

Eigen::VectorXd PolicyParameters::flatten() const {
  Eigen::VectorXd flat(static_cast<Eigen::Index>(parameter_count()));
  Eigen::Index at = 0;
  auto put = [&](const double* p, Eigen::Index n) {
    flat.segment(at, n) = Eigen::Map<const Eigen::VectorXd>(p, n);
    at += n;
  };
  for_each_block(actor, put);
  put(log_std.data(), 2);
  for_each_block(critic, put);
  return flat;
}

void PolicyParameters::assign(const Eigen::VectorXd& flat) {
  if (flat.size() != static_cast<Eigen::Index>(parameter_count())) {
    throw ShapeError("flat parameter vector has the wrong length");
  }
  Eigen::Index at = 0;
  auto take = [&](const double* p, Eigen::Index n) {
    Eigen::Map<Eigen::VectorXd>(const_cast<double*>(p), n) = flat.segment(at, n);
    at += n;
  };
  for_each_block(actor, take);
  take(log_std.data(), 2);
  for_each_block(critic, take);
}

bool operator==(const PolicyParameters& a, const PolicyParameters& b) {
  if (a.parameter_count() != b.parameter_count()) return false;
  if (a.actor.layers().size() != b.actor.layers().size()) return false;
  if (a.critic.layers().size() != b.critic.layers().size()) return false;
  return a.flatten() == b.flatten();
}

PolicyOutput policy_forward(const PolicyParameters& params, const Observation& obs) {
  const Eigen::Map<const Eigen::VectorXd> x(obs.values.data(), kObsDim);
  PolicyOutput out;
  out.mean = params.actor.forward(x);
  out.log_std = params.log_std;
  out.value = params.critic.forward(x)(0, 0);
  return out;
}

Action policy_mean_action(const PolicyParameters& params, const Observation& obs) {
  const Eigen::Map<const Eigen::VectorXd> x(obs.values.data(), kObsDim);
  const Eigen::MatrixXd mean = params.actor.forward(x);
  return {mean(0, 0), mean(1, 0)};
}

double gaussian_log_prob(const Eigen::Vector2d& mean, const Eigen::Vector2d& log_std,
                         const Eigen::Vector2d& x) {
  const Eigen::Array2d z = (x - mean).array() / log_std.array().exp();
  return -0.5 * z.square().sum() - log_std.sum() - std::log(2.0 * std::numbers::pi);
}

double gaussian_entropy(const Eigen::Vector2d& log_std) {
  return log_std.sum() + std::log(2.0 * std::numbers::pi * std::numbers::e);
}

SampledAction sample_action(const Eigen::Vector2d& mean, const Eigen::Vector2d& log_std, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::Vector2d x;
  for (int i = 0; i < 2; ++i) x[i] = mean[i] + std::exp(log_std[i]) * normal(rng);
  return {{x[0], x[1]}, gaussian_log_prob(mean, log_std, x)};
}

namespace {

constexpr char kMagic[4] = {'S', '2', 'R', 'B'};

void write_mlp(ByteWriter& w, const Mlp& mlp) {
  w.u32(static_cast<std::uint32_t>(mlp.layers().size()));
  for (const auto& l : mlp.layers()) {
    const auto rows = static_cast<std::uint32_t>(l.weight.rows());
    const auto cols = static_cast<std::uint32_t>(l.weight.cols() + 1);
    w.u32(rows);
    w.u32(cols);
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) w.f64(l.weight(r, c));
      w.f64(l.bias[r]);
    }
  }
}

Mlp read_mlp(ByteReader& r) {
  const std::uint32_t count = r.u32();
  if (count == 0 || count > 64) throw CheckpointError("implausible layer count");
  std::vector<DenseLayer> layers;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t rows = r.u32();
    const std::uint32_t cols = r.u32();
    if (rows == 0 || cols < 2 || rows > 4096 || cols > 4097) {
      throw CheckpointError("implausible layer shape");
    }
    DenseLayer layer{Eigen::MatrixXd(rows, cols - 1), Eigen::VectorXd(rows)};
    for (std::uint32_t row = 0; row < rows; ++row) {
      for (std::uint32_t c = 0; c + 1 < cols; ++c) layer.weight(row, c) = r.f64();
      layer.bias[row] = r.f64();
    }
    layers.push_back(std::move(layer));
  }
  return Mlp(std::move(layers));
}

}  // namespace

std::vector<unsigned char> encode_checkpoint(const PolicyParameters& params) {
  params.validate();
  ByteWriter w;
  w.raw(kMagic, sizeof kMagic);
  w.u16(kCheckpointVersion);
  write_mlp(w, params.actor);
  w.u32(2);
  w.f64(params.log_std[0]);
  w.f64(params.log_std[1]);
  write_mlp(w, params.critic);
  const auto crc = static_cast<std::uint32_t>(
      crc32(0L, w.bytes().data(), static_cast<uInt>(w.bytes().size())));
  w.u32(crc);
  return w.take();
}

PolicyParameters decode_checkpoint(std::span<const unsigned char> bytes) {
  if (bytes.size() < 4 + 2 + 4) throw CheckpointError("checkpoint truncated");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw CheckpointError("bad checkpoint magic");
  const auto body = bytes.first(bytes.size() - 4);
  const auto stored = ByteReader(bytes.last(4)).u32();
  const auto actual =
      static_cast<std::uint32_t>(crc32(0L, body.data(), static_cast<uInt>(body.size())));
  if (stored != actual) throw CheckpointError("checkpoint CRC mismatch");
  try {
    ByteReader r(body.subspan(4));
    if (r.u16() != kCheckpointVersion) throw CheckpointError("unsupported checkpoint version");
    PolicyParameters p;
    p.actor = read_mlp(r);
    if (r.u32() != 2) throw CheckpointError("log_std must have 2 entries");
    p.log_std[0] = r.f64();
    p.log_std[1] = r.f64();
    p.critic = read_mlp(r);
    if (!r.at_end()) throw CheckpointError("trailing bytes in checkpoint");
    p.validate();
    return p;
  } catch (const ShapeError& e) {
    throw CheckpointError(std::string("checkpoint shapes: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const PolicyParameters& params) {
  write_file_atomic(path, encode_checkpoint(params));
}

PolicyParameters load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace s2r
