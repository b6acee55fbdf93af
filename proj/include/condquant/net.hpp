#ifndef CONDQUANT_NET_HPP
#define CONDQUANT_NET_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace condquant {

// Fully connected quantizer net x in R^{input_dim} -> n_y * q outputs,
// read as q points of R^{n_y}. Hidden layers use leaky-ReLU, the output
// layer is affine.
struct NetArchitecture {
  int input_dim = 1;
  int n_y = 1;
  int q = 1;
  int hidden_layers = 5;
  int width = 0;  // 0 means n_y * q
  double leak = 0.01;

  int output_dim() const { return n_y * q; }
  int effective_width() const { return width > 0 ? width : n_y * q; }

  // Layer sizes input_dim, width, ..., width, output_dim
  // (hidden_layers + 1 weight matrices in total).
  std::vector<int> layer_sizes() const;
  std::int64_t param_count() const;
  void validate() const;
};

class QuantizerNet {
 public:
  QuantizerNet(NetArchitecture arch, std::vector<double> params);

  // Glorot-uniform weights, zero biases; deterministic given seed.
  static QuantizerNet init(const NetArchitecture& arch, std::uint64_t seed);

  const NetArchitecture& arch() const { return arch_; }
  const std::vector<double>& params() const { return params_; }
  std::span<double> mutable_params() { return params_; }

  // Output is resized to q * n_y (row-major: point index major).
  void forward(std::span<const double> x, std::vector<double>& out) const;

  // Accumulates dLoss/dparams into param_grad (which must already have
  // param_count entries), where upstream = dLoss/d(output), length q * n_y.
  void backward(std::span<const double> x, std::span<const double> upstream,
                std::span<double> param_grad) const;

  void check_finite() const;

 private:
  NetArchitecture arch_;
  std::vector<double> params_;
};

// Checkpoint errors are distinguished by kind so callers can report the
// exact failure.
struct CheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct CheckpointVersionError : CheckpointError {
  using CheckpointError::CheckpointError;
};
struct CheckpointShapeError : CheckpointError {
  using CheckpointError::CheckpointError;
};
struct CheckpointValueError : CheckpointError {
  using CheckpointError::CheckpointError;
};
struct CheckpointParseError : CheckpointError {
  using CheckpointError::CheckpointError;
};

inline constexpr int kCheckpointFormatVersion = 1;

struct AdamSnapshot {
  std::int64_t t = 0;
  std::vector<double> m;
  std::vector<double> v;
};

struct Checkpoint {
  NetArchitecture arch;
  std::vector<double> params;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> iterations_trained;
  std::optional<AdamSnapshot> adam;
};

// JSON text; floats carry 17 significant digits so the round trip
// save -> load -> save is byte-identical.
std::string checkpoint_to_string(const Checkpoint& ck);
Checkpoint checkpoint_from_string(const std::string& text);

void save_checkpoint(const std::string& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace condquant

#endif  // CONDQUANT_NET_HPP
