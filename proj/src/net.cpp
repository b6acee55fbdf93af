#include "condquant/net.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "condquant/rng.hpp"
#include "json.hpp"

namespace condquant {

std::vector<int> NetArchitecture::layer_sizes() const {
  std::vector<int> sizes;
  sizes.push_back(input_dim);
  for (int l = 0; l < hidden_layers; ++l) sizes.push_back(effective_width());
  sizes.push_back(output_dim());
  return sizes;
}

std::int64_t NetArchitecture::param_count() const {
  auto sizes = layer_sizes();
  std::int64_t n = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l)
    n += static_cast<std::int64_t>(sizes[l + 1]) * sizes[l] + sizes[l + 1];
  return n;
}

void NetArchitecture::validate() const {
  if (input_dim < 1) throw std::invalid_argument("n_x: must be >= 1");
  if (n_y < 1) throw std::invalid_argument("n_y: must be >= 1");
  if (q < 1) throw std::invalid_argument("q: must be >= 1");
  if (hidden_layers < 0)
    throw std::invalid_argument("hidden_layers: must be >= 0");
  if (width < 0) throw std::invalid_argument("width: must be >= 0");
  if (!(leak >= 0.0) || !std::isfinite(leak))
    throw std::invalid_argument("leak: must be finite and >= 0");
}

QuantizerNet::QuantizerNet(NetArchitecture arch, std::vector<double> params)
    : arch_(arch), params_(std::move(params)) {
  arch_.validate();
  if (static_cast<std::int64_t>(params_.size()) != arch_.param_count())
    throw std::invalid_argument("net: parameter vector length mismatch");
  check_finite();
}

void QuantizerNet::check_finite() const {
  for (double v : params_)
    if (!std::isfinite(v))
      throw std::invalid_argument("net: non-finite parameter");
}

QuantizerNet QuantizerNet::init(const NetArchitecture& arch,
                                std::uint64_t seed) {
  arch.validate();
  auto sizes = arch.layer_sizes();
  std::vector<double> params;
  params.reserve(static_cast<std::size_t>(arch.param_count()));
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    Rng rng = Rng::substream(seed, l, 0, StreamTag::init);
    const int fan_in = sizes[l];
    const int fan_out = sizes[l + 1];
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (int k = 0; k < fan_out * fan_in; ++k)
      params.push_back(limit * (2.0 * rng.next_double() - 1.0));
    for (int k = 0; k < fan_out; ++k) params.push_back(0.0);
  }
  return QuantizerNet(arch, std::move(params));
}

void QuantizerNet::forward(std::span<const double> x,
                           std::vector<double>& out) const {
  const auto sizes = arch_.layer_sizes();
  if (static_cast<int>(x.size()) != sizes.front())
    throw std::invalid_argument("net: input dimension mismatch");
  std::vector<double> cur(x.begin(), x.end());
  std::vector<double> next;
  const double* w = params_.data();
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int in = sizes[l];
    const int out_n = sizes[l + 1];
    const double* bias = w + static_cast<std::size_t>(out_n) * in;
    next.assign(out_n, 0.0);
    for (int o = 0; o < out_n; ++o) {
      double z = bias[o];
      const double* row = w + static_cast<std::size_t>(o) * in;
      for (int i = 0; i < in; ++i) z += row[i] * cur[i];
      const bool last = (l + 2 == sizes.size());
      next[o] = (!last && z < 0.0) ? arch_.leak * z : z;
    }
    cur.swap(next);
    w = bias + out_n;
  }
  out = std::move(cur);
}

void QuantizerNet::backward(std::span<const double> x,
                            std::span<const double> upstream,
                            std::span<double> param_grad) const {
  const auto sizes = arch_.layer_sizes();
  if (static_cast<int>(x.size()) != sizes.front())
    throw std::invalid_argument("net: input dimension mismatch");
  if (static_cast<int>(upstream.size()) != sizes.back())
    throw std::invalid_argument("net: upstream gradient shape mismatch");
  if (static_cast<std::int64_t>(param_grad.size()) != arch_.param_count())
    throw std::invalid_argument("net: parameter gradient shape mismatch");

  const std::size_t n_layers = sizes.size() - 1;
  // forward pass keeping pre-activations of every layer
  std::vector<std::vector<double>> acts(n_layers + 1);
  std::vector<std::vector<double>> pre(n_layers);
  acts[0].assign(x.begin(), x.end());
  std::vector<std::size_t> offsets(n_layers);
  {
    std::size_t off = 0;
    for (std::size_t l = 0; l < n_layers; ++l) {
      offsets[l] = off;
      const int in = sizes[l];
      const int out_n = sizes[l + 1];
      const double* w = params_.data() + off;
      const double* bias = w + static_cast<std::size_t>(out_n) * in;
      pre[l].assign(out_n, 0.0);
      acts[l + 1].assign(out_n, 0.0);
      for (int o = 0; o < out_n; ++o) {
        double z = bias[o];
        const double* row = w + static_cast<std::size_t>(o) * in;
        for (int i = 0; i < in; ++i) z += row[i] * acts[l][i];
        pre[l][o] = z;
        const bool last = (l + 1 == n_layers);
        acts[l + 1][o] = (!last && z < 0.0) ? arch_.leak * z : z;
      }
      off += static_cast<std::size_t>(out_n) * in + out_n;
    }
  }

  std::vector<double> delta(upstream.begin(), upstream.end());
  std::vector<double> delta_prev;
  for (std::size_t l = n_layers; l-- > 0;) {
    const int in = sizes[l];
    const int out_n = sizes[l + 1];
    const double* w = params_.data() + offsets[l];
    double* gw = param_grad.data() + offsets[l];
    double* gb = gw + static_cast<std::size_t>(out_n) * in;
    for (int o = 0; o < out_n; ++o) {
      double* grow = gw + static_cast<std::size_t>(o) * in;
      for (int i = 0; i < in; ++i) grow[i] += delta[o] * acts[l][i];
      gb[o] += delta[o];
    }
    if (l == 0) break;
    delta_prev.assign(in, 0.0);
    for (int o = 0; o < out_n; ++o) {
      const double* row = w + static_cast<std::size_t>(o) * in;
      for (int i = 0; i < in; ++i) delta_prev[i] += row[i] * delta[o];
    }
    // through the leaky-ReLU of layer l-1
    for (int i = 0; i < in; ++i)
      if (pre[l - 1][i] < 0.0) delta_prev[i] *= arch_.leak;
    delta.swap(delta_prev);
  }
}

// ---- checkpoint serialization -------------------------------------------

static void append_double(std::string& out, double v) {
  if (!std::isfinite(v)) {
    out += "null";
    return;
  }
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

static void append_array(std::string& out, const std::vector<double>& xs) {
  out += '[';
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    append_double(out, xs[i]);
  }
  out += ']';
}

std::string checkpoint_to_string(const Checkpoint& ck) {
  std::string s;
  s += "{\n";
  s += "  \"format_version\": " + std::to_string(kCheckpointFormatVersion) +
       ",\n";
  s += "  \"arch\": {\"input_dim\": " + std::to_string(ck.arch.input_dim) +
       ", \"hidden\": " + std::to_string(ck.arch.hidden_layers) +
       ", \"width\": " + std::to_string(ck.arch.effective_width()) +
       ", \"activation\": \"leaky_relu\", \"leak\": ";
  append_double(s, ck.arch.leak);
  s += ", \"n_y\": " + std::to_string(ck.arch.n_y) +
       ", \"Q\": " + std::to_string(ck.arch.q) + "},\n";
  s += "  \"params\": ";
  append_array(s, ck.params);
  if (ck.seed) s += ",\n  \"seed\": " + std::to_string(*ck.seed);
  if (ck.iterations_trained)
    s += ",\n  \"iterations_trained\": " + std::to_string(*ck.iterations_trained);
  if (ck.adam) {
    s += ",\n  \"adam\": {\"t\": " + std::to_string(ck.adam->t) + ", \"m\": ";
    append_array(s, ck.adam->m);
    s += ", \"v\": ";
    append_array(s, ck.adam->v);
    s += "}";
  }
  s += "\n}\n";
  return s;
}

static std::vector<double> read_double_array(const nlohmann::json& j,
                                             const char* what) {
  if (!j.is_array())
    throw CheckpointParseError(std::string(what) + ": expected an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& e : j) {
    if (!e.is_number())
      throw CheckpointValueError(std::string(what) +
                                 ": non-finite parameter");
    double v = e.get<double>();
    if (!std::isfinite(v))
      throw CheckpointValueError(std::string(what) +
                                 ": non-finite parameter");
    out.push_back(v);
  }
  return out;
}

Checkpoint checkpoint_from_string(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointParseError(std::string("checkpoint: ") + e.what());
  }
  try {
    if (!j.contains("format_version") || !j["format_version"].is_number_integer())
      throw CheckpointParseError("checkpoint: missing format_version");
    if (j["format_version"].get<int>() != kCheckpointFormatVersion)
      throw CheckpointVersionError(
          "checkpoint: unsupported format_version " +
          j["format_version"].dump());
    const auto& a = j.at("arch");
    Checkpoint ck;
    ck.arch.input_dim = a.at("input_dim").get<int>();
    ck.arch.hidden_layers = a.at("hidden").get<int>();
    ck.arch.width = a.at("width").get<int>();
    ck.arch.n_y = a.at("n_y").get<int>();
    ck.arch.q = a.at("Q").get<int>();
    if (a.contains("leak")) ck.arch.leak = a.at("leak").get<double>();
    if (a.at("activation").get<std::string>() != "leaky_relu")
      throw CheckpointVersionError("checkpoint: unknown activation");
    ck.arch.validate();
    ck.params = read_double_array(j.at("params"), "params");
    if (static_cast<std::int64_t>(ck.params.size()) != ck.arch.param_count())
      throw CheckpointShapeError("checkpoint: shape mismatch (" +
                                 std::to_string(ck.params.size()) +
                                 " params, architecture needs " +
                                 std::to_string(ck.arch.param_count()) + ")");
    if (j.contains("seed")) ck.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("iterations_trained"))
      ck.iterations_trained = j["iterations_trained"].get<std::int64_t>();
    if (j.contains("adam")) {
      AdamSnapshot snap;
      snap.t = j["adam"].at("t").get<std::int64_t>();
      snap.m = read_double_array(j["adam"].at("m"), "adam.m");
      snap.v = read_double_array(j["adam"].at("v"), "adam.v");
      if (snap.m.size() != ck.params.size() || snap.v.size() != ck.params.size())
        throw CheckpointShapeError("checkpoint: optimizer state shape mismatch");
      ck.adam = std::move(snap);
    }
    return ck;
  } catch (const CheckpointError&) {
    throw;
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointParseError(std::string("checkpoint: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw CheckpointShapeError(std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::string& path, const Checkpoint& ck) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << checkpoint_to_string(ck);
  if (!f.good()) throw std::runtime_error("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return checkpoint_from_string(ss.str());
}

}  // namespace condquant
