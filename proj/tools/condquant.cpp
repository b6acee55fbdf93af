// condquant: train conditional quantizer networks and export plot-ready
// CSV data (quantize, eval-oracle, surface).
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "condquant/net.hpp"
#include "condquant/oracle.hpp"
#include "condquant/samplers.hpp"
#include "condquant/trainer.hpp"
#include "json.hpp"

namespace cq = condquant;
namespace fs = std::filesystem;

namespace {

constexpr const char* kCodeVersion = "condquant 0.1.0";

constexpr int kExitIo = 1;
constexpr int kExitBadInput = 2;
constexpr int kExitNumerical = 3;

struct SpecError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Experiment spec: `key = value` lines, '#' comments, unknown keys rejected.
struct ExperimentSpec {
  std::string name = "experiment";
  std::string sampler = "additive";
  std::string dataset_path;
  int knn_k = 1;
  int n_x = 0;
  int n_y = 0;
  int q = 1;
  int hidden_layers = 5;
  int width = 0;
  cq::TrainConfig train;
  std::optional<std::uint64_t> seed;
};

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  std::istringstream ss(value);
  T v{};
  ss >> v;
  if (ss.fail() || !ss.eof())
    throw SpecError(key + ": cannot parse value '" + value + "'");
  return v;
}

ExperimentSpec parse_spec(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open spec: " + path);
  ExperimentSpec spec;
  double kernel_a = spec.train.kernel.a();
  double kernel_r = spec.train.kernel.r();
  std::string line;
  int line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw SpecError("line " + std::to_string(line_no) +
                      ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key == "name") spec.name = value;
    else if (key == "sampler") spec.sampler = value;
    else if (key == "dataset") spec.dataset_path = value;
    else if (key == "knn_k") spec.knn_k = parse_number<int>(key, value);
    else if (key == "n_x") spec.n_x = parse_number<int>(key, value);
    else if (key == "n_y") spec.n_y = parse_number<int>(key, value);
    else if (key == "q") spec.q = parse_number<int>(key, value);
    else if (key == "hidden_layers")
      spec.hidden_layers = parse_number<int>(key, value);
    else if (key == "width") spec.width = parse_number<int>(key, value);
    else if (key == "batch_size")
      spec.train.batch_size = parse_number<int>(key, value);
    else if (key == "sample_size")
      spec.train.sample_size = parse_number<int>(key, value);
    else if (key == "kernel_a") kernel_a = parse_number<double>(key, value);
    else if (key == "kernel_r") kernel_r = parse_number<double>(key, value);
    else if (key == "max_iterations")
      spec.train.max_iterations = parse_number<int>(key, value);
    else if (key == "seed") spec.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "learning_rate")
      spec.train.adam.learning_rate = parse_number<double>(key, value);
    else if (key == "beta1") spec.train.adam.beta1 = parse_number<double>(key, value);
    else if (key == "beta2") spec.train.adam.beta2 = parse_number<double>(key, value);
    else if (key == "epsilon")
      spec.train.adam.epsilon = parse_number<double>(key, value);
    else if (key == "clip_norm")
      spec.train.adam.clip_norm = parse_number<double>(key, value);
    else if (key == "checkpoint_every")
      spec.train.checkpoint_every = parse_number<int>(key, value);
    else if (key == "log_every")
      spec.train.log_every = parse_number<int>(key, value);
    else
      throw SpecError("unknown key '" + key + "' at line " +
                      std::to_string(line_no));
  }
  try {
    spec.train.kernel = cq::KernelParams(kernel_a, kernel_r);
  } catch (const std::invalid_argument& e) {
    throw SpecError(e.what());
  }
  return spec;
}

std::unique_ptr<cq::ConditionalSampler> make_sampler(ExperimentSpec& spec) {
  if (spec.sampler == "additive" || spec.sampler == "multiplicative") {
    if (spec.n_x == 0 && spec.n_y != 0) spec.n_x = spec.n_y;
    if (spec.n_y == 0 && spec.n_x != 0) spec.n_y = spec.n_x;
    if (spec.n_x < 1 || spec.n_x != spec.n_y)
      throw SpecError("n_x/n_y: gaussian samplers need n_x = n_y >= 1");
    return spec.sampler == "additive" ? cq::additive_gaussian(spec.n_x)
                                      : cq::multiplicative_gaussian(spec.n_x);
  }
  if (spec.sampler == "dataset") {
    if (spec.dataset_path.empty())
      throw SpecError("dataset: path required for the dataset sampler");
    cq::Dataset ds = cq::load_dataset_csv(spec.dataset_path);
    if ((spec.n_x && spec.n_x != ds.n_x) || (spec.n_y && spec.n_y != ds.n_y))
      throw SpecError("n_x/n_y: spec dimensions disagree with the dataset");
    spec.n_x = ds.n_x;
    spec.n_y = ds.n_y;
    return cq::empirical_joint(std::move(ds.xs), std::move(ds.ys), ds.n_x,
                               ds.n_y, spec.knn_k);
  }
  throw SpecError("sampler: expected additive, multiplicative or dataset");
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& cli_seed,
                           const std::optional<std::uint64_t>& spec_seed) {
  if (cli_seed) return *cli_seed;
  if (spec_seed) return *spec_seed;
  if (const char* env = std::getenv("CONDQUANT_SEED"))
    return std::strtoull(env, nullptr, 10);
  return 0;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_manifest(const fs::path& path, const ExperimentSpec& spec,
                    std::uint64_t seed) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["code_version"] = kCodeVersion;
  j["checkpoint_format_version"] = cq::kCheckpointFormatVersion;
  j["name"] = spec.name;
  j["seed"] = seed;
  nlohmann::json s;
  s["sampler"] = spec.sampler;
  if (!spec.dataset_path.empty()) {
    s["dataset"] = spec.dataset_path;
    s["knn_k"] = spec.knn_k;
  }
  s["n_x"] = spec.n_x;
  s["n_y"] = spec.n_y;
  s["q"] = spec.q;
  s["hidden_layers"] = spec.hidden_layers;
  s["width"] = spec.width;
  s["batch_size"] = spec.train.batch_size;
  s["sample_size"] = spec.train.sample_size;
  s["kernel_a"] = spec.train.kernel.a();
  s["kernel_r"] = spec.train.kernel.r();
  s["max_iterations"] = spec.train.max_iterations;
  s["learning_rate"] = spec.train.adam.learning_rate;
  s["beta1"] = spec.train.adam.beta1;
  s["beta2"] = spec.train.adam.beta2;
  s["epsilon"] = spec.train.adam.epsilon;
  s["clip_norm"] = spec.train.adam.clip_norm;
  s["checkpoint_every"] = spec.train.checkpoint_every;
  s["log_every"] = spec.train.log_every;
  j["spec"] = std::move(s);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path.string());
  f << j.dump(2) << '\n';
  if (!f.good()) throw std::runtime_error("write failed: " + path.string());
}

int cmd_train(const std::string& spec_path,
              const std::optional<std::uint64_t>& cli_seed,
              const std::string& out_dir, bool timing) {
  ExperimentSpec spec;
  std::unique_ptr<cq::ConditionalSampler> sampler;
  try {
    spec = parse_spec(spec_path);
    sampler = make_sampler(spec);
  } catch (const SpecError& e) {
    std::cerr << "invalid spec: " << e.what() << "\n";
    return kExitBadInput;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitIo;
  }
  spec.train.seed = resolve_seed(cli_seed, spec.seed);

  cq::NetArchitecture arch;
  arch.input_dim = spec.n_x;
  arch.n_y = spec.n_y;
  arch.q = spec.q;
  arch.hidden_layers = spec.hidden_layers;
  arch.width = spec.width;

  try {
    spec.train.validate();
    arch.validate();
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid spec: " << e.what() << "\n";
    return kExitBadInput;
  }

  try {
    fs::create_directories(out_dir);
    fs::path out(out_dir);
    auto [net, report] =
        cq::train(spec.train, arch, *sampler, (out / "model.ckpt").string());
    cq::write_train_log((out / "train_log.csv").string(), report.trace, timing);
    write_manifest(out / "manifest.json", spec, spec.train.seed);
  } catch (const cq::TrainError& e) {
    std::cerr << "numerical failure at " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitIo;
  }
  return 0;
}

std::vector<double> parse_csv_doubles(const std::string& text) {
  std::vector<double> out;
  std::istringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    std::size_t used = 0;
    double v = std::stod(cell, &used);
    if (used != cell.size())
      throw std::invalid_argument("cannot parse number '" + cell + "'");
    out.push_back(v);
  }
  return out;
}

int cmd_quantize(const std::string& ckpt_path,
                 const std::vector<std::string>& x_args,
                 const std::string& out_path) {
  cq::Checkpoint ck;
  try {
    ck = cq::load_checkpoint(ckpt_path);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitIo;
  }
  cq::QuantizerNet net(ck.arch, ck.params);
  const int n_x = ck.arch.input_dim;
  const int n_y = ck.arch.n_y;

  std::vector<std::vector<double>> conditions;
  for (const auto& arg : x_args) {
    std::vector<double> x;
    try {
      x = parse_csv_doubles(arg);
    } catch (const std::exception& e) {
      std::cerr << "--x: " << e.what() << "\n";
      return kExitBadInput;
    }
    if (static_cast<int>(x.size()) != n_x) {
      std::cerr << "--x '" << arg << "': expected " << n_x << " coordinates\n";
      return kExitBadInput;
    }
    conditions.push_back(std::move(x));
  }

  std::ofstream f(out_path, std::ios::binary);
  if (!f) {
    std::cerr << "cannot open for writing: " << out_path << "\n";
    return kExitIo;
  }
  for (int k = 1; k <= n_x; ++k) f << "x_" << k << ',';
  f << "q_index";
  for (int k = 1; k <= n_y; ++k) f << ",y_" << k;
  f << '\n';
  std::vector<double> out;
  for (const auto& x : conditions) {
    net.forward(x, out);
    for (int qi = 0; qi < ck.arch.q; ++qi) {
      for (double xv : x) f << fmt17(xv) << ',';
      f << qi;
      for (int k = 0; k < n_y; ++k)
        f << ',' << fmt17(out[static_cast<std::size_t>(qi) * n_y + k]);
      f << '\n';
    }
  }
  return f.good() ? 0 : kExitIo;
}

struct GridRange {
  double lo = 0.0, hi = 0.0;
  int count = 0;
  double at(int i) const {
    if (count == 1) return lo;
    return lo + (hi - lo) * static_cast<double>(i) / (count - 1);
  }
};

GridRange parse_grid_range(const std::string& text) {
  GridRange g;
  std::istringstream ss(text);
  std::string a, b, c;
  if (!std::getline(ss, a, ':') || !std::getline(ss, b, ':') ||
      !std::getline(ss, c))
    throw std::invalid_argument("grid: expected min:max:count");
  g.lo = std::stod(a);
  g.hi = std::stod(b);
  g.count = std::stoi(c);
  if (g.count < 1 || (g.count > 1 && !(g.lo < g.hi)))
    throw std::invalid_argument("grid: need min < max and count >= 1");
  return g;
}

int cmd_eval_oracle(const std::string& ckpt_path, const std::string& law,
                    const std::string& law_params, const std::string& grid_text,
                    const std::string& out_path) {
  cq::Checkpoint ck;
  try {
    ck = cq::load_checkpoint(ckpt_path);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitIo;
  }
  if (ck.arch.input_dim != 1 || ck.arch.n_y != 1) {
    std::cerr << "eval-oracle: checkpoint must be 1D (n_x = n_y = 1)\n";
    return kExitBadInput;
  }
  GridRange grid;
  std::vector<double> lp;
  try {
    grid = parse_grid_range(grid_text);
    lp = parse_csv_doubles(law_params);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitBadInput;
  }

  // base law of the noise; conditional law at x is the base shifted by x
  std::optional<cq::QuantileFunction> base;
  try {
    if (law == "normal") {
      if (lp.size() != 2) throw std::invalid_argument(
          "--law-params: normal expects 'mean,sigma'");
      base = cq::QuantileFunction::normal(lp[0], lp[1]);
    } else if (law == "uniform") {
      if (lp.size() != 2) throw std::invalid_argument(
          "--law-params: uniform expects 'lo,hi'");
      base = cq::QuantileFunction::uniform(lp[0], lp[1]);
    } else {
      throw std::invalid_argument("--law: expected normal or uniform");
    }
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitBadInput;
  }
  std::vector<double> base_points = cq::quantile_quantizer(*base, ck.arch.q);

  cq::QuantizerNet net(ck.arch, ck.params);
  std::ofstream f(out_path, std::ios::binary);
  if (!f) {
    std::cerr << "cannot open for writing: " << out_path << "\n";
    return kExitIo;
  }
  f << "x,q_index,y_net,y_oracle,abs_err\n";
  double max_err = 0.0, sum_err = 0.0;
  std::size_t n_rows = 0;
  std::vector<double> out;
  for (int i = 0; i < grid.count; ++i) {
    const double x = grid.at(i);
    net.forward(std::vector<double>{x}, out);
    std::sort(out.begin(), out.end());
    for (int qi = 0; qi < ck.arch.q; ++qi) {
      const double y_net = out[static_cast<std::size_t>(qi)];
      const double y_oracle = x + base_points[static_cast<std::size_t>(qi)];
      const double err = std::abs(y_net - y_oracle);
      max_err = std::max(max_err, err);
      sum_err += err;
      ++n_rows;
      f << fmt17(x) << ',' << qi << ',' << fmt17(y_net) << ','
        << fmt17(y_oracle) << ',' << fmt17(err) << '\n';
    }
  }
  std::cout << "max_abs_err=" << fmt17(max_err)
            << " mean_abs_err=" << fmt17(sum_err / static_cast<double>(n_rows))
            << "\n";
  return f.good() ? 0 : kExitIo;
}

int cmd_surface(const std::string& ckpt_path, const std::string& grid_text,
                const std::string& out_path) {
  cq::Checkpoint ck;
  try {
    ck = cq::load_checkpoint(ckpt_path);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitIo;
  }
  if (ck.arch.input_dim != 2) {
    std::cerr << "surface: checkpoint must have n_x = 2\n";
    return kExitBadInput;
  }
  GridRange g1, g2;
  try {
    auto comma = grid_text.find(',');
    if (comma == std::string::npos)
      throw std::invalid_argument("--grid: expected two ranges 'r1,r2'");
    g1 = parse_grid_range(grid_text.substr(0, comma));
    g2 = parse_grid_range(grid_text.substr(comma + 1));
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitBadInput;
  }

  cq::QuantizerNet net(ck.arch, ck.params);
  std::ofstream f(out_path, std::ios::binary);
  if (!f) {
    std::cerr << "cannot open for writing: " << out_path << "\n";
    return kExitIo;
  }
  f << "x_1,x_2,q_index,dim_index,value\n";
  std::vector<double> out;
  for (int i = 0; i < g1.count; ++i)
    for (int j = 0; j < g2.count; ++j) {
      const double x1 = g1.at(i), x2 = g2.at(j);
      net.forward(std::vector<double>{x1, x2}, out);
      for (int qi = 0; qi < ck.arch.q; ++qi)
        for (int k = 0; k < ck.arch.n_y; ++k)
          f << fmt17(x1) << ',' << fmt17(x2) << ',' << qi << ',' << k << ','
            << fmt17(out[static_cast<std::size_t>(qi) * ck.arch.n_y + k])
            << '\n';
    }
  return f.good() ? 0 : kExitIo;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"conditional measure quantization via deep networks"};
  app.require_subcommand(1);

  std::string spec_path, out_dir = "out";
  std::optional<std::uint64_t> cli_seed;
  bool timing = false;
  auto* train = app.add_subcommand("train", "train a quantizer network");
  train->add_option("spec", spec_path, "experiment spec file")->required();
  train->add_option("--seed", cli_seed, "seed override");
  train->add_option("--out", out_dir, "output directory");
  train->add_flag("--timing", timing,
                  "record wall_ms in train_log.csv (breaks byte-level "
                  "reproducibility of the log)");

  std::string ckpt_path, csv_path;
  std::vector<std::string> x_args;
  auto* quantize = app.add_subcommand("quantize", "emit quantizer points");
  quantize->add_option("checkpoint", ckpt_path, "model checkpoint")->required();
  quantize->add_option("--x", x_args, "condition 'v1,v2,...' (repeatable)")
      ->required();
  quantize->add_option("--out", csv_path, "output CSV")
      ->default_val("quantize.csv");

  std::string law = "normal", law_params = "0,1", grid_text;
  auto* eval_oracle =
      app.add_subcommand("eval-oracle", "compare a 1D model to the quantile oracle");
  eval_oracle->add_option("checkpoint", ckpt_path)->required();
  eval_oracle->add_option("--law", law, "normal | uniform");
  eval_oracle->add_option("--law-params", law_params,
                          "normal: 'mean,sigma'; uniform: 'lo,hi'");
  eval_oracle->add_option("--grid", grid_text, "x grid 'min:max:count'")
      ->required();
  eval_oracle->add_option("--out", csv_path)->default_val("eval_oracle.csv");

  auto* surface =
      app.add_subcommand("surface", "sample the quantizer map on a 2D grid");
  surface->add_option("checkpoint", ckpt_path)->required();
  surface->add_option("--grid", grid_text, "'min:max:count,min:max:count'")
      ->required();
  surface->add_option("--out", csv_path)->default_val("surface.csv");

  CLI11_PARSE(app, argc, argv);

  if (train->parsed()) return cmd_train(spec_path, cli_seed, out_dir, timing);
  if (quantize->parsed()) return cmd_quantize(ckpt_path, x_args, csv_path);
  if (eval_oracle->parsed())
    return cmd_eval_oracle(ckpt_path, law, law_params, grid_text, csv_path);
  if (surface->parsed()) return cmd_surface(ckpt_path, grid_text, csv_path);
  return kExitBadInput;
}
