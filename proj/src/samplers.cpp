#include "condquant/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace condquant {

namespace {

class AdditiveGaussian final : public ConditionalSampler {
 public:
  explicit AdditiveGaussian(int n) : n_(n) {
    if (n < 1) throw std::invalid_argument("sampler: dimension must be >= 1");
  }
  int x_dim() const override { return n_; }
  int y_dim() const override { return n_; }

  void sample_x(Rng& rng, int count, std::vector<double>& out) const override {
    for (int i = 0; i < count * n_; ++i) out.push_back(rng.next_normal());
  }
  void sample_y_given_x(Rng& rng, std::span<const double> x, int count,
                        std::vector<double>& out) const override {
    if (static_cast<int>(x.size()) != n_)
      throw std::invalid_argument("sampler: condition dimension mismatch");
    for (int i = 0; i < count; ++i)
      for (int k = 0; k < n_; ++k) out.push_back(x[k] + rng.next_normal());
  }

 private:
  int n_;
};

class MultiplicativeGaussian final : public ConditionalSampler {
 public:
  explicit MultiplicativeGaussian(int n) : n_(n) {
    if (n < 1) throw std::invalid_argument("sampler: dimension must be >= 1");
  }
  int x_dim() const override { return n_; }
  int y_dim() const override { return n_; }

  void sample_x(Rng& rng, int count, std::vector<double>& out) const override {
    for (int i = 0; i < count * n_; ++i) out.push_back(rng.next_normal());
  }
  void sample_y_given_x(Rng& rng, std::span<const double> x, int count,
                        std::vector<double>& out) const override {
    if (static_cast<int>(x.size()) != n_)
      throw std::invalid_argument("sampler: condition dimension mismatch");
    for (int i = 0; i < count; ++i)
      for (int k = 0; k < n_; ++k) out.push_back(x[k] * rng.next_normal());
  }

 private:
  int n_;
};

class EmpiricalJoint final : public ConditionalSampler {
 public:
  EmpiricalJoint(std::vector<double> xs, std::vector<double> ys, int n_x,
                 int n_y, int knn_k)
      : xs_(std::move(xs)), ys_(std::move(ys)), n_x_(n_x), n_y_(n_y),
        k_(knn_k) {
    if (n_x_ < 1 || n_y_ < 1)
      throw std::invalid_argument("sampler: dimensions must be >= 1");
    if (xs_.empty() || xs_.size() % static_cast<std::size_t>(n_x_) != 0)
      throw std::invalid_argument("sampler: empty or ragged dataset");
    n_rows_ = static_cast<int>(xs_.size() / static_cast<std::size_t>(n_x_));
    if (ys_.size() != static_cast<std::size_t>(n_rows_) * n_y_)
      throw std::invalid_argument("sampler: x/y row count mismatch");
    if (k_ < 1 || k_ > n_rows_)
      throw std::invalid_argument("knn_k: must lie in [1, dataset size]");
  }

  int x_dim() const override { return n_x_; }
  int y_dim() const override { return n_y_; }

  void sample_x(Rng& rng, int count, std::vector<double>& out) const override {
    for (int i = 0; i < count; ++i) {
      int row = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(n_rows_));
      const double* p = xs_.data() + static_cast<std::size_t>(row) * n_x_;
      out.insert(out.end(), p, p + n_x_);
    }
  }

  void sample_y_given_x(Rng& rng, std::span<const double> x, int count,
                        std::vector<double>& out) const override {
    if (static_cast<int>(x.size()) != n_x_)
      throw std::invalid_argument("sampler: condition dimension mismatch");
    // k nearest rows by squared distance, ties by lowest index
    std::vector<std::pair<double, int>> dist(n_rows_);
    for (int row = 0; row < n_rows_; ++row) {
      const double* p = xs_.data() + static_cast<std::size_t>(row) * n_x_;
      double d2 = 0.0;
      for (int k = 0; k < n_x_; ++k) {
        double d = p[k] - x[k];
        d2 += d * d;
      }
      dist[row] = {d2, row};
    }
    std::partial_sort(dist.begin(), dist.begin() + k_, dist.end());
    for (int i = 0; i < count; ++i) {
      int pick = dist[static_cast<std::size_t>(
                          rng.next_u64() % static_cast<std::uint64_t>(k_))]
                     .second;
      const double* p = ys_.data() + static_cast<std::size_t>(pick) * n_y_;
      out.insert(out.end(), p, p + n_y_);
    }
  }

 private:
  std::vector<double> xs_;
  std::vector<double> ys_;
  int n_x_;
  int n_y_;
  int k_;
  int n_rows_ = 0;
};

}  // namespace

std::unique_ptr<ConditionalSampler> additive_gaussian(int n) {
  return std::make_unique<AdditiveGaussian>(n);
}

std::unique_ptr<ConditionalSampler> multiplicative_gaussian(int n) {
  return std::make_unique<MultiplicativeGaussian>(n);
}

std::unique_ptr<ConditionalSampler> empirical_joint(std::vector<double> xs,
                                                    std::vector<double> ys,
                                                    int n_x, int n_y,
                                                    int knn_k) {
  return std::make_unique<EmpiricalJoint>(std::move(xs), std::move(ys), n_x,
                                          n_y, knn_k);
}

static std::vector<std::string> split_row(const std::string& line, char sep) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, sep)) cells.push_back(cell);
  return cells;
}

Dataset load_dataset_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open dataset: " + path);
  std::string line;
  if (!std::getline(f, line))
    throw std::runtime_error("dataset: missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  Dataset ds;
  for (const auto& name : split_row(line, ',')) {
    if (name.rfind("x_", 0) == 0)
      ds.n_x++;
    else if (name.rfind("y_", 0) == 0)
      ds.n_y++;
    else
      throw std::runtime_error("dataset: unexpected column '" + name + "'");
  }
  if (ds.n_x < 1 || ds.n_y < 1)
    throw std::runtime_error("dataset: header must list x_* then y_* columns");
  int line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_row(line, ',');
    if (static_cast<int>(cells.size()) != ds.n_x + ds.n_y)
      throw std::runtime_error("dataset: wrong cell count at line " +
                               std::to_string(line_no));
    for (int c = 0; c < ds.n_x + ds.n_y; ++c) {
      std::size_t used = 0;
      double v = std::stod(cells[c], &used);
      if (used != cells[c].size() || !std::isfinite(v))
        throw std::runtime_error("dataset: bad value at line " +
                                 std::to_string(line_no));
      (c < ds.n_x ? ds.xs : ds.ys).push_back(v);
    }
  }
  if (ds.xs.empty()) throw std::runtime_error("dataset: no data rows");
  return ds;
}

}  // namespace condquant
