#pragma once

#include <initializer_list>
#include <vector>

#include "genformer/errors.hpp"
#include "genformer/rng.hpp"

namespace genformer::nn {

// Dense row-major matrix of doubles. Scalars are 1x1, vectors r x 1.
struct Tensor {
  int rows = 0;
  int cols = 0;
  std::vector<double> v;

  Tensor() = default;
  Tensor(int r, int c) : rows(r), cols(c), v(static_cast<std::size_t>(r) * c, 0.0) {}

  static Tensor zeros(int r, int c) { return Tensor(r, c); }
  static Tensor full(int r, int c, double value);
  static Tensor from_rows(std::initializer_list<std::initializer_list<double>> rows);

  double& at(int r, int c) { return v[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return v[static_cast<std::size_t>(r) * cols + c]; }
  double* row(int r) { return v.data() + static_cast<std::size_t>(r) * cols; }
  const double* row(int r) const { return v.data() + static_cast<std::size_t>(r) * cols; }

  std::size_t size() const { return v.size(); }
  bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }
  bool is_scalar() const { return rows == 1 && cols == 1; }
  double scalar() const;
  void check_finite(const char* where) const;
};

// out (+)= a * b, a is r x k, b is k x c.
void mm_nn(const Tensor& a, const Tensor& b, Tensor& out, bool accumulate);
// out (+)= a^T * b, a is k x r, b is k x c.
void mm_tn(const Tensor& a, const Tensor& b, Tensor& out, bool accumulate);
// out (+)= a * b^T, a is r x k, b is c x k.
void mm_nt(const Tensor& a, const Tensor& b, Tensor& out, bool accumulate);

void init_xavier_uniform(Tensor& w, int fan_in, int fan_out, Rng& rng);
void init_normal(Tensor& w, double stddev, Rng& rng);

}  // namespace genformer::nn
