#include "genformer/tensor.hpp"

#include <cmath>

namespace genformer::nn {

Tensor Tensor::full(int r, int c, double value) {
  Tensor t(r, c);
  std::fill(t.v.begin(), t.v.end(), value);
  return t;
}

Tensor Tensor::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  Tensor t(static_cast<int>(rows.size()),
           rows.size() ? static_cast<int>(rows.begin()->size()) : 0);
  int r = 0;
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != t.cols)
      throw ShapeMismatch("Tensor::from_rows: ragged rows");
    int c = 0;
    for (double x : row) t.at(r, c++) = x;
    ++r;
  }
  return t;
}

double Tensor::scalar() const {
  if (!is_scalar()) throw ShapeMismatch("Tensor::scalar: not 1x1");
  return v[0];
}

void Tensor::check_finite(const char* where) const {
  for (double x : v)
    if (!std::isfinite(x)) throw NonFiniteResult(std::string(where) + ": non-finite value");
}

void mm_nn(const Tensor& a, const Tensor& b, Tensor& out, bool accumulate) {
  if (a.cols != b.rows) throw ShapeMismatch("mm_nn: inner dimensions differ");
  if (out.rows != a.rows || out.cols != b.cols) throw ShapeMismatch("mm_nn: bad output shape");
  if (!accumulate) std::fill(out.v.begin(), out.v.end(), 0.0);
  for (int r = 0; r < a.rows; ++r) {
    double* dst = out.row(r);
    const double* arow = a.row(r);
    for (int k = 0; k < a.cols; ++k) {
      const double s = arow[k];
      if (s == 0.0) continue;
      const double* brow = b.row(k);
      for (int c = 0; c < b.cols; ++c) dst[c] += s * brow[c];
    }
  }
}

void mm_tn(const Tensor& a, const Tensor& b, Tensor& out, bool accumulate) {
  if (a.rows != b.rows) throw ShapeMismatch("mm_tn: inner dimensions differ");
  if (out.rows != a.cols || out.cols != b.cols) throw ShapeMismatch("mm_tn: bad output shape");
  if (!accumulate) std::fill(out.v.begin(), out.v.end(), 0.0);
  for (int k = 0; k < a.rows; ++k) {
    const double* arow = a.row(k);
    const double* brow = b.row(k);
    for (int r = 0; r < a.cols; ++r) {
      const double s = arow[r];
      if (s == 0.0) continue;
      double* dst = out.row(r);
      for (int c = 0; c < b.cols; ++c) dst[c] += s * brow[c];
    }
  }
}

void mm_nt(const Tensor& a, const Tensor& b, Tensor& out, bool accumulate) {
  if (a.cols != b.cols) throw ShapeMismatch("mm_nt: inner dimensions differ");
  if (out.rows != a.rows || out.cols != b.rows) throw ShapeMismatch("mm_nt: bad output shape");
  if (!accumulate) std::fill(out.v.begin(), out.v.end(), 0.0);
  for (int r = 0; r < a.rows; ++r) {
    const double* arow = a.row(r);
    double* dst = out.row(r);
    for (int c = 0; c < b.rows; ++c) {
      const double* brow = b.row(c);
      double acc = 0.0;
      for (int k = 0; k < a.cols; ++k) acc += arow[k] * brow[k];
      dst[c] += acc;
    }
  }
}

void init_xavier_uniform(Tensor& w, int fan_in, int fan_out, Rng& rng) {
  double a = std::sqrt(6.0 / (fan_in + fan_out));
  for (double& x : w.v) x = rng.uniform(-a, a);
}

void init_normal(Tensor& w, double stddev, Rng& rng) {
  for (double& x : w.v) x = stddev * rng.normal();
}

}  // namespace genformer::nn
