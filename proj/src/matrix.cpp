#include "shgcn/matrix.hpp"

#include <algorithm>
#include <cmath>

#include "shgcn/errors.hpp"

namespace shgcn {

Matrix::Matrix(int rows, int cols)
    : rows_(rows), cols_(cols),
      data_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), 0.0) {
  if (rows < 0 || cols < 0) throw ContractError("Matrix: negative dimension");
}

Matrix::Matrix(int rows, int cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (rows < 0 || cols < 0) throw ContractError("Matrix: negative dimension");
  if (data_.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols))
    throw ContractError("Matrix: data length does not match rows*cols");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = static_cast<int>(rows.size());
  cols_ = rows_ > 0 ? static_cast<int>(rows.begin()->size()) : 0;
  data_.reserve(static_cast<std::size_t>(rows_) * cols_);
  for (const auto& r : rows) {
    if (static_cast<int>(r.size()) != cols_)
      throw ContractError("Matrix: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

bool Matrix::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool operator==(const Matrix& a, const Matrix& b) {
  return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
}

void gemm_nn(const Matrix& a, const Matrix& b, Matrix& out, bool accumulate) {
  const int m = a.rows(), k = a.cols(), n = b.cols();
  if (!accumulate) out.set_zero();
  for (int i = 0; i < m; ++i) {
    const double* arow = a.row(i);
    double* orow = out.row(i);
    for (int p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      const double* brow = b.row(p);
      for (int j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
  }
}

void gemm_nt(const Matrix& a, const Matrix& b, Matrix& out, bool accumulate) {
  const int m = a.rows(), k = a.cols(), n = b.rows();
  if (!accumulate) out.set_zero();
  for (int i = 0; i < m; ++i) {
    const double* arow = a.row(i);
    double* orow = out.row(i);
    for (int j = 0; j < n; ++j) {
      const double* brow = b.row(j);
      double acc = 0.0;
      for (int p = 0; p < k; ++p) acc += arow[p] * brow[p];
      orow[j] += acc;
    }
  }
}

void gemm_tn(const Matrix& a, const Matrix& b, Matrix& out, bool accumulate) {
  const int m = a.cols(), k = a.rows(), n = b.cols();
  if (!accumulate) out.set_zero();
  for (int p = 0; p < k; ++p) {
    const double* arow = a.row(p);
    const double* brow = b.row(p);
    for (int i = 0; i < m; ++i) {
      const double av = arow[i];
      if (av == 0.0) continue;
      double* orow = out.row(i);
      for (int j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
  }
}

}  // namespace shgcn
