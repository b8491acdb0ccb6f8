#pragma once
#include <cstddef>
#include <initializer_list>
#include <vector>

namespace shgcn {

// Dense row-major matrix of 64-bit floats. The whole engine runs in
// doubles so finite-difference checks have headroom.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols);                            // zero-initialized
  Matrix(int rows, int cols, std::vector<double> data);  // takes ownership
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  double* row(int r) { return data_.data() + static_cast<std::size_t>(r) * cols_; }
  const double* row(int r) const {
    return data_.data() + static_cast<std::size_t>(r) * cols_;
  }

  double& operator()(int r, int c) {
    return data_[static_cast<std::size_t>(r) * cols_ + c];
  }
  double operator()(int r, int c) const {
    return data_[static_cast<std::size_t>(r) * cols_ + c];
  }

  bool same_shape(const Matrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_;
  }
  bool all_finite() const;
  void fill(double v);
  void set_zero() { fill(0.0); }

  friend bool operator==(const Matrix& a, const Matrix& b);

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

// out = A * B (optionally accumulating into out). Shapes are the caller's
// responsibility; the tape validates before dispatching here.
void gemm_nn(const Matrix& a, const Matrix& b, Matrix& out, bool accumulate = false);
// out = A * B^T
void gemm_nt(const Matrix& a, const Matrix& b, Matrix& out, bool accumulate = false);
// out = A^T * B
void gemm_tn(const Matrix& a, const Matrix& b, Matrix& out, bool accumulate = false);

}  // namespace shgcn
