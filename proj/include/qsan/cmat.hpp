#pragma once

#include <Eigen/Dense>

#include <complex>
#include <string>

namespace qsan {

using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;
using ZMat = Eigen::MatrixXcd;

// Complex matrix stored as separate real and imaginary planes.
struct CMat {
  RMat re;
  RMat im;

  CMat() = default;
  CMat(RMat re_part, RMat im_part);
  explicit CMat(RMat re_part);  // zero imaginary plane

  static CMat zeros(Eigen::Index rows, Eigen::Index cols);
  static CMat from_complex(const ZMat& z);

  Eigen::Index rows() const { return re.rows(); }
  Eigen::Index cols() const { return re.cols(); }
  Eigen::Index size() const { return re.size(); }
  bool empty() const { return re.size() == 0; }

  std::complex<double> operator()(Eigen::Index r, Eigen::Index c) const {
    return {re(r, c), im(r, c)};
  }
  void set(Eigen::Index r, Eigen::Index c, std::complex<double> z) {
    re(r, c) = z.real();
    im(r, c) = z.imag();
  }

  ZMat to_complex() const;
  bool all_finite() const;
  std::string shape_string() const;

  CMat& operator+=(const CMat& other);
};

CMat operator+(const CMat& a, const CMat& b);
CMat operator-(const CMat& a, const CMat& b);
CMat operator*(double s, const CMat& a);

// Complex matrix product in the split real/imaginary form.
CMat cmul(const CMat& a, const CMat& b);
CMat transpose(const CMat& a);
CMat adjoint(const CMat& a);
CMat conj(const CMat& a);

// tanh applied to each plane independently.
CMat ctanh(const CMat& a);

std::string shape_string(Eigen::Index rows, Eigen::Index cols);

}  // namespace qsan
