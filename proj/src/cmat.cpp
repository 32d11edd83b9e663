#include "qsan/cmat.hpp"

#include "qsan/errors.hpp"

#include <sstream>

namespace qsan {

CMat::CMat(RMat re_part, RMat im_part) : re(std::move(re_part)), im(std::move(im_part)) {
  if (re.rows() != im.rows() || re.cols() != im.cols()) {
    throw ShapeError("CMat planes differ in shape: re " + qsan::shape_string(re.rows(), re.cols()) +
                     " vs im " + qsan::shape_string(im.rows(), im.cols()));
  }
}

CMat::CMat(RMat re_part) : re(std::move(re_part)), im(RMat::Zero(re.rows(), re.cols())) {}

CMat CMat::zeros(Eigen::Index rows, Eigen::Index cols) {
  return CMat(RMat::Zero(rows, cols), RMat::Zero(rows, cols));
}

CMat CMat::from_complex(const ZMat& z) { return CMat(z.real(), z.imag()); }

ZMat CMat::to_complex() const {
  ZMat z(rows(), cols());
  z.real() = re;
  z.imag() = im;
  return z;
}

bool CMat::all_finite() const { return re.allFinite() && im.allFinite(); }

std::string CMat::shape_string() const { return qsan::shape_string(rows(), cols()); }

CMat& CMat::operator+=(const CMat& other) {
  if (rows() != other.rows() || cols() != other.cols()) {
    throw ShapeError("cannot add " + other.shape_string() + " into " + shape_string());
  }
  re += other.re;
  im += other.im;
  return *this;
}

std::string shape_string(Eigen::Index rows, Eigen::Index cols) {
  std::ostringstream os;
  os << rows << "x" << cols;
  return os.str();
}

CMat operator+(const CMat& a, const CMat& b) {
  CMat out = a;
  out += b;
  return out;
}

CMat operator-(const CMat& a, const CMat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError("cannot subtract " + b.shape_string() + " from " + a.shape_string());
  }
  return CMat(a.re - b.re, a.im - b.im);
}

CMat operator*(double s, const CMat& a) { return CMat(s * a.re, s * a.im); }

CMat cmul(const CMat& a, const CMat& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("cmul dimension mismatch: " + a.shape_string() + " times " +
                     b.shape_string());
  }
  return CMat(a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re);
}

CMat transpose(const CMat& a) { return CMat(a.re.transpose(), a.im.transpose()); }

CMat adjoint(const CMat& a) { return CMat(a.re.transpose(), -a.im.transpose()); }

CMat conj(const CMat& a) { return CMat(a.re, -a.im); }

CMat ctanh(const CMat& a) {
  return CMat(a.re.array().tanh().matrix(), a.im.array().tanh().matrix());
}

}  // namespace qsan
