#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace optiloop {

/// Thrown when two tensors with different shapes meet in an elementwise op.
struct DimsMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Shape of the public decision space: items x nodes x periods.
struct Dims {
  int items = 1;
  int nodes = 1;
  int periods = 1;

  Dims() = default;
  Dims(int a, int j, int t) : items(a), nodes(j), periods(t) {
    if (a < 1 || j < 1 || t < 1) {
      throw std::invalid_argument("Dims: all extents must be >= 1");
    }
  }

  Eigen::Index size() const {
    return static_cast<Eigen::Index>(items) * nodes * periods;
  }

  // Flat layout is row-major with item outermost and period innermost.
  Eigen::Index flat(int i, int j, int t) const {
    return (static_cast<Eigen::Index>(i) * nodes + j) * periods + t;
  }

  friend bool operator==(const Dims&, const Dims&) = default;
};

/// Dense nonnegative-by-convention tensor over (item, node, period).
/// Plans x and consensus z stay >= 0; duals may take any sign; penalties
/// stay > 0. The container itself does not police signs: construction
/// sites do.
class PlanTensor {
 public:
  PlanTensor() = default;

  explicit PlanTensor(Dims dims)
      : dims_(dims), values_(Eigen::ArrayXd::Zero(dims.size())) {}

  PlanTensor(Dims dims, Eigen::ArrayXd values)
      : dims_(dims), values_(std::move(values)) {
    if (values_.size() != dims_.size()) {
      throw DimsMismatch("PlanTensor: value count does not match dims");
    }
  }

  static PlanTensor zeros(Dims dims) { return PlanTensor(dims); }

  static PlanTensor constant(Dims dims, double v) {
    return PlanTensor(dims, Eigen::ArrayXd::Constant(dims.size(), v));
  }

  const Dims& dims() const { return dims_; }
  Eigen::Index size() const { return values_.size(); }

  double operator[](Eigen::Index k) const { return values_[k]; }
  double& operator[](Eigen::Index k) { return values_[k]; }

  double at(int i, int j, int t) const { return values_[dims_.flat(i, j, t)]; }
  double& at(int i, int j, int t) { return values_[dims_.flat(i, j, t)]; }

  const Eigen::ArrayXd& values() const { return values_; }
  Eigen::ArrayXd& values() { return values_; }

  double sum() const { return values_.sum(); }
  double max() const { return values_.size() ? values_.maxCoeff() : 0.0; }

  friend bool operator==(const PlanTensor& a, const PlanTensor& b) {
    return a.dims_ == b.dims_ &&
           (a.values_ == b.values_).all();
  }

 private:
  Dims dims_{};
  Eigen::ArrayXd values_{Eigen::ArrayXd::Zero(1)};
};

enum class ElementwiseOp { add, sub, mul };

inline void require_same_dims(const PlanTensor& a, const PlanTensor& b,
                              const char* where) {
  if (!(a.dims() == b.dims())) {
    throw DimsMismatch(std::string(where) + ": dims mismatch");
  }
}

inline PlanTensor elementwise(ElementwiseOp op, const PlanTensor& a,
                              const PlanTensor& b) {
  require_same_dims(a, b, "elementwise");
  switch (op) {
    case ElementwiseOp::add:
      return PlanTensor(a.dims(), a.values() + b.values());
    case ElementwiseOp::sub:
      return PlanTensor(a.dims(), a.values() - b.values());
    case ElementwiseOp::mul:
      return PlanTensor(a.dims(), a.values() * b.values());
  }
  throw std::logic_error("elementwise: unknown op");
}

inline PlanTensor operator+(const PlanTensor& a, const PlanTensor& b) {
  return elementwise(ElementwiseOp::add, a, b);
}
inline PlanTensor operator-(const PlanTensor& a, const PlanTensor& b) {
  return elementwise(ElementwiseOp::sub, a, b);
}
inline PlanTensor operator*(const PlanTensor& a, const PlanTensor& b) {
  return elementwise(ElementwiseOp::mul, a, b);
}

/// Euclidean norm of the flattened tensor.
inline double norm2(const PlanTensor& a) {
  return a.values().matrix().norm();
}

inline double inner(const PlanTensor& a, const PlanTensor& b) {
  require_same_dims(a, b, "inner");
  return a.values().matrix().dot(b.values().matrix());
}

}  // namespace optiloop
