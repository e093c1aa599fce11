#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace aesa {

using cplx = std::complex<double>;

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kPi = std::numbers::pi;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

inline double to_db(double linear) { return 10.0 * std::log10(linear); }
inline double from_db(double db) { return std::pow(10.0, db / 10.0); }

// Error taxonomy. Each maps to a distinct failure class at the CLI boundary.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (angles, powers).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Caller violated a shape or precondition contract.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration: bad keys, values or mode/scenario combinations.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Not enough data to form a statistical estimate.
class EstimationError : public Error {
 public:
  using Error::Error;
};

/// Ill-conditioned or otherwise failed numerical computation.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Dense row-major 2-D grid.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }

  bool operator==(const Grid&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using ComplexGrid = Grid<cplx>;
using RealGrid = Grid<double>;

/// Complex 3-D array stored as `planes` contiguous row-major (rows x cols) planes.
/// The plane index is always the receive channel.
class ComplexCube {
 public:
  ComplexCube() = default;
  ComplexCube(std::size_t planes, std::size_t rows, std::size_t cols)
      : planes_(planes), rows_(rows), cols_(cols), data_(planes * rows * cols) {}

  std::size_t planes() const { return planes_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t plane_size() const { return rows_ * cols_; }

  cplx& operator()(std::size_t p, std::size_t r, std::size_t c) {
    return data_[(p * rows_ + r) * cols_ + c];
  }
  const cplx& operator()(std::size_t p, std::size_t r, std::size_t c) const {
    return data_[(p * rows_ + r) * cols_ + c];
  }

  std::span<cplx> plane(std::size_t p) { return {data_.data() + p * plane_size(), plane_size()}; }
  std::span<const cplx> plane(std::size_t p) const {
    return {data_.data() + p * plane_size(), plane_size()};
  }
  std::span<cplx> row(std::size_t p, std::size_t r) {
    return {data_.data() + (p * rows_ + r) * cols_, cols_};
  }
  std::span<const cplx> row(std::size_t p, std::size_t r) const {
    return {data_.data() + (p * rows_ + r) * cols_, cols_};
  }

  std::span<cplx> values() { return data_; }
  std::span<const cplx> values() const { return data_; }

  bool operator==(const ComplexCube&) const = default;

 private:
  std::size_t planes_ = 0;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cplx> data_;
};

}  // namespace aesa
