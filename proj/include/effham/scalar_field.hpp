#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "effham/vec2.hpp"

namespace effham {

/// Samples of a Z^2-periodic function on the uniform grid x_i = i/nx, y_j = j/ny.
class ScalarField {
 public:
  ScalarField() = default;
  ScalarField(int nx, int ny, double fill = 0.0);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double hx() const { return 1.0 / nx_; }
  double hy() const { return 1.0 / ny_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(int i, int j) { return data_[index(i, j)]; }
  double operator()(int i, int j) const { return data_[index(i, j)]; }

  /// Periodic index lookup; i and j may be any integers.
  double at(int i, int j) const { return data_[index(wrap(i, nx_), wrap(j, ny_))]; }

  /// Periodic bilinear interpolation at an arbitrary point.
  double interpolate(const Vec2& x) const;

  double mean() const;
  double min() const;
  double max() const;

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  /// Flat binary snapshot: nx, ny as little-endian int32, then row-major float64.
  void write_binary(const std::filesystem::path& path) const;
  static ScalarField read_binary(const std::filesystem::path& path);

 private:
  static int wrap(int i, int n) {
    int r = i % n;
    return r < 0 ? r + n : r;
  }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx_ + i; }

  int nx_ = 0;
  int ny_ = 0;
  std::vector<double> data_;
};

}  // namespace effham
