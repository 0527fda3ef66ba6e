#include "effham/scalar_field.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numeric>

#include "effham/errors.hpp"

namespace effham {

ScalarField::ScalarField(int nx, int ny, double fill) : nx_(nx), ny_(ny) {
  if (nx < 16 || ny < 16) throw InvalidArgument("ScalarField: resolution must be at least 16x16");
  data_.assign(static_cast<std::size_t>(nx) * ny, fill);
}

double ScalarField::interpolate(const Vec2& x) const {
  const double fx = x.x * nx_;
  const double fy = x.y * ny_;
  const double ix = std::floor(fx);
  const double iy = std::floor(fy);
  const double tx = fx - ix;
  const double ty = fy - iy;
  const int i = static_cast<int>(ix);
  const int j = static_cast<int>(iy);
  return (1 - tx) * (1 - ty) * at(i, j) + tx * (1 - ty) * at(i + 1, j) + (1 - tx) * ty * at(i, j + 1) +
         tx * ty * at(i + 1, j + 1);
}

double ScalarField::mean() const {
  return std::accumulate(data_.begin(), data_.end(), 0.0) / static_cast<double>(data_.size());
}
double ScalarField::min() const { return *std::min_element(data_.begin(), data_.end()); }
double ScalarField::max() const { return *std::max_element(data_.begin(), data_.end()); }

namespace {

template <typename T>
void put_le(std::ostream& os, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(std::istream& is) {
  unsigned char bytes[sizeof(T)];
  is.read(reinterpret_cast<char*>(bytes), sizeof(T));
  if (!is) throw Error("ScalarField: truncated snapshot");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T v;
  std::memcpy(&v, bytes, sizeof(T));
  return v;
}

}  // namespace

void ScalarField::write_binary(const std::filesystem::path& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path.string());
  put_le<std::int32_t>(os, nx_);
  put_le<std::int32_t>(os, ny_);
  for (double v : data_) put_le<double>(os, v);
}

ScalarField ScalarField::read_binary(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path.string());
  const auto nx = get_le<std::int32_t>(is);
  const auto ny = get_le<std::int32_t>(is);
  ScalarField f(nx, ny);
  for (double& v : f.data_) v = get_le<double>(is);
  return f;
}

}  // namespace effham
