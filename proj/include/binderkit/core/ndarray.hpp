// Dense row-major n-dimensional array.

#ifndef BINDERKIT_CORE_NDARRAY_HPP_
#define BINDERKIT_CORE_NDARRAY_HPP_

#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"

namespace binderkit {

using Shape = std::vector<std::int64_t>;

inline std::int64_t shape_numel(const Shape& s) {
  return std::accumulate(s.begin(), s.end(), std::int64_t{1}, std::multiplies<>());
}

inline std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < s.size(); ++i)
    os << (i ? "," : "") << s[i];
  os << ']';
  return os.str();
}

template <typename T>
struct NdArray {
  Shape shape;
  std::vector<T> data;

  NdArray() = default;
  explicit NdArray(Shape s, T fill = T{}) : shape(std::move(s)), data(shape_numel(shape), fill) {}
  NdArray(Shape s, std::vector<T> d) : shape(std::move(s)), data(std::move(d)) {
    if (static_cast<std::int64_t>(data.size()) != shape_numel(shape))
      fail(ErrorKind::Dimension, "data length " + std::to_string(data.size()) +
                                     " does not match shape " + shape_str(shape));
  }

  std::int64_t numel() const { return static_cast<std::int64_t>(data.size()); }
  std::int64_t dim(int i) const { return shape[i < 0 ? shape.size() + i : i]; }
  int rank() const { return static_cast<int>(shape.size()); }

  T& operator[](std::int64_t i) { return data[i]; }
  const T& operator[](std::int64_t i) const { return data[i]; }

  T& at(std::initializer_list<std::int64_t> idx) { return data[offset(idx)]; }
  const T& at(std::initializer_list<std::int64_t> idx) const { return data[offset(idx)]; }

  std::span<T> row(std::int64_t i) {
    std::int64_t inner = numel() / shape[0];
    return {data.data() + i * inner, static_cast<std::size_t>(inner)};
  }
  std::span<const T> row(std::int64_t i) const {
    std::int64_t inner = numel() / shape[0];
    return {data.data() + i * inner, static_cast<std::size_t>(inner)};
  }

  template <typename U>
  NdArray<U> cast() const {
    NdArray<U> out;
    out.shape = shape;
    out.data.assign(data.begin(), data.end());
    return out;
  }

private:
  std::int64_t offset(std::initializer_list<std::int64_t> idx) const {
    std::int64_t off = 0;
    std::size_t d = 0;
    for (std::int64_t i : idx)
      off = off * shape[d++] + i;
    return off;
  }
};

} // namespace binderkit

#endif
