// Differentiable operations on tape variables.
//
// Binary elementwise ops broadcast with NumPy rules. Axis arguments accept
// negative values counted from the end.

#ifndef BINDERKIT_TENSOR_OPS_HPP_
#define BINDERKIT_TENSOR_OPS_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "../core/random.hpp"
#include "tape.hpp"

namespace binderkit {

inline constexpr double kMaskedLogit = -1e9;

namespace detail {

inline int norm_axis(int axis, int rank) {
  int a = axis < 0 ? axis + rank : axis;
  if (a < 0 || a >= rank)
    fail(ErrorKind::Dimension, "axis " + std::to_string(axis) + " out of range for rank " +
                                   std::to_string(rank));
  return a;
}

inline Shape broadcast_shape(const Shape& a, const Shape& b) {
  const std::size_t r = std::max(a.size(), b.size());
  Shape out(r);
  for (std::size_t i = 0; i < r; ++i) {
    std::int64_t da = i < r - a.size() ? 1 : a[i - (r - a.size())];
    std::int64_t db = i < r - b.size() ? 1 : b[i - (r - b.size())];
    if (da != db && da != 1 && db != 1)
      fail(ErrorKind::Dimension, "cannot broadcast " + shape_str(a) + " with " + shape_str(b));
    out[i] = da == 1 ? db : da;
  }
  return out;
}

// Strides of `s` viewed at the rank of `out`, zero on broadcast axes.
inline std::vector<std::int64_t> broadcast_strides(const Shape& s, const Shape& out) {
  const std::size_t r = out.size();
  std::vector<std::int64_t> st(r, 0);
  std::int64_t acc = 1;
  for (std::size_t k = 0; k < s.size(); ++k) {
    std::size_t i = s.size() - 1 - k;
    std::size_t o = r - 1 - k;
    st[o] = s[i] == 1 ? 0 : acc;
    acc *= s[i];
  }
  return st;
}

// Calls f(out_index, a_index, b_index) over every element of `out`.
template <typename F>
inline void broadcast_for_each(const Shape& out, const std::vector<std::int64_t>& sa,
                               const std::vector<std::int64_t>& sb, F&& f) {
  const std::int64_t n = shape_numel(out);
  const int r = static_cast<int>(out.size());
  std::vector<std::int64_t> idx(r, 0);
  std::int64_t ia = 0, ib = 0;
  for (std::int64_t o = 0; o < n; ++o) {
    f(o, ia, ib);
    for (int d = r - 1; d >= 0; --d) {
      if (++idx[d] < out[d]) {
        ia += sa[d];
        ib += sb[d];
        break;
      }
      ia -= sa[d] * (out[d] - 1);
      ib -= sb[d] * (out[d] - 1);
      idx[d] = 0;
    }
  }
}

// View of a shape as [outer, n, inner] around `axis`.
struct AxisView {
  std::int64_t outer = 1, n = 1, inner = 1;
};
inline AxisView axis_view(const Shape& s, int axis) {
  AxisView v;
  for (int i = 0; i < axis; ++i)
    v.outer *= s[i];
  v.n = s[axis];
  for (std::size_t i = axis + 1; i < s.size(); ++i)
    v.inner *= s[i];
  return v;
}

template <typename T>
inline void accumulate(std::vector<T>& dst, const std::vector<T>& src) {
  for (std::size_t i = 0; i < dst.size(); ++i)
    dst[i] += src[i];
}

template <typename T, typename Op, typename DA, typename DB>
inline Var<T> binary(Var<T> a, Var<T> b, Op op, DA da, DB db) {
  Tape<T>* tp = a.tape;
  const NdArray<T>& x = a.value();
  const NdArray<T>& y = b.value();
  Shape out_shape = broadcast_shape(x.shape, y.shape);
  auto sa = broadcast_strides(x.shape, out_shape);
  auto sb = broadcast_strides(y.shape, out_shape);
  NdArray<T> out(out_shape);
  broadcast_for_each(out_shape, sa, sb, [&](std::int64_t o, std::int64_t i, std::int64_t j) {
    out[o] = op(x[i], y[j]);
  });
  const int ia = a.id, ib = b.id;
  return tp->record(std::move(out), {a, b}, [=](const std::vector<T>& g) {
    const NdArray<T>& xv = tp->value(ia);
    const NdArray<T>& yv = tp->value(ib);
    const bool ga = tp->requires_grad(ia), gb = tp->requires_grad(ib);
    std::vector<T>* gx = ga ? &tp->grad(ia) : nullptr;
    std::vector<T>* gy = gb ? &tp->grad(ib) : nullptr;
    broadcast_for_each(out_shape, sa, sb, [&](std::int64_t o, std::int64_t i, std::int64_t j) {
      if (gx)
        (*gx)[i] += g[o] * da(xv[i], yv[j]);
      if (gy)
        (*gy)[j] += g[o] * db(xv[i], yv[j]);
    });
  });
}

} // namespace detail

template <typename T>
Var<T> add(Var<T> a, Var<T> b) {
  return detail::binary(a, b, [](T x, T y) { return x + y; }, [](T, T) { return T(1); },
                        [](T, T) { return T(1); });
}
template <typename T>
Var<T> sub(Var<T> a, Var<T> b) {
  return detail::binary(a, b, [](T x, T y) { return x - y; }, [](T, T) { return T(1); },
                        [](T, T) { return T(-1); });
}
template <typename T>
Var<T> mul(Var<T> a, Var<T> b) {
  return detail::binary(a, b, [](T x, T y) { return x * y; }, [](T, T y) { return y; },
                        [](T x, T) { return x; });
}
template <typename T>
Var<T> div(Var<T> a, Var<T> b) {
  return detail::binary(a, b, [](T x, T y) { return x / y; }, [](T, T y) { return T(1) / y; },
                        [](T x, T y) { return -x / (y * y); });
}
template <typename T> Var<T> operator+(Var<T> a, Var<T> b) { return add(a, b); }
template <typename T> Var<T> operator-(Var<T> a, Var<T> b) { return sub(a, b); }
template <typename T> Var<T> operator*(Var<T> a, Var<T> b) { return mul(a, b); }

// Elementwise map with derivative expressed through input x and output y.
template <typename T, typename F, typename DF>
Var<T> map(Var<T> a, F f, DF dfdx) {
  Tape<T>* tp = a.tape;
  NdArray<T> out = a.value();
  for (T& v : out.data)
    v = f(v);
  const int ia = a.id;
  auto holder = std::make_shared<int>(-1);
  Var<T> res = tp->record(std::move(out), {a}, [=](const std::vector<T>& g) {
    const NdArray<T>& x = tp->value(ia);
    const NdArray<T>& y = tp->value(*holder);
    std::vector<T>& gx = tp->grad(ia);
    for (std::size_t i = 0; i < g.size(); ++i)
      gx[i] += g[i] * dfdx(x[i], y[i]);
  });
  *holder = res.id;
  return res;
}

template <typename T>
Var<T> scale(Var<T> a, T c) {
  return map(a, [c](T x) { return x * c; }, [c](T, T) { return c; });
}
template <typename T>
Var<T> add_scalar(Var<T> a, T c) {
  return map(a, [c](T x) { return x + c; }, [](T, T) { return T(1); });
}
template <typename T>
Var<T> neg(Var<T> a) {
  return scale(a, T(-1));
}
template <typename T>
Var<T> sigmoid(Var<T> a) {
  return map(a, [](T x) { return x >= 0 ? T(1) / (T(1) + std::exp(-x)) : std::exp(x) / (T(1) + std::exp(x)); },
             [](T, T y) { return y * (T(1) - y); });
}
template <typename T>
Var<T> leaky_relu(Var<T> a, T slope = T(0.2)) {
  return map(a, [slope](T x) { return x > 0 ? x : slope * x; },
             [slope](T x, T) { return x > 0 ? T(1) : slope; });
}
template <typename T>
Var<T> relu(Var<T> a) {
  return leaky_relu(a, T(0));
}
template <typename T>
Var<T> exp(Var<T> a) {
  return map(a, [](T x) { return std::exp(x); }, [](T, T y) { return y; });
}
template <typename T>
Var<T> log(Var<T> a) {
  return map(a, [](T x) { return std::log(x); }, [](T x, T) { return T(1) / x; });
}
template <typename T>
Var<T> square(Var<T> a) {
  return map(a, [](T x) { return x * x; }, [](T x, T) { return T(2) * x; });
}

// Inverted dropout. Element i of op instance `stream` is kept when
// counter_uniform(seed, stream, i) >= p. p = 0 returns the input unchanged.
template <typename T>
Var<T> dropout(Var<T> a, double p, std::uint64_t seed, std::uint64_t stream) {
  require(p >= 0.0 && p < 1.0, "dropout rate must lie in [0,1)");
  if (p == 0.0)
    return a;
  Tape<T>* tp = a.tape;
  NdArray<T> keep(a.shape(), T(0));
  const T s = T(1.0 / (1.0 - p));
  for (std::int64_t i = 0; i < keep.numel(); ++i)
    keep[i] = counter_uniform(seed, stream, static_cast<std::uint64_t>(i)) >= p ? s : T(0);
  return mul(a, tp->constant(std::move(keep)));
}

// [..., m, k] x [k, n] -> [..., m, n], or batched [B..., m, k] x [B..., k, n].
template <typename T>
Var<T> matmul(Var<T> a, Var<T> b) {
  Tape<T>* tp = a.tape;
  const NdArray<T>& x = a.value();
  const NdArray<T>& y = b.value();
  if (x.rank() < 2 || y.rank() < 2)
    fail(ErrorKind::Dimension, "matmul needs rank >= 2: " + shape_str(x.shape) + " x " + shape_str(y.shape));
  const std::int64_t m = x.dim(-2), k = x.dim(-1), n = y.dim(-1);
  const bool batched_b = y.rank() > 2;
  if (y.dim(-2) != k || (batched_b && !std::equal(x.shape.begin(), x.shape.end() - 2, y.shape.begin(),
                                                  y.shape.end() - 2)) ||
      (batched_b && x.rank() != y.rank()))
    fail(ErrorKind::Dimension, "matmul shape mismatch: " + shape_str(x.shape) + " x " + shape_str(y.shape));
  const std::int64_t batch = x.numel() / (m * k);
  Shape os(x.shape.begin(), x.shape.end() - 1);
  os.push_back(n);
  NdArray<T> out(os, T(0));
  for (std::int64_t bt = 0; bt < batch; ++bt) {
    const T* xp = x.data.data() + bt * m * k;
    const T* yp = y.data.data() + (batched_b ? bt * k * n : 0);
    T* op = out.data.data() + bt * m * n;
    for (std::int64_t i = 0; i < m; ++i)
      for (std::int64_t p = 0; p < k; ++p) {
        const T xv = xp[i * k + p];
        if (xv == T(0))
          continue;
        const T* yr = yp + p * n;
        T* orow = op + i * n;
        for (std::int64_t j = 0; j < n; ++j)
          orow[j] += xv * yr[j];
      }
  }
  const int ia = a.id, ib = b.id;
  return tp->record(std::move(out), {a, b}, [=](const std::vector<T>& g) {
    const NdArray<T>& xv = tp->value(ia);
    const NdArray<T>& yv = tp->value(ib);
    if (tp->requires_grad(ia)) {
      std::vector<T>& gx = tp->grad(ia);
      for (std::int64_t bt = 0; bt < batch; ++bt) {
        const T* gp = g.data() + bt * m * n;
        const T* yp = yv.data.data() + (batched_b ? bt * k * n : 0);
        T* gxp = gx.data() + bt * m * k;
        for (std::int64_t i = 0; i < m; ++i)
          for (std::int64_t p = 0; p < k; ++p) {
            T acc = 0;
            for (std::int64_t j = 0; j < n; ++j)
              acc += gp[i * n + j] * yp[p * n + j];
            gxp[i * k + p] += acc;
          }
      }
    }
    if (tp->requires_grad(ib)) {
      std::vector<T>& gy = tp->grad(ib);
      for (std::int64_t bt = 0; bt < batch; ++bt) {
        const T* gp = g.data() + bt * m * n;
        const T* xp = xv.data.data() + bt * m * k;
        T* gyp = gy.data() + (batched_b ? bt * k * n : 0);
        for (std::int64_t i = 0; i < m; ++i)
          for (std::int64_t p = 0; p < k; ++p) {
            const T xval = xp[i * k + p];
            if (xval == T(0))
              continue;
            for (std::int64_t j = 0; j < n; ++j)
              gyp[p * n + j] += xval * gp[i * n + j];
          }
      }
    }
  });
}

template <typename T>
Var<T> reshape(Var<T> a, Shape s) {
  // One dimension may be -1.
  std::int64_t known = 1;
  int infer = -1;
  for (int i = 0; i < static_cast<int>(s.size()); ++i) {
    if (s[i] == -1)
      infer = i;
    else
      known *= s[i];
  }
  if (infer >= 0 && known > 0)
    s[infer] = a.numel() / known;
  if (shape_numel(s) != a.numel())
    fail(ErrorKind::Dimension, "cannot reshape " + shape_str(a.shape()) + " to " + shape_str(s));
  Tape<T>* tp = a.tape;
  NdArray<T> out(s, a.value().data);
  const int ia = a.id;
  return tp->record(std::move(out), {a}, [=](const std::vector<T>& g) {
    detail::accumulate(tp->grad(ia), g);
  });
}

template <typename T>
Var<T> permute(Var<T> a, std::vector<int> perm) {
  const NdArray<T>& x = a.value();
  const int r = x.rank();
  if (static_cast<int>(perm.size()) != r)
    fail(ErrorKind::Dimension, "permute rank mismatch for " + shape_str(x.shape));
  Shape os(r);
  std::vector<std::int64_t> in_strides(r), src_strides(r);
  std::int64_t acc = 1;
  for (int d = r - 1; d >= 0; --d) {
    in_strides[d] = acc;
    acc *= x.shape[d];
  }
  for (int d = 0; d < r; ++d) {
    os[d] = x.shape[perm[d]];
    src_strides[d] = in_strides[perm[d]];
  }
  std::vector<std::int64_t> map(x.numel());
  std::vector<std::int64_t> zero(r, 0);
  detail::broadcast_for_each(os, src_strides, zero, [&](std::int64_t o, std::int64_t i, std::int64_t) {
    map[o] = i;
  });
  NdArray<T> out(os);
  for (std::int64_t o = 0; o < out.numel(); ++o)
    out[o] = x[map[o]];
  Tape<T>* tp = a.tape;
  const int ia = a.id;
  return tp->record(std::move(out), {a}, [=](const std::vector<T>& g) {
    std::vector<T>& gx = tp->grad(ia);
    for (std::size_t o = 0; o < g.size(); ++o)
      gx[map[o]] += g[o];
  });
}

template <typename T>
Var<T> concat(const std::vector<Var<T>>& parts, int axis) {
  require(!parts.empty(), "concat of nothing");
  Tape<T>* tp = parts[0].tape;
  const int r = parts[0].rank();
  const int ax = detail::norm_axis(axis, r);
  Shape os = parts[0].shape();
  os[ax] = 0;
  for (const Var<T>& p : parts) {
    Shape s = p.shape();
    if (static_cast<int>(s.size()) != r)
      fail(ErrorKind::Dimension, "concat rank mismatch: " + shape_str(parts[0].shape()) + " vs " + shape_str(s));
    for (int d = 0; d < r; ++d)
      if (d != ax && s[d] != parts[0].shape()[d])
        fail(ErrorKind::Dimension, "concat shape mismatch: " + shape_str(parts[0].shape()) + " vs " + shape_str(s));
    os[ax] += s[ax];
  }
  detail::AxisView ov = detail::axis_view(os, ax);
  NdArray<T> out(os);
  std::vector<std::int64_t> offsets;
  std::int64_t off = 0;
  for (const Var<T>& p : parts) {
    offsets.push_back(off);
    detail::AxisView pv = detail::axis_view(p.shape(), ax);
    const NdArray<T>& pvv = p.value();
    for (std::int64_t o = 0; o < pv.outer; ++o)
      std::copy_n(pvv.data.data() + o * pv.n * pv.inner, pv.n * pv.inner,
                  out.data.data() + (o * ov.n + off) * ov.inner);
    off += pv.n;
  }
  std::vector<int> ids;
  for (const Var<T>& p : parts)
    ids.push_back(p.id);
  return tp->record(std::move(out), parts, [=](const std::vector<T>& g) {
    for (std::size_t q = 0; q < ids.size(); ++q) {
      if (!tp->requires_grad(ids[q]))
        continue;
      detail::AxisView pv = detail::axis_view(tp->value(ids[q]).shape, ax);
      std::vector<T>& gp = tp->grad(ids[q]);
      for (std::int64_t o = 0; o < pv.outer; ++o) {
        const T* src = g.data() + (o * ov.n + offsets[q]) * ov.inner;
        T* dst = gp.data() + o * pv.n * pv.inner;
        for (std::int64_t i = 0; i < pv.n * pv.inner; ++i)
          dst[i] += src[i];
      }
    }
  });
}

// Elements [start, start+len) along `axis`.
template <typename T>
Var<T> slice(Var<T> a, int axis, std::int64_t start, std::int64_t len) {
  const int ax = detail::norm_axis(axis, a.rank());
  if (start < 0 || len < 0 || start + len > a.dim(ax))
    fail(ErrorKind::Dimension, "slice out of range for " + shape_str(a.shape()));
  detail::AxisView v = detail::axis_view(a.shape(), ax);
  Shape os = a.shape();
  os[ax] = len;
  NdArray<T> out(os);
  const NdArray<T>& x = a.value();
  for (std::int64_t o = 0; o < v.outer; ++o)
    std::copy_n(x.data.data() + (o * v.n + start) * v.inner, len * v.inner,
                out.data.data() + o * len * v.inner);
  Tape<T>* tp = a.tape;
  const int ia = a.id;
  return tp->record(std::move(out), {a}, [=](const std::vector<T>& g) {
    std::vector<T>& gx = tp->grad(ia);
    for (std::int64_t o = 0; o < v.outer; ++o)
      for (std::int64_t i = 0; i < len * v.inner; ++i)
        gx[(o * v.n + start) * v.inner + i] += g[o * len * v.inner + i];
  });
}

template <typename T>
Var<T> sum(Var<T> a, int axis, bool keepdim = false) {
  const int ax = detail::norm_axis(axis, a.rank());
  detail::AxisView v = detail::axis_view(a.shape(), ax);
  Shape os = a.shape();
  if (keepdim)
    os[ax] = 1;
  else
    os.erase(os.begin() + ax);
  NdArray<T> out(os, T(0));
  const NdArray<T>& x = a.value();
  for (std::int64_t o = 0; o < v.outer; ++o)
    for (std::int64_t i = 0; i < v.n; ++i)
      for (std::int64_t j = 0; j < v.inner; ++j)
        out[o * v.inner + j] += x[(o * v.n + i) * v.inner + j];
  Tape<T>* tp = a.tape;
  const int ia = a.id;
  return tp->record(std::move(out), {a}, [=](const std::vector<T>& g) {
    std::vector<T>& gx = tp->grad(ia);
    for (std::int64_t o = 0; o < v.outer; ++o)
      for (std::int64_t i = 0; i < v.n; ++i)
        for (std::int64_t j = 0; j < v.inner; ++j)
          gx[(o * v.n + i) * v.inner + j] += g[o * v.inner + j];
  });
}

template <typename T>
Var<T> mean(Var<T> a, int axis, bool keepdim = false) {
  const int ax = detail::norm_axis(axis, a.rank());
  return scale(sum(a, ax, keepdim), T(1) / static_cast<T>(a.dim(ax)));
}

template <typename T>
Var<T> sum_all(Var<T> a) {
  return sum(reshape(a, {a.numel()}), 0);
}

template <typename T>
Var<T> mean_all(Var<T> a) {
  return scale(sum_all(a), T(1) / static_cast<T>(a.numel()));
}

// Maximum along `axis`; the gradient flows to the first maximal element.
template <typename T>
Var<T> max(Var<T> a, int axis, bool keepdim = false) {
  const int ax = detail::norm_axis(axis, a.rank());
  detail::AxisView v = detail::axis_view(a.shape(), ax);
  if (v.n == 0)
    fail(ErrorKind::Dimension, "max over an empty axis of " + shape_str(a.shape()));
  Shape os = a.shape();
  if (keepdim)
    os[ax] = 1;
  else
    os.erase(os.begin() + ax);
  NdArray<T> out(os);
  std::vector<std::int64_t> arg(out.numel());
  const NdArray<T>& x = a.value();
  for (std::int64_t o = 0; o < v.outer; ++o)
    for (std::int64_t j = 0; j < v.inner; ++j) {
      std::int64_t best = o * v.n * v.inner + j;
      for (std::int64_t i = 1; i < v.n; ++i) {
        std::int64_t at = (o * v.n + i) * v.inner + j;
        if (x[at] > x[best])
          best = at;
      }
      out[o * v.inner + j] = x[best];
      arg[o * v.inner + j] = best;
    }
  Tape<T>* tp = a.tape;
  const int ia = a.id;
  return tp->record(std::move(out), {a}, [=](const std::vector<T>& g) {
    std::vector<T>& gx = tp->grad(ia);
    for (std::size_t o = 0; o < g.size(); ++o)
      gx[arg[o]] += g[o];
  });
}

template <typename T>
Var<T> softmax(Var<T> a, int axis = -1) {
  const int ax = detail::norm_axis(axis, a.rank());
  detail::AxisView v = detail::axis_view(a.shape(), ax);
  NdArray<T> out = a.value();
  for (std::int64_t o = 0; o < v.outer; ++o)
    for (std::int64_t j = 0; j < v.inner; ++j) {
      T mx = -std::numeric_limits<T>::infinity();
      for (std::int64_t i = 0; i < v.n; ++i)
        mx = std::max(mx, out[(o * v.n + i) * v.inner + j]);
      T z = 0;
      for (std::int64_t i = 0; i < v.n; ++i) {
        T& e = out[(o * v.n + i) * v.inner + j];
        e = std::exp(e - mx);
        z += e;
      }
      for (std::int64_t i = 0; i < v.n; ++i)
        out[(o * v.n + i) * v.inner + j] /= z;
    }
  Tape<T>* tp = a.tape;
  const int ia = a.id;
  auto holder = std::make_shared<int>(-1);
  Var<T> res = tp->record(std::move(out), {a}, [=](const std::vector<T>& g) {
    const NdArray<T>& y = tp->value(*holder);
    std::vector<T>& gx = tp->grad(ia);
    for (std::int64_t o = 0; o < v.outer; ++o)
      for (std::int64_t j = 0; j < v.inner; ++j) {
        T dot = 0;
        for (std::int64_t i = 0; i < v.n; ++i) {
          std::int64_t at = (o * v.n + i) * v.inner + j;
          dot += g[at] * y[at];
        }
        for (std::int64_t i = 0; i < v.n; ++i) {
          std::int64_t at = (o * v.n + i) * v.inner + j;
          gx[at] += y[at] * (g[at] - dot);
        }
      }
  });
  *holder = res.id;
  return res;
}

template <typename T>
Var<T> log_softmax(Var<T> a, int axis = -1) {
  const int ax = detail::norm_axis(axis, a.rank());
  detail::AxisView v = detail::axis_view(a.shape(), ax);
  NdArray<T> out = a.value();
  for (std::int64_t o = 0; o < v.outer; ++o)
    for (std::int64_t j = 0; j < v.inner; ++j) {
      T mx = -std::numeric_limits<T>::infinity();
      for (std::int64_t i = 0; i < v.n; ++i)
        mx = std::max(mx, out[(o * v.n + i) * v.inner + j]);
      T z = 0;
      for (std::int64_t i = 0; i < v.n; ++i)
        z += std::exp(out[(o * v.n + i) * v.inner + j] - mx);
      const T lse = mx + std::log(z);
      for (std::int64_t i = 0; i < v.n; ++i)
        out[(o * v.n + i) * v.inner + j] -= lse;
    }
  Tape<T>* tp = a.tape;
  const int ia = a.id;
  auto holder = std::make_shared<int>(-1);
  Var<T> res = tp->record(std::move(out), {a}, [=](const std::vector<T>& g) {
    const NdArray<T>& y = tp->value(*holder);
    std::vector<T>& gx = tp->grad(ia);
    for (std::int64_t o = 0; o < v.outer; ++o)
      for (std::int64_t j = 0; j < v.inner; ++j) {
        T gs = 0;
        for (std::int64_t i = 0; i < v.n; ++i)
          gs += g[(o * v.n + i) * v.inner + j];
        for (std::int64_t i = 0; i < v.n; ++i) {
          std::int64_t at = (o * v.n + i) * v.inner + j;
          gx[at] += g[at] - std::exp(y[at]) * gs;
        }
      }
  });
  *holder = res.id;
  return res;
}

// Layer normalization over the last axis with affine gamma, beta of shape [F].
template <typename T>
Var<T> layer_norm(Var<T> a, Var<T> gamma, Var<T> beta, T eps = T(1e-5)) {
  const std::int64_t f = a.dim(-1);
  if (gamma.numel() != f || beta.numel() != f)
    fail(ErrorKind::Dimension, "layer_norm affine shape " + shape_str(gamma.shape()) + " for input " +
                                   shape_str(a.shape()));
  const std::int64_t rows = a.numel() / f;
  NdArray<T> xhat = a.value();
  std::vector<T> inv_std(rows);
  for (std::int64_t r = 0; r < rows; ++r) {
    T* x = xhat.data.data() + r * f;
    T mu = 0;
    for (std::int64_t i = 0; i < f; ++i)
      mu += x[i];
    mu /= f;
    T var = 0;
    for (std::int64_t i = 0; i < f; ++i)
      var += (x[i] - mu) * (x[i] - mu);
    var /= f;
    inv_std[r] = T(1) / std::sqrt(var + eps);
    for (std::int64_t i = 0; i < f; ++i)
      x[i] = (x[i] - mu) * inv_std[r];
  }
  Tape<T>* tp = a.tape;
  const int ia = a.id;
  Var<T> norm = tp->record(xhat, {a}, [=](const std::vector<T>& g) {
    std::vector<T>& gx = tp->grad(ia);
    for (std::int64_t r = 0; r < rows; ++r) {
      const T* gy = g.data() + r * f;
      const T* xh = xhat.data.data() + r * f;
      T sg = 0, sgx = 0;
      for (std::int64_t i = 0; i < f; ++i) {
        sg += gy[i];
        sgx += gy[i] * xh[i];
      }
      for (std::int64_t i = 0; i < f; ++i)
        gx[r * f + i] += inv_std[r] * (gy[i] - sg / f - xh[i] * sgx / f);
    }
  });
  return add(mul(norm, gamma), beta);
}

// Rows of `a` (shape [N, ...]) selected by `index` (any shape). Indices
// equal to N, the padding sentinel, select a zero row.
template <typename T>
Var<T> gather(Var<T> a, const NdArray<int>& index) {
  const std::int64_t n = a.dim(0);
  const std::int64_t row = a.numel() / std::max<std::int64_t>(n, 1);
  Shape os = index.shape;
  os.insert(os.end(), a.shape().begin() + 1, a.shape().end());
  NdArray<T> out(os, T(0));
  const NdArray<T>& x = a.value();
  for (std::int64_t e = 0; e < index.numel(); ++e) {
    const int j = index[e];
    if (j < 0 || j > n)
      fail(ErrorKind::Dimension, "gather index " + std::to_string(j) + " out of range for " +
                                     shape_str(a.shape()));
    if (j < n)
      std::copy_n(x.data.data() + j * row, row, out.data.data() + e * row);
  }
  Tape<T>* tp = a.tape;
  const int ia = a.id;
  return tp->record(std::move(out), {a}, [=](const std::vector<T>& g) {
    std::vector<T>& gx = tp->grad(ia);
    for (std::int64_t e = 0; e < index.numel(); ++e) {
      const int j = index[e];
      if (j >= n)
        continue;
      for (std::int64_t i = 0; i < row; ++i)
        gx[j * row + i] += g[e * row + i];
    }
  });
}

// out[index[e]] += src[e] for rows of src (shape [M, ...]); output [n, ...].
template <typename T>
Var<T> scatter_add(Var<T> src, const std::vector<int>& index, std::int64_t n) {
  const std::int64_t m = src.dim(0);
  if (static_cast<std::int64_t>(index.size()) != m)
    fail(ErrorKind::Dimension, "scatter_add index length " + std::to_string(index.size()) +
                                   " for source " + shape_str(src.shape()));
  const std::int64_t row = m == 0 ? 0 : src.numel() / m;
  Shape os = src.shape();
  os[0] = n;
  NdArray<T> out(os, T(0));
  const NdArray<T>& x = src.value();
  for (std::int64_t e = 0; e < m; ++e) {
    if (index[e] < 0 || index[e] >= n)
      fail(ErrorKind::Dimension, "scatter_add index " + std::to_string(index[e]) + " out of range");
    for (std::int64_t i = 0; i < row; ++i)
      out[index[e] * row + i] += x[e * row + i];
  }
  Tape<T>* tp = src.tape;
  const int is = src.id;
  return tp->record(std::move(out), {src}, [=](const std::vector<T>& g) {
    std::vector<T>& gx = tp->grad(is);
    for (std::int64_t e = 0; e < m; ++e)
      for (std::int64_t i = 0; i < row; ++i)
        gx[e * row + i] += g[index[e] * row + i];
  });
}

// Picks x[..., index[...]] along the last axis.
template <typename T>
Var<T> take_last(Var<T> a, const std::vector<int>& index) {
  const std::int64_t c = a.dim(-1);
  const std::int64_t rows = a.numel() / c;
  if (static_cast<std::int64_t>(index.size()) != rows)
    fail(ErrorKind::Dimension, "take_last index length mismatch for " + shape_str(a.shape()));
  Shape os(a.shape().begin(), a.shape().end() - 1);
  NdArray<T> out(os);
  for (std::int64_t r = 0; r < rows; ++r) {
    if (index[r] < 0 || index[r] >= c)
      fail(ErrorKind::Dimension, "take_last index " + std::to_string(index[r]) + " out of range");
    out[r] = a.value()[r * c + index[r]];
  }
  Tape<T>* tp = a.tape;
  const int ia = a.id;
  return tp->record(std::move(out), {a}, [=](const std::vector<T>& g) {
    std::vector<T>& gx = tp->grad(ia);
    for (std::int64_t r = 0; r < rows; ++r)
      gx[r * c + index[r]] += g[r];
  });
}

// Replaces entries where `keep` is 0 with `fill`; `keep` broadcasts to a.
template <typename T>
Var<T> masked_fill(Var<T> a, const NdArray<std::uint8_t>& keep, T fill = T(kMaskedLogit)) {
  Shape bs = detail::broadcast_shape(a.shape(), keep.shape);
  if (bs != a.shape())
    fail(ErrorKind::Dimension, "mask " + shape_str(keep.shape) + " does not broadcast to " +
                                   shape_str(a.shape()));
  auto sx = detail::broadcast_strides(a.shape(), bs);
  auto sm = detail::broadcast_strides(keep.shape, bs);
  std::vector<std::uint8_t> k(a.numel());
  detail::broadcast_for_each(bs, sx, sm, [&](std::int64_t o, std::int64_t, std::int64_t j) { k[o] = keep[j]; });
  NdArray<T> out = a.value();
  for (std::int64_t i = 0; i < out.numel(); ++i)
    if (!k[i])
      out[i] = fill;
  Tape<T>* tp = a.tape;
  const int ia = a.id;
  return tp->record(std::move(out), {a}, [=](const std::vector<T>& g) {
    std::vector<T>& gx = tp->grad(ia);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (k[i])
        gx[i] += g[i];
  });
}

// x W + b with W [in, out], b [out].
template <typename T>
Var<T> linear(Var<T> x, Var<T> w) {
  return matmul(x, w);
}
template <typename T>
Var<T> linear(Var<T> x, Var<T> w, Var<T> b) {
  return add(matmul(x, w), b);
}

} // namespace binderkit

#endif
