#include "radgest/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "radgest/error.hpp"
#include "radgest/fft.hpp"

namespace radgest {

namespace {

using NodePtr = std::shared_ptr<TensorNode>;

void check_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.rank() != b.rank()) {
    throw DimensionError(std::string(op) + ": rank mismatch " + shape_to_string(a.shape()) +
                         " vs " + shape_to_string(b.shape()));
  }
  for (std::size_t i = 0; i < a.rank(); ++i) {
    if (a.dim(i) != b.dim(i)) {
      throw DimensionError(std::string(op) + ": axis " + std::to_string(i) + " mismatch (" +
                           std::to_string(a.dim(i)) + " vs " + std::to_string(b.dim(i)) + ")");
    }
  }
}

void check_rank(const char* op, const Tensor& x, std::size_t rank, const char* layout) {
  if (x.rank() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) + " " +
                         layout + ", got " + shape_to_string(x.shape()));
  }
}

// Grad buffer of a node if it participates in differentiation, else nullptr.
double* grad_target(const NodePtr& node) {
  if (!node || !node->requires_grad) return nullptr;
  node->ensure_grad();
  return node->grad.data();
}

// Output gradient, or nullptr when backward never reached this node.
const double* upstream(const NodePtr& node) {
  if (node->grad.size() != node->data.size()) return nullptr;
  return node->grad.data();
}

void record(std::function<void()> fn) { GradTape::active()->record(std::move(fn)); }

long floor_div(long a, long b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }
long ceil_div(long a, long b) { return -floor_div(-a, b); }

// Output indices o with 0 <= o*stride - pad + k < in_len, as [lo, hi).
std::pair<std::size_t, std::size_t> valid_range(std::size_t out_len, std::size_t in_len,
                                                std::size_t stride, std::size_t pad,
                                                std::size_t k) {
  const long s = static_cast<long>(stride);
  const long offset = static_cast<long>(pad) - static_cast<long>(k);
  const long lo = std::max(0L, ceil_div(offset, s));
  const long hi = std::min(static_cast<long>(out_len),
                           floor_div(static_cast<long>(in_len) - 1 + offset, s) + 1);
  if (hi <= lo) return {0, 0};
  return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
}

Tensor unary_elementwise(const Tensor& x, double (*f)(double), double (*df)(double)) {
  auto xd = x.data();
  std::vector<double> out(xd.size());
  for (std::size_t i = 0; i < xd.size(); ++i) out[i] = f(xd[i]);
  const bool rec = should_record({&x});
  Tensor y = make_result(x.shape(), std::move(out), rec);
  if (rec) {
    record([xn = x.node(), yn = y.node(), df] {
      const double* gy = upstream(yn);
      double* gx = grad_target(xn);
      if (!gy || !gx) return;
      for (std::size_t i = 0; i < xn->data.size(); ++i) gx[i] += gy[i] * df(xn->data[i]);
    });
  }
  return y;
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  check_same_shape("add", a, b);
  auto ad = a.data();
  auto bd = b.data();
  std::vector<double> out(ad.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = ad[i] + bd[i];
  const bool rec = should_record({&a, &b});
  Tensor y = make_result(a.shape(), std::move(out), rec);
  if (rec) {
    record([an = a.node(), bn = b.node(), yn = y.node()] {
      const double* gy = upstream(yn);
      if (!gy) return;
      const std::size_t n = yn->data.size();
      if (double* ga = grad_target(an)) {
        for (std::size_t i = 0; i < n; ++i) ga[i] += gy[i];
      }
      if (double* gb = grad_target(bn)) {
        for (std::size_t i = 0; i < n; ++i) gb[i] += gy[i];
      }
    });
  }
  return y;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  check_same_shape("sub", a, b);
  auto ad = a.data();
  auto bd = b.data();
  std::vector<double> out(ad.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = ad[i] - bd[i];
  const bool rec = should_record({&a, &b});
  Tensor y = make_result(a.shape(), std::move(out), rec);
  if (rec) {
    record([an = a.node(), bn = b.node(), yn = y.node()] {
      const double* gy = upstream(yn);
      if (!gy) return;
      const std::size_t n = yn->data.size();
      if (double* ga = grad_target(an)) {
        for (std::size_t i = 0; i < n; ++i) ga[i] += gy[i];
      }
      if (double* gb = grad_target(bn)) {
        for (std::size_t i = 0; i < n; ++i) gb[i] -= gy[i];
      }
    });
  }
  return y;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  check_same_shape("mul", a, b);
  auto ad = a.data();
  auto bd = b.data();
  std::vector<double> out(ad.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = ad[i] * bd[i];
  const bool rec = should_record({&a, &b});
  Tensor y = make_result(a.shape(), std::move(out), rec);
  if (rec) {
    record([an = a.node(), bn = b.node(), yn = y.node()] {
      const double* gy = upstream(yn);
      if (!gy) return;
      const std::size_t n = yn->data.size();
      if (double* ga = grad_target(an)) {
        for (std::size_t i = 0; i < n; ++i) ga[i] += gy[i] * bn->data[i];
      }
      if (double* gb = grad_target(bn)) {
        for (std::size_t i = 0; i < n; ++i) gb[i] += gy[i] * an->data[i];
      }
    });
  }
  return y;
}

Tensor scale(const Tensor& x, double factor) {
  auto xd = x.data();
  std::vector<double> out(xd.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xd[i] * factor;
  const bool rec = should_record({&x});
  Tensor y = make_result(x.shape(), std::move(out), rec);
  if (rec) {
    record([xn = x.node(), yn = y.node(), factor] {
      const double* gy = upstream(yn);
      double* gx = grad_target(xn);
      if (!gy || !gx) return;
      for (std::size_t i = 0; i < yn->data.size(); ++i) gx[i] += gy[i] * factor;
    });
  }
  return y;
}

Tensor abs(const Tensor& x) {
  return unary_elementwise(
      x, [](double v) { return std::fabs(v); },
      [](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
}

Tensor square(const Tensor& x) {
  return unary_elementwise(
      x, [](double v) { return v * v; }, [](double v) { return 2.0 * v; });
}

Tensor gelu(const Tensor& x) {
  return unary_elementwise(
      x,
      [](double v) { return 0.5 * v * (1.0 + std::erf(v / std::numbers::sqrt2)); },
      [](double v) {
        const double cdf = 0.5 * (1.0 + std::erf(v / std::numbers::sqrt2));
        const double pdf = std::exp(-0.5 * v * v) / std::sqrt(2.0 * std::numbers::pi);
        return cdf + v * pdf;
      });
}

Tensor sum(const Tensor& x) {
  double acc = 0.0;
  for (double v : x.data()) acc += v;
  const bool rec = should_record({&x});
  Tensor y = make_result(Shape{1}, {acc}, rec);
  if (rec) {
    record([xn = x.node(), yn = y.node()] {
      const double* gy = upstream(yn);
      double* gx = grad_target(xn);
      if (!gy || !gx) return;
      for (std::size_t i = 0; i < xn->data.size(); ++i) gx[i] += gy[0];
    });
  }
  return y;
}

Tensor mean(const Tensor& x) {
  return scale(sum(x), 1.0 / static_cast<double>(x.numel()));
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_numel(shape) != x.numel()) {
    throw DimensionError("reshape: cannot view " + shape_to_string(x.shape()) + " as " +
                         shape_to_string(shape));
  }
  auto xd = x.data();
  const bool rec = should_record({&x});
  Tensor y = make_result(std::move(shape), std::vector<double>(xd.begin(), xd.end()), rec);
  if (rec) {
    record([xn = x.node(), yn = y.node()] {
      const double* gy = upstream(yn);
      double* gx = grad_target(xn);
      if (!gy || !gx) return;
      for (std::size_t i = 0; i < yn->data.size(); ++i) gx[i] += gy[i];
    });
  }
  return y;
}

Tensor permute(const Tensor& x, std::span<const std::size_t> perm) {
  const std::size_t r = x.rank();
  if (perm.size() != r) throw DimensionError("permute: permutation length != rank");
  std::vector<bool> seen(r, false);
  for (std::size_t p : perm) {
    if (p >= r || seen[p]) throw ArgumentError("permute: invalid permutation");
    seen[p] = true;
  }
  const Shape& in_shape = x.shape();
  std::vector<std::size_t> in_strides(r, 1);
  for (std::size_t i = r; i-- > 1;) in_strides[i - 1] = in_strides[i] * in_shape[i];
  Shape out_shape(r);
  std::vector<std::size_t> src_stride(r);
  for (std::size_t i = 0; i < r; ++i) {
    out_shape[i] = in_shape[perm[i]];
    src_stride[i] = in_strides[perm[i]];
  }
  const std::size_t n = x.numel();
  auto index = std::make_shared<std::vector<std::size_t>>(n);
  std::vector<std::size_t> counter(r, 0);
  std::size_t src = 0;
  for (std::size_t o = 0; o < n; ++o) {
    (*index)[o] = src;
    for (std::size_t ax = r; ax-- > 0;) {
      ++counter[ax];
      src += src_stride[ax];
      if (counter[ax] < out_shape[ax]) break;
      src -= src_stride[ax] * counter[ax];
      counter[ax] = 0;
    }
  }
  auto xd = x.data();
  std::vector<double> out(n);
  for (std::size_t o = 0; o < n; ++o) out[o] = xd[(*index)[o]];
  const bool rec = should_record({&x});
  Tensor y = make_result(std::move(out_shape), std::move(out), rec);
  if (rec) {
    record([xn = x.node(), yn = y.node(), index] {
      const double* gy = upstream(yn);
      double* gx = grad_target(xn);
      if (!gy || !gx) return;
      for (std::size_t o = 0; o < index->size(); ++o) gx[(*index)[o]] += gy[o];
    });
  }
  return y;
}

Tensor conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias,
              const Conv2dOptions& options) {
  check_rank("conv2d", x, 4, "[B, C, H, W] input");
  check_rank("conv2d", weight, 4, "[C_out, C_in/groups, kh, kw] weight");
  const std::size_t batch = x.dim(0), cin = x.dim(1), h = x.dim(2), w = x.dim(3);
  const std::size_t cout = weight.dim(0), kh = weight.dim(2), kw = weight.dim(3);
  const std::size_t groups = options.groups, stride = options.stride, pad = options.padding;
  if (groups == 0 || stride == 0) throw ArgumentError("conv2d: groups and stride must be >= 1");
  if (cin % groups != 0) {
    throw DimensionError("conv2d: input axis 1 (channels) = " + std::to_string(cin) +
                         " not divisible by groups = " + std::to_string(groups));
  }
  if (cout % groups != 0) {
    throw DimensionError("conv2d: weight axis 0 (out channels) = " + std::to_string(cout) +
                         " not divisible by groups = " + std::to_string(groups));
  }
  const std::size_t cin_g = cin / groups, cout_g = cout / groups;
  if (weight.dim(1) != cin_g) {
    throw DimensionError("conv2d: weight axis 1 = " + std::to_string(weight.dim(1)) +
                         ", expected C_in/groups = " + std::to_string(cin_g));
  }
  if (h + 2 * pad < kh) throw DimensionError("conv2d: input axis 2 (height) smaller than kernel");
  if (w + 2 * pad < kw) throw DimensionError("conv2d: input axis 3 (width) smaller than kernel");
  if (bias.defined() && (bias.rank() != 1 || bias.dim(0) != cout)) {
    throw DimensionError("conv2d: bias axis 0 must equal C_out = " + std::to_string(cout));
  }
  const std::size_t ho = (h + 2 * pad - kh) / stride + 1;
  const std::size_t wo = (w + 2 * pad - kw) / stride + 1;

  // Per-kernel-tap valid output ranges.
  std::vector<std::pair<std::size_t, std::size_t>> rows(kh), cols(kw);
  for (std::size_t k = 0; k < kh; ++k) rows[k] = valid_range(ho, h, stride, pad, k);
  for (std::size_t k = 0; k < kw; ++k) cols[k] = valid_range(wo, w, stride, pad, k);

  const double* xd = x.data().data();
  const double* wd = weight.data().data();
  std::vector<double> out(batch * cout * ho * wo, 0.0);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t oc = 0; oc < cout; ++oc) {
      double* op = out.data() + (b * cout + oc) * ho * wo;
      if (bias.defined()) std::fill(op, op + ho * wo, bias.data()[oc]);
      const std::size_t g = oc / cout_g;
      for (std::size_t icl = 0; icl < cin_g; ++icl) {
        const double* ip = xd + (b * cin + g * cin_g + icl) * h * w;
        const double* wp = wd + (oc * cin_g + icl) * kh * kw;
        for (std::size_t ky = 0; ky < kh; ++ky) {
          for (std::size_t kx = 0; kx < kw; ++kx) {
            const double wv = wp[ky * kw + kx];
            const auto [c0, c1] = cols[kx];
            for (std::size_t oy = rows[ky].first; oy < rows[ky].second; ++oy) {
              const std::size_t iy = oy * stride + ky - pad;
              const double* irow = ip + iy * w;
              double* orow = op + oy * wo;
              if (stride == 1) {
                for (std::size_t ox = c0; ox < c1; ++ox) orow[ox] += wv * irow[ox + kx - pad];
              } else {
                for (std::size_t ox = c0; ox < c1; ++ox) {
                  orow[ox] += wv * irow[ox * stride + kx - pad];
                }
              }
            }
          }
        }
      }
    }
  }

  const bool rec = should_record({&x, &weight, &bias});
  Tensor y = make_result(Shape{batch, cout, ho, wo}, std::move(out), rec);
  if (rec) {
    record([xn = x.node(), wn = weight.node(), bn = bias.node(), yn = y.node(), batch, cin, h, w,
            cout, kh, kw, cin_g, cout_g, ho, wo, stride, pad, rows, cols] {
      const double* gy = upstream(yn);
      if (!gy) return;
      double* gx = grad_target(xn);
      double* gw = grad_target(wn);
      double* gb = grad_target(bn);
      const double* xd = xn->data.data();
      const double* wd = wn->data.data();
      for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t oc = 0; oc < cout; ++oc) {
          const double* gp = gy + (b * cout + oc) * ho * wo;
          if (gb) {
            double acc = 0.0;
            for (std::size_t i = 0; i < ho * wo; ++i) acc += gp[i];
            gb[oc] += acc;
          }
          const std::size_t g = oc / cout_g;
          for (std::size_t icl = 0; icl < cin_g; ++icl) {
            const std::size_t plane = (b * cin + g * cin_g + icl) * h * w;
            const double* ip = xd + plane;
            double* gip = gx ? gx + plane : nullptr;
            const std::size_t woff = (oc * cin_g + icl) * kh * kw;
            for (std::size_t ky = 0; ky < kh; ++ky) {
              for (std::size_t kx = 0; kx < kw; ++kx) {
                const double wv = wd[woff + ky * kw + kx];
                const auto [c0, c1] = cols[kx];
                double wacc = 0.0;
                for (std::size_t oy = rows[ky].first; oy < rows[ky].second; ++oy) {
                  const std::size_t iy = oy * stride + ky - pad;
                  const double* grow = gp + oy * wo;
                  for (std::size_t ox = c0; ox < c1; ++ox) {
                    const std::size_t ix = ox * stride + kx - pad;
                    wacc += grow[ox] * ip[iy * w + ix];
                    if (gip) gip[iy * w + ix] += wv * grow[ox];
                  }
                }
                if (gw) gw[woff + ky * kw + kx] += wacc;
              }
            }
          }
        }
      }
    });
  }
  return y;
}

Tensor adaptive_max_pool2d(const Tensor& x, std::size_t out_h, std::size_t out_w) {
  check_rank("adaptive_max_pool2d", x, 4, "[B, C, H, W]");
  if (out_h == 0 || out_w == 0) throw ArgumentError("adaptive_max_pool2d: output dims must be >= 1");
  const std::size_t bc = x.dim(0) * x.dim(1), h = x.dim(2), w = x.dim(3);
  if (out_h > h) throw DimensionError("adaptive_max_pool2d: axis 2 output larger than input");
  if (out_w > w) throw DimensionError("adaptive_max_pool2d: axis 3 output larger than input");
  auto argmax = std::make_shared<std::vector<std::size_t>>(bc * out_h * out_w);
  std::vector<double> out(argmax->size());
  const double* xd = x.data().data();
  for (std::size_t p = 0; p < bc; ++p) {
    const double* ip = xd + p * h * w;
    for (std::size_t i = 0; i < out_h; ++i) {
      const std::size_t r0 = i * h / out_h, r1 = ((i + 1) * h + out_h - 1) / out_h;
      for (std::size_t j = 0; j < out_w; ++j) {
        const std::size_t c0 = j * w / out_w, c1 = ((j + 1) * w + out_w - 1) / out_w;
        std::size_t best = r0 * w + c0;
        for (std::size_t r = r0; r < r1; ++r) {
          for (std::size_t c = c0; c < c1; ++c) {
            if (ip[r * w + c] > ip[best]) best = r * w + c;
          }
        }
        const std::size_t o = (p * out_h + i) * out_w + j;
        out[o] = ip[best];
        (*argmax)[o] = p * h * w + best;
      }
    }
  }
  const bool rec = should_record({&x});
  Tensor y = make_result(Shape{x.dim(0), x.dim(1), out_h, out_w}, std::move(out), rec);
  if (rec) {
    record([xn = x.node(), yn = y.node(), argmax] {
      const double* gy = upstream(yn);
      double* gx = grad_target(xn);
      if (!gy || !gx) return;
      for (std::size_t o = 0; o < argmax->size(); ++o) gx[(*argmax)[o]] += gy[o];
    });
  }
  return y;
}

Tensor max_pool2d(const Tensor& x, std::size_t kernel) {
  check_rank("max_pool2d", x, 4, "[B, C, H, W]");
  if (kernel == 0) throw ArgumentError("max_pool2d: kernel must be >= 1");
  const std::size_t bc = x.dim(0) * x.dim(1), h = x.dim(2), w = x.dim(3);
  const std::size_t oh = h / kernel, ow = w / kernel;
  if (oh == 0) throw DimensionError("max_pool2d: axis 2 (height) smaller than kernel");
  if (ow == 0) throw DimensionError("max_pool2d: axis 3 (width) smaller than kernel");
  auto argmax = std::make_shared<std::vector<std::size_t>>(bc * oh * ow);
  std::vector<double> out(argmax->size());
  const double* xd = x.data().data();
  for (std::size_t p = 0; p < bc; ++p) {
    const double* ip = xd + p * h * w;
    for (std::size_t i = 0; i < oh; ++i) {
      for (std::size_t j = 0; j < ow; ++j) {
        std::size_t best = i * kernel * w + j * kernel;
        for (std::size_t r = i * kernel; r < (i + 1) * kernel; ++r) {
          for (std::size_t c = j * kernel; c < (j + 1) * kernel; ++c) {
            if (ip[r * w + c] > ip[best]) best = r * w + c;
          }
        }
        const std::size_t o = (p * oh + i) * ow + j;
        out[o] = ip[best];
        (*argmax)[o] = p * h * w + best;
      }
    }
  }
  const bool rec = should_record({&x});
  Tensor y = make_result(Shape{x.dim(0), x.dim(1), oh, ow}, std::move(out), rec);
  if (rec) {
    record([xn = x.node(), yn = y.node(), argmax] {
      const double* gy = upstream(yn);
      double* gx = grad_target(xn);
      if (!gy || !gx) return;
      for (std::size_t o = 0; o < argmax->size(); ++o) gx[(*argmax)[o]] += gy[o];
    });
  }
  return y;
}

Tensor interpolate_nearest(const Tensor& x, std::size_t out_h, std::size_t out_w) {
  check_rank("interpolate_nearest", x, 4, "[B, C, H, W]");
  if (out_h == 0 || out_w == 0) throw ArgumentError("interpolate_nearest: output dims must be >= 1");
  const std::size_t bc = x.dim(0) * x.dim(1), h = x.dim(2), w = x.dim(3);
  std::vector<std::size_t> src_row(out_h), src_col(out_w);
  for (std::size_t i = 0; i < out_h; ++i) src_row[i] = i * h / out_h;
  for (std::size_t j = 0; j < out_w; ++j) src_col[j] = j * w / out_w;
  std::vector<double> out(bc * out_h * out_w);
  const double* xd = x.data().data();
  for (std::size_t p = 0; p < bc; ++p) {
    for (std::size_t i = 0; i < out_h; ++i) {
      const double* irow = xd + (p * h + src_row[i]) * w;
      double* orow = out.data() + (p * out_h + i) * out_w;
      for (std::size_t j = 0; j < out_w; ++j) orow[j] = irow[src_col[j]];
    }
  }
  const bool rec = should_record({&x});
  Tensor y = make_result(Shape{x.dim(0), x.dim(1), out_h, out_w}, std::move(out), rec);
  if (rec) {
    record([xn = x.node(), yn = y.node(), bc, h, w, out_h, out_w, src_row, src_col] {
      const double* gy = upstream(yn);
      double* gx = grad_target(xn);
      if (!gy || !gx) return;
      for (std::size_t p = 0; p < bc; ++p) {
        for (std::size_t i = 0; i < out_h; ++i) {
          double* grow = gx + (p * h + src_row[i]) * w;
          const double* orow = gy + (p * out_h + i) * out_w;
          for (std::size_t j = 0; j < out_w; ++j) grow[src_col[j]] += orow[j];
        }
      }
    });
  }
  return y;
}

namespace {

// Gather op where out[o] = in[index[o]] and index is a bijection.
Tensor gather_bijection(const Tensor& x, Shape out_shape,
                        std::shared_ptr<std::vector<std::size_t>> index) {
  auto xd = x.data();
  std::vector<double> out(index->size());
  for (std::size_t o = 0; o < out.size(); ++o) out[o] = xd[(*index)[o]];
  const bool rec = should_record({&x});
  Tensor y = make_result(std::move(out_shape), std::move(out), rec);
  if (rec) {
    record([xn = x.node(), yn = y.node(), index] {
      const double* gy = upstream(yn);
      double* gx = grad_target(xn);
      if (!gy || !gx) return;
      for (std::size_t o = 0; o < index->size(); ++o) gx[(*index)[o]] += gy[o];
    });
  }
  return y;
}

}  // namespace

Tensor pixel_shuffle(const Tensor& x, std::size_t ds, std::size_t df) {
  check_rank("pixel_shuffle", x, 4, "[B, C, H, W]");
  if (ds == 0 || df == 0) throw ArgumentError("pixel_shuffle: factors must be >= 1");
  const std::size_t batch = x.dim(0), cin = x.dim(1), h = x.dim(2), w = x.dim(3);
  if (cin % (ds * df) != 0) {
    throw ArgumentError("pixel_shuffle: channel count " + std::to_string(cin) +
                        " not divisible by ds*df = " + std::to_string(ds * df));
  }
  const std::size_t c = cin / (ds * df), oh = h * ds, ow = w * df;
  auto index = std::make_shared<std::vector<std::size_t>>(x.numel());
  std::size_t o = 0;
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      for (std::size_t r = 0; r < oh; ++r) {
        const std::size_t hi = r / ds, i = r % ds;
        for (std::size_t q = 0; q < ow; ++q) {
          const std::size_t wi = q / df, j = q % df;
          const std::size_t src_c = ch * ds * df + i * df + j;
          (*index)[o++] = ((b * cin + src_c) * h + hi) * w + wi;
        }
      }
    }
  }
  return gather_bijection(x, Shape{batch, c, oh, ow}, std::move(index));
}

Tensor pixel_unshuffle(const Tensor& x, std::size_t ds, std::size_t df) {
  check_rank("pixel_unshuffle", x, 4, "[B, C, H, W]");
  if (ds == 0 || df == 0) throw ArgumentError("pixel_unshuffle: factors must be >= 1");
  const std::size_t batch = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  if (h % ds != 0) throw DimensionError("pixel_unshuffle: axis 2 not divisible by ds");
  if (w % df != 0) throw DimensionError("pixel_unshuffle: axis 3 not divisible by df");
  const std::size_t oc = c * ds * df, oh = h / ds, ow = w / df;
  auto index = std::make_shared<std::vector<std::size_t>>(x.numel());
  std::size_t o = 0;
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t k = 0; k < oc; ++k) {
      const std::size_t ch = k / (ds * df), i = (k % (ds * df)) / df, j = k % df;
      for (std::size_t r = 0; r < oh; ++r) {
        for (std::size_t q = 0; q < ow; ++q) {
          (*index)[o++] = ((b * c + ch) * h + r * ds + i) * w + q * df + j;
        }
      }
    }
  }
  return gather_bijection(x, Shape{batch, oc, oh, ow}, std::move(index));
}

Tensor layer_norm_channels(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
  if (!(eps > 0.0)) throw ArgumentError("layer_norm: eps must be > 0");
  if (x.rank() < 2) throw DimensionError("layer_norm: input rank must be >= 2");
  const std::size_t batch = x.dim(0), c = x.dim(1);
  const std::size_t spatial = x.numel() / (batch * c);
  if (gamma.numel() != c) throw DimensionError("layer_norm: gamma size must equal axis 1 extent");
  if (beta.numel() != c) throw DimensionError("layer_norm: beta size must equal axis 1 extent");

  auto xhat = std::make_shared<std::vector<double>>(x.numel());
  auto rstd = std::make_shared<std::vector<double>>(batch * spatial);
  std::vector<double> out(x.numel());
  const double* xd = x.data().data();
  const double* gd = gamma.data().data();
  const double* bd = beta.data().data();
  const double inv_c = 1.0 / static_cast<double>(c);
  for (std::size_t b = 0; b < batch; ++b) {
    const std::size_t base = b * c * spatial;
    for (std::size_t s = 0; s < spatial; ++s) {
      double mu = 0.0;
      for (std::size_t ch = 0; ch < c; ++ch) mu += xd[base + ch * spatial + s];
      mu *= inv_c;
      double var = 0.0;
      for (std::size_t ch = 0; ch < c; ++ch) {
        const double d = xd[base + ch * spatial + s] - mu;
        var += d * d;
      }
      var *= inv_c;
      const double r = 1.0 / std::sqrt(var + eps);
      (*rstd)[b * spatial + s] = r;
      for (std::size_t ch = 0; ch < c; ++ch) {
        const std::size_t i = base + ch * spatial + s;
        const double xh = (xd[i] - mu) * r;
        (*xhat)[i] = xh;
        out[i] = xh * gd[ch] + bd[ch];
      }
    }
  }
  const bool rec = should_record({&x, &gamma, &beta});
  Tensor y = make_result(x.shape(), std::move(out), rec);
  if (rec) {
    record([xn = x.node(), gn = gamma.node(), bn = beta.node(), yn = y.node(), xhat, rstd, batch,
            c, spatial, inv_c] {
      const double* gy = upstream(yn);
      if (!gy) return;
      double* gx = grad_target(xn);
      double* gg = grad_target(gn);
      double* gbeta = grad_target(bn);
      const double* gd = gn->data.data();
      for (std::size_t b = 0; b < batch; ++b) {
        const std::size_t base = b * c * spatial;
        for (std::size_t s = 0; s < spatial; ++s) {
          double m1 = 0.0, m2 = 0.0;
          for (std::size_t ch = 0; ch < c; ++ch) {
            const std::size_t i = base + ch * spatial + s;
            const double gxh = gy[i] * gd[ch];
            m1 += gxh;
            m2 += gxh * (*xhat)[i];
            if (gg) gg[ch] += gy[i] * (*xhat)[i];
            if (gbeta) gbeta[ch] += gy[i];
          }
          if (!gx) continue;
          m1 *= inv_c;
          m2 *= inv_c;
          const double r = (*rstd)[b * spatial + s];
          for (std::size_t ch = 0; ch < c; ++ch) {
            const std::size_t i = base + ch * spatial + s;
            gx[i] += r * (gy[i] * gd[ch] - m1 - (*xhat)[i] * m2);
          }
        }
      }
    });
  }
  return y;
}

std::vector<Tensor> split_channels(const Tensor& x, std::size_t k) {
  if (x.rank() < 2) throw DimensionError("split_channels: input rank must be >= 2");
  if (k == 0) throw ArgumentError("split_channels: k must be >= 1");
  const std::size_t batch = x.dim(0), c = x.dim(1);
  if (c % k != 0) {
    throw ArgumentError("split_channels: axis 1 extent " + std::to_string(c) +
                        " not divisible by " + std::to_string(k));
  }
  const std::size_t inner = x.numel() / (batch * c);
  const std::size_t cg = c / k;
  const bool rec = should_record({&x});
  std::vector<Tensor> parts;
  parts.reserve(k);
  const double* xd = x.data().data();
  for (std::size_t g = 0; g < k; ++g) {
    Shape shape = x.shape();
    shape[1] = cg;
    std::vector<double> out(batch * cg * inner);
    for (std::size_t b = 0; b < batch; ++b) {
      const double* src = xd + (b * c + g * cg) * inner;
      std::copy(src, src + cg * inner, out.begin() + b * cg * inner);
    }
    Tensor y = make_result(std::move(shape), std::move(out), rec);
    if (rec) {
      record([xn = x.node(), yn = y.node(), g, batch, c, cg, inner] {
        const double* gy = upstream(yn);
        double* gx = grad_target(xn);
        if (!gy || !gx) return;
        for (std::size_t b = 0; b < batch; ++b) {
          double* dst = gx + (b * c + g * cg) * inner;
          const double* src = gy + b * cg * inner;
          for (std::size_t i = 0; i < cg * inner; ++i) dst[i] += src[i];
        }
      });
    }
    parts.push_back(std::move(y));
  }
  return parts;
}

Tensor concat_channels(std::span<const Tensor> parts) {
  if (parts.empty()) throw ArgumentError("concat_channels: no inputs");
  const Tensor& first = parts.front();
  if (first.rank() < 2) throw DimensionError("concat_channels: input rank must be >= 2");
  const std::size_t batch = first.dim(0);
  const std::size_t inner = first.numel() / (batch * first.dim(1));
  std::size_t c = 0;
  std::vector<std::size_t> offsets;
  for (const Tensor& p : parts) {
    if (p.rank() != first.rank()) throw DimensionError("concat_channels: rank mismatch");
    for (std::size_t ax = 0; ax < p.rank(); ++ax) {
      if (ax != 1 && p.dim(ax) != first.dim(ax)) {
        throw DimensionError("concat_channels: axis " + std::to_string(ax) + " mismatch");
      }
    }
    offsets.push_back(c);
    c += p.dim(1);
  }
  Shape shape = first.shape();
  shape[1] = c;
  std::vector<double> out(batch * c * inner);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const std::size_t ck = parts[k].dim(1);
    const double* src = parts[k].data().data();
    for (std::size_t b = 0; b < batch; ++b) {
      std::copy(src + b * ck * inner, src + (b + 1) * ck * inner,
                out.begin() + (b * c + offsets[k]) * inner);
    }
  }
  const bool rec = should_record(parts);
  Tensor y = make_result(std::move(shape), std::move(out), rec);
  if (rec) {
    std::vector<NodePtr> nodes;
    for (const Tensor& p : parts) nodes.push_back(p.node());
    record([nodes, yn = y.node(), offsets, batch, c, inner] {
      const double* gy = upstream(yn);
      if (!gy) return;
      for (std::size_t k = 0; k < nodes.size(); ++k) {
        double* gp = grad_target(nodes[k]);
        if (!gp) continue;
        const std::size_t ck = nodes[k]->shape[1];
        for (std::size_t b = 0; b < batch; ++b) {
          const double* src = gy + (b * c + offsets[k]) * inner;
          double* dst = gp + b * ck * inner;
          for (std::size_t i = 0; i < ck * inner; ++i) dst[i] += src[i];
        }
      }
    });
  }
  return y;
}

Tensor dilated_conv1d(const Tensor& x, const Tensor& weight, const Tensor& bias,
                      std::size_t dilation, bool causal) {
  check_rank("dilated_conv1d", x, 3, "[B, C, T] input");
  check_rank("dilated_conv1d", weight, 3, "[C_out, C_in, k] weight");
  if (dilation == 0) throw ArgumentError("dilated_conv1d: dilation must be >= 1");
  const std::size_t batch = x.dim(0), cin = x.dim(1), t_in = x.dim(2);
  const std::size_t cout = weight.dim(0), k = weight.dim(2);
  if (weight.dim(1) != cin) {
    throw DimensionError("dilated_conv1d: weight axis 1 = " + std::to_string(weight.dim(1)) +
                         " does not match input channels " + std::to_string(cin));
  }
  if (bias.defined() && bias.numel() != cout) {
    throw DimensionError("dilated_conv1d: bias axis 0 must equal C_out");
  }
  const std::size_t span = dilation * (k - 1);
  const std::size_t pad = causal ? span : 0;
  if (t_in + pad < span + 1) {
    throw ArgumentError("dilated_conv1d: dilated kernel longer than padded input");
  }
  const std::size_t t_out = t_in + pad - span;
  std::vector<double> out(batch * cout * t_out, 0.0);
  const double* xd = x.data().data();
  const double* wd = weight.data().data();
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t o = 0; o < cout; ++o) {
      double* orow = out.data() + (b * cout + o) * t_out;
      if (bias.defined()) std::fill(orow, orow + t_out, bias.data()[o]);
      for (std::size_t c = 0; c < cin; ++c) {
        const double* irow = xd + (b * cin + c) * t_in;
        for (std::size_t j = 0; j < k; ++j) {
          const double wv = wd[(o * cin + c) * k + j];
          // padded index t + j*dilation maps to input index t + j*dilation - pad
          for (std::size_t t = 0; t < t_out; ++t) {
            const long src = static_cast<long>(t + j * dilation) - static_cast<long>(pad);
            if (src >= 0) orow[t] += wv * irow[src];
          }
        }
      }
    }
  }
  const bool rec = should_record({&x, &weight, &bias});
  Tensor y = make_result(Shape{batch, cout, t_out}, std::move(out), rec);
  if (rec) {
    record([xn = x.node(), wn = weight.node(), bn = bias.node(), yn = y.node(), batch, cin, t_in,
            cout, k, t_out, dilation, pad] {
      const double* gy = upstream(yn);
      if (!gy) return;
      double* gx = grad_target(xn);
      double* gw = grad_target(wn);
      double* gb = grad_target(bn);
      const double* xd = xn->data.data();
      const double* wd = wn->data.data();
      for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t o = 0; o < cout; ++o) {
          const double* grow = gy + (b * cout + o) * t_out;
          if (gb) {
            for (std::size_t t = 0; t < t_out; ++t) gb[o] += grow[t];
          }
          for (std::size_t c = 0; c < cin; ++c) {
            const std::size_t row = (b * cin + c) * t_in;
            for (std::size_t j = 0; j < k; ++j) {
              const std::size_t wi = (o * cin + c) * k + j;
              double acc = 0.0;
              for (std::size_t t = 0; t < t_out; ++t) {
                const long src = static_cast<long>(t + j * dilation) - static_cast<long>(pad);
                if (src < 0) continue;
                acc += grow[t] * xd[row + src];
                if (gx) gx[row + src] += wd[wi] * grow[t];
              }
              if (gw) gw[wi] += acc;
            }
          }
        }
      }
    });
  }
  return y;
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  check_rank("linear", x, 2, "[B, in] input");
  check_rank("linear", weight, 2, "[out, in] weight");
  const std::size_t batch = x.dim(0), in = x.dim(1), outn = weight.dim(0);
  if (weight.dim(1) != in) {
    throw DimensionError("linear: weight axis 1 = " + std::to_string(weight.dim(1)) +
                         " does not match input axis 1 = " + std::to_string(in));
  }
  if (bias.defined() && bias.numel() != outn) throw DimensionError("linear: bias axis 0 mismatch");
  const double* xd = x.data().data();
  const double* wd = weight.data().data();
  std::vector<double> out(batch * outn);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t o = 0; o < outn; ++o) {
      double acc = bias.defined() ? bias.data()[o] : 0.0;
      for (std::size_t i = 0; i < in; ++i) acc += wd[o * in + i] * xd[b * in + i];
      out[b * outn + o] = acc;
    }
  }
  const bool rec = should_record({&x, &weight, &bias});
  Tensor y = make_result(Shape{batch, outn}, std::move(out), rec);
  if (rec) {
    record([xn = x.node(), wn = weight.node(), bn = bias.node(), yn = y.node(), batch, in, outn] {
      const double* gy = upstream(yn);
      if (!gy) return;
      double* gx = grad_target(xn);
      double* gw = grad_target(wn);
      double* gb = grad_target(bn);
      for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t o = 0; o < outn; ++o) {
          const double g = gy[b * outn + o];
          if (gb) gb[o] += g;
          for (std::size_t i = 0; i < in; ++i) {
            if (gw) gw[o * in + i] += g * xn->data[b * in + i];
            if (gx) gx[b * in + i] += g * wn->data[o * in + i];
          }
        }
      }
    });
  }
  return y;
}

Tensor global_avg_pool2d(const Tensor& x) {
  check_rank("global_avg_pool2d", x, 4, "[B, C, H, W]");
  const std::size_t bc = x.dim(0) * x.dim(1), hw = x.dim(2) * x.dim(3);
  const double* xd = x.data().data();
  std::vector<double> out(bc);
  for (std::size_t p = 0; p < bc; ++p) {
    double acc = 0.0;
    for (std::size_t i = 0; i < hw; ++i) acc += xd[p * hw + i];
    out[p] = acc / static_cast<double>(hw);
  }
  const bool rec = should_record({&x});
  Tensor y = make_result(Shape{x.dim(0), x.dim(1)}, std::move(out), rec);
  if (rec) {
    record([xn = x.node(), yn = y.node(), bc, hw] {
      const double* gy = upstream(yn);
      double* gx = grad_target(xn);
      if (!gy || !gx) return;
      const double inv = 1.0 / static_cast<double>(hw);
      for (std::size_t p = 0; p < bc; ++p) {
        for (std::size_t i = 0; i < hw; ++i) gx[p * hw + i] += gy[p] * inv;
      }
    });
  }
  return y;
}

Tensor last_time_step(const Tensor& x) {
  check_rank("last_time_step", x, 3, "[B, C, T]");
  const std::size_t bc = x.dim(0) * x.dim(1), t = x.dim(2);
  const double* xd = x.data().data();
  std::vector<double> out(bc);
  for (std::size_t p = 0; p < bc; ++p) out[p] = xd[p * t + t - 1];
  const bool rec = should_record({&x});
  Tensor y = make_result(Shape{x.dim(0), x.dim(1)}, std::move(out), rec);
  if (rec) {
    record([xn = x.node(), yn = y.node(), bc, t] {
      const double* gy = upstream(yn);
      double* gx = grad_target(xn);
      if (!gy || !gx) return;
      for (std::size_t p = 0; p < bc; ++p) gx[p * t + t - 1] += gy[p];
    });
  }
  return y;
}

Tensor cross_entropy(const Tensor& logits, std::span<const std::size_t> labels) {
  check_rank("cross_entropy", logits, 2, "[B, classes] logits");
  const std::size_t batch = logits.dim(0), classes = logits.dim(1);
  if (labels.size() != batch) {
    throw DimensionError("cross_entropy: label count " + std::to_string(labels.size()) +
                         " does not match logits axis 0 = " + std::to_string(batch));
  }
  auto probs = std::make_shared<std::vector<double>>(batch * classes);
  const double* ld = logits.data().data();
  double total = 0.0;
  for (std::size_t b = 0; b < batch; ++b) {
    if (labels[b] >= classes) {
      throw ArgumentError("cross_entropy: label " + std::to_string(labels[b]) +
                          " out of range for " + std::to_string(classes) + " classes");
    }
    const double* row = ld + b * classes;
    const double mx = *std::max_element(row, row + classes);
    double z = 0.0;
    for (std::size_t c = 0; c < classes; ++c) z += std::exp(row[c] - mx);
    const double log_z = std::log(z) + mx;
    for (std::size_t c = 0; c < classes; ++c) (*probs)[b * classes + c] = std::exp(row[c] - log_z);
    total += log_z - row[labels[b]];
  }
  const bool rec = should_record({&logits});
  Tensor y = make_result(Shape{1}, {total / static_cast<double>(batch)}, rec);
  if (rec) {
    std::vector<std::size_t> label_copy(labels.begin(), labels.end());
    record([ln = logits.node(), yn = y.node(), probs, label_copy, batch, classes] {
      const double* gy = upstream(yn);
      double* gl = grad_target(ln);
      if (!gy || !gl) return;
      const double s = gy[0] / static_cast<double>(batch);
      for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t c = 0; c < classes; ++c) {
          const double target = c == label_copy[b] ? 1.0 : 0.0;
          gl[b * classes + c] += s * ((*probs)[b * classes + c] - target);
        }
      }
    });
  }
  return y;
}

Tensor doppler_magnitude(const Tensor& x, double eps) {
  check_rank("doppler_magnitude", x, 4, "[B, 2, M, N]");
  if (x.dim(1) != 2) {
    throw DimensionError("doppler_magnitude: axis 1 must hold (re, im), got " +
                         std::to_string(x.dim(1)));
  }
  const std::size_t batch = x.dim(0), m = x.dim(2), n = x.dim(3);
  const double* xd = x.data().data();
  auto spec_re = std::make_shared<std::vector<double>>(batch * m * n);
  auto spec_im = std::make_shared<std::vector<double>>(batch * m * n);
  std::vector<double> out(batch * m * n);
  std::vector<double> br(m), bi(m);
  for (std::size_t b = 0; b < batch; ++b) {
    const double* re = xd + (b * 2) * m * n;
    const double* im = re + m * n;
    for (std::size_t col = 0; col < n; ++col) {
      for (std::size_t k = 0; k < m; ++k) {
        br[k] = re[k * n + col];
        bi[k] = im[k * n + col];
      }
      fft_inplace(br, bi, false);
      for (std::size_t k = 0; k < m; ++k) {
        const std::size_t o = (b * m + k) * n + col;
        (*spec_re)[o] = br[k];
        (*spec_im)[o] = bi[k];
        out[o] = std::sqrt(br[k] * br[k] + bi[k] * bi[k] + eps);
      }
    }
  }
  const bool rec = should_record({&x});
  Tensor y = make_result(Shape{batch, m, n}, std::move(out), rec);
  if (rec) {
    record([xn = x.node(), yn = y.node(), spec_re, spec_im, batch, m, n] {
      const double* gy = upstream(yn);
      double* gx = grad_target(xn);
      if (!gy || !gx) return;
      // d|Y_k|/dY_k = Y_k/|Y_k|; pulling back through the forward DFT is the
      // unnormalized inverse DFT of the upstream complex gradient.
      std::vector<double> gr(m), gi(m);
      for (std::size_t b = 0; b < batch; ++b) {
        double* gre = gx + (b * 2) * m * n;
        double* gim = gre + m * n;
        for (std::size_t col = 0; col < n; ++col) {
          for (std::size_t k = 0; k < m; ++k) {
            const std::size_t o = (b * m + k) * n + col;
            const double s = gy[o] / yn->data[o];
            gr[k] = s * (*spec_re)[o];
            gi[k] = s * (*spec_im)[o];
          }
          fft_inplace(gr, gi, true);
          for (std::size_t k = 0; k < m; ++k) {
            gre[k * n + col] += gr[k];
            gim[k * n + col] += gi[k];
          }
        }
      }
    });
  }
  return y;
}

}  // namespace radgest
