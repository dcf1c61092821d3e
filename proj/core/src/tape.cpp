// Copyright 2026 The tritrain Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tritrain/tape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tritrain/error.hpp"

namespace tritrain {

const Tensor& Var::value() const { return tape_->value(index_); }

Var Tape::input(Tensor value) {
  Node node;
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::parameter(Parameter& p) {
  if (p.grad.shape() != p.value.shape()) p.grad = Tensor(p.value.shape());
  Node node;
  node.external = &p.value;
  node.grad_target = &p.grad;
  node.needs_grad = true;
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::parameter(const Parameter& p) {
  Node node;
  node.external = &p.value;
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

const Tensor& Tape::value(std::size_t i) const {
  const Node& node = nodes_[i];
  return node.external ? *node.external : node.value;
}

Tensor& Tape::grad(std::size_t i) {
  Node& node = nodes_[i];
  node.grad_touched = true;
  if (node.grad_target) return *node.grad_target;
  if (node.grad.empty()) node.grad = Tensor(value(i).shape());
  return node.grad;
}

Var Tape::record(Tensor value, std::span<const Var> parents, BackwardFn backward) {
  Node node;
  node.value = std::move(value);
  for (const Var& p : parents) {
    if (&p.tape() != this) throw Error("operands belong to different tapes");
    node.needs_grad = node.needs_grad || nodes_[p.index()].needs_grad;
  }
  if (node.needs_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

void Tape::note_regime(std::uint64_t hash) {
  signature_ = splitmix64(signature_ ^ hash);
}

void Tape::backward(Var loss) {
  if (consumed_) {
    throw Error("backward() called twice on the same tape; rebuild the forward pass first");
  }
  if (&loss.tape() != this) throw Error("loss belongs to a different tape");
  if (loss.value().size() != 1) {
    throw ShapeError("backward() needs a scalar loss, got shape " + shape_string(loss.shape()));
  }
  consumed_ = true;
  if (!nodes_[loss.index()].needs_grad) return;
  grad(loss.index())[0] += 1.0;
  for (std::size_t i = loss.index() + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (!node.needs_grad || !node.grad_touched || !node.backward) continue;
    node.backward(*this, i);
  }
}

namespace {

[[noreturn]] void shape_mismatch(const std::string& op, const Shape& a, const Shape& b) {
  throw ShapeError(op + ": incompatible shapes " + shape_string(a) + " and " + shape_string(b));
}

std::uint64_t mix_bits(std::uint64_t h, std::uint64_t v) { return splitmix64(h ^ v); }

}  // namespace

Var affine(Var x, Var weight, Var bias) {
  const Tensor& xv = x.value();
  const Tensor& wv = weight.value();
  const Tensor& bv = bias.value();
  if (wv.rank() != 2) shape_mismatch("affine", xv.shape(), wv.shape());
  if (xv.rank() > 2 || xv.cols() != wv.dim(0)) shape_mismatch("affine", xv.shape(), wv.shape());
  const std::size_t n = xv.rows();
  const std::size_t d_in = wv.dim(0);
  const std::size_t d_out = wv.dim(1);
  if (bv.rank() != 1 || bv.size() != d_out) shape_mismatch("affine", wv.shape(), bv.shape());

  Tensor y(xv.rank() == 1 ? Shape{d_out} : Shape{n, d_out});
  for (std::size_t i = 0; i < n; ++i) {
    double* yi = y.raw() + i * d_out;
    std::copy(bv.raw(), bv.raw() + d_out, yi);
    const double* xi = xv.raw() + i * d_in;
    for (std::size_t k = 0; k < d_in; ++k) {
      const double a = xi[k];
      if (a == 0.0) continue;
      const double* wk = wv.raw() + k * d_out;
      for (std::size_t o = 0; o < d_out; ++o) yi[o] += a * wk[o];
    }
  }

  const Var parents[] = {x, weight, bias};
  const std::size_t xi_idx = x.index(), wi = weight.index(), bi = bias.index();
  return x.tape().record(std::move(y), parents, [=](Tape& t, std::size_t self) {
    const Tensor& dy = t.grad(self);
    const Tensor& xval = t.value(xi_idx);
    const Tensor& wval = t.value(wi);
    if (t.needs_grad(bi)) {
      Tensor& db = t.grad(bi);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t o = 0; o < d_out; ++o) db[o] += dy[i * d_out + o];
    }
    if (t.needs_grad(wi)) {
      Tensor& dw = t.grad(wi);
      for (std::size_t i = 0; i < n; ++i) {
        const double* xr = xval.raw() + i * d_in;
        const double* dyr = dy.raw() + i * d_out;
        for (std::size_t k = 0; k < d_in; ++k) {
          const double a = xr[k];
          if (a == 0.0) continue;
          double* dwk = dw.raw() + k * d_out;
          for (std::size_t o = 0; o < d_out; ++o) dwk[o] += a * dyr[o];
        }
      }
    }
    if (t.needs_grad(xi_idx)) {
      Tensor& dx = t.grad(xi_idx);
      for (std::size_t i = 0; i < n; ++i) {
        const double* dyr = dy.raw() + i * d_out;
        double* dxr = dx.raw() + i * d_in;
        for (std::size_t k = 0; k < d_in; ++k) {
          const double* wk = wval.raw() + k * d_out;
          double acc = 0.0;
          for (std::size_t o = 0; o < d_out; ++o) acc += wk[o] * dyr[o];
          dxr[k] += acc;
        }
      }
    }
  });
}

Var relu(Var x) {
  const Tensor& xv = x.value();
  Tensor y(xv.shape());
  std::uint64_t h = 0x52454c55ULL;
  std::uint64_t word = 0;
  for (std::size_t i = 0; i < xv.size(); ++i) {
    const bool on = xv[i] > 0.0;
    y[i] = on ? xv[i] : 0.0;
    word = (word << 1) | static_cast<std::uint64_t>(on);
    if ((i & 63) == 63) {
      h = mix_bits(h, word);
      word = 0;
    }
  }
  h = mix_bits(h, word ^ xv.size());
  x.tape().note_regime(h);

  const Var parents[] = {x};
  const std::size_t xi = x.index();
  return x.tape().record(std::move(y), parents, [=](Tape& t, std::size_t self) {
    const Tensor& dy = t.grad(self);
    const Tensor& xval = t.value(xi);
    Tensor& dx = t.grad(xi);
    for (std::size_t i = 0; i < dy.size(); ++i) {
      if (xval[i] > 0.0) dx[i] += dy[i];
    }
  });
}

Var conv1d_valid(Var x, Var filters, Var bias) {
  const Tensor& xv = x.value();
  const Tensor& fv = filters.value();
  const Tensor& bv = bias.value();
  if (xv.rank() != 2 || fv.rank() != 3 || fv.dim(2) != xv.dim(1)) {
    shape_mismatch("conv1d_valid", xv.shape(), fv.shape());
  }
  const std::size_t len = xv.dim(0);
  const std::size_t d = xv.dim(1);
  const std::size_t k = fv.dim(0);
  const std::size_t w = fv.dim(1);
  if (bv.rank() != 1 || bv.size() != k) shape_mismatch("conv1d_valid", fv.shape(), bv.shape());
  if (len < w) {
    throw ShapeError("conv1d_valid: sequence length " + std::to_string(len) +
                     " is shorter than filter width " + std::to_string(w) + "; pad the input first");
  }
  const std::size_t out_len = len - w + 1;
  const std::size_t window = w * d;

  // Rows t..t+w-1 of a row-major (len x d) input are one contiguous block of
  // w*d values, laid out exactly like one (w x d) filter.
  Tensor y({out_len, k});
  for (std::size_t t = 0; t < out_len; ++t) {
    const double* xt = xv.raw() + t * d;
    double* yt = y.raw() + t * k;
    for (std::size_t f = 0; f < k; ++f) {
      const double* ff = fv.raw() + f * window;
      double acc = bv[f];
      for (std::size_t j = 0; j < window; ++j) acc += xt[j] * ff[j];
      yt[f] = acc;
    }
  }

  const Var parents[] = {x, filters, bias};
  const std::size_t xi = x.index(), fi = filters.index(), bi = bias.index();
  return x.tape().record(std::move(y), parents, [=](Tape& t, std::size_t self) {
    const Tensor& dy = t.grad(self);
    const Tensor& xval = t.value(xi);
    const Tensor& fval = t.value(fi);
    const bool want_b = t.needs_grad(bi);
    const bool want_f = t.needs_grad(fi);
    const bool want_x = t.needs_grad(xi);
    Tensor* db = want_b ? &t.grad(bi) : nullptr;
    Tensor* df = want_f ? &t.grad(fi) : nullptr;
    Tensor* dx = want_x ? &t.grad(xi) : nullptr;
    for (std::size_t step = 0; step < out_len; ++step) {
      const double* xt = xval.raw() + step * d;
      for (std::size_t f = 0; f < k; ++f) {
        const double g = dy[step * k + f];
        if (g == 0.0) continue;
        if (db) (*db)[f] += g;
        if (df) {
          double* dff = df->raw() + f * window;
          for (std::size_t j = 0; j < window; ++j) dff[j] += g * xt[j];
        }
        if (dx) {
          const double* ff = fval.raw() + f * window;
          double* dxt = dx->raw() + step * d;
          for (std::size_t j = 0; j < window; ++j) dxt[j] += g * ff[j];
        }
      }
    }
  });
}

Var max_over_time(Var x) {
  const Tensor& xv = x.value();
  if (xv.rank() != 2) throw ShapeError("max_over_time: expected (len x k), got " + shape_string(xv.shape()));
  const std::size_t len = xv.dim(0);
  const std::size_t k = xv.dim(1);
  Tensor y({k});
  std::vector<std::size_t> argmax(k, 0);
  std::uint64_t h = 0x4d4158ULL;
  for (std::size_t f = 0; f < k; ++f) {
    double best = xv[f];
    for (std::size_t t = 1; t < len; ++t) {
      if (xv[t * k + f] > best) {
        best = xv[t * k + f];
        argmax[f] = t;
      }
    }
    y[f] = best;
    h = mix_bits(h, argmax[f] * 0x100000001b3ULL + f);
  }
  x.tape().note_regime(h);

  const Var parents[] = {x};
  const std::size_t xi = x.index();
  return x.tape().record(std::move(y), parents,
                         [=, argmax = std::move(argmax)](Tape& t, std::size_t self) {
                           const Tensor& dy = t.grad(self);
                           Tensor& dx = t.grad(xi);
                           for (std::size_t f = 0; f < k; ++f) dx[argmax[f] * k + f] += dy[f];
                         });
}

Var mean_rows(Var x) {
  const Tensor& xv = x.value();
  if (xv.rank() != 2) throw ShapeError("mean_rows: expected (n x d), got " + shape_string(xv.shape()));
  const std::size_t n = xv.dim(0);
  const std::size_t d = xv.dim(1);
  Tensor y({d});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < d; ++c) y[c] += xv[i * d + c];
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t c = 0; c < d; ++c) y[c] *= scale;

  const Var parents[] = {x};
  const std::size_t xi = x.index();
  return x.tape().record(std::move(y), parents, [=](Tape& t, std::size_t self) {
    const Tensor& dy = t.grad(self);
    Tensor& dx = t.grad(xi);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < d; ++c) dx[i * d + c] += dy[c] * scale;
  });
}

Var concat(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat: no operands");
  std::size_t total = 0;
  for (const Var& p : parts) {
    if (p.value().rank() != 1) throw ShapeError("concat: operands must be vectors, got " + shape_string(p.shape()));
    total += p.value().size();
  }
  Tensor y({total});
  std::vector<std::size_t> indices;
  std::vector<std::size_t> offsets;
  std::size_t offset = 0;
  for (const Var& p : parts) {
    const Tensor& v = p.value();
    std::copy(v.raw(), v.raw() + v.size(), y.raw() + offset);
    indices.push_back(p.index());
    offsets.push_back(offset);
    offset += v.size();
  }
  return parts.front().tape().record(
      std::move(y), parts,
      [indices = std::move(indices), offsets = std::move(offsets)](Tape& t, std::size_t self) {
        const Tensor& dy = t.grad(self);
        for (std::size_t j = 0; j < indices.size(); ++j) {
          if (!t.needs_grad(indices[j])) continue;
          Tensor& dx = t.grad(indices[j]);
          for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += dy[offsets[j] + i];
        }
      });
}

Var dropout(Var x, double rate, Rng& rng, bool train_mode) {
  if (!(rate >= 0.0) || rate >= 1.0) {
    throw ConfigError("dropout rate must lie in [0, 1), got " + std::to_string(rate));
  }
  if (!train_mode || rate == 0.0) return x;
  const Tensor& xv = x.value();
  const double keep_scale = 1.0 / (1.0 - rate);
  std::vector<double> mask(xv.size());
  Tensor y(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) {
    mask[i] = rng.uniform() < rate ? 0.0 : keep_scale;
    y[i] = xv[i] * mask[i];
  }
  const Var parents[] = {x};
  const std::size_t xi = x.index();
  return x.tape().record(std::move(y), parents, [=, mask = std::move(mask)](Tape& t, std::size_t self) {
    const Tensor& dy = t.grad(self);
    Tensor& dx = t.grad(xi);
    for (std::size_t i = 0; i < dy.size(); ++i) dx[i] += dy[i] * mask[i];
  });
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.begin(), logits.end());
  if (p.empty()) return p;
  const double top = *std::max_element(p.begin(), p.end());
  double z = 0.0;
  for (double& v : p) {
    v = std::exp(v - top);
    z += v;
  }
  for (double& v : p) v /= z;
  return p;
}

Var softmax_cross_entropy(Var logits, int label) {
  const Tensor& lv = logits.value();
  if (lv.rank() != 1 || lv.size() < 2) {
    throw ShapeError("softmax_cross_entropy: expected at least 2 logits, got " + shape_string(lv.shape()));
  }
  if (label < 0 || static_cast<std::size_t>(label) >= lv.size()) {
    throw ConfigError("softmax_cross_entropy: label " + std::to_string(label) + " out of range for " +
                      std::to_string(lv.size()) + " classes");
  }
  const double top = *std::max_element(lv.data().begin(), lv.data().end());
  double z = 0.0;
  for (double v : lv.data()) z += std::exp(v - top);
  const double loss = std::log(z) + top - lv[static_cast<std::size_t>(label)];

  const Var parents[] = {logits};
  const std::size_t li = logits.index();
  return logits.tape().record(Tensor::scalar(loss), parents, [=](Tape& t, std::size_t self) {
    const double g = t.grad(self)[0];
    std::vector<double> p = softmax(t.value(li).data());
    Tensor& dl = t.grad(li);
    for (std::size_t c = 0; c < p.size(); ++c) {
      dl[c] += g * (p[c] - (c == static_cast<std::size_t>(label) ? 1.0 : 0.0));
    }
  });
}

Var half_squared_norm(Var x) {
  const Tensor& xv = x.value();
  double acc = 0.0;
  for (double v : xv.data()) acc += v * v;
  const Var parents[] = {x};
  const std::size_t xi = x.index();
  return x.tape().record(Tensor::scalar(0.5 * acc), parents, [=](Tape& t, std::size_t self) {
    const double g = t.grad(self)[0];
    const Tensor& xval = t.value(xi);
    Tensor& dx = t.grad(xi);
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += g * xval[i];
  });
}

Var sum(Var x) {
  double acc = 0.0;
  for (double v : x.value().data()) acc += v;
  const Var parents[] = {x};
  const std::size_t xi = x.index();
  return x.tape().record(Tensor::scalar(acc), parents, [=](Tape& t, std::size_t self) {
    const double g = t.grad(self)[0];
    Tensor& dx = t.grad(xi);
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += g;
  });
}

}  // namespace tritrain
