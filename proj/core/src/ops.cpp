#include "adrl/nd/ops.hpp"

#include <cblas.h>

#include <cmath>
#include <string>

namespace adrl::nd {
namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw ContractViolation(msg);
}

std::string shape_str(const Tensor& t) {
  return "[" + std::to_string(t.rows()) + "," + std::to_string(t.cols()) + "]";
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  require(a.rows() == b.rows() && a.cols() == b.cols(),
          std::string(op) + ": shape mismatch " + shape_str(a) + " vs " +
              shape_str(b));
}

// Elementwise unary helper: f(value) forward, df(x, y, dy) backward factor.
template <typename F, typename DF>
Tensor unary(const Tensor& a, F f, DF df) {
  Tensor out = make_op(a.rows(), a.cols(), {a}, [df](Node& n) {
    Node& p = *n.parents[0];
    for (std::size_t i = 0; i < n.numel(); ++i) {
      p.grad[i] += df(p.value[i], n.value[i]) * n.grad[i];
    }
  });
  const Real* x = a.data();
  Real* y = out.data();
  for (std::size_t i = 0; i < out.numel(); ++i) y[i] = f(x[i]);
  return out;
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require(a.cols() == b.rows(), "matmul: inner dims differ " + shape_str(a) +
                                    " x " + shape_str(b));
  const int m = a.rows(), k = a.cols(), n = b.cols();
  Tensor out = make_op(m, n, {a, b}, [m, k, n](Node& nd) {
    Node& pa = *nd.parents[0];
    Node& pb = *nd.parents[1];
    // dA += dC * B^T
    if (pa.requires_grad) {
      cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasTrans, m, k, n, 1.0,
                  nd.grad.data(), n, pb.value.data(), n, 1.0, pa.grad.data(),
                  k);
    }
    // dB += A^T * dC
    if (pb.requires_grad) {
      cblas_dgemm(CblasRowMajor, CblasTrans, CblasNoTrans, k, n, m, 1.0,
                  pa.value.data(), k, nd.grad.data(), n, 1.0, pb.grad.data(),
                  n);
    }
  });
  if (m > 0 && n > 0 && k > 0) {
    cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasNoTrans, m, n, k, 1.0,
                a.data(), k, b.data(), n, 0.0, out.data(), n);
  }
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  Tensor out = make_op(a.rows(), a.cols(), {a, b}, [](Node& n) {
    for (int s = 0; s < 2; ++s) {
      Node& p = *n.parents[s];
      if (!p.requires_grad) continue;
      for (std::size_t i = 0; i < n.numel(); ++i) p.grad[i] += n.grad[i];
    }
  });
  const Real* x = a.data();
  const Real* y = b.data();
  Real* z = out.data();
  for (std::size_t i = 0; i < out.numel(); ++i) z[i] = x[i] + y[i];
  return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  Tensor out = make_op(a.rows(), a.cols(), {a, b}, [](Node& n) {
    Node& pa = *n.parents[0];
    Node& pb = *n.parents[1];
    for (std::size_t i = 0; i < n.numel(); ++i) {
      if (pa.requires_grad) pa.grad[i] += n.grad[i];
      if (pb.requires_grad) pb.grad[i] -= n.grad[i];
    }
  });
  const Real* x = a.data();
  const Real* y = b.data();
  Real* z = out.data();
  for (std::size_t i = 0; i < out.numel(); ++i) z[i] = x[i] - y[i];
  return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  Tensor out = make_op(a.rows(), a.cols(), {a, b}, [](Node& n) {
    Node& pa = *n.parents[0];
    Node& pb = *n.parents[1];
    for (std::size_t i = 0; i < n.numel(); ++i) {
      if (pa.requires_grad) pa.grad[i] += pb.value[i] * n.grad[i];
      if (pb.requires_grad) pb.grad[i] += pa.value[i] * n.grad[i];
    }
  });
  const Real* x = a.data();
  const Real* y = b.data();
  Real* z = out.data();
  for (std::size_t i = 0; i < out.numel(); ++i) z[i] = x[i] * y[i];
  return out;
}

Tensor neg(const Tensor& a) { return scale(a, -1.0); }

Tensor scale(const Tensor& a, Real c) {
  return unary(a, [c](Real x) { return c * x; },
               [c](Real, Real) { return c; });
}

Tensor add_scalar(const Tensor& a, Real c) {
  return unary(a, [c](Real x) { return x + c; },
               [](Real, Real) { return 1.0; });
}

Tensor add_rowvec(const Tensor& x, const Tensor& v) {
  require(v.rows() == 1 && v.cols() == x.cols(),
          "add_rowvec: v must be [1," + std::to_string(x.cols()) + "], got " +
              shape_str(v));
  const int B = x.rows(), D = x.cols();
  Tensor out = make_op(B, D, {x, v}, [B, D](Node& n) {
    Node& px = *n.parents[0];
    Node& pv = *n.parents[1];
    if (px.requires_grad) {
      for (std::size_t i = 0; i < n.numel(); ++i) px.grad[i] += n.grad[i];
    }
    if (pv.requires_grad) {
      for (int r = 0; r < B; ++r) {
        const Real* g = n.grad.data() + static_cast<std::size_t>(r) * D;
        for (int c = 0; c < D; ++c) pv.grad[static_cast<std::size_t>(c)] += g[c];
      }
    }
  });
  const Real* xs = x.data();
  const Real* vs = v.data();
  Real* z = out.data();
  for (int r = 0; r < B; ++r) {
    for (int c = 0; c < D; ++c) {
      z[static_cast<std::size_t>(r) * D + c] =
          xs[static_cast<std::size_t>(r) * D + c] + vs[c];
    }
  }
  return out;
}

Tensor mul_colvec(const Tensor& x, const Tensor& m) {
  require(m.cols() == 1 && m.rows() == x.rows(),
          "mul_colvec: m must be [" + std::to_string(x.rows()) + ",1], got " +
              shape_str(m));
  const int B = x.rows(), D = x.cols();
  Tensor out = make_op(B, D, {x, m}, [B, D](Node& n) {
    Node& px = *n.parents[0];
    Node& pm = *n.parents[1];
    for (int r = 0; r < B; ++r) {
      const std::size_t off = static_cast<std::size_t>(r) * D;
      const Real mr = pm.value[static_cast<std::size_t>(r)];
      for (int c = 0; c < D; ++c) {
        if (px.requires_grad) px.grad[off + c] += mr * n.grad[off + c];
        if (pm.requires_grad) {
          pm.grad[static_cast<std::size_t>(r)] +=
              px.value[off + c] * n.grad[off + c];
        }
      }
    }
  });
  const Real* xs = x.data();
  const Real* ms = m.data();
  Real* z = out.data();
  for (int r = 0; r < B; ++r) {
    for (int c = 0; c < D; ++c) {
      z[static_cast<std::size_t>(r) * D + c] =
          xs[static_cast<std::size_t>(r) * D + c] * ms[r];
    }
  }
  return out;
}

Tensor relu(const Tensor& a) {
  return unary(a, [](Real x) { return x > 0 ? x : 0.0; },
               [](Real x, Real) { return x > 0 ? 1.0 : 0.0; });
}

Tensor exp(const Tensor& a) {
  return unary(a, [](Real x) { return std::exp(x); },
               [](Real, Real y) { return y; });
}

Tensor log(const Tensor& a) {
  const Real* x = a.data();
  for (std::size_t i = 0; i < a.numel(); ++i) {
    if (!(x[i] > 0)) throw NumericError("log: non-positive input");
  }
  return unary(a, [](Real v) { return std::log(v); },
               [](Real v, Real) { return 1.0 / v; });
}

Tensor square(const Tensor& a) {
  return unary(a, [](Real x) { return x * x; },
               [](Real x, Real) { return 2.0 * x; });
}

Tensor softplus(const Tensor& a) {
  return unary(a,
               [](Real x) {
                 return x > 0 ? x + std::log1p(std::exp(-x))
                              : std::log1p(std::exp(x));
               },
               [](Real x, Real) { return 1.0 / (1.0 + std::exp(-x)); });
}

Tensor sum(const Tensor& a) {
  Tensor out = make_op(1, 1, {a}, [](Node& n) {
    Node& p = *n.parents[0];
    const Real g = n.grad[0];
    for (std::size_t i = 0; i < p.numel(); ++i) p.grad[i] += g;
  });
  Real acc = 0;
  const Real* x = a.data();
  for (std::size_t i = 0; i < a.numel(); ++i) acc += x[i];
  out.data()[0] = acc;
  return out;
}

Tensor mean(const Tensor& a) {
  require(a.numel() > 0, "mean: empty tensor");
  const Real inv = 1.0 / static_cast<Real>(a.numel());
  return scale(sum(a), inv);
}

Tensor sum_cols(const Tensor& a) {
  const int B = a.rows(), D = a.cols();
  Tensor out = make_op(B, 1, {a}, [B, D](Node& n) {
    Node& p = *n.parents[0];
    for (int r = 0; r < B; ++r) {
      const Real g = n.grad[static_cast<std::size_t>(r)];
      Real* pg = p.grad.data() + static_cast<std::size_t>(r) * D;
      for (int c = 0; c < D; ++c) pg[c] += g;
    }
  });
  const Real* x = a.data();
  Real* z = out.data();
  for (int r = 0; r < B; ++r) {
    Real acc = 0;
    const Real* row = x + static_cast<std::size_t>(r) * D;
    for (int c = 0; c < D; ++c) acc += row[c];
    z[r] = acc;
  }
  return out;
}

Tensor min_elem(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "min_elem");
  Tensor out = make_op(a.rows(), a.cols(), {a, b}, [](Node& n) {
    Node& pa = *n.parents[0];
    Node& pb = *n.parents[1];
    for (std::size_t i = 0; i < n.numel(); ++i) {
      if (pa.value[i] <= pb.value[i]) {
        if (pa.requires_grad) pa.grad[i] += n.grad[i];
      } else if (pb.requires_grad) {
        pb.grad[i] += n.grad[i];
      }
    }
  });
  const Real* x = a.data();
  const Real* y = b.data();
  Real* z = out.data();
  for (std::size_t i = 0; i < out.numel(); ++i) z[i] = std::min(x[i], y[i]);
  return out;
}

Tensor clamp(const Tensor& a, Real lo, Real hi) {
  require(lo <= hi, "clamp: lo > hi");
  return unary(a,
               [lo, hi](Real x) { return x < lo ? lo : (x > hi ? hi : x); },
               [lo, hi](Real x, Real) {
                 return (x >= lo && x <= hi) ? 1.0 : 0.0;
               });
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                  Real eps) {
  const int B = x.rows(), D = x.cols();
  require(D > 0, "layer_norm: empty feature axis");
  require(gain.rows() == 1 && gain.cols() == D, "layer_norm: bad gain shape");
  require(bias.rows() == 1 && bias.cols() == D, "layer_norm: bad bias shape");

  std::vector<Real> inv_std(static_cast<std::size_t>(B));
  std::vector<Real> xhat(static_cast<std::size_t>(B) * D);
  const Real* xs = x.data();
  for (int r = 0; r < B; ++r) {
    const Real* row = xs + static_cast<std::size_t>(r) * D;
    Real mu = 0;
    for (int c = 0; c < D; ++c) mu += row[c];
    mu /= D;
    Real var = 0;
    for (int c = 0; c < D; ++c) {
      const Real d = row[c] - mu;
      var += d * d;
    }
    var /= D;
    const Real is = 1.0 / std::sqrt(var + eps);
    inv_std[static_cast<std::size_t>(r)] = is;
    Real* xh = xhat.data() + static_cast<std::size_t>(r) * D;
    for (int c = 0; c < D; ++c) xh[c] = (row[c] - mu) * is;
  }

  Tensor out = make_op(
      B, D, {x, gain, bias},
      [B, D, inv_std, xhat](Node& n) {
        Node& px = *n.parents[0];
        Node& pg = *n.parents[1];
        Node& pb = *n.parents[2];
        for (int r = 0; r < B; ++r) {
          const std::size_t off = static_cast<std::size_t>(r) * D;
          const Real* dy = n.grad.data() + off;
          const Real* xh = xhat.data() + off;
          if (pg.requires_grad || pb.requires_grad) {
            for (int c = 0; c < D; ++c) {
              if (pg.requires_grad) pg.grad[c] += dy[c] * xh[c];
              if (pb.requires_grad) pb.grad[c] += dy[c];
            }
          }
          if (px.requires_grad) {
            // dxhat = g*dy ; dx = (dxhat - mean(dxhat) - xhat*mean(dxhat*xhat)) * inv_std
            Real m1 = 0, m2 = 0;
            for (int c = 0; c < D; ++c) {
              const Real dxh = pg.value[c] * dy[c];
              m1 += dxh;
              m2 += dxh * xh[c];
            }
            m1 /= D;
            m2 /= D;
            const Real is = inv_std[static_cast<std::size_t>(r)];
            Real* dx = px.grad.data() + off;
            for (int c = 0; c < D; ++c) {
              const Real dxh = pg.value[c] * dy[c];
              dx[c] += (dxh - m1 - xh[c] * m2) * is;
            }
          }
        }
      });
  const Real* gs = gain.data();
  const Real* bs = bias.data();
  Real* z = out.data();
  for (int r = 0; r < B; ++r) {
    const std::size_t off = static_cast<std::size_t>(r) * D;
    for (int c = 0; c < D; ++c) z[off + c] = gs[c] * xhat[off + c] + bs[c];
  }
  return out;
}

Tensor log_softmax(const Tensor& x) {
  const int B = x.rows(), A = x.cols();
  require(A > 0, "log_softmax: empty rows");
  const Real* xs = x.data();
  for (std::size_t i = 0; i < x.numel(); ++i) {
    if (!std::isfinite(xs[i])) {
      throw NumericError("log_softmax: non-finite logit");
    }
  }
  Tensor out = make_op(B, A, {x}, [B, A](Node& n) {
    Node& p = *n.parents[0];
    for (int r = 0; r < B; ++r) {
      const std::size_t off = static_cast<std::size_t>(r) * A;
      const Real* dy = n.grad.data() + off;
      const Real* y = n.value.data() + off;
      Real gsum = 0;
      for (int c = 0; c < A; ++c) gsum += dy[c];
      Real* dx = p.grad.data() + off;
      for (int c = 0; c < A; ++c) dx[c] += dy[c] - std::exp(y[c]) * gsum;
    }
  });
  Real* z = out.data();
  for (int r = 0; r < B; ++r) {
    const std::size_t off = static_cast<std::size_t>(r) * A;
    const Real* row = xs + off;
    Real mx = row[0];
    for (int c = 1; c < A; ++c) mx = std::max(mx, row[c]);
    Real lse = 0;
    for (int c = 0; c < A; ++c) lse += std::exp(row[c] - mx);
    lse = mx + std::log(lse);
    for (int c = 0; c < A; ++c) z[off + c] = row[c] - lse;
  }
  return out;
}

Tensor l2_normalize_rows(const Tensor& x, Real eps) {
  const int B = x.rows(), D = x.cols();
  std::vector<Real> inv_r(static_cast<std::size_t>(B));
  const Real* xs = x.data();
  for (int r = 0; r < B; ++r) {
    const Real* row = xs + static_cast<std::size_t>(r) * D;
    Real s = 0;
    for (int c = 0; c < D; ++c) s += row[c] * row[c];
    inv_r[static_cast<std::size_t>(r)] = 1.0 / std::sqrt(s + eps);
  }
  Tensor out = make_op(B, D, {x}, [B, D, inv_r](Node& n) {
    Node& p = *n.parents[0];
    for (int r = 0; r < B; ++r) {
      const std::size_t off = static_cast<std::size_t>(r) * D;
      const Real* dy = n.grad.data() + off;
      const Real* xv = p.value.data() + off;
      const Real ir = inv_r[static_cast<std::size_t>(r)];
      Real xdy = 0;
      for (int c = 0; c < D; ++c) xdy += xv[c] * dy[c];
      Real* dx = p.grad.data() + off;
      const Real ir3 = ir * ir * ir;
      for (int c = 0; c < D; ++c) dx[c] += dy[c] * ir - xv[c] * xdy * ir3;
    }
  });
  Real* z = out.data();
  for (int r = 0; r < B; ++r) {
    const std::size_t off = static_cast<std::size_t>(r) * D;
    const Real ir = inv_r[static_cast<std::size_t>(r)];
    for (int c = 0; c < D; ++c) z[off + c] = xs[off + c] * ir;
  }
  return out;
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
  require(a.rows() == b.rows(), "concat_cols: row mismatch " + shape_str(a) +
                                    " vs " + shape_str(b));
  const int B = a.rows(), Da = a.cols(), Db = b.cols();
  Tensor out = make_op(B, Da + Db, {a, b}, [B, Da, Db](Node& n) {
    Node& pa = *n.parents[0];
    Node& pb = *n.parents[1];
    for (int r = 0; r < B; ++r) {
      const Real* g = n.grad.data() + static_cast<std::size_t>(r) * (Da + Db);
      if (pa.requires_grad) {
        Real* ga = pa.grad.data() + static_cast<std::size_t>(r) * Da;
        for (int c = 0; c < Da; ++c) ga[c] += g[c];
      }
      if (pb.requires_grad) {
        Real* gb = pb.grad.data() + static_cast<std::size_t>(r) * Db;
        for (int c = 0; c < Db; ++c) gb[c] += g[Da + c];
      }
    }
  });
  const Real* xa = a.data();
  const Real* xb = b.data();
  Real* z = out.data();
  for (int r = 0; r < B; ++r) {
    Real* row = z + static_cast<std::size_t>(r) * (Da + Db);
    const Real* ra = xa + static_cast<std::size_t>(r) * Da;
    const Real* rb = xb + static_cast<std::size_t>(r) * Db;
    for (int c = 0; c < Da; ++c) row[c] = ra[c];
    for (int c = 0; c < Db; ++c) row[Da + c] = rb[c];
  }
  return out;
}

Tensor gather_rows(const Tensor& x, std::vector<int> idx) {
  const int D = x.cols();
  const int M = static_cast<int>(idx.size());
  for (int i : idx) {
    require(i >= 0 && i < x.rows(), "gather_rows: index out of range");
  }
  Tensor out = make_op(M, D, {x}, [D, M, idx](Node& n) {
    Node& p = *n.parents[0];
    for (int r = 0; r < M; ++r) {
      const Real* g = n.grad.data() + static_cast<std::size_t>(r) * D;
      Real* pg = p.grad.data() + static_cast<std::size_t>(idx[static_cast<std::size_t>(r)]) * D;
      for (int c = 0; c < D; ++c) pg[c] += g[c];
    }
  });
  const Real* xs = x.data();
  Real* z = out.data();
  for (int r = 0; r < M; ++r) {
    const Real* src = xs + static_cast<std::size_t>(idx[static_cast<std::size_t>(r)]) * D;
    Real* dst = z + static_cast<std::size_t>(r) * D;
    for (int c = 0; c < D; ++c) dst[c] = src[c];
  }
  return out;
}

Tensor take_per_row(const Tensor& x, std::vector<int> idx) {
  const int B = x.rows(), A = x.cols();
  require(static_cast<int>(idx.size()) == B,
          "take_per_row: need one index per row");
  for (int i : idx) {
    require(i >= 0 && i < A, "take_per_row: index out of range");
  }
  Tensor out = make_op(B, 1, {x}, [B, A, idx](Node& n) {
    Node& p = *n.parents[0];
    for (int r = 0; r < B; ++r) {
      p.grad[static_cast<std::size_t>(r) * A + idx[static_cast<std::size_t>(r)]] +=
          n.grad[static_cast<std::size_t>(r)];
    }
  });
  const Real* xs = x.data();
  Real* z = out.data();
  for (int r = 0; r < B; ++r) {
    z[r] = xs[static_cast<std::size_t>(r) * A + idx[static_cast<std::size_t>(r)]];
  }
  return out;
}

Tensor detach(const Tensor& a) {
  return Tensor::constant(a.rows(), a.cols(), a.values());
}

Tensor dot_rows(const Tensor& a, const Tensor& b) {
  return sum_cols(mul(a, b));
}

bool all_finite(const Tensor& a) {
  const Real* x = a.data();
  for (std::size_t i = 0; i < a.numel(); ++i) {
    if (!std::isfinite(x[i])) return false;
  }
  return true;
}

}  // namespace adrl::nd
