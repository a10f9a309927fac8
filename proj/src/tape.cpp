#include "explorer/tape.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

#include "explorer/kernels.hpp"

namespace explorer {

namespace {
constexpr double kLnEps = 1e-5;
constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)

double gelu_scalar(double x) {
  const double t = std::tanh(kGeluC * (x + 0.044715 * x * x * x));
  return 0.5 * x * (1.0 + t);
}

double gelu_grad_scalar(double x) {
  const double inner = kGeluC * (x + 0.044715 * x * x * x);
  const double t = std::tanh(inner);
  const double sech2 = 1.0 - t * t;
  return 0.5 * (1.0 + t) + 0.5 * x * sech2 * kGeluC * (1.0 + 3.0 * 0.044715 * x * x);
}
}  // namespace

Tape::Ref Tape::constant(Matrix value) { return push(std::move(value)); }

Tape::Ref Tape::param(Param& p) {
  const Ref r = push(p.value);
  nodes_[r].bound = &p;
  return r;
}

Tape::Ref Tape::matmul(Ref a, Ref b) {
  const Matrix& A = value(a);
  const Matrix& B = value(b);
  assert(A.cols() == B.rows());
  const int m = A.rows(), k = A.cols(), n = B.cols();
  Matrix C(m, n);
  const auto& kr = kernels::active();
  kr.gemm_nn(m, k, n, A.data(), B.data(), C.data());
  const Ref r = push(std::move(C));
  nodes_[r].back = [this, r, a, b, m, k, n] {
    const auto& krn = kernels::active();
    const Matrix& g = grad(r);
    krn.gemm_nt(m, n, k, g.data(), value(b).data(), grad_mut(a).data());
    krn.gemm_tn(k, m, n, value(a).data(), g.data(), grad_mut(b).data());
  };
  return r;
}

Tape::Ref Tape::matmul_nt(Ref a, Ref b) {
  const Matrix& A = value(a);
  const Matrix& B = value(b);
  assert(A.cols() == B.cols());
  const int m = A.rows(), k = A.cols(), n = B.rows();
  Matrix C(m, n);
  const auto& kr = kernels::active();
  kr.gemm_nt(m, k, n, A.data(), B.data(), C.data());
  const Ref r = push(std::move(C));
  nodes_[r].back = [this, r, a, b, m, k, n] {
    const auto& krn = kernels::active();
    const Matrix& g = grad(r);
    krn.gemm_nn(m, n, k, g.data(), value(b).data(), grad_mut(a).data());
    krn.gemm_tn(n, m, k, g.data(), value(a).data(), grad_mut(b).data());
  };
  return r;
}

Tape::Ref Tape::add(Ref a, Ref b) {
  const Matrix& A = value(a);
  const Matrix& B = value(b);
  assert(A.same_shape(B));
  Matrix C = A;
  kernels::active().add(static_cast<int>(C.size()), B.data(), C.data());
  const Ref r = push(std::move(C));
  nodes_[r].back = [this, r, a, b] {
    const Matrix& g = grad(r);
    const int n = static_cast<int>(g.size());
    kernels::active().add(n, g.data(), grad_mut(a).data());
    kernels::active().add(n, g.data(), grad_mut(b).data());
  };
  return r;
}

Tape::Ref Tape::sub(Ref a, Ref b) {
  const Matrix& A = value(a);
  const Matrix& B = value(b);
  assert(A.same_shape(B));
  Matrix C = A;
  kernels::active().axpy(static_cast<int>(C.size()), -1.0, B.data(), C.data());
  const Ref r = push(std::move(C));
  nodes_[r].back = [this, r, a, b] {
    const Matrix& g = grad(r);
    const int n = static_cast<int>(g.size());
    kernels::active().add(n, g.data(), grad_mut(a).data());
    kernels::active().axpy(n, -1.0, g.data(), grad_mut(b).data());
  };
  return r;
}

Tape::Ref Tape::add_row(Ref a, Ref bias) {
  const Matrix& A = value(a);
  const Matrix& B = value(bias);
  assert(B.rows() == 1 && B.cols() == A.cols());
  Matrix C = A;
  for (int i = 0; i < C.rows(); ++i) {
    kernels::active().add(C.cols(), B.data(), C.row(i));
  }
  const Ref r = push(std::move(C));
  nodes_[r].back = [this, r, a, bias] {
    const Matrix& g = grad(r);
    kernels::active().add(static_cast<int>(g.size()), g.data(), grad_mut(a).data());
    Matrix& gb = grad_mut(bias);
    for (int i = 0; i < g.rows(); ++i) {
      kernels::active().add(g.cols(), g.row(i), gb.data());
    }
  };
  return r;
}

Tape::Ref Tape::hadamard(Ref a, Ref b) {
  const Matrix& A = value(a);
  const Matrix& B = value(b);
  assert(A.same_shape(B));
  Matrix C(A.rows(), A.cols());
  for (size_t i = 0; i < C.size(); ++i) C.data()[i] = A.data()[i] * B.data()[i];
  const Ref r = push(std::move(C));
  nodes_[r].back = [this, r, a, b] {
    const Matrix& g = grad(r);
    const Matrix& A_ = value(a);
    const Matrix& B_ = value(b);
    Matrix& ga = grad_mut(a);
    Matrix& gb = grad_mut(b);
    for (size_t i = 0; i < g.size(); ++i) {
      ga.data()[i] += g.data()[i] * B_.data()[i];
      gb.data()[i] += g.data()[i] * A_.data()[i];
    }
  };
  return r;
}

Tape::Ref Tape::scale(Ref a, double s) {
  Matrix C = value(a);
  kernels::active().scale(static_cast<int>(C.size()), s, C.data());
  const Ref r = push(std::move(C));
  nodes_[r].back = [this, r, a, s] {
    const Matrix& g = grad(r);
    kernels::active().axpy(static_cast<int>(g.size()), s, g.data(), grad_mut(a).data());
  };
  return r;
}

Tape::Ref Tape::square(Ref a) {
  const Matrix& A = value(a);
  Matrix C(A.rows(), A.cols());
  for (size_t i = 0; i < C.size(); ++i) C.data()[i] = A.data()[i] * A.data()[i];
  const Ref r = push(std::move(C));
  nodes_[r].back = [this, r, a] {
    const Matrix& g = grad(r);
    const Matrix& A_ = value(a);
    Matrix& ga = grad_mut(a);
    for (size_t i = 0; i < g.size(); ++i) ga.data()[i] += 2.0 * A_.data()[i] * g.data()[i];
  };
  return r;
}

Tape::Ref Tape::tanh_op(Ref a) {
  const Matrix& A = value(a);
  Matrix C(A.rows(), A.cols());
  for (size_t i = 0; i < C.size(); ++i) C.data()[i] = std::tanh(A.data()[i]);
  const Ref r = push(std::move(C));
  nodes_[r].back = [this, r, a] {
    const Matrix& g = grad(r);
    const Matrix& y = value(r);
    Matrix& ga = grad_mut(a);
    for (size_t i = 0; i < g.size(); ++i) {
      ga.data()[i] += g.data()[i] * (1.0 - y.data()[i] * y.data()[i]);
    }
  };
  return r;
}

Tape::Ref Tape::gelu(Ref a) {
  const Matrix& A = value(a);
  Matrix C(A.rows(), A.cols());
  for (size_t i = 0; i < C.size(); ++i) C.data()[i] = gelu_scalar(A.data()[i]);
  const Ref r = push(std::move(C));
  nodes_[r].back = [this, r, a] {
    const Matrix& g = grad(r);
    const Matrix& A_ = value(a);
    Matrix& ga = grad_mut(a);
    for (size_t i = 0; i < g.size(); ++i) {
      ga.data()[i] += g.data()[i] * gelu_grad_scalar(A_.data()[i]);
    }
  };
  return r;
}

Tape::Ref Tape::layer_norm(Ref x, Ref gamma, Ref beta) {
  const Matrix& X = value(x);
  const Matrix& G = value(gamma);
  const Matrix& B = value(beta);
  assert(G.rows() == 1 && G.cols() == X.cols());
  assert(B.rows() == 1 && B.cols() == X.cols());
  const int rows = X.rows(), cols = X.cols();

  auto xhat = std::make_shared<Matrix>(rows, cols);
  auto inv_std = std::make_shared<std::vector<double>>(rows);
  Matrix Y(rows, cols);
  for (int i = 0; i < rows; ++i) {
    const double* xr = X.row(i);
    const double mean = kernels::active().sum(cols, xr) / cols;
    double var = 0.0;
    for (int c = 0; c < cols; ++c) {
      const double d = xr[c] - mean;
      var += d * d;
    }
    var /= cols;
    const double is = 1.0 / std::sqrt(var + kLnEps);
    (*inv_std)[i] = is;
    for (int c = 0; c < cols; ++c) {
      const double xh = (xr[c] - mean) * is;
      (*xhat)(i, c) = xh;
      Y(i, c) = G.data()[c] * xh + B.data()[c];
    }
  }
  const Ref r = push(std::move(Y));
  nodes_[r].back = [this, r, x, gamma, beta, xhat, inv_std, rows, cols] {
    const Matrix& g = grad(r);
    const Matrix& G_ = value(gamma);
    Matrix& gx = grad_mut(x);
    Matrix& gg = grad_mut(gamma);
    Matrix& gb = grad_mut(beta);
    for (int i = 0; i < rows; ++i) {
      const double* gr = g.row(i);
      const double* xh = xhat->row(i);
      double sum_gxh = 0.0, sum_gxh_xh = 0.0;
      for (int c = 0; c < cols; ++c) {
        const double gxh = gr[c] * G_.data()[c];
        sum_gxh += gxh;
        sum_gxh_xh += gxh * xh[c];
        gg.data()[c] += gr[c] * xh[c];
        gb.data()[c] += gr[c];
      }
      const double mean_gxh = sum_gxh / cols;
      const double mean_gxh_xh = sum_gxh_xh / cols;
      const double is = (*inv_std)[i];
      double* gxr = gx.row(i);
      for (int c = 0; c < cols; ++c) {
        const double gxh = gr[c] * G_.data()[c];
        gxr[c] += is * (gxh - mean_gxh - xh[c] * mean_gxh_xh);
      }
    }
  };
  return r;
}

Tape::Ref Tape::gather_rows(Ref x, std::vector<int> rows) {
  const Matrix& X = value(x);
  Matrix Y(static_cast<int>(rows.size()), X.cols());
  for (size_t i = 0; i < rows.size(); ++i) {
    assert(rows[i] >= 0 && rows[i] < X.rows());
    std::copy(X.row(rows[i]), X.row(rows[i]) + X.cols(), Y.row(static_cast<int>(i)));
  }
  const Ref r = push(std::move(Y));
  nodes_[r].back = [this, r, x, rows = std::move(rows)] {
    const Matrix& g = grad(r);
    Matrix& gx = grad_mut(x);
    for (size_t i = 0; i < rows.size(); ++i) {
      kernels::active().add(g.cols(), g.row(static_cast<int>(i)), gx.row(rows[i]));
    }
  };
  return r;
}

Tape::Ref Tape::repeat_row(Ref x, int n) {
  const Matrix& X = value(x);
  assert(X.rows() == 1);
  Matrix Y(n, X.cols());
  for (int i = 0; i < n; ++i) std::copy(X.data(), X.data() + X.cols(), Y.row(i));
  const Ref r = push(std::move(Y));
  nodes_[r].back = [this, r, x, n] {
    const Matrix& g = grad(r);
    Matrix& gx = grad_mut(x);
    for (int i = 0; i < n; ++i) kernels::active().add(g.cols(), g.row(i), gx.data());
  };
  return r;
}

Tape::Ref Tape::concat_cols(Ref a, Ref b) {
  const Matrix& A = value(a);
  const Matrix& B = value(b);
  assert(A.rows() == B.rows());
  Matrix C(A.rows(), A.cols() + B.cols());
  for (int i = 0; i < A.rows(); ++i) {
    std::copy(A.row(i), A.row(i) + A.cols(), C.row(i));
    std::copy(B.row(i), B.row(i) + B.cols(), C.row(i) + A.cols());
  }
  const Ref r = push(std::move(C));
  nodes_[r].back = [this, r, a, b] {
    const Matrix& g = grad(r);
    Matrix& ga = grad_mut(a);
    Matrix& gb = grad_mut(b);
    const int ac = ga.cols();
    for (int i = 0; i < g.rows(); ++i) {
      kernels::active().add(ac, g.row(i), ga.row(i));
      kernels::active().add(gb.cols(), g.row(i) + ac, gb.row(i));
    }
  };
  return r;
}

Tape::Ref Tape::softmax_row(Ref x) {
  const Matrix& X = value(x);
  assert(X.rows() == 1);
  const int n = X.cols();
  Matrix P(1, n);
  double mx = X.data()[0];
  for (int i = 1; i < n; ++i) mx = std::max(mx, X.data()[i]);
  double z = 0.0;
  for (int i = 0; i < n; ++i) {
    P.data()[i] = std::exp(X.data()[i] - mx);
    z += P.data()[i];
  }
  kernels::active().scale(n, 1.0 / z, P.data());
  const Ref r = push(std::move(P));
  nodes_[r].back = [this, r, x, n] {
    const Matrix& g = grad(r);
    const Matrix& p = value(r);
    const double gp = kernels::active().dot(n, g.data(), p.data());
    Matrix& gx = grad_mut(x);
    for (int i = 0; i < n; ++i) gx.data()[i] += p.data()[i] * (g.data()[i] - gp);
  };
  return r;
}

Tape::Ref Tape::log_softmax_row(Ref x) {
  const Matrix& X = value(x);
  assert(X.rows() == 1);
  const int n = X.cols();
  Matrix L(1, n);
  double mx = X.data()[0];
  for (int i = 1; i < n; ++i) mx = std::max(mx, X.data()[i]);
  double z = 0.0;
  for (int i = 0; i < n; ++i) z += std::exp(X.data()[i] - mx);
  const double lz = mx + std::log(z);
  for (int i = 0; i < n; ++i) L.data()[i] = X.data()[i] - lz;
  const Ref r = push(std::move(L));
  nodes_[r].back = [this, r, x, n] {
    const Matrix& g = grad(r);
    const Matrix& lp = value(r);
    const double gs = kernels::active().sum(n, g.data());
    Matrix& gx = grad_mut(x);
    for (int i = 0; i < n; ++i) gx.data()[i] += g.data()[i] - std::exp(lp.data()[i]) * gs;
  };
  return r;
}

Tape::Ref Tape::sum(Ref x) {
  const Matrix& X = value(x);
  Matrix S(1, 1);
  S.data()[0] = kernels::active().sum(static_cast<int>(X.size()), X.data());
  const Ref r = push(std::move(S));
  nodes_[r].back = [this, r, x] {
    const double g = grad(r).data()[0];
    Matrix& gx = grad_mut(x);
    for (size_t i = 0; i < gx.size(); ++i) gx.data()[i] += g;
  };
  return r;
}

Tape::Ref Tape::masked_attention(Ref q, Ref k, Ref v,
                                 const std::vector<std::vector<int>>& allowed, int heads,
                                 std::vector<Matrix>* weights_out) {
  const Matrix& Q = value(q);
  const Matrix& K = value(k);
  const Matrix& V = value(v);
  const int n_q = Q.rows(), n_kv = K.rows(), d = Q.cols();
  assert(K.cols() == d && V.cols() == d && V.rows() == n_kv);
  assert(d % heads == 0);
  assert(static_cast<int>(allowed.size()) == n_q);
  const int dh = d / heads;
  const double att_scale = 1.0 / std::sqrt(static_cast<double>(dh));

  // weights[h][i] aligned with allowed[i]
  auto weights = std::make_shared<std::vector<std::vector<std::vector<double>>>>(
      heads, std::vector<std::vector<double>>(n_q));

  Matrix out(n_q, d);
  const auto& kr = kernels::active();
  std::vector<double> scores;
  for (int i = 0; i < n_q; ++i) {
    const auto& keys = allowed[i];
    if (keys.empty()) {
      throw std::runtime_error("masked_attention: query row " + std::to_string(i) +
                               " has every key masked");
    }
    for (int h = 0; h < heads; ++h) {
      const int off = h * dh;
      const double* q_row = Q.row(i) + off;
      scores.resize(keys.size());
      double mx = -std::numeric_limits<double>::infinity();
      for (size_t t = 0; t < keys.size(); ++t) {
        assert(keys[t] >= 0 && keys[t] < n_kv);
        scores[t] = att_scale * kr.dot(dh, q_row, K.row(keys[t]) + off);
        mx = std::max(mx, scores[t]);
      }
      double z = 0.0;
      for (double& s : scores) {
        s = std::exp(s - mx);
        z += s;
      }
      auto& w = (*weights)[h][i];
      w.resize(keys.size());
      double* o_row = out.row(i) + off;
      for (size_t t = 0; t < keys.size(); ++t) {
        w[t] = scores[t] / z;
        kr.axpy(dh, w[t], V.row(keys[t]) + off, o_row);
      }
    }
  }

  if (weights_out) {
    weights_out->assign(heads, Matrix(n_q, n_kv));
    for (int h = 0; h < heads; ++h) {
      for (int i = 0; i < n_q; ++i) {
        for (size_t t = 0; t < allowed[i].size(); ++t) {
          (*weights_out)[h](i, allowed[i][t]) = (*weights)[h][i][t];
        }
      }
    }
  }

  const Ref r = push(std::move(out));
  nodes_[r].back = [this, r, q, k, v, allowed, heads, dh, att_scale, weights] {
    const auto& krn = kernels::active();
    const Matrix& g = grad(r);
    const Matrix& Q_ = value(q);
    const Matrix& K_ = value(k);
    const Matrix& V_ = value(v);
    Matrix& gQ = grad_mut(q);
    Matrix& gK = grad_mut(k);
    Matrix& gV = grad_mut(v);
    std::vector<double> gw;
    for (int i = 0; i < static_cast<int>(allowed.size()); ++i) {
      const auto& keys = allowed[i];
      for (int h = 0; h < heads; ++h) {
        const int off = h * dh;
        const double* g_row = g.row(i) + off;
        const auto& w = (*weights)[h][i];
        gw.resize(keys.size());
        double s = 0.0;
        for (size_t t = 0; t < keys.size(); ++t) {
          gw[t] = krn.dot(dh, g_row, V_.row(keys[t]) + off);
          s += w[t] * gw[t];
          krn.axpy(dh, w[t], g_row, gV.row(keys[t]) + off);
        }
        for (size_t t = 0; t < keys.size(); ++t) {
          const double gu = att_scale * w[t] * (gw[t] - s);
          krn.axpy(dh, gu, K_.row(keys[t]) + off, gQ.row(i) + off);
          krn.axpy(dh, gu, Q_.row(i) + off, gK.row(keys[t]) + off);
        }
      }
    }
  };
  return r;
}

void Tape::backward(Ref loss, double seed) {
  assert(loss >= 0 && loss < size());
  assert(value(loss).rows() == 1 && value(loss).cols() == 1);
  for (auto& node : nodes_) {
    node.grad = Matrix(node.value.rows(), node.value.cols());
  }
  nodes_[loss].grad.data()[0] = seed;
  for (int i = static_cast<int>(nodes_.size()) - 1; i >= 0; --i) {
    if (nodes_[i].back) nodes_[i].back();
  }
}

void Tape::visit_param_grads(const std::function<void(Param&, const Matrix&)>& fn) {
  for (auto& node : nodes_) {
    if (!node.bound) continue;
    if (!node.grad.all_finite()) {
      throw std::runtime_error("non-finite gradient for parameter " + node.bound->name);
    }
    fn(*node.bound, node.grad);
  }
}

void Tape::accumulate_into_params() {
  visit_param_grads([](Param& p, const Matrix& g) {
    kernels::active().add(static_cast<int>(g.size()), g.data(), p.grad.data());
  });
}

}  // namespace explorer
