#include "dsgrl/ops.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "dsgrl/csr.hpp"
#include "dsgrl/error.hpp"

namespace dsgrl {

namespace {

Tensor finish(Matrix value, Tape* tape, bool rec) {
  Tensor out(std::move(value));
  if (rec) out.mark_interior(tape->id());
  return out;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.value().same_shape(b.value()))
    throw ShapeError(std::string(op) + ": shape mismatch " +
                     std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                     " vs " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()));
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  Matrix c = matmul(a.value(), b.value());
  Tape* tape = Tape::active();
  bool ga = tape && connected(a, *tape);
  bool gb = tape && connected(b, *tape);
  Tensor out = finish(std::move(c), tape, ga || gb);
  if (ga || gb) {
    tape->record([a, b, out, ga, gb]() mutable {
      if (ga) add_matmul_nt(a.grad(), out.grad(), b.value());
      if (gb) add_matmul_tn(b.grad(), a.value(), out.grad());
    });
  }
  return out;
}

Tensor spmm(std::shared_ptr<const Csr> a, const Tensor& x) {
  if (!a) throw LifecycleError("spmm: empty adjacency");
  Matrix y = multiply(*a, x.value());
  Tape* tape = Tape::active();
  bool gx = tape && connected(x, *tape);
  Tensor out = finish(std::move(y), tape, gx);
  if (gx) {
    tape->record([a, x, out]() mutable {
      Matrix dx = multiply_transposed(*a, out.grad());
      axpy(x.grad(), 1.0, dx);
    });
  }
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  Matrix c = a.value();
  axpy(c, 1.0, b.value());
  Tape* tape = Tape::active();
  bool ga = tape && connected(a, *tape);
  bool gb = tape && connected(b, *tape);
  Tensor out = finish(std::move(c), tape, ga || gb);
  if (ga || gb) {
    tape->record([a, b, out, ga, gb]() mutable {
      if (ga) axpy(a.grad(), 1.0, out.grad());
      if (gb) axpy(b.grad(), 1.0, out.grad());
    });
  }
  return out;
}

Tensor subtract(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "subtract");
  Matrix c = a.value();
  axpy(c, -1.0, b.value());
  Tape* tape = Tape::active();
  bool ga = tape && connected(a, *tape);
  bool gb = tape && connected(b, *tape);
  Tensor out = finish(std::move(c), tape, ga || gb);
  if (ga || gb) {
    tape->record([a, b, out, ga, gb]() mutable {
      if (ga) axpy(a.grad(), 1.0, out.grad());
      if (gb) axpy(b.grad(), -1.0, out.grad());
    });
  }
  return out;
}

Tensor scale(const Tensor& a, double s) {
  Matrix c = a.value();
  for (index_t i = 0; i < c.size(); ++i) c.data()[i] *= s;
  Tape* tape = Tape::active();
  bool ga = tape && connected(a, *tape);
  Tensor out = finish(std::move(c), tape, ga);
  if (ga) {
    tape->record([a, out, s]() mutable { axpy(a.grad(), s, out.grad()); });
  }
  return out;
}

Tensor add_scalar(const Tensor& a, double s) {
  Matrix c = a.value();
  for (index_t i = 0; i < c.size(); ++i) c.data()[i] += s;
  Tape* tape = Tape::active();
  bool ga = tape && connected(a, *tape);
  Tensor out = finish(std::move(c), tape, ga);
  if (ga) {
    tape->record([a, out]() mutable { axpy(a.grad(), 1.0, out.grad()); });
  }
  return out;
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "hadamard");
  Matrix c = a.value();
  const double* bd = b.value().data();
  for (index_t i = 0; i < c.size(); ++i) c.data()[i] *= bd[i];
  Tape* tape = Tape::active();
  bool ga = tape && connected(a, *tape);
  bool gb = tape && connected(b, *tape);
  Tensor out = finish(std::move(c), tape, ga || gb);
  if (ga || gb) {
    tape->record([a, b, out, ga, gb]() mutable {
      const Matrix& g = out.grad();
      if (ga) {
        double* ad = a.grad().data();
        const double* bd2 = b.value().data();
        for (index_t i = 0; i < g.size(); ++i) ad[i] += g.data()[i] * bd2[i];
      }
      if (gb) {
        double* bd2 = b.grad().data();
        const double* ad = a.value().data();
        for (index_t i = 0; i < g.size(); ++i) bd2[i] += g.data()[i] * ad[i];
      }
    });
  }
  return out;
}

Tensor mask(const Tensor& a, const Matrix& m) {
  if (!a.value().same_shape(m)) throw ShapeError("mask: shape mismatch");
  Matrix c = a.value();
  const double* md = m.data();
  for (index_t i = 0; i < c.size(); ++i) c.data()[i] *= md[i];
  Tape* tape = Tape::active();
  bool ga = tape && connected(a, *tape);
  Tensor out = finish(std::move(c), tape, ga);
  if (ga) {
    tape->record([a, out, m]() mutable {
      double* ad = a.grad().data();
      const Matrix& g = out.grad();
      for (index_t i = 0; i < g.size(); ++i) ad[i] += g.data()[i] * m.data()[i];
    });
  }
  return out;
}

Tensor transpose(const Tensor& a) {
  Matrix c = transposed(a.value());
  Tape* tape = Tape::active();
  bool ga = tape && connected(a, *tape);
  Tensor out = finish(std::move(c), tape, ga);
  if (ga) {
    tape->record([a, out]() mutable {
      Matrix gt = transposed(out.grad());
      axpy(a.grad(), 1.0, gt);
    });
  }
  return out;
}

Tensor relu(const Tensor& a) {
  Matrix c = a.value();
  for (index_t i = 0; i < c.size(); ++i)
    if (c.data()[i] < 0.0) c.data()[i] = 0.0;
  Tape* tape = Tape::active();
  bool ga = tape && connected(a, *tape);
  Tensor out = finish(std::move(c), tape, ga);
  if (ga) {
    tape->record([a, out]() mutable {
      double* ad = a.grad().data();
      const double* xd = a.value().data();
      const Matrix& g = out.grad();
      for (index_t i = 0; i < g.size(); ++i)
        if (xd[i] > 0.0) ad[i] += g.data()[i];
    });
  }
  return out;
}

Tensor max_with(const Tensor& a, double c) {
  Matrix y = a.value();
  for (index_t i = 0; i < y.size(); ++i)
    if (y.data()[i] < c) y.data()[i] = c;
  Tape* tape = Tape::active();
  bool ga = tape && connected(a, *tape);
  Tensor out = finish(std::move(y), tape, ga);
  if (ga) {
    tape->record([a, out, c]() mutable {
      double* ad = a.grad().data();
      const double* xd = a.value().data();
      const Matrix& g = out.grad();
      for (index_t i = 0; i < g.size(); ++i)
        if (xd[i] > c) ad[i] += g.data()[i];
    });
  }
  return out;
}

Tensor sqrt(const Tensor& a) {
  Matrix y = a.value();
  for (index_t i = 0; i < y.size(); ++i) {
    if (y.data()[i] < 0.0)
      throw NumericError("sqrt of negative value");
    y.data()[i] = std::sqrt(y.data()[i]);
  }
  Tape* tape = Tape::active();
  bool ga = tape && connected(a, *tape);
  Tensor out = finish(std::move(y), tape, ga);
  if (ga) {
    tape->record([a, out]() mutable {
      double* ad = a.grad().data();
      const double* yd = out.value().data();
      const Matrix& g = out.grad();
      for (index_t i = 0; i < g.size(); ++i)
        if (yd[i] > 0.0) ad[i] += g.data()[i] * 0.5 / yd[i];
    });
  }
  return out;
}

Tensor square(const Tensor& a) {
  Matrix y = a.value();
  for (index_t i = 0; i < y.size(); ++i) y.data()[i] *= y.data()[i];
  Tape* tape = Tape::active();
  bool ga = tape && connected(a, *tape);
  Tensor out = finish(std::move(y), tape, ga);
  if (ga) {
    tape->record([a, out]() mutable {
      double* ad = a.grad().data();
      const double* xd = a.value().data();
      const Matrix& g = out.grad();
      for (index_t i = 0; i < g.size(); ++i)
        ad[i] += g.data()[i] * 2.0 * xd[i];
    });
  }
  return out;
}

Tensor reciprocal(const Tensor& a) {
  Matrix y = a.value();
  for (index_t i = 0; i < y.size(); ++i) {
    if (y.data()[i] == 0.0) throw NumericError("reciprocal of zero");
    y.data()[i] = 1.0 / y.data()[i];
  }
  Tape* tape = Tape::active();
  bool ga = tape && connected(a, *tape);
  Tensor out = finish(std::move(y), tape, ga);
  if (ga) {
    tape->record([a, out]() mutable {
      double* ad = a.grad().data();
      const double* yd = out.value().data();
      const Matrix& g = out.grad();
      for (index_t i = 0; i < g.size(); ++i)
        ad[i] -= g.data()[i] * yd[i] * yd[i];
    });
  }
  return out;
}

Tensor row_sum(const Tensor& a) {
  const Matrix& x = a.value();
  Matrix y(x.rows(), 1);
  for (index_t i = 0; i < x.rows(); ++i) {
    double s = 0.0;
    for (index_t j = 0; j < x.cols(); ++j) s += x(i, j);
    y(i, 0) = s;
  }
  Tape* tape = Tape::active();
  bool ga = tape && connected(a, *tape);
  Tensor out = finish(std::move(y), tape, ga);
  if (ga) {
    tape->record([a, out]() mutable {
      Matrix& ag = a.grad();
      const Matrix& g = out.grad();
      for (index_t i = 0; i < ag.rows(); ++i)
        for (index_t j = 0; j < ag.cols(); ++j) ag(i, j) += g(i, 0);
    });
  }
  return out;
}

Tensor sum_all(const Tensor& a) {
  const Matrix& x = a.value();
  double s = 0.0;
  for (index_t i = 0; i < x.size(); ++i) s += x.data()[i];
  Matrix y(1, 1);
  y(0, 0) = s;
  Tape* tape = Tape::active();
  bool ga = tape && connected(a, *tape);
  Tensor out = finish(std::move(y), tape, ga);
  if (ga) {
    tape->record([a, out]() mutable {
      double g = out.grad()(0, 0);
      Matrix& ag = a.grad();
      for (index_t i = 0; i < ag.size(); ++i) ag.data()[i] += g;
    });
  }
  return out;
}

Tensor mean_center_columns(const Tensor& a) {
  const Matrix& x = a.value();
  if (x.rows() == 0) throw DegenerateError("mean_center_columns: empty input");
  Matrix y = x;
  const index_t n = x.rows(), d = x.cols();
  std::vector<double> mu(static_cast<std::size_t>(d), 0.0);
  for (index_t i = 0; i < n; ++i)
    for (index_t j = 0; j < d; ++j) mu[j] += x(i, j);
  for (index_t j = 0; j < d; ++j) mu[j] /= static_cast<double>(n);
  for (index_t i = 0; i < n; ++i)
    for (index_t j = 0; j < d; ++j) y(i, j) -= mu[j];
  Tape* tape = Tape::active();
  bool ga = tape && connected(a, *tape);
  Tensor out = finish(std::move(y), tape, ga);
  if (ga) {
    tape->record([a, out, n, d]() mutable {
      const Matrix& g = out.grad();
      std::vector<double> gmu(static_cast<std::size_t>(d), 0.0);
      for (index_t i = 0; i < n; ++i)
        for (index_t j = 0; j < d; ++j) gmu[j] += g(i, j);
      for (index_t j = 0; j < d; ++j) gmu[j] /= static_cast<double>(n);
      Matrix& ag = a.grad();
      for (index_t i = 0; i < n; ++i)
        for (index_t j = 0; j < d; ++j) ag(i, j) += g(i, j) - gmu[j];
    });
  }
  return out;
}

Tensor row_l2_normalize(const Tensor& a) {
  const Matrix& x = a.value();
  Matrix y = x;
  std::vector<double> norms(static_cast<std::size_t>(x.rows()), 0.0);
  for (index_t i = 0; i < x.rows(); ++i) {
    double s = 0.0;
    for (index_t j = 0; j < x.cols(); ++j) s += x(i, j) * x(i, j);
    double n = std::sqrt(s);
    norms[static_cast<std::size_t>(i)] = n;
    if (n > 0.0)
      for (index_t j = 0; j < x.cols(); ++j) y(i, j) /= n;
  }
  Tape* tape = Tape::active();
  bool ga = tape && connected(a, *tape);
  Tensor out = finish(std::move(y), tape, ga);
  if (ga) {
    tape->record([a, out, norms]() mutable {
      Matrix& ag = a.grad();
      const Matrix& g = out.grad();
      const Matrix& yv = out.value();
      for (index_t i = 0; i < ag.rows(); ++i) {
        double n = norms[static_cast<std::size_t>(i)];
        if (n == 0.0) continue;
        double dot = 0.0;
        for (index_t j = 0; j < ag.cols(); ++j) dot += g(i, j) * yv(i, j);
        for (index_t j = 0; j < ag.cols(); ++j)
          ag(i, j) += (g(i, j) - dot * yv(i, j)) / n;
      }
    });
  }
  return out;
}

Tensor column_variance(const Tensor& a) {
  const Matrix& x = a.value();
  const index_t n = x.rows(), d = x.cols();
  if (n < 2)
    throw DegenerateError("column_variance needs at least two rows, got " +
                          std::to_string(n));
  std::vector<double> mu(static_cast<std::size_t>(d), 0.0);
  for (index_t i = 0; i < n; ++i)
    for (index_t j = 0; j < d; ++j) mu[j] += x(i, j);
  for (index_t j = 0; j < d; ++j) mu[j] /= static_cast<double>(n);
  Matrix y(1, d);
  for (index_t j = 0; j < d; ++j) {
    double s = 0.0;
    for (index_t i = 0; i < n; ++i) {
      double c = x(i, j) - mu[j];
      s += c * c;
    }
    y(0, j) = s / static_cast<double>(n - 1);
  }
  Tape* tape = Tape::active();
  bool ga = tape && connected(a, *tape);
  Tensor out = finish(std::move(y), tape, ga);
  if (ga) {
    tape->record([a, out, mu, n, d]() mutable {
      Matrix& ag = a.grad();
      const Matrix& xv = a.value();
      const Matrix& g = out.grad();
      const double scale = 2.0 / static_cast<double>(n - 1);
      for (index_t i = 0; i < n; ++i)
        for (index_t j = 0; j < d; ++j)
          ag(i, j) += g(0, j) * scale * (xv(i, j) - mu[j]);
    });
  }
  return out;
}

Tensor frobenius_norm(const Tensor& a) {
  const Matrix& x = a.value();
  double s = 0.0;
  for (index_t i = 0; i < x.size(); ++i) s += x.data()[i] * x.data()[i];
  double nrm = std::sqrt(s);
  Matrix y(1, 1);
  y(0, 0) = nrm;
  Tape* tape = Tape::active();
  bool ga = tape && connected(a, *tape);
  Tensor out = finish(std::move(y), tape, ga);
  if (ga) {
    tape->record([a, out, nrm]() mutable {
      if (nrm == 0.0) return;
      double g = out.grad()(0, 0) / nrm;
      Matrix& ag = a.grad();
      const double* xd = a.value().data();
      for (index_t i = 0; i < ag.size(); ++i) ag.data()[i] += g * xd[i];
    });
  }
  return out;
}

Tensor scale_rows(const Tensor& x, const Tensor& v) {
  if (v.cols() != 1 || v.rows() != x.rows())
    throw ShapeError("scale_rows: v must be rows x 1");
  Matrix y = x.value();
  for (index_t i = 0; i < y.rows(); ++i) {
    double s = v.value()(i, 0);
    for (index_t j = 0; j < y.cols(); ++j) y(i, j) *= s;
  }
  Tape* tape = Tape::active();
  bool gx = tape && connected(x, *tape);
  bool gv = tape && connected(v, *tape);
  Tensor out = finish(std::move(y), tape, gx || gv);
  if (gx || gv) {
    tape->record([x, v, out, gx, gv]() mutable {
      const Matrix& g = out.grad();
      if (gx) {
        Matrix& xg = x.grad();
        for (index_t i = 0; i < g.rows(); ++i) {
          double s = v.value()(i, 0);
          for (index_t j = 0; j < g.cols(); ++j) xg(i, j) += g(i, j) * s;
        }
      }
      if (gv) {
        Matrix& vg = v.grad();
        const Matrix& xv = x.value();
        for (index_t i = 0; i < g.rows(); ++i) {
          double s = 0.0;
          for (index_t j = 0; j < g.cols(); ++j) s += g(i, j) * xv(i, j);
          vg(i, 0) += s;
        }
      }
    });
  }
  return out;
}

Tensor scale_cols(const Tensor& x, const Tensor& v) {
  if (v.cols() != 1 || v.rows() != x.cols())
    throw ShapeError("scale_cols: v must be cols x 1");
  Matrix y = x.value();
  for (index_t i = 0; i < y.rows(); ++i)
    for (index_t j = 0; j < y.cols(); ++j) y(i, j) *= v.value()(j, 0);
  Tape* tape = Tape::active();
  bool gx = tape && connected(x, *tape);
  bool gv = tape && connected(v, *tape);
  Tensor out = finish(std::move(y), tape, gx || gv);
  if (gx || gv) {
    tape->record([x, v, out, gx, gv]() mutable {
      const Matrix& g = out.grad();
      if (gx) {
        Matrix& xg = x.grad();
        for (index_t i = 0; i < g.rows(); ++i)
          for (index_t j = 0; j < g.cols(); ++j)
            xg(i, j) += g(i, j) * v.value()(j, 0);
      }
      if (gv) {
        Matrix& vg = v.grad();
        const Matrix& xv = x.value();
        for (index_t j = 0; j < g.cols(); ++j) {
          double s = 0.0;
          for (index_t i = 0; i < g.rows(); ++i) s += g(i, j) * xv(i, j);
          vg(j, 0) += s;
        }
      }
    });
  }
  return out;
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows()) throw ShapeError("concat_cols: row count differs");
  const index_t n = a.rows(), ca = a.cols(), cb = b.cols();
  Matrix y(n, ca + cb);
  for (index_t i = 0; i < n; ++i) {
    for (index_t j = 0; j < ca; ++j) y(i, j) = a.value()(i, j);
    for (index_t j = 0; j < cb; ++j) y(i, ca + j) = b.value()(i, j);
  }
  Tape* tape = Tape::active();
  bool ga = tape && connected(a, *tape);
  bool gb = tape && connected(b, *tape);
  Tensor out = finish(std::move(y), tape, ga || gb);
  if (ga || gb) {
    tape->record([a, b, out, ga, gb, ca, cb]() mutable {
      const Matrix& g = out.grad();
      if (ga) {
        Matrix& ag = a.grad();
        for (index_t i = 0; i < ag.rows(); ++i)
          for (index_t j = 0; j < ca; ++j) ag(i, j) += g(i, j);
      }
      if (gb) {
        Matrix& bg = b.grad();
        for (index_t i = 0; i < bg.rows(); ++i)
          for (index_t j = 0; j < cb; ++j) bg(i, j) += g(i, ca + j);
      }
    });
  }
  return out;
}

Tensor concat_rows(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.cols()) throw ShapeError("concat_rows: column count differs");
  const index_t ra = a.rows(), rb = b.rows(), d = a.cols();
  Matrix y(ra + rb, d);
  for (index_t i = 0; i < ra; ++i)
    for (index_t j = 0; j < d; ++j) y(i, j) = a.value()(i, j);
  for (index_t i = 0; i < rb; ++i)
    for (index_t j = 0; j < d; ++j) y(ra + i, j) = b.value()(i, j);
  Tape* tape = Tape::active();
  bool ga = tape && connected(a, *tape);
  bool gb = tape && connected(b, *tape);
  Tensor out = finish(std::move(y), tape, ga || gb);
  if (ga || gb) {
    tape->record([a, b, out, ga, gb, ra]() mutable {
      const Matrix& g = out.grad();
      if (ga) {
        Matrix& ag = a.grad();
        for (index_t i = 0; i < ag.rows(); ++i)
          for (index_t j = 0; j < ag.cols(); ++j) ag(i, j) += g(i, j);
      }
      if (gb) {
        Matrix& bg = b.grad();
        for (index_t i = 0; i < bg.rows(); ++i)
          for (index_t j = 0; j < bg.cols(); ++j) bg(i, j) += g(ra + i, j);
      }
    });
  }
  return out;
}

Tensor gather_rows(const Tensor& a, std::vector<index_t> idx) {
  const Matrix& x = a.value();
  for (index_t r : idx)
    if (r < 0 || r >= x.rows())
      throw RangeError("gather_rows: index " + std::to_string(r) +
                       " outside 0.." + std::to_string(x.rows() - 1));
  Matrix y(static_cast<index_t>(idx.size()), x.cols());
  for (std::size_t r = 0; r < idx.size(); ++r)
    for (index_t j = 0; j < x.cols(); ++j)
      y(static_cast<index_t>(r), j) = x(idx[r], j);
  Tape* tape = Tape::active();
  bool ga = tape && connected(a, *tape);
  Tensor out = finish(std::move(y), tape, ga);
  if (ga) {
    tape->record([a, out, idx = std::move(idx)]() mutable {
      Matrix& ag = a.grad();
      const Matrix& g = out.grad();
      for (std::size_t r = 0; r < idx.size(); ++r)
        for (index_t j = 0; j < ag.cols(); ++j)
          ag(idx[r], j) += g(static_cast<index_t>(r), j);
    });
  }
  return out;
}

}  // namespace dsgrl
