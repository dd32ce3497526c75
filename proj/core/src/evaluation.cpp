#include "dsgrl/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dsgrl/error.hpp"

namespace dsgrl {

namespace {

Matrix gather(const Matrix& z, const std::vector<index_t>& idx) {
  Matrix out(static_cast<index_t>(idx.size()), z.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    if (idx[r] < 0 || idx[r] >= z.rows())
      throw RangeError("split index " + std::to_string(idx[r]) +
                       " outside 0.." + std::to_string(z.rows() - 1));
    for (index_t j = 0; j < z.cols(); ++j)
      out(static_cast<index_t>(r), j) = z(idx[r], j);
  }
  return out;
}

std::vector<index_t> gather_labels(const std::vector<index_t>& labels,
                                   const std::vector<index_t>& idx) {
  std::vector<index_t> out;
  out.reserve(idx.size());
  for (index_t i : idx) out.push_back(labels[static_cast<std::size_t>(i)]);
  return out;
}

std::vector<index_t> labeled_only(const std::vector<index_t>& idx,
                                  const std::vector<index_t>& labels) {
  std::vector<index_t> out;
  for (index_t i : idx) {
    if (i < 0 || i >= static_cast<index_t>(labels.size()))
      throw RangeError("split index " + std::to_string(i) +
                       " outside the labeled range");
    if (labels[static_cast<std::size_t>(i)] >= 0) out.push_back(i);
  }
  return out;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double pop_std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace

LinearProbe fit_linear_probe(const Matrix& z_train,
                             const std::vector<index_t>& y_train, double l2,
                             index_t iters, double lr, index_t num_classes) {
  const index_t n = z_train.rows(), d = z_train.cols();
  if (static_cast<index_t>(y_train.size()) != n)
    throw ShapeError("probe: label count does not match row count");
  if (n == 0) throw DegenerateError("probe: empty training set");
  if (l2 < 0.0) throw ConfigError("probe: negative L2 strength");
  if (iters < 1) throw ConfigError("probe: iteration count must be >= 1");
  if (lr <= 0.0) throw ConfigError("probe: learning rate must be > 0");

  index_t c = num_classes;
  if (c == 0) {
    for (index_t y : y_train) c = std::max(c, y + 1);
  }
  if (c < 2) throw ProtocolError("probe: need at least two classes");
  std::vector<index_t> counts(static_cast<std::size_t>(c), 0);
  for (index_t y : y_train) {
    if (y < 0 || y >= c)
      throw ProtocolError("probe: label " + std::to_string(y) +
                          " outside 0.." + std::to_string(c - 1));
    ++counts[static_cast<std::size_t>(y)];
  }
  for (index_t k = 0; k < c; ++k)
    if (counts[static_cast<std::size_t>(k)] == 0)
      throw ProtocolError("probe: class " + std::to_string(k) +
                          " missing from the training set");

  LinearProbe probe;
  probe.weight = Matrix(d, c);
  probe.bias.assign(static_cast<std::size_t>(c), 0.0);
  probe.classes = c;

  const double inv_n = 1.0 / static_cast<double>(n);
  Matrix g(n, c);  // softmax residuals (P - Y)/n
  for (index_t it = 0; it < iters; ++it) {
    for (index_t i = 0; i < n; ++i) {
      double* row = g.data() + i * c;
      const double* zi = z_train.data() + i * d;
      for (index_t k = 0; k < c; ++k) {
        double logit = probe.bias[static_cast<std::size_t>(k)];
        for (index_t j = 0; j < d; ++j)
          logit += zi[j] * probe.weight(j, k);
        row[k] = logit;
      }
      double mx = row[0];
      for (index_t k = 1; k < c; ++k) mx = std::max(mx, row[k]);
      double denom = 0.0;
      for (index_t k = 0; k < c; ++k) {
        row[k] = std::exp(row[k] - mx);
        denom += row[k];
      }
      for (index_t k = 0; k < c; ++k) row[k] /= denom;
      row[y_train[static_cast<std::size_t>(i)]] -= 1.0;
      for (index_t k = 0; k < c; ++k) row[k] *= inv_n;
    }
    Matrix dw(d, c);
    add_matmul_tn(dw, z_train, g);
    for (index_t j = 0; j < d; ++j)
      for (index_t k = 0; k < c; ++k)
        probe.weight(j, k) -= lr * (dw(j, k) + l2 * probe.weight(j, k));
    for (index_t k = 0; k < c; ++k) {
      double db = 0.0;
      for (index_t i = 0; i < n; ++i) db += g(i, k);
      probe.bias[static_cast<std::size_t>(k)] -= lr * db;
    }
  }
  return probe;
}

std::vector<index_t> predict(const LinearProbe& probe, const Matrix& z) {
  if (z.cols() != probe.weight.rows())
    throw ShapeError("predict: embedding width " + std::to_string(z.cols()) +
                     " does not match probe input " +
                     std::to_string(probe.weight.rows()));
  const index_t c = probe.classes;
  std::vector<index_t> preds(static_cast<std::size_t>(z.rows()));
  for (index_t i = 0; i < z.rows(); ++i) {
    index_t best = 0;
    double best_v = 0.0;
    for (index_t k = 0; k < c; ++k) {
      double logit = probe.bias[static_cast<std::size_t>(k)];
      for (index_t j = 0; j < z.cols(); ++j) logit += z(i, j) * probe.weight(j, k);
      if (k == 0 || logit > best_v) {
        best = k;
        best_v = logit;
      }
    }
    preds[static_cast<std::size_t>(i)] = best;
  }
  return preds;
}

EvalReport evaluate(const LinearProbe& probe, const Matrix& z_test,
                    const std::vector<index_t>& y_test) {
  if (z_test.rows() == 0) throw DegenerateError("evaluate: empty test set");
  if (static_cast<index_t>(y_test.size()) != z_test.rows())
    throw ShapeError("evaluate: label count does not match row count");
  const index_t c = probe.classes;
  for (index_t y : y_test)
    if (y < 0 || y >= c)
      throw ProtocolError("evaluate: label " + std::to_string(y) +
                          " outside 0.." + std::to_string(c - 1));

  std::vector<index_t> preds = predict(probe, z_test);
  std::vector<index_t> tp(static_cast<std::size_t>(c), 0),
      fp(static_cast<std::size_t>(c), 0), fn(static_cast<std::size_t>(c), 0);
  index_t correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    index_t t = y_test[i], p = preds[i];
    if (t == p) {
      ++correct;
      ++tp[static_cast<std::size_t>(t)];
    } else {
      ++fp[static_cast<std::size_t>(p)];
      ++fn[static_cast<std::size_t>(t)];
    }
  }

  EvalReport r;
  r.n_test = z_test.rows();
  r.accuracy = static_cast<double>(correct) / static_cast<double>(r.n_test);
  r.per_class_f1.resize(static_cast<std::size_t>(c), 0.0);
  double f1_sum = 0.0;
  index_t tp_all = 0, fp_all = 0, fn_all = 0;
  for (index_t k = 0; k < c; ++k) {
    auto ku = static_cast<std::size_t>(k);
    double denom = static_cast<double>(2 * tp[ku] + fp[ku] + fn[ku]);
    double f1 = denom > 0.0 ? 2.0 * static_cast<double>(tp[ku]) / denom : 0.0;
    r.per_class_f1[ku] = f1;
    f1_sum += f1;
    tp_all += tp[ku];
    fp_all += fp[ku];
    fn_all += fn[ku];
  }
  r.macro_f1 = f1_sum / static_cast<double>(c);
  double micro_denom = static_cast<double>(2 * tp_all + fp_all + fn_all);
  r.micro_f1 = micro_denom > 0.0
                   ? 2.0 * static_cast<double>(tp_all) / micro_denom
                   : 0.0;
  return r;
}

CollapseMetrics collapse_metrics(const Matrix& z) {
  const index_t b = z.rows(), d = z.cols();
  if (b < 2)
    throw DegenerateError("collapse metrics need at least two rows, got " +
                          std::to_string(b));
  std::vector<double> mu(static_cast<std::size_t>(d), 0.0);
  for (index_t i = 0; i < b; ++i)
    for (index_t j = 0; j < d; ++j) mu[static_cast<std::size_t>(j)] += z(i, j);
  for (index_t j = 0; j < d; ++j) mu[static_cast<std::size_t>(j)] /= static_cast<double>(b);

  std::vector<double> stdev(static_cast<std::size_t>(d), 0.0);
  double std_sum = 0.0;
  for (index_t j = 0; j < d; ++j) {
    double s = 0.0;
    for (index_t i = 0; i < b; ++i) {
      double cdev = z(i, j) - mu[static_cast<std::size_t>(j)];
      s += cdev * cdev;
    }
    stdev[static_cast<std::size_t>(j)] = std::sqrt(s / static_cast<double>(b - 1));
    std_sum += stdev[static_cast<std::size_t>(j)];
  }

  CollapseMetrics m;
  m.mean_dim_std = std_sum / static_cast<double>(d);
  if (d < 2) return m;

  double corr_sum = 0.0;
  for (index_t a = 0; a < d; ++a)
    for (index_t c = 0; c < d; ++c) {
      if (a == c) continue;
      double sa = stdev[static_cast<std::size_t>(a)];
      double sc = stdev[static_cast<std::size_t>(c)];
      if (sa == 0.0 || sc == 0.0) continue;  // convention: correlation 0
      double cov = 0.0;
      for (index_t i = 0; i < b; ++i)
        cov += (z(i, a) - mu[static_cast<std::size_t>(a)]) *
               (z(i, c) - mu[static_cast<std::size_t>(c)]);
      cov /= static_cast<double>(b - 1);
      corr_sum += std::fabs(cov / (sa * sc));
    }
  m.mean_abs_offdiag_corr = corr_sum / static_cast<double>(d * (d - 1));
  return m;
}

ProtocolResult run_protocol(const Matrix& z, const std::vector<index_t>& labels,
                            const std::vector<Split>& splits,
                            const ProbeConfig& cfg) {
  if (splits.empty()) throw ConfigError("run_protocol: no splits given");
  if (static_cast<index_t>(labels.size()) != z.rows())
    throw ShapeError("run_protocol: label count does not match row count");
  if (cfg.l2_grid.empty()) throw ConfigError("run_protocol: empty L2 grid");

  index_t c = 0;
  for (index_t y : labels) c = std::max(c, y + 1);
  if (c < 2) throw ProtocolError("run_protocol: need at least two classes");

  ProtocolResult res;
  std::vector<double> accs, macros, micros;
  for (const Split& s : splits) {
    std::vector<index_t> tr = labeled_only(s.train, labels);
    std::vector<index_t> va = labeled_only(s.val, labels);
    std::vector<index_t> te = labeled_only(s.test, labels);
    if (tr.empty()) throw ProtocolError("run_protocol: empty labeled train part");
    if (va.empty()) throw ProtocolError("run_protocol: empty labeled val part");
    if (te.empty()) throw ProtocolError("run_protocol: empty labeled test part");

    Matrix z_tr = gather(z, tr), z_va = gather(z, va), z_te = gather(z, te);
    std::vector<index_t> y_tr = gather_labels(labels, tr);
    std::vector<index_t> y_va = gather_labels(labels, va);
    std::vector<index_t> y_te = gather_labels(labels, te);

    double best_acc = -1.0, best_l2 = cfg.l2_grid.front();
    LinearProbe best_probe;
    for (double l2 : cfg.l2_grid) {
      LinearProbe probe = fit_linear_probe(z_tr, y_tr, l2, cfg.iters, cfg.lr, c);
      double va_acc = evaluate(probe, z_va, y_va).accuracy;
      if (va_acc > best_acc) {
        best_acc = va_acc;
        best_l2 = l2;
        best_probe = std::move(probe);
      }
    }
    EvalReport report = evaluate(best_probe, z_te, y_te);
    accs.push_back(report.accuracy);
    macros.push_back(report.macro_f1);
    micros.push_back(report.micro_f1);
    res.per_split.push_back(std::move(report));
    res.chosen_l2.push_back(best_l2);
  }

  res.mean_accuracy = mean_of(accs);
  res.std_accuracy = pop_std_of(accs);
  res.mean_macro_f1 = mean_of(macros);
  res.std_macro_f1 = pop_std_of(macros);
  res.mean_micro_f1 = mean_of(micros);
  res.std_micro_f1 = pop_std_of(micros);
  res.collapse = collapse_metrics(z);
  return res;
}

}  // namespace dsgrl
