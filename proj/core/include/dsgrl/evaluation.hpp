#pragma once

#include <vector>

#include "dsgrl/graph.hpp"
#include "dsgrl/matrix.hpp"

namespace dsgrl {

// Multinomial logistic probe on frozen embeddings. Deterministic: zero
// initialization, full-batch gradient descent.
struct LinearProbe {
  Matrix weight;             // D x C
  std::vector<double> bias;  // C
  index_t classes = 0;
};

struct CollapseMetrics {
  double mean_dim_std = 0.0;
  double mean_abs_offdiag_corr = 0.0;
};

struct EvalReport {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  double micro_f1 = 0.0;
  std::vector<double> per_class_f1;
  index_t n_test = 0;
  CollapseMetrics collapse;  // filled by run_protocol on the full embedding
};

struct ProbeConfig {
  std::vector<double> l2_grid{1e-4, 1e-2, 1.0};
  index_t iters = 500;
  double lr = 0.1;
};

// L2 penalty applies to the weight matrix only, not the bias. Labels must
// lie in [0, num_classes) and every class must appear in the training set.
// num_classes = 0 derives the class count from the labels.
LinearProbe fit_linear_probe(const Matrix& z_train,
                             const std::vector<index_t>& y_train, double l2,
                             index_t iters, double lr = 0.1,
                             index_t num_classes = 0);

std::vector<index_t> predict(const LinearProbe& probe, const Matrix& z);

// Accuracy, macro-F1 (unweighted mean over all classes, 0 for classes absent
// from both truth and predictions), micro-F1 (global counts; equals accuracy
// for single-label tasks).
EvalReport evaluate(const LinearProbe& probe, const Matrix& z_test,
                    const std::vector<index_t>& y_test);

// Mean per-dimension standard deviation (unbiased) and mean absolute
// off-diagonal correlation; zero-variance dimensions contribute 0.
CollapseMetrics collapse_metrics(const Matrix& z);

struct ProtocolResult {
  double mean_accuracy = 0.0, std_accuracy = 0.0;
  double mean_macro_f1 = 0.0, std_macro_f1 = 0.0;
  double mean_micro_f1 = 0.0, std_micro_f1 = 0.0;
  std::vector<EvalReport> per_split;
  std::vector<double> chosen_l2;  // per split
  CollapseMetrics collapse;
};

// One probe per split: fit on the train part for every grid L2, keep the
// value with the best validation accuracy (ties pick the smallest), then
// score the test part. Unlabeled nodes (label < 0) are dropped from every
// part. Mean/std aggregate over splits (population std).
ProtocolResult run_protocol(const Matrix& z, const std::vector<index_t>& labels,
                            const std::vector<Split>& splits,
                            const ProbeConfig& cfg = {});

}  // namespace dsgrl
