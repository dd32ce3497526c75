#include "dsgrl/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <variant>

#include "dsgrl/error.hpp"
#include "dsgrl/optimizer.hpp"
#include "dsgrl/rng.hpp"

namespace dsgrl {

namespace {

struct Model {
  GcnStack encoder;
  std::optional<FeatureAugmenter> fa;
  std::optional<TopologyAugmenter> ta;
};

std::vector<index_t> width_chain(index_t in, index_t hidden, index_t out,
                                 index_t layers) {
  std::vector<index_t> widths{in};
  for (index_t l = 0; l + 1 < layers; ++l) widths.push_back(hidden);
  widths.push_back(out);
  return widths;
}

Model init_model(const TrainConfig& cfg, index_t feature_width, Rng& rng) {
  Model m;
  index_t enc_in = cfg.mode == Mode::Topology ? feature_width : cfg.d1;
  m.encoder.weights = init_weight_chain(
      width_chain(enc_in, cfg.encoder_hidden_width(), cfg.d, cfg.encoder_layers),
      rng);
  if (cfg.mode != Mode::Topology) {
    m.fa.emplace();
    auto widths = width_chain(feature_width, cfg.aug_hidden_width(), cfg.d1,
                              cfg.feature_aug_layers);
    m.fa->f1.weights = init_weight_chain(widths, rng);
    m.fa->f2.weights = init_weight_chain(widths, rng);
  }
  if (cfg.mode != Mode::Feature) {
    m.ta.emplace();
    m.ta->gnn.weights = init_weight_chain(
        width_chain(feature_width, cfg.aug_hidden_width(), cfg.d1, cfg.topo_layers),
        rng);
  }
  return m;
}

std::vector<Tensor> parameters(const Model& m) {
  std::vector<Tensor> p(m.encoder.weights.begin(), m.encoder.weights.end());
  if (m.fa) {
    p.insert(p.end(), m.fa->f1.weights.begin(), m.fa->f1.weights.end());
    p.insert(p.end(), m.fa->f2.weights.begin(), m.fa->f2.weights.end());
  }
  if (m.ta)
    p.insert(p.end(), m.ta->gnn.weights.begin(), m.ta->gnn.weights.end());
  return p;
}

std::vector<std::pair<std::string, Matrix>> named_tensors(const Model& m) {
  std::vector<std::pair<std::string, Matrix>> out;
  auto push = [&](const char* role, const std::vector<Tensor>& ws) {
    for (std::size_t l = 0; l < ws.size(); ++l)
      out.emplace_back(std::string(role) + "." + std::to_string(l),
                       ws[l].value());
  };
  push("encoder", m.encoder.weights);
  if (m.fa) {
    push("f1", m.fa->f1.weights);
    push("f2", m.fa->f2.weights);
  }
  if (m.ta) push("topo", m.ta->gnn.weights);
  return out;
}

Model model_from_checkpoint(const Checkpoint& ckpt) {
  Model m;
  std::vector<std::pair<index_t, Matrix>> enc, f1, f2, topo;
  for (const auto& [name, value] : ckpt.tensors) {
    auto dot = name.find('.');
    if (dot == std::string::npos)
      throw FormatError("checkpoint tensor '" + name + "' lacks a layer index");
    std::string role = name.substr(0, dot);
    index_t layer;
    try {
      layer = std::stoll(name.substr(dot + 1));
    } catch (...) {
      throw FormatError("checkpoint tensor '" + name + "' has a bad layer index");
    }
    if (role == "encoder") enc.emplace_back(layer, value);
    else if (role == "f1") f1.emplace_back(layer, value);
    else if (role == "f2") f2.emplace_back(layer, value);
    else if (role == "topo") topo.emplace_back(layer, value);
    else throw FormatError("checkpoint tensor '" + name + "' has unknown role");
  }
  auto build = [](std::vector<std::pair<index_t, Matrix>>& src,
                  const char* role) {
    std::sort(src.begin(), src.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<Tensor> ws;
    for (std::size_t l = 0; l < src.size(); ++l) {
      if (src[l].first != static_cast<index_t>(l))
        throw FormatError(std::string("checkpoint: non-contiguous layers for ") +
                          role);
      ws.emplace_back(std::move(src[l].second), true);
    }
    return ws;
  };
  m.encoder.weights = build(enc, "encoder");
  if (m.encoder.weights.empty())
    throw FormatError("checkpoint: missing encoder tensors");
  const Mode mode = ckpt.config.mode;
  if (mode != Mode::Topology) {
    if (f1.empty() || f2.empty())
      throw FormatError("checkpoint: missing feature augmenter tensors");
    m.fa.emplace();
    m.fa->f1.weights = build(f1, "f1");
    m.fa->f2.weights = build(f2, "f2");
  } else if (!f1.empty() || !f2.empty()) {
    throw FormatError("checkpoint: unexpected feature augmenter tensors");
  }
  if (mode != Mode::Feature) {
    if (topo.empty()) throw FormatError("checkpoint: missing topology tensors");
    m.ta.emplace();
    m.ta->gnn.weights = build(topo, "topo");
  } else if (!topo.empty()) {
    throw FormatError("checkpoint: unexpected topology tensors");
  }
  return m;
}

index_t expected_feature_width(const Model& m, Mode mode) {
  return mode == Mode::Topology ? m.encoder.weights.front().rows()
                                : m.fa->f1.weights.front().rows();
}

Tensor encode_view(const View& view, const GcnStack& encoder) {
  if (std::holds_alternative<std::shared_ptr<const Csr>>(view.adjacency))
    return gcn_forward(std::get<std::shared_ptr<const Csr>>(view.adjacency),
                       view.features, encoder);
  return gcn_forward(std::get<Tensor>(view.adjacency), view.features, encoder);
}

void check_finite(const LossBreakdown& lb, index_t epoch) {
  const std::pair<const char*, double> terms[] = {
      {"invariance", lb.inv},   {"variance(view 1)", lb.var1},
      {"variance(view 2)", lb.var2}, {"covariance(view 1)", lb.cov1},
      {"covariance(view 2)", lb.cov2}, {"model regularizer", lb.model_reg},
      {"total", lb.total}};
  for (const auto& [name, v] : terms)
    if (!std::isfinite(v))
      throw NumericError(std::string("non-finite ") + name + " at epoch " +
                         std::to_string(epoch));
}

std::vector<index_t> sample_rows(index_t n, index_t k, Rng& rng) {
  std::vector<index_t> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), index_t{0});
  rng.shuffle(perm);
  perm.resize(static_cast<std::size_t>(k));
  std::sort(perm.begin(), perm.end());
  return perm;
}

struct ForwardOut {
  Tensor z1;
  Tensor z2;
  index_t aprime_nnz = -1;
};

ForwardOut forward_views(const std::shared_ptr<const Csr>& a_hat,
                         const Tensor& x, const Model& model, Mode mode,
                         const Matrix* cached_aprime,
                         Matrix* aprime_out = nullptr) {
  ViewPair vp = make_views(a_hat, x, mode, model.fa ? &*model.fa : nullptr,
                           model.ta ? &*model.ta : nullptr, cached_aprime);
  if (aprime_out && std::holds_alternative<Tensor>(vp.v2.adjacency))
    *aprime_out = std::get<Tensor>(vp.v2.adjacency).value();
  ForwardOut out;
  out.z1 = encode_view(vp.v1, model.encoder);
  out.z2 = encode_view(vp.v2, model.encoder);
  out.aprime_nnz = vp.aprime_nnz;
  return out;
}

TrainResult train_impl(const Graph& g, const TrainConfig& cfg) {
  cfg.validate();
  if (!g.adjacency) throw ConsistencyError("train: graph has no adjacency");
  if (g.features.rows() != g.n)
    throw ConsistencyError("train: feature row count " +
                           std::to_string(g.features.rows()) +
                           " does not match node count " + std::to_string(g.n));
  if (g.n < 2) throw DegenerateError("train: need at least two nodes");

  auto a_hat = normalize_adjacency(*g.adjacency);
  Tensor x{Matrix(g.features)};
  Rng rng(cfg.seed);
  Model model = init_model(cfg, g.features.cols(), rng);
  Adam adam(parameters(model), cfg.adam);

  TrainResult res;
  const index_t run_epochs = cfg.untrained ? 0 : cfg.epochs;
  Matrix cached_aprime;
  bool have_cache = false;
  const FeatureAugmenter* fa = model.fa ? &*model.fa : nullptr;

  const bool cache_aprime = cfg.mode != Mode::Feature && cfg.aprime_refresh > 1;
  for (index_t e = 0; e < run_epochs; ++e) {
    Tape tape;
    const bool refresh = !have_cache || (e % cfg.aprime_refresh) == 0;
    ForwardOut f = forward_views(
        a_hat, x, model, cfg.mode, refresh ? nullptr : &cached_aprime,
        cache_aprime && refresh ? &cached_aprime : nullptr);
    if (cache_aprime && refresh) have_cache = true;
    Tensor z1 = f.z1, z2 = f.z2;
    if (cfg.batch > 0 && cfg.batch < g.n) {
      std::vector<index_t> idx = sample_rows(g.n, cfg.batch, rng);
      z1 = gather_rows(z1, idx);
      z2 = gather_rows(z2, std::move(idx));
    }
    LossBreakdown lb = total_loss(z1, z2, fa, cfg.weights, cfg.latent_reg,
                                  cfg.mode, cfg.invariance_form);
    check_finite(lb, e);
    tape.backward(lb.total_tensor);
    adam.step();
    lb.total_tensor = Tensor();
    res.history.push_back(lb);
    if (f.aprime_nnz >= 0) res.aprime_nnz.push_back(f.aprime_nnz);
  }

  // Final forward without a tape: embedding, diagnostics, checkpoint.
  ForwardOut f = forward_views(a_hat, x, model, cfg.mode, nullptr);
  Tensor z = aggregate(f.z1, f.z2);
  LossBreakdown fin = total_loss(f.z1, f.z2, fa, cfg.weights, cfg.latent_reg,
                                 cfg.mode, cfg.invariance_form);
  fin.total_tensor = Tensor();

  res.embedding = z.value();
  res.checkpoint.config = cfg;
  res.checkpoint.epoch = run_epochs;
  res.checkpoint.final_loss = fin;
  res.checkpoint.tensors = named_tensors(model);
  return res;
}

}  // namespace

TrainResult train(const Graph& g, const TrainConfig& cfg) {
  return train_impl(g, cfg);
}

TrainResult train(const GraphBatch& b, const TrainConfig& cfg) {
  TrainResult res = train_impl(b.merged, cfg);
  res.embedding =
      readout(res.embedding, b.graph_ids, b.num_graphs, cfg.readout);
  return res;
}

Matrix embed(const Graph& g, const Checkpoint& ckpt) {
  ckpt.config.validate();
  if (!g.adjacency) throw ConsistencyError("embed: graph has no adjacency");
  Model model = model_from_checkpoint(ckpt);
  index_t want = expected_feature_width(model, ckpt.config.mode);
  if (g.features.cols() != want)
    throw ConfigError("embed: checkpoint expects feature width " +
                      std::to_string(want) + ", graph has " +
                      std::to_string(g.features.cols()));
  if (g.features.rows() != g.n)
    throw ConsistencyError("embed: feature row count mismatch");
  auto a_hat = normalize_adjacency(*g.adjacency);
  Tensor x{Matrix(g.features)};
  ForwardOut f = forward_views(a_hat, x, model, ckpt.config.mode, nullptr);
  return aggregate(f.z1, f.z2).value();
}

Matrix embed(const GraphBatch& b, const Checkpoint& ckpt) {
  Matrix z = embed(b.merged, ckpt);
  return readout(z, b.graph_ids, b.num_graphs, ckpt.config.readout);
}

}  // namespace dsgrl
