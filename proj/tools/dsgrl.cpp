// Command-line front end. One job per invocation, fully driven by a JSON
// config file plus a handful of override flags. Paths inside a config file
// resolve against the config's directory; paths given as flags resolve
// against the working directory.

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dsgrl/checkpoint.hpp"
#include "dsgrl/error.hpp"
#include "dsgrl/evaluation.hpp"
#include "dsgrl/graph.hpp"
#include "dsgrl/graph_io.hpp"
#include "dsgrl/train_config.hpp"
#include "dsgrl/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct DataSection {
  std::string edges, features, labels, splits, manifest;
  bool directed = false;
  bool header = false;
};

struct OutputSection {
  std::string dir = ".";
  bool csv = false;
};

struct JobFile {
  dsgrl::TrainConfig cfg;
  DataSection data;
  dsgrl::ProbeConfig probe;
  std::vector<std::uint64_t> split_seeds;
  std::vector<double> ratios;
  OutputSection output;
};

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw dsgrl::IoError("cannot open config file: " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw dsgrl::ParseError(path + ": " + e.what());
  }
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key()))
      throw dsgrl::ConfigError("unknown key \"" + it.key() + "\" in " + where);
  }
}

std::string get_string(const json& obj, const char* key, const char* where) {
  const json& v = obj.at(key);
  if (!v.is_string())
    throw dsgrl::ConfigError(std::string(where) + "." + key + " must be a string");
  return v.get<std::string>();
}

bool get_bool(const json& obj, const char* key, const char* where) {
  const json& v = obj.at(key);
  if (!v.is_boolean())
    throw dsgrl::ConfigError(std::string(where) + "." + key + " must be a boolean");
  return v.get<bool>();
}

std::string resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return p;
  fs::path q(p);
  if (q.is_absolute()) return p;
  return (base / q).lexically_normal().string();
}

DataSection parse_data(const json& obj, const fs::path& base) {
  if (!obj.is_object()) throw dsgrl::ConfigError("\"data\" must be an object");
  reject_unknown(obj, {"edges", "features", "labels", "splits", "manifest",
                       "directed", "header"},
                 "data");
  DataSection d;
  if (obj.contains("edges")) d.edges = resolve(base, get_string(obj, "edges", "data"));
  if (obj.contains("features")) d.features = resolve(base, get_string(obj, "features", "data"));
  if (obj.contains("labels")) d.labels = resolve(base, get_string(obj, "labels", "data"));
  if (obj.contains("splits")) d.splits = resolve(base, get_string(obj, "splits", "data"));
  if (obj.contains("manifest")) d.manifest = resolve(base, get_string(obj, "manifest", "data"));
  if (obj.contains("directed")) d.directed = get_bool(obj, "directed", "data");
  if (obj.contains("header")) d.header = get_bool(obj, "header", "data");
  return d;
}

void parse_probe(const json& obj, JobFile* job) {
  if (!obj.is_object()) throw dsgrl::ConfigError("\"probe\" must be an object");
  reject_unknown(obj, {"l2_grid", "iters", "lr", "split_seeds", "ratios"},
                 "probe");
  if (obj.contains("l2_grid")) {
    const json& g = obj.at("l2_grid");
    if (!g.is_array() || g.empty())
      throw dsgrl::ConfigError("probe.l2_grid must be a non-empty array");
    job->probe.l2_grid.clear();
    for (const json& v : g) {
      if (!v.is_number() || v.get<double>() < 0.0)
        throw dsgrl::ConfigError("probe.l2_grid entries must be numbers >= 0");
      job->probe.l2_grid.push_back(v.get<double>());
    }
  }
  if (obj.contains("iters")) {
    const json& v = obj.at("iters");
    if (!v.is_number_integer() || v.get<std::int64_t>() < 1)
      throw dsgrl::ConfigError("probe.iters must be an integer >= 1");
    job->probe.iters = v.get<std::int64_t>();
  }
  if (obj.contains("lr")) {
    const json& v = obj.at("lr");
    if (!v.is_number() || v.get<double>() <= 0.0)
      throw dsgrl::ConfigError("probe.lr must be a number > 0");
    job->probe.lr = v.get<double>();
  }
  if (obj.contains("split_seeds")) {
    const json& s = obj.at("split_seeds");
    if (!s.is_array() || s.empty())
      throw dsgrl::ConfigError("probe.split_seeds must be a non-empty array");
    job->split_seeds.clear();
    for (const json& v : s) {
      if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
        throw dsgrl::ConfigError("probe.split_seeds entries must be integers >= 0");
      job->split_seeds.push_back(v.get<std::uint64_t>());
    }
  }
  if (obj.contains("ratios")) {
    const json& r = obj.at("ratios");
    if (!r.is_array() || r.size() != 3)
      throw dsgrl::ConfigError("probe.ratios must be an array of 3 numbers");
    for (int i = 0; i < 3; ++i) {
      if (!r[i].is_number())
        throw dsgrl::ConfigError("probe.ratios must be an array of 3 numbers");
      job->ratios[i] = r[i].get<double>();
    }
  }
}

OutputSection parse_output(const json& obj, const fs::path& base) {
  if (!obj.is_object()) throw dsgrl::ConfigError("\"output\" must be an object");
  reject_unknown(obj, {"dir", "csv"}, "output");
  OutputSection o;
  if (obj.contains("dir")) o.dir = resolve(base, get_string(obj, "dir", "output"));
  if (obj.contains("csv")) o.csv = get_bool(obj, "csv", "output");
  return o;
}

JobFile load_job(const std::string& config_path) {
  json j = load_json_file(config_path);
  if (!j.is_object())
    throw dsgrl::ConfigError("config root must be a JSON object");
  reject_unknown(j, {"mode", "model", "loss", "optimizer", "train", "data",
                     "probe", "output"},
                 "config");
  JobFile job;
  job.ratios = {0.05, 0.15, 0.80};
  json tc = json::object();
  for (const char* k : {"mode", "model", "loss", "optimizer", "train"})
    if (j.contains(k)) tc[k] = j.at(k);
  job.cfg = dsgrl::train_config_from_json(tc.dump());
  fs::path base = fs::path(config_path).parent_path();
  if (j.contains("data")) job.data = parse_data(j.at("data"), base);
  if (j.contains("probe")) parse_probe(j.at("probe"), &job);
  if (j.contains("output")) job.output = parse_output(j.at("output"), base);
  return job;
}

// Shared override flags. Every subcommand takes the same set; the ones with
// no effect on a given command are documented as ignored in the README.
struct Flags {
  std::string config, out;
  std::uint64_t seed = 0;
  bool directed = false, header = false, csv = false;
  CLI::Option *config_opt = nullptr, *seed_opt = nullptr, *out_opt = nullptr;
  CLI::Option *directed_opt = nullptr, *header_opt = nullptr, *csv_opt = nullptr;
};

void add_common_flags(CLI::App* sub, Flags* f) {
  f->config_opt = sub->add_option("--config", f->config, "Job config (JSON)");
  f->seed_opt = sub->add_option("--seed", f->seed, "Override the config seed");
  f->out_opt = sub->add_option("--out", f->out, "Output directory");
  f->directed_opt = sub->add_flag("--directed", f->directed,
                                  "Treat edge files as directed");
  f->header_opt = sub->add_flag("--header", f->header,
                                "Skip the first line of CSV feature files");
  f->csv_opt = sub->add_flag("--csv", f->csv,
                             "Write embeddings as CSV instead of binary");
}

void apply_flag_overrides(const Flags& f, JobFile* job) {
  if (f.seed_opt->count()) job->cfg.seed = f.seed;
  if (f.out_opt->count()) job->output.dir = f.out;
  if (f.directed_opt->count()) job->data.directed = true;
  if (f.header_opt->count()) job->data.header = true;
  if (f.csv_opt->count()) job->output.csv = true;
}

struct LoadedData {
  bool is_batch = false;
  dsgrl::Graph graph;
  dsgrl::GraphBatch batch;
};

LoadedData load_data(const DataSection& d) {
  LoadedData out;
  if (!d.manifest.empty()) {
    if (!d.edges.empty() || !d.features.empty())
      throw dsgrl::ConfigError(
          "data.manifest excludes data.edges and data.features");
    out.is_batch = true;
    out.batch = dsgrl::load_graph_collection(d.manifest, d.directed, d.header);
    return out;
  }
  if (d.edges.empty() || d.features.empty())
    throw dsgrl::ConfigError(
        "data needs either a manifest or both edges and features");
  if (d.features == "degree_profile")
    throw dsgrl::ConfigError(
        "degree_profile features are only available through a manifest");
  out.graph =
      dsgrl::load_graph(d.edges, d.features, d.labels, d.directed, d.header);
  return out;
}

std::string write_embeddings(const dsgrl::Matrix& z, const std::string& dir,
                             bool csv) {
  fs::create_directories(dir);
  std::string path = (fs::path(dir) / (csv ? "embeddings.csv" : "embeddings.dsgf")).string();
  if (csv)
    dsgrl::save_features_csv(path, z);
  else
    dsgrl::save_features_binary(path, z);
  return path;
}

void write_training_log(const std::string& path,
                        const std::vector<dsgrl::LossBreakdown>& history) {
  std::ofstream out(path);
  if (!out) throw dsgrl::IoError("cannot write training log: " + path);
  out << "epoch,inv,var1,var2,cov1,cov2,model_reg,total\n";
  char buf[512];
  for (std::size_t e = 0; e < history.size(); ++e) {
    const dsgrl::LossBreakdown& b = history[e];
    std::snprintf(buf, sizeof buf,
                  "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", e + 1,
                  b.inv, b.var1, b.var2, b.cov1, b.cov2, b.model_reg, b.total);
    out << buf;
  }
  if (!out) throw dsgrl::IoError("write failed: " + path);
}

int cmd_train(const Flags& f) {
  if (!f.config_opt->count())
    throw dsgrl::ConfigError("train requires --config");
  JobFile job = load_job(f.config);
  apply_flag_overrides(f, &job);
  job.cfg.validate();
  LoadedData data = load_data(job.data);

  dsgrl::TrainResult res = data.is_batch ? dsgrl::train(data.batch, job.cfg)
                                         : dsgrl::train(data.graph, job.cfg);

  fs::create_directories(job.output.dir);
  std::string ckpt_path = (fs::path(job.output.dir) / "checkpoint.dsgc").string();
  dsgrl::save_checkpoint(ckpt_path, res.checkpoint);
  std::string emb_path = write_embeddings(res.embedding, job.output.dir, job.output.csv);
  std::string log_path = (fs::path(job.output.dir) / "training_log.csv").string();
  write_training_log(log_path, res.history);
  if (data.is_batch && !data.batch.graph_labels.empty())
    dsgrl::save_labels((fs::path(job.output.dir) / "graph_labels.tsv").string(),
                       data.batch.graph_labels);

  const dsgrl::LossBreakdown& fin = res.checkpoint.final_loss;
  std::printf("trained %" PRId64 " epochs (mode %s, seed %" PRIu64 ")\n",
              res.checkpoint.epoch, dsgrl::mode_name(job.cfg.mode),
              job.cfg.seed);
  std::printf("final loss %.6g (inv %.6g var %.6g/%.6g cov %.6g/%.6g model %.6g)\n",
              fin.total, fin.inv, fin.var1, fin.var2, fin.cov1, fin.cov2,
              fin.model_reg);
  std::printf("wrote %s\n", ckpt_path.c_str());
  std::printf("wrote %s (%" PRId64 " x %" PRId64 ")\n", emb_path.c_str(),
              res.embedding.rows(), res.embedding.cols());
  std::printf("wrote %s\n", log_path.c_str());
  return 0;
}

int cmd_embed(const Flags& f, const std::string& ckpt_path,
              const DataSection& flag_data) {
  JobFile job;
  job.ratios = {0.05, 0.15, 0.80};
  if (f.config_opt->count()) job = load_job(f.config);
  // Direct data flags replace the config's data section wholesale.
  if (!flag_data.edges.empty() || !flag_data.features.empty() ||
      !flag_data.manifest.empty())
    job.data = flag_data;
  apply_flag_overrides(f, &job);
  if (job.data.manifest.empty() &&
      (job.data.edges.empty() || job.data.features.empty()))
    throw dsgrl::ConfigError(
        "embed needs --manifest, --edges plus --features, or --config with a data section");
  dsgrl::Checkpoint ckpt = dsgrl::load_checkpoint(ckpt_path);
  LoadedData data = load_data(job.data);
  dsgrl::Matrix z = data.is_batch ? dsgrl::embed(data.batch, ckpt)
                                  : dsgrl::embed(data.graph, ckpt);
  std::string emb_path = write_embeddings(z, job.output.dir, job.output.csv);
  std::printf("wrote %s (%" PRId64 " x %" PRId64 ")\n", emb_path.c_str(),
              z.rows(), z.cols());
  return 0;
}

int cmd_eval(const Flags& f, const std::string& emb_path,
             const std::string& label_path, const std::string& split_path,
             const std::vector<std::uint64_t>& seed_flags,
             const std::vector<double>& ratio_flags) {
  JobFile job;
  job.ratios = {0.05, 0.15, 0.80};
  if (f.config_opt->count()) job = load_job(f.config);
  apply_flag_overrides(f, &job);
  if (!seed_flags.empty()) job.split_seeds = seed_flags;
  if (!ratio_flags.empty()) {
    if (ratio_flags.size() != 3)
      throw dsgrl::ConfigError("--ratios takes exactly 3 values");
    job.ratios = ratio_flags;
  }

  dsgrl::Matrix z = dsgrl::is_binary_features(emb_path)
                        ? dsgrl::load_features_binary(emb_path)
                        : dsgrl::load_features_csv(emb_path, job.data.header);
  std::vector<dsgrl::index_t> labels = dsgrl::load_labels(label_path, z.rows());

  std::vector<dsgrl::Split> splits;
  if (!split_path.empty()) {
    splits.push_back(dsgrl::load_split_json(split_path));
  } else {
    std::vector<std::uint64_t> seeds = job.split_seeds;
    if (seeds.empty()) {
      std::uint64_t base = f.seed_opt->count() ? f.seed : job.cfg.seed;
      for (std::uint64_t i = 0; i < 10; ++i) seeds.push_back(base + i);
    }
    for (std::uint64_t s : seeds)
      splits.push_back(dsgrl::make_splits(z.rows(), job.ratios[0], job.ratios[1],
                                          job.ratios[2], s));
  }

  dsgrl::ProtocolResult pr = dsgrl::run_protocol(z, labels, splits, job.probe);

  json m;
  m["mean_accuracy"] = pr.mean_accuracy;
  m["std_accuracy"] = pr.std_accuracy;
  m["mean_macro_f1"] = pr.mean_macro_f1;
  m["std_macro_f1"] = pr.std_macro_f1;
  m["mean_micro_f1"] = pr.mean_micro_f1;
  m["std_micro_f1"] = pr.std_micro_f1;
  m["collapse"] = {{"mean_dim_std", pr.collapse.mean_dim_std},
                   {"mean_abs_offdiag_corr", pr.collapse.mean_abs_offdiag_corr}};
  json arr = json::array();
  for (std::size_t i = 0; i < pr.per_split.size(); ++i) {
    const dsgrl::EvalReport& r = pr.per_split[i];
    arr.push_back({{"accuracy", r.accuracy},
                   {"macro_f1", r.macro_f1},
                   {"micro_f1", r.micro_f1},
                   {"n_test", r.n_test},
                   {"chosen_l2", pr.chosen_l2[i]}});
  }
  m["splits"] = std::move(arr);

  fs::create_directories(job.output.dir);
  std::string metrics_path = (fs::path(job.output.dir) / "metrics.json").string();
  {
    std::ofstream out(metrics_path);
    if (!out) throw dsgrl::IoError("cannot write metrics: " + metrics_path);
    out << m.dump(2) << "\n";
  }

  std::printf("split  accuracy  macro_f1  micro_f1  n_test  l2\n");
  for (std::size_t i = 0; i < pr.per_split.size(); ++i) {
    const dsgrl::EvalReport& r = pr.per_split[i];
    std::printf("%-5zu  %.4f    %.4f    %.4f    %-6" PRId64 "  %g\n", i + 1,
                r.accuracy, r.macro_f1, r.micro_f1, r.n_test, pr.chosen_l2[i]);
  }
  std::printf("mean   %.4f    %.4f    %.4f\n", pr.mean_accuracy,
              pr.mean_macro_f1, pr.mean_micro_f1);
  std::printf("std    %.4f    %.4f    %.4f\n", pr.std_accuracy,
              pr.std_macro_f1, pr.std_micro_f1);
  std::printf("collapse: mean_dim_std %.4f  mean_abs_offdiag_corr %.4f\n",
              pr.collapse.mean_dim_std, pr.collapse.mean_abs_offdiag_corr);
  std::printf("wrote %s\n", metrics_path.c_str());
  return 0;
}

int cmd_gen_sbm(const Flags& f, const std::vector<dsgrl::index_t>& blocks,
                double p_in, double p_out, double noise) {
  std::uint64_t seed = f.seed_opt->count() ? f.seed : 1;
  std::string dir = f.out_opt->count() ? f.out : ".";
  dsgrl::Graph g = dsgrl::generate_sbm(blocks, p_in, p_out, noise, seed);
  fs::create_directories(dir);
  std::string edges = (fs::path(dir) / "edges.tsv").string();
  std::string feats = (fs::path(dir) / "features.csv").string();
  std::string labels = (fs::path(dir) / "labels.tsv").string();
  dsgrl::save_edges(edges, *g.adjacency);
  dsgrl::save_features_csv(feats, g.features);
  dsgrl::save_labels(labels, g.labels);

  // Ready-to-train job file pointing at the generated data.
  json j;
  j["mode"] = "feature";
  j["data"] = {{"edges", "edges.tsv"},
               {"features", "features.csv"},
               {"labels", "labels.tsv"}};
  j["train"] = {{"seed", seed}};
  j["output"] = {{"dir", "."}};
  std::string jobp = (fs::path(dir) / "job.json").string();
  {
    std::ofstream out(jobp);
    if (!out) throw dsgrl::IoError("cannot write job file: " + jobp);
    out << j.dump(2) << "\n";
  }
  std::printf("generated %" PRId64 " nodes, %" PRId64 " undirected edges, %zu blocks (seed %" PRIu64 ")\n",
              g.n, static_cast<dsgrl::index_t>(g.adjacency->nnz() / 2),
              blocks.size(), seed);
  std::printf("wrote %s, %s, %s, %s\n", edges.c_str(), feats.c_str(),
              labels.c_str(), jobp.c_str());
  return 0;
}

int cmd_inspect(const std::string& ckpt_path) {
  dsgrl::Checkpoint ckpt = dsgrl::load_checkpoint(ckpt_path);
  const dsgrl::LossBreakdown& fin = ckpt.final_loss;
  std::printf("checkpoint %s\n", ckpt_path.c_str());
  std::printf("epoch %" PRId64 "\n", ckpt.epoch);
  std::printf("final loss %.6g (inv %.6g var %.6g/%.6g cov %.6g/%.6g model %.6g)\n",
              fin.total, fin.inv, fin.var1, fin.var2, fin.cov1, fin.cov2,
              fin.model_reg);
  std::printf("config:\n%s\n", dsgrl::train_config_to_json(ckpt.config, 2).c_str());
  std::printf("tensors:\n");
  for (const auto& [name, m] : ckpt.tensors)
    std::printf("  %-12s %" PRId64 " x %" PRId64 "\n", name.c_str(), m.rows(),
                m.cols());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-supervised graph representation learning with learnable augmentations"};
  app.require_subcommand(1);

  Flags tf, ef, vf, gf;

  CLI::App* train = app.add_subcommand("train", "Train a model from a job config");
  add_common_flags(train, &tf);

  CLI::App* embed = app.add_subcommand("embed", "Recompute embeddings from a checkpoint");
  std::string embed_ckpt;
  embed->add_option("--checkpoint", embed_ckpt, "Checkpoint file")->required();
  add_common_flags(embed, &ef);
  std::string embed_edges, embed_features, embed_labels, embed_manifest;
  embed->add_option("--edges", embed_edges, "Edge list (src<TAB>dst)");
  embed->add_option("--features", embed_features, "Feature file (CSV or binary)");
  embed->add_option("--labels", embed_labels, "Label file (node<TAB>label)");
  embed->add_option("--manifest", embed_manifest, "Graph-collection manifest");

  CLI::App* eval = app.add_subcommand("eval", "Linear-probe evaluation of an embedding file");
  std::string eval_emb, eval_labels, eval_splits;
  std::vector<std::uint64_t> eval_seeds;
  std::vector<double> eval_ratios;
  eval->add_option("--embeddings", eval_emb, "Embedding file (CSV or binary)")->required();
  eval->add_option("--labels", eval_labels, "Label file")->required();
  eval->add_option("--splits", eval_splits, "Split file (JSON); excludes --split-seeds");
  eval->add_option("--split-seeds", eval_seeds, "Seeds for generated splits")->delimiter(',');
  eval->add_option("--ratios", eval_ratios, "train,val,test ratios for generated splits")->delimiter(',');
  add_common_flags(eval, &vf);

  CLI::App* gen = app.add_subcommand("gen-sbm", "Generate a stochastic block model dataset");
  std::vector<dsgrl::index_t> gen_blocks{50, 50, 50};
  double gen_pin = 0.1, gen_pout = 0.01, gen_noise = 0.5;
  gen->add_option("--blocks", gen_blocks, "Block sizes, e.g. 50,50,50")->delimiter(',');
  gen->add_option("--p-in", gen_pin, "Within-block edge probability");
  gen->add_option("--p-out", gen_pout, "Between-block edge probability");
  gen->add_option("--noise", gen_noise, "Feature noise scale");
  add_common_flags(gen, &gf);

  CLI::App* inspect = app.add_subcommand("inspect", "Print a checkpoint's config and tensor shapes");
  std::string inspect_ckpt;
  inspect->add_option("--checkpoint", inspect_ckpt, "Checkpoint file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::fprintf(stderr, "ERROR usage: %s\n", e.what());
    return 1;
  }

  try {
    if (train->parsed()) return cmd_train(tf);
    if (embed->parsed()) {
      DataSection flag_data;
      flag_data.edges = embed_edges;
      flag_data.features = embed_features;
      flag_data.labels = embed_labels;
      flag_data.manifest = embed_manifest;
      return cmd_embed(ef, embed_ckpt, flag_data);
    }
    if (eval->parsed())
      return cmd_eval(vf, eval_emb, eval_labels, eval_splits, eval_seeds, eval_ratios);
    if (gen->parsed()) return cmd_gen_sbm(gf, gen_blocks, gen_pin, gen_pout, gen_noise);
    if (inspect->parsed()) return cmd_inspect(inspect_ckpt);
  } catch (const dsgrl::Error& e) {
    std::fprintf(stderr, "ERROR %s: %s\n", e.category().c_str(), e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "ERROR internal: %s\n", e.what());
    return 1;
  }
  return 0;
}
