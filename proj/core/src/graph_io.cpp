#include "dsgrl/graph_io.hpp"

#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>

#include <json.hpp>

#include "dsgrl/error.hpp"

namespace dsgrl {

namespace {

using json = nlohmann::json;

constexpr char kFeatureMagic[4] = {'D', 'S', 'G', 'F'};

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

index_t parse_index(const std::string& tok, const std::string& where) {
  index_t v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    throw ParseError(where + ": not an integer: '" + tok + "'");
  return v;
}

std::ifstream open_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return in;
}

void write_u64(std::ofstream& out, std::uint64_t v) {
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(buf, 8);
}

std::uint64_t read_u64(std::ifstream& in, const std::string& path) {
  unsigned char buf[8];
  if (!in.read(reinterpret_cast<char*>(buf), 8))
    throw FormatError(path + ": truncated header");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

json parse_json_file(const std::string& path) {
  std::ifstream in = open_text(path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return j;
}

std::vector<index_t> json_index_array(const json& arr, const std::string& where) {
  if (!arr.is_array()) throw ParseError(where + " must be an array");
  std::vector<index_t> out;
  out.reserve(arr.size());
  for (const auto& v : arr) {
    if (!v.is_number_integer())
      throw ParseError(where + " must contain integers");
    out.push_back(v.get<index_t>());
  }
  return out;
}

}  // namespace

bool is_binary_features(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  char magic[4] = {};
  in.read(magic, 4);
  return in.gcount() == 4 && std::memcmp(magic, kFeatureMagic, 4) == 0;
}

Matrix load_features(const std::string& path, bool header) {
  return is_binary_features(path) ? load_features_binary(path)
                                  : load_features_csv(path, header);
}

Matrix load_features_csv(const std::string& path, bool header) {
  std::ifstream in = open_text(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  index_t lineno = 0;
  index_t width = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (header && lineno == 1) continue;
    std::string t = trim(line);
    if (t.empty()) continue;
    std::vector<double> row;
    std::size_t pos = 0;
    while (pos <= t.size()) {
      std::size_t comma = t.find(',', pos);
      std::string tok = trim(comma == std::string::npos
                                 ? t.substr(pos)
                                 : t.substr(pos, comma - pos));
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc{} || ptr != tok.data() + tok.size())
        throw ParseError(path + " line " + std::to_string(lineno) +
                         ": not a number: '" + tok + "'");
      row.push_back(v);
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (width < 0) width = static_cast<index_t>(row.size());
    if (static_cast<index_t>(row.size()) != width)
      throw ParseError(path + " line " + std::to_string(lineno) +
                       ": expected " + std::to_string(width) + " values, got " +
                       std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(path + ": no feature rows");
  Matrix m(static_cast<index_t>(rows.size()), width);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (index_t j = 0; j < width; ++j)
      m(static_cast<index_t>(i), j) = rows[i][static_cast<std::size_t>(j)];
  return m;
}

Matrix load_features_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  char magic[4] = {};
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, kFeatureMagic, 4) != 0)
    throw FormatError(path + ": bad magic bytes");
  std::uint64_t rows = read_u64(in, path);
  std::uint64_t cols = read_u64(in, path);
  if (rows == 0 || cols == 0) throw FormatError(path + ": empty matrix");
  Matrix m(static_cast<index_t>(rows), static_cast<index_t>(cols));
  std::vector<unsigned char> buf(static_cast<std::size_t>(cols) * 4);
  for (std::uint64_t i = 0; i < rows; ++i) {
    if (!in.read(reinterpret_cast<char*>(buf.data()),
                 static_cast<std::streamsize>(buf.size())))
      throw FormatError(path + ": truncated payload at row " + std::to_string(i));
    for (std::uint64_t j = 0; j < cols; ++j) {
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b)
        bits |= static_cast<std::uint32_t>(buf[j * 4 + static_cast<std::uint64_t>(b)])
                << (8 * b);
      float f;
      std::memcpy(&f, &bits, 4);
      m(static_cast<index_t>(i), static_cast<index_t>(j)) = static_cast<double>(f);
    }
  }
  return m;
}

void save_features_binary(const std::string& path, const Matrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out.write(kFeatureMagic, 4);
  write_u64(out, static_cast<std::uint64_t>(m.rows()));
  write_u64(out, static_cast<std::uint64_t>(m.cols()));
  for (index_t i = 0; i < m.rows(); ++i) {
    for (index_t j = 0; j < m.cols(); ++j) {
      float f = static_cast<float>(m(i, j));
      std::uint32_t bits;
      std::memcpy(&bits, &f, 4);
      char buf[4];
      for (int b = 0; b < 4; ++b)
        buf[b] = static_cast<char>((bits >> (8 * b)) & 0xff);
      out.write(buf, 4);
    }
  }
  if (!out) throw IoError("write failed: " + path);
}

void save_features_csv(const std::string& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  char buf[64];
  for (index_t i = 0; i < m.rows(); ++i) {
    for (index_t j = 0; j < m.cols(); ++j) {
      int len = std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
      if (j > 0) out.put(',');
      out.write(buf, len);
    }
    out.put('\n');
  }
  if (!out) throw IoError("write failed: " + path);
}

Graph load_graph(const std::string& edge_path, const std::string& feature_path,
                 const std::string& label_path, bool directed, bool header) {
  Matrix features = load_features(feature_path, header);
  const index_t n = features.rows();

  std::ifstream in = open_text(edge_path);
  std::set<std::pair<index_t, index_t>> arcs;
  std::string line;
  index_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto tab = t.find('\t');
    if (tab == std::string::npos)
      throw ParseError(edge_path + " line " + std::to_string(lineno) +
                       ": expected 'src<TAB>dst'");
    const std::string where = edge_path + " line " + std::to_string(lineno);
    index_t s = parse_index(trim(t.substr(0, tab)), where);
    index_t d = parse_index(trim(t.substr(tab + 1)), where);
    if (s < 0 || s >= n || d < 0 || d >= n)
      throw RangeError(where + ": endpoint outside 0.." + std::to_string(n - 1));
    arcs.emplace(s, d);
    if (!directed) arcs.emplace(d, s);
  }

  std::vector<std::tuple<index_t, index_t, double>> entries;
  entries.reserve(arcs.size());
  for (const auto& [s, d] : arcs) entries.emplace_back(s, d, 1.0);

  Graph g;
  g.n = n;
  g.adjacency = std::make_shared<const Csr>(
      csr_from_coo(n, n, std::move(entries), Duplicates::Error));
  g.features = std::move(features);
  if (!label_path.empty()) g.labels = load_labels(label_path, n);
  return g;
}

std::vector<index_t> load_labels(const std::string& path, index_t n) {
  std::ifstream in = open_text(path);
  std::vector<index_t> labels(static_cast<std::size_t>(n), -1);
  std::string line;
  index_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto tab = t.find('\t');
    if (tab == std::string::npos)
      throw ParseError(path + " line " + std::to_string(lineno) +
                       ": expected 'node<TAB>label'");
    const std::string where = path + " line " + std::to_string(lineno);
    index_t node = parse_index(trim(t.substr(0, tab)), where);
    index_t label = parse_index(trim(t.substr(tab + 1)), where);
    if (node < 0 || node >= n)
      throw RangeError(where + ": node outside 0.." + std::to_string(n - 1));
    if (label < 0) throw RangeError(where + ": negative label");
    labels[static_cast<std::size_t>(node)] = label;
  }
  return labels;
}

void save_labels(const std::string& path, const std::vector<index_t>& labels) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] >= 0) out << i << '\t' << labels[i] << '\n';
  if (!out) throw IoError("write failed: " + path);
}

void save_edges(const std::string& path, const Csr& a) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  for (index_t i = 0; i < a.rows; ++i)
    for (index_t p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p)
      if (a.col_idx[p] >= i) out << i << '\t' << a.col_idx[p] << '\n';
  if (!out) throw IoError("write failed: " + path);
}

void save_weighted_edges(const std::string& path, const Csr& a) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  char buf[64];
  for (index_t i = 0; i < a.rows; ++i)
    for (index_t p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p) {
      int len = std::snprintf(buf, sizeof buf, "%.17g", a.vals[p]);
      out << i << '\t' << a.col_idx[p] << '\t';
      out.write(buf, len);
      out.put('\n');
    }
  if (!out) throw IoError("write failed: " + path);
}

Split load_split_json(const std::string& path) {
  json j = parse_json_file(path);
  if (!j.is_object()) throw ParseError(path + ": expected a JSON object");
  for (const auto& [key, _] : j.items())
    if (key != "train" && key != "val" && key != "test")
      throw ParseError(path + ": unknown key '" + key + "'");
  if (!j.contains("train") || !j.contains("val") || !j.contains("test"))
    throw ParseError(path + ": needs train, val and test arrays");
  Split s;
  s.train = json_index_array(j["train"], path + ": train");
  s.val = json_index_array(j["val"], path + ": val");
  s.test = json_index_array(j["test"], path + ": test");
  return s;
}

void save_split_json(const std::string& path, const Split& s) {
  json j;
  j["train"] = s.train;
  j["val"] = s.val;
  j["test"] = s.test;
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

GraphBatch load_graph_collection(const std::string& manifest_path,
                                 bool directed, bool header) {
  json j = parse_json_file(manifest_path);
  if (!j.is_array() || j.empty())
    throw ParseError(manifest_path + ": expected a non-empty JSON array");
  const auto base = std::filesystem::path(manifest_path).parent_path();
  auto resolve = [&](const std::string& p) {
    std::filesystem::path fp(p);
    return fp.is_absolute() ? fp.string() : (base / fp).string();
  };

  std::vector<Graph> graphs;
  std::vector<index_t> graph_labels;
  std::size_t entry_no = 0;
  for (const auto& e : j) {
    ++entry_no;
    const std::string where =
        manifest_path + " entry " + std::to_string(entry_no);
    if (!e.is_object()) throw ParseError(where + ": expected an object");
    for (const auto& [key, _] : e.items())
      if (key != "edges" && key != "features" && key != "label" && key != "n")
        throw ParseError(where + ": unknown key '" + key + "'");
    if (!e.contains("edges") || !e.contains("features") || !e.contains("label"))
      throw ParseError(where + ": needs edges, features and label");
    std::string edges = resolve(e["edges"].get<std::string>());
    std::string feats = e["features"].get<std::string>();
    graph_labels.push_back(e["label"].get<index_t>());

    if (feats == "degree_profile") {
      // Node count: explicit `n`, else max endpoint + 1 from the edge file.
      index_t n = -1;
      if (e.contains("n")) n = e["n"].get<index_t>();
      std::ifstream in = open_text(edges);
      std::vector<std::pair<index_t, index_t>> raw;
      std::string line;
      index_t lineno = 0, max_id = -1;
      while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto tab = t.find('\t');
        if (tab == std::string::npos)
          throw ParseError(edges + " line " + std::to_string(lineno) +
                           ": expected 'src<TAB>dst'");
        const std::string lw = edges + " line " + std::to_string(lineno);
        index_t s = parse_index(trim(t.substr(0, tab)), lw);
        index_t d = parse_index(trim(t.substr(tab + 1)), lw);
        if (s < 0 || d < 0) throw RangeError(lw + ": negative node id");
        raw.emplace_back(s, d);
        max_id = std::max({max_id, s, d});
      }
      if (n < 0) n = max_id + 1;
      if (n <= 0) throw ParseError(where + ": cannot infer node count");
      if (max_id >= n)
        throw RangeError(where + ": endpoint outside 0.." + std::to_string(n - 1));
      std::set<std::pair<index_t, index_t>> arcs;
      for (auto [s, d] : raw) {
        arcs.emplace(s, d);
        if (!directed) arcs.emplace(d, s);
      }
      std::vector<std::tuple<index_t, index_t, double>> entries;
      for (const auto& [s, d] : arcs) entries.emplace_back(s, d, 1.0);
      Graph g;
      g.n = n;
      g.adjacency = std::make_shared<const Csr>(
          csr_from_coo(n, n, std::move(entries), Duplicates::Error));
      g.features = degree_profile_features(g);
      graphs.push_back(std::move(g));
    } else {
      graphs.push_back(load_graph(edges, resolve(feats), "", directed, header));
    }
  }
  return batch_graphs(graphs, std::move(graph_labels));
}

}  // namespace dsgrl
