#pragma once

#include <string>
#include <vector>

#include "dsgrl/graph.hpp"

namespace dsgrl {

// Edge file: `src<TAB>dst` per line, 0-based ids, `#` comments and blank
// lines skipped. Undirected input stores both directions; duplicates collapse.
// Node count comes from the feature matrix.
Graph load_graph(const std::string& edge_path, const std::string& feature_path,
                 const std::string& label_path = "", bool directed = false,
                 bool header = false);

// Feature loading sniffs the binary magic and falls back to CSV.
Matrix load_features(const std::string& path, bool header = false);
Matrix load_features_csv(const std::string& path, bool header = false);
Matrix load_features_binary(const std::string& path);
bool is_binary_features(const std::string& path);

// Binary feature/embedding container: magic `DSGF`, u64 rows, u64 cols
// (little-endian), then rows*cols little-endian f32 values row-major.
void save_features_binary(const std::string& path, const Matrix& m);
void save_features_csv(const std::string& path, const Matrix& m);

// Label file: `node_id<TAB>integer_label`; missing nodes stay -1.
std::vector<index_t> load_labels(const std::string& path, index_t n);
void save_labels(const std::string& path, const std::vector<index_t>& labels);

// Each undirected edge written once (i <= j).
void save_edges(const std::string& path, const Csr& a);

// Weighted edge list `src<TAB>dst<TAB>weight`, one line per stored entry.
void save_weighted_edges(const std::string& path, const Csr& a);

// Split file: JSON object {"train": [...], "val": [...], "test": [...]}.
Split load_split_json(const std::string& path);
void save_split_json(const std::string& path, const Split& s);

// Graph-collection manifest: JSON array of entries
//   {"edges": path, "features": path | "degree_profile", "label": int, "n": int?}
// `n` is required when features are derived and the edge file alone cannot
// pin the node count (trailing isolated nodes). Relative paths resolve
// against the manifest's directory.
GraphBatch load_graph_collection(const std::string& manifest_path,
                                 bool directed = false, bool header = false);

}  // namespace dsgrl
