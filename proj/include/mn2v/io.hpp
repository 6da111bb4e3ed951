#pragma once

#include <charconv>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mn2v/dense_matrix.hpp"
#include "mn2v/error.hpp"
#include "mn2v/multilayer_network.hpp"
#include "mn2v/walk.hpp"

namespace mn2v::io {

namespace fs = std::filesystem;

// Shortest decimal form that parses back to the same double.
inline std::string format_double(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

namespace detail {

inline std::string_view strip_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

inline bool skip_line(std::string_view s) {
  return s.empty() || s.front() == '#';
}

inline std::string where(const std::string& source, std::size_t line) {
  return source + ":" + std::to_string(line) + ": ";
}

inline double parse_weight(std::string_view s, const std::string& source, std::size_t line) {
  double w = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), w);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw InputError(where(source, line) + "cannot parse weight '" + std::string(s) + "'");
  }
  return w;
}

inline LayerIndex parse_layer(std::string_view s, const std::string& source, std::size_t line) {
  LayerIndex l = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), l);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw InputError(where(source, line) + "cannot parse layer index '" + std::string(s) + "'");
  }
  return l;
}

inline std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  return in;
}

inline std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  return out;
}

}  // namespace detail

// layer_u  node_u  layer_v  node_v  weight
inline std::vector<EdgeRecord> read_edge_records(std::istream& in, const std::string& source = "<input>") {
  std::vector<EdgeRecord> records;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    auto s = detail::strip_cr(raw);
    if (detail::skip_line(s)) continue;
    auto f = split(s, '\t');
    if (f.size() != 5) {
      throw InputError(detail::where(source, line) + "expected 5 tab-separated fields, found " +
                       std::to_string(f.size()));
    }
    EdgeRecord r;
    r.layer_u = detail::parse_layer(f[0], source, line);
    r.node_u = std::string(f[1]);
    r.layer_v = detail::parse_layer(f[2], source, line);
    r.node_v = std::string(f[3]);
    r.weight = detail::parse_weight(f[4], source, line);
    if (r.node_u.empty() || r.node_v.empty()) throw InputError(detail::where(source, line) + "empty node id");
    records.push_back(std::move(r));
  }
  return records;
}

inline MultilayerNetwork build_from_records(const std::vector<EdgeRecord>& records, CouplingMode coupling,
                                            const std::string& source) {
  std::size_t layers = 0;
  for (const auto& r : records) layers = std::max<std::size_t>({layers, r.layer_u + 1u, r.layer_v + 1u});
  if (layers == 0) throw InputError(source + ": no edge records");
  NetworkBuilder builder(layers, coupling);
  std::size_t line = 0;
  for (const auto& r : records) {
    ++line;
    try {
      builder.add_edge(r);
    } catch (const InputError& e) {
      throw InputError(source + ": record " + std::to_string(line) + ": " + e.what());
    }
  }
  return std::move(builder).build();
}

inline MultilayerNetwork load_edge_list(const fs::path& path, CouplingMode coupling = CouplingMode::explicit_edges) {
  auto in = detail::open_input(path);
  return build_from_records(read_edge_records(in, path.string()), coupling, path.string());
}

/// Directory of layer_0.tsv, layer_1.tsv, ... holding `node_u node_v weight`
/// rows. Layer files must be numbered contiguously from 0; identity coupling.
inline MultilayerNetwork load_layer_directory(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw InputError("'" + dir.string() + "' is not a directory");
  std::size_t layers = 0;
  while (fs::exists(dir / ("layer_" + std::to_string(layers) + ".tsv"))) ++layers;
  if (layers == 0) throw InputError("'" + dir.string() + "' contains no layer_0.tsv");
  NetworkBuilder builder(layers, CouplingMode::identity);
  for (std::size_t l = 0; l < layers; ++l) {
    const fs::path path = dir / ("layer_" + std::to_string(l) + ".tsv");
    const std::string source = path.string();
    auto in = detail::open_input(path);
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
      ++line;
      auto s = detail::strip_cr(raw);
      if (detail::skip_line(s)) continue;
      auto f = split(s, '\t');
      if (f.size() != 3) {
        throw InputError(detail::where(source, line) + "expected 3 tab-separated fields, found " +
                         std::to_string(f.size()));
      }
      if (f[0].empty() || f[1].empty()) throw InputError(detail::where(source, line) + "empty node id");
      const double w = detail::parse_weight(f[2], source, line);
      try {
        builder.add_edge({static_cast<LayerIndex>(l), std::string(f[0]), static_cast<LayerIndex>(l),
                          std::string(f[1]), w});
      } catch (const InputError& e) {
        throw InputError(detail::where(source, line) + e.what());
      }
    }
  }
  return std::move(builder).build();
}

// Picks the directory reader for directories and the edge-list reader otherwise.
inline MultilayerNetwork load_network(const fs::path& path, bool identity_coupling) {
  if (fs::is_directory(path)) return load_layer_directory(path);
  return load_edge_list(path, identity_coupling ? CouplingMode::identity : CouplingMode::explicit_edges);
}

inline void write_layer_directory(const MultilayerNetwork& net, const fs::path& dir) {
  fs::create_directories(dir);
  const auto& nodes = net.nodes();
  for (LayerIndex l = 0; l < net.num_layers(); ++l) {
    auto out = detail::open_output(dir / ("layer_" + std::to_string(l) + ".tsv"));
    for (const auto& e : net.layer_edges(l)) {
      out << nodes.id(e.u) << '\t' << nodes.id(e.v) << '\t' << format_double(e.weight) << '\n';
    }
  }
}

inline void write_edge_list(const MultilayerNetwork& net, std::ostream& out) {
  const auto& nodes = net.nodes();
  for (LayerIndex l = 0; l < net.num_layers(); ++l)
    for (const auto& e : net.layer_edges(l))
      out << l << '\t' << nodes.id(e.u) << '\t' << l << '\t' << nodes.id(e.v) << '\t' << format_double(e.weight)
          << '\n';
  for (const auto& e : net.inter_edges())
    out << e.layer_u << '\t' << nodes.id(e.u) << '\t' << e.layer_v << '\t' << nodes.id(e.v) << '\t'
        << format_double(e.weight) << '\n';
}

// ------------------------------------------------------------------ labels

using LabelPairs = std::vector<std::pair<std::string, std::string>>;

// node_id,label rows; an initial "node_id,label" header is skipped.
inline LabelPairs read_labels(std::istream& in, const std::string& source = "<labels>") {
  LabelPairs out;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    auto s = detail::strip_cr(raw);
    if (detail::skip_line(s)) continue;
    if (line == 1 && s == "node_id,label") continue;
    auto comma = s.find(',');
    if (comma == std::string_view::npos || comma == 0) {
      throw InputError(detail::where(source, line) + "expected 'node_id,label'");
    }
    out.emplace_back(std::string(s.substr(0, comma)), std::string(s.substr(comma + 1)));
  }
  return out;
}

inline LabelPairs load_labels(const fs::path& path) {
  auto in = detail::open_input(path);
  return read_labels(in, path.string());
}

inline void write_labels(const fs::path& path, const LabelPairs& labels) {
  auto out = detail::open_output(path);
  out << "node_id,label\n";
  for (const auto& [node, label] : labels) out << node << ',' << label << '\n';
}

// --------------------------------------------------------------- embedding

struct EmbeddingTable {
  std::vector<std::string> ids;
  DenseMatrix features;
};

inline void write_embedding(std::ostream& out, const NodeRegistry& nodes, const DenseMatrix& f) {
  out << "node_id";
  for (std::size_t j = 0; j < f.cols(); ++j) out << "\tf_" << j;
  out << '\n';
  for (NodeIndex i = 0; i < f.rows(); ++i) {
    out << nodes.id(i);
    for (double x : f.row(i)) out << '\t' << format_double(x);
    out << '\n';
  }
}

inline void write_embedding(const fs::path& path, const NodeRegistry& nodes, const DenseMatrix& f) {
  auto out = detail::open_output(path);
  write_embedding(out, nodes, f);
}

inline EmbeddingTable read_embedding(std::istream& in, const std::string& source = "<embedding>") {
  std::string raw;
  std::size_t line = 0;
  std::size_t dim = 0;
  bool header = false;
  std::vector<double> values;
  EmbeddingTable t;
  while (std::getline(in, raw)) {
    ++line;
    auto s = detail::strip_cr(raw);
    if (detail::skip_line(s)) continue;
    auto f = split(s, '\t');
    if (!header) {
      if (f.empty() || f[0] != "node_id") throw InputError(detail::where(source, line) + "missing header");
      dim = f.size() - 1;
      header = true;
      continue;
    }
    if (f.size() != dim + 1) {
      throw InputError(detail::where(source, line) + "expected " + std::to_string(dim + 1) + " fields");
    }
    t.ids.emplace_back(f[0]);
    for (std::size_t j = 1; j <= dim; ++j) values.push_back(detail::parse_weight(f[j], source, line));
  }
  if (!header) throw InputError(source + ": empty embedding file");
  t.features = DenseMatrix(t.ids.size(), dim);
  std::copy(values.begin(), values.end(), t.features.data().begin());
  return t;
}

inline EmbeddingTable load_embedding(const fs::path& path) {
  auto in = detail::open_input(path);
  return read_embedding(in, path.string());
}

// ---------------------------------------------------------------- metadata

// Ordered key: value sidecar.
class Metadata {
 public:
  template <typename T>
  Metadata& set(const std::string& key, const T& value) {
    std::ostringstream s;
    if constexpr (std::is_floating_point_v<T>) {
      s << format_double(value);
    } else {
      s << value;
    }
    entries_.emplace_back(key, s.str());
    return *this;
  }

  const std::vector<std::pair<std::string, std::string>>& entries() const noexcept { return entries_; }

  void write(std::ostream& out) const {
    for (const auto& [k, v] : entries_) out << k << ": " << v << '\n';
  }
  void write(const fs::path& path) const {
    auto out = detail::open_output(path);
    write(out);
  }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

// ------------------------------------------------------------------- walks

inline void write_walks(std::ostream& out, const NeighborhoodCorpus& corpus) {
  for (const auto& walk : corpus.walks) {
    for (std::size_t i = 0; i < walk.size(); ++i) {
      if (i) out << ' ';
      out << corpus.nodes->id(walk[i]);
    }
    out << '\n';
  }
}

inline void write_walks(const fs::path& path, const NeighborhoodCorpus& corpus) {
  auto out = detail::open_output(path);
  write_walks(out, corpus);
}

}  // namespace mn2v::io
