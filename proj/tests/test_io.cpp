#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "mn2v/mn2v.hpp"
#include "reference.hpp"

using namespace mn2v;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("mn2v_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

std::string error_of(auto&& f) {
  try {
    f();
  } catch (const InputError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(EdgeRecords, ParsesCommentsAndCrlf) {
  std::istringstream in("# header comment\n0\ta\t0\tb\t0.5\r\n\n1\ta\t1\tb\t0.3\n");
  auto r = io::read_edge_records(in);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[1].layer_u, 1u);
  EXPECT_EQ(r[1].node_v, "b");
  EXPECT_EQ(r[0].weight, 0.5);
}

TEST(EdgeRecords, ErrorsCarryLineNumbers) {
  std::istringstream fields("0\ta\t0\tb\t1\n0\ta\t0\tb\n");
  EXPECT_NE(error_of([&] { io::read_edge_records(fields, "net.tsv"); }).find("net.tsv:2"), std::string::npos);
  std::istringstream weight("0\ta\t0\tb\tabc\n");
  EXPECT_NE(error_of([&] { io::read_edge_records(weight, "net.tsv"); }).find("net.tsv:1"), std::string::npos);
  std::istringstream layer("x\ta\t0\tb\t1\n");
  EXPECT_THROW(io::read_edge_records(layer), InputError);
}

TEST(EdgeRecords, NegativeWeightNamesRecord) {
  std::istringstream in("0\ta\t0\tb\t1\n0\tb\t0\tc\t-2\n");
  auto records = io::read_edge_records(in, "net.tsv");
  auto msg = error_of([&] { io::build_from_records(records, CouplingMode::explicit_edges, "net.tsv"); });
  EXPECT_NE(msg.find("record 2"), std::string::npos);
  EXPECT_NE(msg.find("negative weight"), std::string::npos);
}

TEST(EdgeList, RoundTrip) {
  auto dir = scratch_dir("edges");
  // an edge list cannot express empty trailing layers or isolated nodes
  std::size_t checked = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    auto c = ref::random_case(s, 20, 4);
    if (c.net.num_intra_edges() == 0 || c.net.layer_edges(static_cast<LayerIndex>(c.layers - 1)).empty()) continue;
    ++checked;
    const auto path = dir / "net.tsv";
    {
      std::ofstream out(path);
      io::write_edge_list(c.net, out);
    }
    auto back = io::load_edge_list(path, c.coupling);
    ASSERT_EQ(back.num_layers(), c.layers);
    // node order may differ after a round trip, so compare by id
    auto a = adjusted_aggregate(c.net, 0.5), b = adjusted_aggregate(back, 0.5);
    for (NodeIndex u = 0; u < a.num_nodes(); ++u)
      for (NodeIndex v : a.neighbors(u)) {
        auto bu = back.nodes().find(c.net.nodes().id(u)), bv = back.nodes().find(c.net.nodes().id(v));
        ASSERT_TRUE(bu && bv);
        EXPECT_EQ(a.weight(u, v), b.weight(*bu, *bv));
      }
    EXPECT_EQ(back.num_intra_edges(), c.net.num_intra_edges());
  }
  EXPECT_GT(checked, 5u);
}

TEST(LayerDirectory, LoadsIdentityCoupling) {
  auto dir = scratch_dir("layers");
  write_file(dir / "layer_0.tsv", "a\tb\t0.5\n");
  write_file(dir / "layer_1.tsv", "# second layer\na\tb\t0.3\n");
  auto net = io::load_network(dir, false);
  EXPECT_EQ(net.num_layers(), 2u);
  EXPECT_EQ(net.coupling(), CouplingMode::identity);
  EXPECT_DOUBLE_EQ(degree(adjusted_aggregate(net, 1.0), "a"), 2.8);
}

TEST(LayerDirectory, Errors) {
  auto dir = scratch_dir("layers_bad");
  EXPECT_THROW(io::load_layer_directory(dir), InputError);
  write_file(dir / "layer_0.tsv", "a\tb\n");
  EXPECT_NE(error_of([&] { io::load_layer_directory(dir); }).find("layer_0.tsv:1"), std::string::npos);
  EXPECT_THROW(io::load_layer_directory(dir / "missing"), InputError);
}

TEST(LayerDirectory, RoundTrip) {
  auto g = gen_planted_partition({30, 3, 2, 0.5, 0.1, 1});
  auto dir = scratch_dir("layers_rt");
  io::write_layer_directory(g.network, dir);
  auto back = io::load_layer_directory(dir);
  EXPECT_EQ(back.num_layers(), 3u);
  EXPECT_EQ(back.num_intra_edges(), g.network.num_intra_edges());
}

TEST(Labels, HeaderAndErrors) {
  std::istringstream in("node_id,label\na,x\nb,y\n");
  auto l = io::read_labels(in);
  ASSERT_EQ(l.size(), 2u);
  EXPECT_EQ(l[1].second, "y");
  std::istringstream bad("a,x\nb\n");
  EXPECT_NE(error_of([&] { io::read_labels(bad, "l.csv"); }).find("l.csv:2"), std::string::npos);
}

TEST(Labels, RoundTrip) {
  auto dir = scratch_dir("labels");
  io::LabelPairs labels{{"n1", "0"}, {"n2", "1"}};
  io::write_labels(dir / "l.csv", labels);
  EXPECT_EQ(io::load_labels(dir / "l.csv"), labels);
}

TEST(Embedding, HeaderAndExactRoundTrip) {
  NodeRegistry nodes;
  nodes.intern("alpha");
  nodes.intern("beta");
  DenseMatrix f(2, 3);
  f(0, 0) = 0.1;
  f(0, 1) = -1.0 / 3.0;
  f(0, 2) = 1e-300;
  f(1, 0) = 12345.678901234567;
  f(1, 1) = std::nextafter(1.0, 2.0);
  std::ostringstream out;
  io::write_embedding(out, nodes, f);
  const std::string text = out.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "node_id\tf_0\tf_1\tf_2");
  std::istringstream in(text);
  auto t = io::read_embedding(in);
  EXPECT_EQ(t.ids, (std::vector<std::string>{"alpha", "beta"}));
  EXPECT_EQ(t.features, f);
}

TEST(Embedding, Errors) {
  std::istringstream no_header("a\t1\n");
  EXPECT_THROW(io::read_embedding(no_header), InputError);
  std::istringstream ragged("node_id\tf_0\tf_1\na\t1\t2\nb\t1\n");
  EXPECT_NE(error_of([&] { io::read_embedding(ragged, "e.tsv"); }).find("e.tsv:3"), std::string::npos);
}

TEST(Walks, SpaceSeparatedIds) {
  auto net = ref::single_layer({{"a", "b", 1.0}});
  auto corpus = generate_corpus(adjusted_aggregate(net, 1.0), WalkConfig{});
  std::ostringstream out;
  io::write_walks(out, corpus);
  std::istringstream in(out.str());
  std::string line;
  std::size_t count = 0;
  while (std::getline(in, line)) {
    ++count;
    EXPECT_TRUE(line.starts_with("a b a") || line.starts_with("b a b"));
  }
  EXPECT_EQ(count, corpus.walks.size());
}

TEST(Metadata, OrderedKeyValue) {
  io::Metadata m;
  m.set("p", 1.0).set("q", 0.5).set("name", std::string("x"));
  std::ostringstream out;
  m.write(out);
  EXPECT_EQ(out.str(), "p: 1\nq: 0.5\nname: x\n");
}
