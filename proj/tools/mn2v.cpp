#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mn2v/mn2v.hpp"

namespace fs = std::filesystem;
using namespace mn2v;

namespace {

struct Globals {
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  bool deterministic = false;

  std::size_t effective_threads() const { return deterministic ? 1 : std::max<std::size_t>(1, threads); }
};

std::string utc_now() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

std::ofstream open_or_throw(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  return out;
}

// Writes to `path`, or stdout for "-" / empty.
template <typename Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
  } else {
    auto out = open_or_throw(path);
    fn(out);
  }
}

// ------------------------------------------------------------------ embed

struct EmbedArgs {
  std::string network;
  std::string output;
  std::string metadata;
  std::string dump_walks;
  bool identity_coupling = false;
  bool r_sweep = false;
  EmbedOptions opt;
  std::size_t alias_cache_mb = 1024;
};

std::string with_suffix(const std::string& path, const std::string& tag) {
  fs::path p(path);
  return (p.parent_path() / (p.stem().string() + tag + p.extension().string())).string();
}

void embed_one(const EmbedArgs& a, const Globals& g, const MultilayerNetwork& net, double load_seconds,
               const std::string& output, const std::string& metadata, const std::string& dump_walks) {
  EmbedOptions opt = a.opt;
  opt.set_seed(g.seed);
  opt.set_threads(g.effective_threads());
  opt.walk.alias_cache_bytes = a.alias_cache_mb << 20;
  const std::string started = utc_now();
  auto run = run_embedding(net, opt, !dump_walks.empty());

  io::write_embedding(output, net.nodes(), run.model.input);
  if (!dump_walks.empty()) io::write_walks(dump_walks, run.corpus);

  std::string zero;
  for (NodeIndex v : run.model.zero_occurrence) {
    if (!zero.empty()) zero += ',';
    zero += net.nodes().id(v);
  }
  io::Metadata m;
  m.set("subcommand", "embed")
      .set("input", a.network)
      .set("output", output)
      .set("coupling", net.coupling() == CouplingMode::identity ? "identity" : "explicit")
      .set("nodes", net.num_nodes())
      .set("layers", net.num_layers())
      .set("duplicate_records", net.duplicate_records())
      .set("p", opt.walk.return_p)
      .set("q", opt.walk.inout_q)
      .set("r", opt.walk.layer_r)
      .set("l", opt.walk.walk_length)
      .set("s", opt.walk.walks_per_node)
      .set("a", opt.walk.min_samples_per_node)
      .set("D", opt.skipgram.dim)
      .set("k", opt.skipgram.context)
      .set("b", opt.skipgram.negatives)
      .set("lr", opt.skipgram.initial_lr)
      .set("epochs", opt.skipgram.epochs)
      .set("seed", g.seed)
      .set("threads", opt.walk.threads)
      .set("deterministic", g.deterministic ? "true" : "false")
      .set("walks", run.num_walks)
      .set("tokens", run.total_tokens)
      .set("cached_alias_tables", run.cache.cached_tables)
      .set("uncached_alias_builds", run.cache.uncached_builds)
      .set("zero_occurrence_nodes", zero.empty() ? std::string("none") : zero);
  for (std::size_t e = 0; e < run.model.epoch_loss.size(); ++e)
    m.set("epoch_loss_" + std::to_string(e), run.model.epoch_loss[e]);
  if (!dump_walks.empty()) m.set("walk_dump", dump_walks);
  m.set("started_utc", started)
      .set("finished_utc", utc_now())
      .set("seconds_load", load_seconds)
      .set("seconds_aggregate", run.seconds.aggregate)
      .set("seconds_walk", run.seconds.walk)
      .set("seconds_train", run.seconds.train);
  m.write(fs::path(metadata));
}

int cmd_embed(const EmbedArgs& a, const Globals& g) {
  const auto t0 = std::chrono::steady_clock::now();
  auto net = io::load_network(a.network, a.identity_coupling);
  const double load = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (net.duplicate_records() > 0) {
    std::cerr << "warning: " << net.duplicate_records() << " duplicate edge records (last write wins)\n";
  }
  const std::string meta = a.metadata.empty() ? a.output + ".meta" : a.metadata;
  if (!a.r_sweep) {
    embed_one(a, g, net, load, a.output, meta, a.dump_walks);
    return 0;
  }
  for (double r : {0.25, 0.5, 0.75}) {
    EmbedArgs ar = a;
    ar.opt.walk.layer_r = r;
    const std::string tag = "_r" + io::format_double(r);
    const std::string out = with_suffix(a.output, tag);
    embed_one(ar, g, net, load, out, a.metadata.empty() ? out + ".meta" : with_suffix(a.metadata, tag),
              a.dump_walks.empty() ? std::string() : with_suffix(a.dump_walks, tag));
  }
  return 0;
}

// --------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string model = "msbm";
  std::string output;
  std::size_t nodes = 264;
  std::size_t layers = 74;
  std::size_t communities = 2;
  double p_in = 0.49;
  double p_out = 0.0;
  double p_edge = 0.1;
  std::size_t noise_layers = 0;
  double noise_p_edge = -1.0;
};

int cmd_simulate(const SimulateArgs& a, const Globals& g) {
  MultilayerNetwork net;
  io::LabelPairs labels;
  io::Metadata m;
  m.set("subcommand", "simulate").set("model", a.model).set("nodes", a.nodes).set("layers", a.layers);
  if (a.model == "msbm") {
    PlantedPartitionSpec spec{a.nodes, a.layers, a.communities, a.p_in, a.p_out, g.seed};
    auto gen = gen_planted_partition(spec);
    net = std::move(gen.network);
    for (NodeIndex v = 0; v < net.num_nodes(); ++v) labels.emplace_back(net.nodes().id(v), std::to_string(gen.partition[v]));
    m.set("communities", a.communities).set("p_in", a.p_in).set("p_out", a.p_out);
  } else if (a.model == "er") {
    net = gen_multilayer_er(a.nodes, a.layers, a.p_edge, g.seed);
    m.set("p_edge", a.p_edge);
  } else {
    throw InputError("unknown model '" + a.model + "' (expected msbm or er)");
  }
  if (a.noise_layers > 0) {
    if (a.noise_p_edge < 0.0) throw InputError("--noise-p-edge is required with --noise-layers");
    net = add_noise_layers(net, a.noise_layers, a.noise_p_edge, substream_seed(g.seed, 0xb0153));
    m.set("noise_layers", a.noise_layers).set("noise_p_edge", a.noise_p_edge);
  }
  io::write_layer_directory(net, a.output);
  if (!labels.empty()) io::write_labels(fs::path(a.output) / "labels.csv", labels);
  m.set("seed", g.seed).set("mean_layer_density", mean_layer_density(net)).set("created_utc", utc_now());
  m.write(fs::path(a.output) / "manifest.txt");
  return 0;
}

// --------------------------------------------------------------- evaluate

struct EvaluateArgs {
  std::string task;
  std::vector<std::string> embeddings;
  std::vector<std::string> compare;
  std::string labels;
  std::string output;
  std::size_t clusters = 0;
  std::string method = "knn";
  std::size_t folds = 10;
  double alpha = 0.05;
};

struct LabeledFeatures {
  io::EmbeddingTable table;
  NodeRegistry registry;
  LabelSet labels;
};

LabeledFeatures load_labeled(const std::string& embedding, const io::LabelPairs& pairs) {
  LabeledFeatures lf;
  lf.table = io::load_embedding(embedding);
  for (const auto& id : lf.table.ids) lf.registry.intern(id);
  if (lf.registry.size() != lf.table.ids.size()) throw InputError(embedding + ": duplicate node ids");
  lf.labels = LabelSet::from_pairs(lf.registry, pairs);
  return lf;
}

// Rows restricted to labeled nodes, with matching compact labels.
std::pair<DenseMatrix, std::vector<std::size_t>> labeled_rows(const LabeledFeatures& lf) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < lf.labels.size(); ++i)
    if (lf.labels.row_category[i] >= 0) rows.push_back(i);
  DenseMatrix x(rows.size(), lf.table.features.cols());
  std::vector<std::size_t> y;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy(lf.table.features.row(rows[i]).begin(), lf.table.features.row(rows[i]).end(), x.row(i).begin());
    y.push_back(static_cast<std::size_t>(lf.labels.row_category[rows[i]]));
  }
  return {std::move(x), std::move(y)};
}

int cmd_evaluate(const EvaluateArgs& a, const Globals& g) {
  const auto pairs = io::load_labels(a.labels);
  if (a.embeddings.empty()) throw InputError("--embedding is required");
  std::ostringstream report;
  report << "task\tkey\tmetric\tvalue\n";
  auto row = [&](const std::string& key, const std::string& metric, double v) {
    report << a.task << '\t' << key << '\t' << metric << '\t' << io::format_double(v) << '\n';
  };

  if (a.task == "cluster") {
    auto lf = load_labeled(a.embeddings.front(), pairs);
    auto [x, truth] = labeled_rows(lf);
    const std::size_t k = a.clusters ? a.clusters : lf.labels.categories.size();
    auto km = kmeans(x, k, g.seed);
    for (std::size_t c = 0; c < k; ++c) {
      std::size_t size = 0;
      for (auto l : km.labels) size += l == c;
      row("cluster_" + std::to_string(c), "size", static_cast<double>(size));
    }
    row("all", "inertia", km.inertia);
    row("all", "ari", adjusted_rand(km.labels, truth));
  } else if (a.task == "classify") {
    auto lf = load_labeled(a.embeddings.front(), pairs);
    double total = 0.0;
    for (std::size_t c = 0; c < lf.labels.categories.size(); ++c) {
      const double auc = one_vs_all_auc(lf.table.features, lf.labels, static_cast<int>(c), 0.8, substream_seed(g.seed, c));
      total += auc;
      row(lf.labels.categories[c], "auc", auc);
    }
    row("all", "mean_auc", total / static_cast<double>(lf.labels.categories.size()));
  } else if (a.task == "msd") {
    // One MSD profile per embedding replicate; Welch test per region when a
    // comparison group is given.
    auto profiles = [&](const std::vector<std::string>& files, std::vector<std::string>& categories) {
      std::vector<std::vector<double>> out;
      for (const auto& f : files) {
        auto lf = load_labeled(f, pairs);
        if (categories.empty()) categories = lf.labels.categories;
        if (lf.labels.categories != categories) throw InputError(f + ": label categories differ between embeddings");
        out.push_back(msd_profile(lf.table.features, lf.labels));
      }
      return out;
    };
    std::vector<std::string> categories;
    auto first = profiles(a.embeddings, categories);
    auto second = profiles(a.compare, categories);
    for (std::size_t c = 0; c < categories.size(); ++c) {
      std::vector<double> s1, s2;
      for (const auto& p : first) s1.push_back(p[c]);
      for (const auto& p : second) s2.push_back(p[c]);
      double m1 = 0.0;
      for (double v : s1) m1 += v / static_cast<double>(s1.size());
      row(categories[c], "msd_group1", m1);
      if (second.empty()) continue;
      double m2 = 0.0;
      for (double v : s2) m2 += v / static_cast<double>(s2.size());
      row(categories[c], "msd_group2", m2);
      auto t = msd_group_test(s1, s2, a.alpha);
      row(categories[c], "difference", t.difference);
      row(categories[c], "ci_low", t.ci_low);
      row(categories[c], "ci_high", t.ci_high);
      row(categories[c], "t", t.t);
      row(categories[c], "df", t.df);
      row(categories[c], "p_value", t.p_value);
      if (t.zero_variance) row(categories[c], "zero_variance", 1.0);
    }
  } else if (a.task == "subject-classify") {
    auto lf = load_labeled(a.embeddings.front(), pairs);
    auto [x, cls] = labeled_rows(lf);
    if (lf.labels.categories.size() != 2) throw InputError("subject classification needs exactly two labels");
    std::vector<std::uint8_t> y(cls.begin(), cls.end());
    SubjectClassifier method;
    if (a.method == "knn") {
      method = SubjectClassifier::knn;
    } else if (a.method == "logistic") {
      method = SubjectClassifier::logistic;
    } else {
      throw InputError("unknown method '" + a.method + "' (expected knn or logistic)");
    }
    auto r = subject_classify(x, y, method, a.folds, g.seed);
    for (std::size_t f = 0; f < r.fold_accuracy.size(); ++f) row("fold_" + std::to_string(f), "accuracy", r.fold_accuracy[f]);
    row("all", "mean_accuracy", r.mean_accuracy);
    row("all", "standard_error", r.standard_error);
    if (method == SubjectClassifier::knn) row("all", "best_k", static_cast<double>(r.best_k));
  } else {
    throw InputError("unknown task '" + a.task + "' (expected cluster, classify, msd or subject-classify)");
  }
  with_output(a.output, [&](std::ostream& out) { out << report.str(); });
  return 0;
}

// ----------------------------------------------------------- oracle-check

struct OracleArgs {
  std::string network;
  bool identity_coupling = false;
  std::string graph_id;
  std::string output;
  double p = 1.0, q = 1.0, r = 1.0;
  std::size_t k = 2;
  std::vector<std::size_t> lengths{1000, 10000, 100000, 1000000};
  bool per_entry = false;
};

int cmd_oracle(const OracleArgs& a, const Globals& g) {
  auto net = io::load_network(a.network, a.identity_coupling);
  auto agg = adjusted_aggregate(net, a.r);
  detail::require_connected(agg);
  if (detail::is_bipartite(agg)) throw InputError("aggregate is bipartite; the co-occurrence ratio does not converge");
  auto kernel = second_order_kernel(agg, a.p, a.q);
  auto stationary = edge_stationary(kernel);
  auto limit = limit_matrix_general(kernel, stationary, a.k);
  const std::string id = a.graph_id.empty() ? fs::path(a.network).stem().string() : a.graph_id;

  WalkConfig cfg;
  cfg.return_p = a.p;
  cfg.inout_q = a.q;
  cfg.layer_r = a.r;
  cfg.seed = g.seed;
  TransitionTables tables(agg, cfg);

  std::ostringstream report;
  report << "graph_id\tl\tmax_relative_error";
  if (a.per_entry) report << "\tw\tc\tlimit\tempirical";
  report << '\n';
  for (std::size_t len : a.lengths) {
    Rng rng = substream(g.seed, 0x04ac1e, len);
    NeighborhoodCorpus corpus;
    corpus.num_nodes = agg.num_nodes();
    corpus.nodes = agg.node_registry();
    corpus.walks.push_back(sample_walk(tables, 0, len, rng));
    corpus.total_tokens = len;
    auto emp = empirical_cooccurrence(corpus, a.k).ratio();
    double worst = 0.0;
    for (std::size_t i = 0; i < limit.rows(); ++i)
      for (std::size_t j = 0; j < limit.cols(); ++j) {
        if (!(limit(i, j) > 0.0)) continue;
        const double e = std::isnan(emp(i, j)) ? 0.0 : emp(i, j);
        worst = std::max(worst, std::abs(e - limit(i, j)) / limit(i, j));
      }
    report << id << '\t' << len << '\t' << io::format_double(worst);
    if (a.per_entry) report << "\t\t\t\t";
    report << '\n';
    if (!a.per_entry) continue;
    for (std::size_t i = 0; i < limit.rows(); ++i)
      for (std::size_t j = 0; j < limit.cols(); ++j)
        report << id << '\t' << len << "\t\t" << agg.nodes().id(i) << '\t' << agg.nodes().id(j) << '\t'
               << io::format_double(limit(i, j)) << '\t' << io::format_double(emp(i, j)) << '\n';
  }
  with_output(a.output, [&](std::ostream& out) { out << report.str(); });
  return 0;
}

// ------------------------------------------------------------------ sweep

struct SweepArgs {
  std::string experiment;
  std::string output;
  SweepOptions opt;
  EmbedOptions embed;
};

int cmd_sweep(SweepArgs a, const Globals& g) {
  a.opt.experiment = parse_experiment(a.experiment);
  a.opt.seed = g.seed;
  a.opt.embed = a.embed;
  a.opt.embed.set_threads(g.effective_threads());
  std::ostringstream report;
  report << "experiment\tseries\tparameter\tvalue\tmetric\treps\tmean\tsd\n";
  auto cells = run_sweep(a.opt, [&](const SweepCell& c) {
    std::cerr << a.experiment << ' ' << c.series << ' ' << c.parameter << '=' << c.value << ' ' << c.metric << ' '
              << c.mean() << '\n';
  });
  for (const auto& c : cells) {
    report << a.experiment << '\t' << c.series << '\t' << c.parameter << '\t' << io::format_double(c.value) << '\t'
           << c.metric << '\t' << c.samples.size() << '\t' << io::format_double(c.mean()) << '\t'
           << io::format_double(c.sd()) << '\n';
  }
  with_output(a.output, [&](std::ostream& out) { out << report.str(); });
  return 0;
}

void add_walk_options(CLI::App* cmd, EmbedOptions& o) {
  cmd->add_option("-p,--return-p", o.walk.return_p, "Return parameter p")->capture_default_str();
  cmd->add_option("-q,--inout-q", o.walk.inout_q, "In-out parameter q")->capture_default_str();
  cmd->add_option("-r,--layer-r", o.walk.layer_r, "Layer walk parameter r")->capture_default_str();
  cmd->add_option("-l,--walk-length", o.walk.walk_length, "Nodes per walk")->capture_default_str();
  cmd->add_option("-s,--walks-per-node", o.walk.walks_per_node, "Walks started at each node")->capture_default_str();
  cmd->add_option("-a,--min-samples", o.walk.min_samples_per_node, "Minimum walks per node")->capture_default_str();
  cmd->add_option("-D,--dim", o.skipgram.dim, "Feature dimension")->capture_default_str();
  cmd->add_option("-k,--context", o.skipgram.context, "Context window radius")->capture_default_str();
  cmd->add_option("-b,--negatives", o.skipgram.negatives, "Negative samples per pair")->capture_default_str();
  cmd->add_option("--lr", o.skipgram.initial_lr, "Initial learning rate")->capture_default_str();
  cmd->add_option("--epochs", o.skipgram.epochs, "Training epochs")->capture_default_str();
  cmd->add_option("--dense-threshold", o.dense_threshold, "Aggregate density above which a dense copy is kept")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multilayer node embeddings via biased random walks and skip-gram"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  auto* seed_opt = app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--threads", g.threads, "Worker threads")->capture_default_str();
  app.add_flag("--deterministic", g.deterministic, "Single-threaded, reproducible execution");

  EmbedArgs ea;
  auto* embed = app.add_subcommand("embed", "Learn node features from a multilayer network");
  embed->add_option("network", ea.network, "Edge-list TSV or directory of layer_<i>.tsv")->required();
  embed->add_option("-o,--output", ea.output, "Embedding TSV")->required();
  embed->add_option("--metadata", ea.metadata, "Metadata sidecar (default <output>.meta)");
  embed->add_option("--dump-walks", ea.dump_walks, "Write the walk corpus here");
  embed->add_flag("--identity-coupling", ea.identity_coupling, "Couple copies of each node across all layers");
  embed->add_flag("--r-sweep", ea.r_sweep, "Embed for r = 0.25, 0.5 and 0.75");
  embed->add_option("--alias-cache-mb", ea.alias_cache_mb, "Second-order alias cache budget")->capture_default_str();
  add_walk_options(embed, ea.opt);

  SimulateArgs sa;
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic multilayer network");
  simulate->add_option("--model", sa.model, "msbm or er")->capture_default_str();
  simulate->add_option("-o,--output", sa.output, "Output directory")->required();
  simulate->add_option("-n,--nodes", sa.nodes)->capture_default_str();
  simulate->add_option("-m,--layers", sa.layers)->capture_default_str();
  simulate->add_option("-c,--communities", sa.communities)->capture_default_str();
  simulate->add_option("--p-in", sa.p_in)->capture_default_str();
  simulate->add_option("--p-out", sa.p_out)->capture_default_str();
  simulate->add_option("--p-edge", sa.p_edge, "Edge probability of the er model")->capture_default_str();
  simulate->add_option("--noise-layers", sa.noise_layers, "Extra random layers")->capture_default_str();
  simulate->add_option("--noise-p-edge", sa.noise_p_edge, "Edge probability of the noise layers");

  EvaluateArgs va;
  auto* evaluate = app.add_subcommand("evaluate", "Score embeddings against labels");
  evaluate->add_option("--task", va.task)->required()->check(CLI::IsMember({"cluster", "classify", "msd", "subject-classify"}));
  evaluate->add_option("--embedding", va.embeddings, "Embedding TSV (repeat for msd replicates)")->required();
  evaluate->add_option("--compare", va.compare, "Second-group embedding replicates for msd");
  evaluate->add_option("--labels", va.labels, "node_id,label CSV")->required();
  evaluate->add_option("-o,--output", va.output, "Report TSV (default stdout)");
  evaluate->add_option("--clusters", va.clusters, "k-means clusters (default: number of labels)");
  evaluate->add_option("--method", va.method, "knn or logistic")->capture_default_str();
  evaluate->add_option("--folds", va.folds)->capture_default_str();
  evaluate->add_option("--alpha", va.alpha)->capture_default_str();

  OracleArgs oa;
  auto* oracle = app.add_subcommand("oracle-check", "Compare walk co-occurrence with its closed-form limit");
  oracle->add_option("network", oa.network)->required();
  oracle->add_flag("--identity-coupling", oa.identity_coupling);
  oracle->add_option("--graph-id", oa.graph_id);
  oracle->add_option("-o,--output", oa.output, "Report TSV (default stdout)");
  oracle->add_option("-p", oa.p)->capture_default_str();
  oracle->add_option("-q", oa.q)->capture_default_str();
  oracle->add_option("-r", oa.r)->capture_default_str();
  oracle->add_option("-k,--context", oa.k)->capture_default_str();
  oracle->add_option("--lengths", oa.lengths)->delimiter(',')->capture_default_str();
  oracle->add_flag("--per-entry", oa.per_entry);

  SweepArgs wa;
  auto* sweep = app.add_subcommand("sweep", "Simulation sweeps");
  sweep->add_option("experiment", wa.experiment, "snr, layers, context or scale")->required();
  sweep->add_option("-o,--output", wa.output, "Metrics TSV (default stdout)");
  sweep->add_option("--reps", wa.opt.reps)->capture_default_str();
  sweep->add_option("-n,--nodes", wa.opt.nodes)->capture_default_str();
  sweep->add_option("--p-in", wa.opt.p_in)->capture_default_str();
  sweep->add_option("--communities", wa.opt.communities)->delimiter(',');
  sweep->add_option("--p-out", wa.opt.p_out)->delimiter(',');
  sweep->add_option("--layers", wa.opt.layers)->delimiter(',');
  sweep->add_option("--contexts", wa.opt.contexts)->delimiter(',');
  sweep->add_option("--p-out-fraction", wa.opt.p_out_fraction)->delimiter(',');
  add_walk_options(sweep, wa.embed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ErrorKind::input);
  }

  try {
    const bool needs_seed = embed->parsed() || simulate->parsed() || sweep->parsed();
    if (needs_seed && seed_opt->count() == 0) throw InputError("--seed is required");
    if (embed->parsed()) return cmd_embed(ea, g);
    if (simulate->parsed()) return cmd_simulate(sa, g);
    if (evaluate->parsed()) return cmd_evaluate(va, g);
    if (oracle->parsed()) return cmd_oracle(oa, g);
    if (sweep->parsed()) return cmd_sweep(wa, g);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::bad_alloc&) {
    std::cerr << "error: out of memory\n";
    return static_cast<int>(ErrorKind::resource);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(ErrorKind::input);
  }
  return 0;
}
