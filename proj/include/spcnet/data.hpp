#pragma once

#include "spcnet/graph.hpp"
#include "spcnet/random.hpp"
#include "spcnet/types.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace spcnet {

// ---------------------------------------------------------------------------
// Dataset directories
//
//   edges.txt     one undirected edge per line: "<i> <j>" (0-based); '#' comments
//   features.txt  whitespace-separated matrix, one node per row
//   labels.txt    one integer class id per line
//   meta.json     {"name": str, "C": int, "d": int}
// ---------------------------------------------------------------------------

struct DatasetMeta {
  std::string name;
  int num_classes = 0;
  Index feature_dim = 0;
};

namespace detail {

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

inline bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

inline std::vector<Real> parse_reals(std::string_view line, const std::string& where) {
  std::vector<Real> out;
  std::string buf(line);
  const char* p = buf.c_str();
  char* end = nullptr;
  while (true) {
    while (*p && std::isspace(static_cast<unsigned char>(*p))) ++p;
    if (!*p) break;
    const Real v = std::strtod(p, &end);
    if (end == p) throw Error("malformed number in " + where);
    out.push_back(v);
    p = end;
  }
  return out;
}

inline long long parse_int(std::string_view tok, const std::string& where) {
  std::string s(tok);
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0') throw Error("malformed integer '" + s + "' in " + where);
  return v;
}

}  // namespace detail

inline DatasetMeta read_meta(const std::filesystem::path& dir) {
  const auto j = nlohmann::json::parse(detail::read_file(dir / "meta.json"));
  DatasetMeta m;
  m.name = j.value("name", dir.filename().string());
  m.num_classes = j.at("C").get<int>();
  m.feature_dim = j.at("d").get<Index>();
  return m;
}

inline void row_normalize_l1(Matrix& x) {
  for (Index i = 0; i < x.rows(); ++i) {
    const Real s = x.row(i).cwiseAbs().sum();
    if (s > 0.0) x.row(i) /= s;
  }
}

/// Loads a dataset directory. Duplicate edges (either orientation) are
/// dropped; self-loops are rejected.
inline Graph load_dataset(const std::filesystem::path& dir, bool normalize_features = true) {
  if (!std::filesystem::is_directory(dir)) throw Error("dataset directory not found: " + dir.string());
  for (const char* f : {"edges.txt", "features.txt", "labels.txt", "meta.json"}) {
    if (!std::filesystem::exists(dir / f)) throw Error("missing dataset file: " + (dir / f).string());
  }
  const DatasetMeta meta = read_meta(dir);

  const std::string ftext = detail::read_file(dir / "features.txt");
  std::vector<std::vector<Real>> rows;
  for (auto line : detail::split_lines(ftext)) {
    if (detail::is_blank(line)) continue;
    rows.push_back(detail::parse_reals(line, "features.txt"));
  }
  const Index m = static_cast<Index>(rows.size());
  Matrix x(m, meta.feature_dim);
  for (Index i = 0; i < m; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    if (static_cast<Index>(r.size()) != meta.feature_dim) {
      throw Error("features.txt row " + std::to_string(i) + " has " + std::to_string(r.size()) +
                  " columns, meta.json says d=" + std::to_string(meta.feature_dim));
    }
    for (Index c = 0; c < meta.feature_dim; ++c) x(i, c) = r[static_cast<std::size_t>(c)];
  }
  rows.clear();

  std::vector<int> labels;
  const std::string ltext = detail::read_file(dir / "labels.txt");
  for (auto line : detail::split_lines(ltext)) {
    if (detail::is_blank(line)) continue;
    auto b = line.find_first_not_of(" \t");
    auto e = line.find_last_not_of(" \t");
    labels.push_back(static_cast<int>(detail::parse_int(line.substr(b, e - b + 1), "labels.txt")));
  }
  if (static_cast<Index>(labels.size()) != m) {
    throw Error("labels.txt has " + std::to_string(labels.size()) + " entries but features.txt has " +
                std::to_string(m) + " rows");
  }

  std::vector<Edge> edges;
  const std::string etext = detail::read_file(dir / "edges.txt");
  for (auto line : detail::split_lines(etext)) {
    auto b = line.find_first_not_of(" \t");
    if (b == std::string_view::npos || line[b] == '#') continue;
    std::istringstream ss{std::string(line)};
    std::string a, c;
    if (!(ss >> a >> c)) throw Error("malformed edge line in edges.txt");
    edges.emplace_back(detail::parse_int(a, "edges.txt"), detail::parse_int(c, "edges.txt"));
  }

  if (normalize_features) row_normalize_l1(x);
  return Graph(m, std::move(edges), std::move(x), std::move(labels), meta.num_classes);
}

/// Writes a graph in the dataset directory layout. Features use 17
/// significant digits so a reload is exact.
inline void write_dataset(const std::filesystem::path& dir, const Graph& g, const std::string& name) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "edges.txt");
    for (const auto& [a, b] : g.edges()) out << a << ' ' << b << '\n';
  }
  {
    std::ofstream out(dir / "features.txt");
    out.precision(17);
    for (Index i = 0; i < g.num_nodes(); ++i) {
      for (Index c = 0; c < g.feature_dim(); ++c) out << (c ? " " : "") << g.features()(i, c);
      out << '\n';
    }
  }
  {
    std::ofstream out(dir / "labels.txt");
    for (int y : g.labels()) out << y << '\n';
  }
  std::ofstream(dir / "meta.json") << nlohmann::json{{"name", name}, {"C", g.num_classes()}, {"d", g.feature_dim()}}.dump(2)
                                   << '\n';
}

// ---------------------------------------------------------------------------
// Two-block symmetric stochastic block model
// ---------------------------------------------------------------------------

struct SbmConfig {
  Index nodes = 500;
  Real p = 0.2;
  Real q = 0.05;
  int feature_dim = 2;
  std::vector<Real> mu0 = {1.0, 1.0};  // block 1 mean is -mu0
  Real sigma = 1.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (nodes < 2 || nodes % 2 != 0) throw Error("SBM node count must be even and >= 2");
    if (!(p >= 0.0 && p <= 1.0 && q >= 0.0 && q <= 1.0)) throw Error("SBM probabilities must lie in [0, 1]");
    if (feature_dim < 1) throw Error("SBM feature_dim must be positive");
    if (static_cast<int>(mu0.size()) != feature_dim) throw Error("SBM mu0 length must equal feature_dim");
    if (!(sigma >= 0.0)) throw Error("SBM sigma must be non-negative");
  }
};

/// Nodes [0, w/2) form block 0, the rest block 1. Each pair i < j is joined
/// with probability p within a block and q across blocks. Features of a node
/// in block b are drawn from N(±mu0, sigma² I); labels are block ids.
inline Graph generate_sbm(const SbmConfig& cfg) {
  cfg.validate();
  Rng gen = make_rng(cfg.seed, Stream::Sbm);
  const Index w = cfg.nodes;
  const Index half = w / 2;
  std::vector<Edge> edges;
  for (Index i = 0; i < w; ++i) {
    for (Index j = i + 1; j < w; ++j) {
      const Real prob = ((i < half) == (j < half)) ? cfg.p : cfg.q;
      if (uniform01(gen) < prob) edges.emplace_back(i, j);
    }
  }
  std::normal_distribution<Real> normal(0.0, 1.0);
  Matrix x(w, cfg.feature_dim);
  std::vector<int> labels(static_cast<std::size_t>(w));
  for (Index i = 0; i < w; ++i) {
    const int block = i < half ? 0 : 1;
    const Real sign = block == 0 ? 1.0 : -1.0;
    labels[static_cast<std::size_t>(i)] = block;
    for (int c = 0; c < cfg.feature_dim; ++c) {
      x(i, c) = sign * cfg.mu0[static_cast<std::size_t>(c)] + cfg.sigma * normal(gen);
    }
  }
  return Graph(w, std::move(edges), std::move(x), std::move(labels), 2);
}

// ---------------------------------------------------------------------------
// Splits
// ---------------------------------------------------------------------------

struct SplitSpec {
  std::vector<Index> train_idx;
  std::vector<Index> val_idx;
  std::vector<Index> test_idx;

  /// Disjoint and within [0, m).
  bool valid(Index m) const {
    std::vector<char> seen(static_cast<std::size_t>(m), 0);
    for (const auto* set : {&train_idx, &val_idx, &test_idx}) {
      for (Index i : *set) {
        if (i < 0 || i >= m || seen[static_cast<std::size_t>(i)]) return false;
        seen[static_cast<std::size_t>(i)] = 1;
      }
    }
    return true;
  }
};

enum class SplitKind { SparseClassic, SparseRatio, DenseRandom, Fixed4832, Ratio };

/// Seeds behind the ten FIXED_4832 splits; split i is a 48/32/20 random
/// permutation drawn with kFixedSplitSeeds[i].
inline constexpr std::array<std::uint64_t, 10> kFixedSplitSeeds = {
    4832001, 4832002, 4832003, 4832004, 4832005, 4832006, 4832007, 4832008, 4832009, 4832010};

struct SplitProtocol {
  SplitKind kind = SplitKind::DenseRandom;
  int per_class = 20;       // SparseClassic
  Index num_val = 500;      // SparseClassic
  Index num_test = 1000;    // SparseClassic
  Real train_frac = 0.6;    // Ratio
  Real val_frac = 0.2;      // Ratio
  int fixed_index = 0;      // Fixed4832
  std::uint64_t seed = 0;
};

inline const char* to_string(SplitKind k) {
  switch (k) {
    case SplitKind::SparseClassic: return "SPARSE_CLASSIC";
    case SplitKind::SparseRatio: return "SPARSE_RATIO";
    case SplitKind::DenseRandom: return "DENSE_RANDOM";
    case SplitKind::Fixed4832: return "FIXED_4832";
    case SplitKind::Ratio: return "RATIO";
  }
  return "?";
}

inline SplitKind split_kind_from_string(const std::string& s) {
  for (auto k : {SplitKind::SparseClassic, SplitKind::SparseRatio, SplitKind::DenseRandom,
                 SplitKind::Fixed4832, SplitKind::Ratio}) {
    if (s == to_string(k)) return k;
  }
  throw Error("unknown split kind: " + s);
}

namespace detail {

inline SplitSpec random_fraction_split(Index m, Real train_frac, Real val_frac, Rng& gen) {
  if (train_frac < 0.0 || val_frac < 0.0 || train_frac + val_frac > 1.0 + 1e-12) {
    throw Error("split fractions must be non-negative and sum to at most 1");
  }
  std::vector<Index> perm(static_cast<std::size_t>(m));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::shuffle(perm.begin(), perm.end(), gen);
  const auto n_train = static_cast<Index>(std::floor(train_frac * static_cast<Real>(m) + 1e-9));
  const auto n_val = static_cast<Index>(std::floor(val_frac * static_cast<Real>(m) + 1e-9));
  SplitSpec s;
  s.train_idx.assign(perm.begin(), perm.begin() + n_train);
  s.val_idx.assign(perm.begin() + n_train, perm.begin() + n_train + n_val);
  s.test_idx.assign(perm.begin() + n_train + n_val, perm.end());
  return s;
}

inline std::vector<std::vector<Index>> nodes_by_class(const Graph& g) {
  std::vector<std::vector<Index>> by(static_cast<std::size_t>(g.num_classes()));
  for (Index i = 0; i < g.num_nodes(); ++i) by[static_cast<std::size_t>(g.labels()[static_cast<std::size_t>(i)])].push_back(i);
  return by;
}

}  // namespace detail

/// SPARSE_CLASSIC: per_class train nodes per class, then num_val / num_test
///   drawn from the remainder.
/// SPARSE_RATIO:   2.5% / 2.5% / 95% stratified by class, at least one train
///   node per non-empty class.
/// DENSE_RANDOM:   60% / 20% / 20% uniformly at random.
/// FIXED_4832:     48% / 32% / 20% with seed kFixedSplitSeeds[fixed_index].
/// RATIO:          train_frac / val_frac / rest uniformly at random.
inline SplitSpec make_split(const Graph& g, const SplitProtocol& protocol) {
  const Index m = g.num_nodes();
  Rng gen = make_rng(protocol.seed, Stream::Split);
  SplitSpec s;
  switch (protocol.kind) {
    case SplitKind::SparseClassic: {
      auto by = detail::nodes_by_class(g);
      std::vector<Index> rest;
      for (std::size_t c = 0; c < by.size(); ++c) {
        auto& nodes = by[c];
        if (static_cast<int>(nodes.size()) < protocol.per_class) {
          throw Error("class " + std::to_string(c) + " has " + std::to_string(nodes.size()) +
                      " nodes, fewer than " + std::to_string(protocol.per_class) + " required");
        }
        std::shuffle(nodes.begin(), nodes.end(), gen);
        s.train_idx.insert(s.train_idx.end(), nodes.begin(), nodes.begin() + protocol.per_class);
        rest.insert(rest.end(), nodes.begin() + protocol.per_class, nodes.end());
      }
      std::sort(rest.begin(), rest.end());
      std::shuffle(rest.begin(), rest.end(), gen);
      if (static_cast<Index>(rest.size()) < protocol.num_val + protocol.num_test) {
        throw Error("not enough nodes for " + std::to_string(protocol.num_val) + " validation and " +
                    std::to_string(protocol.num_test) + " test nodes");
      }
      s.val_idx.assign(rest.begin(), rest.begin() + protocol.num_val);
      s.test_idx.assign(rest.begin() + protocol.num_val, rest.begin() + protocol.num_val + protocol.num_test);
      break;
    }
    case SplitKind::SparseRatio: {
      for (auto& nodes : detail::nodes_by_class(g)) {
        const auto n = static_cast<Index>(nodes.size());
        if (n == 0) continue;
        std::shuffle(nodes.begin(), nodes.end(), gen);
        const Index n_train = std::min(n, std::max<Index>(1, std::llround(0.025 * static_cast<Real>(n))));
        const Index n_val = std::min(n - n_train, std::max<Index>(1, std::llround(0.025 * static_cast<Real>(n))));
        s.train_idx.insert(s.train_idx.end(), nodes.begin(), nodes.begin() + n_train);
        s.val_idx.insert(s.val_idx.end(), nodes.begin() + n_train, nodes.begin() + n_train + n_val);
        s.test_idx.insert(s.test_idx.end(), nodes.begin() + n_train + n_val, nodes.end());
      }
      break;
    }
    case SplitKind::DenseRandom:
      s = detail::random_fraction_split(m, 0.6, 0.2, gen);
      break;
    case SplitKind::Fixed4832: {
      if (protocol.fixed_index < 0 || protocol.fixed_index >= static_cast<int>(kFixedSplitSeeds.size())) {
        throw Error("FIXED_4832 index must be in [0, 10)");
      }
      Rng fixed = make_rng(kFixedSplitSeeds[static_cast<std::size_t>(protocol.fixed_index)], Stream::Split);
      s = detail::random_fraction_split(m, 0.48, 0.32, fixed);
      break;
    }
    case SplitKind::Ratio:
      s = detail::random_fraction_split(m, protocol.train_frac, protocol.val_frac, gen);
      break;
  }
  for (auto* set : {&s.train_idx, &s.val_idx, &s.test_idx}) std::sort(set->begin(), set->end());
  return s;
}

}  // namespace spcnet
