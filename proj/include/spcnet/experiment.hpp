#pragma once

#include "spcnet/checkpoint.hpp"
#include "spcnet/data.hpp"
#include "spcnet/model.hpp"
#include "spcnet/parallel.hpp"
#include "spcnet/robustness.hpp"
#include "spcnet/stats.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace spcnet {

/// Declarative experiment description; round-trips through a single JSON
/// document (see configs/ for examples).
struct ExperimentConfig {
  std::string task = "classify";  // classify | sbm | grid | plot-filter | stability | robustness
  std::optional<std::string> dataset;
  std::optional<SbmConfig> sbm;
  bool normalize_features = true;
  SplitProtocol split;
  Hyper model;
  std::vector<std::uint64_t> seeds = {0};
  int workers = 0;
  std::string output;
  std::string checkpoint_prefix;

  std::vector<Real> grid_k = {0.5, 1.0, 1.5, 2.0};
  std::vector<Real> grid_t = {0.25, 0.5, 1.0, 2.0};
  std::string grid_csv;

  std::vector<Real> ratios = {0.0, 0.05, 0.1, 0.15, 0.2};
  PerturbMode perturb_mode = PerturbMode::Mixed;
  std::string robustness_csv;

  Real stability_ratio = 0.05;

  Real plot_step = 0.05;
  std::string plot_csv;

  static bool is_task(const std::string& t) {
    for (const char* name : {"classify", "sbm", "grid", "plot-filter", "stability", "robustness"}) {
      if (t == name) return true;
    }
    return false;
  }

  bool needs_graph() const { return task != "plot-filter"; }

  void validate() const {
    if (!is_task(task)) throw Error("unknown task: " + task);
    model.validate();
    if (seeds.empty()) throw Error("seeds must be non-empty");
    if (needs_graph()) {
      if (dataset.has_value() == sbm.has_value()) throw Error("exactly one of 'dataset' or 'sbm' is required");
      if (task == "sbm" && !sbm) throw Error("task 'sbm' requires an 'sbm' section");
    }
    if (sbm) {
      sbm->validate();
      if (sbm->p == sbm->q) throw Error("SBM requires p != q");
    }
    if (task == "grid" && (grid_k.empty() || grid_t.empty())) throw Error("grid axes must be non-empty");
    if (task == "robustness" && ratios.empty()) throw Error("robustness ratios must be non-empty");
    if (!(plot_step > 0.0)) throw Error("plot step must be positive");
  }
};

inline nlohmann::json split_to_json(const SplitProtocol& s) {
  return {{"kind", to_string(s.kind)},   {"per_class", s.per_class},   {"num_val", s.num_val},
          {"num_test", s.num_test},      {"train_frac", s.train_frac}, {"val_frac", s.val_frac},
          {"fixed_index", s.fixed_index}};
}

inline SplitProtocol split_from_json(const nlohmann::json& j) {
  detail::check_keys(j, {"kind", "per_class", "num_val", "num_test", "train_frac", "val_frac", "fixed_index"}, "split");
  SplitProtocol s;
  if (j.contains("kind")) s.kind = split_kind_from_string(j["kind"].get<std::string>());
  s.per_class = j.value("per_class", s.per_class);
  s.num_val = j.value("num_val", s.num_val);
  s.num_test = j.value("num_test", s.num_test);
  s.train_frac = j.value("train_frac", s.train_frac);
  s.val_frac = j.value("val_frac", s.val_frac);
  s.fixed_index = j.value("fixed_index", s.fixed_index);
  return s;
}

inline nlohmann::json sbm_to_json(const SbmConfig& c) {
  return {{"nodes", c.nodes}, {"p", c.p}, {"q", c.q}, {"feature_dim", c.feature_dim}, {"mu0", c.mu0}, {"sigma", c.sigma}};
}

inline SbmConfig sbm_from_json(const nlohmann::json& j) {
  detail::check_keys(j, {"nodes", "p", "q", "feature_dim", "mu0", "sigma"}, "sbm");
  SbmConfig c;
  c.nodes = j.value("nodes", c.nodes);
  c.p = j.at("p").get<Real>();
  c.q = j.at("q").get<Real>();
  c.feature_dim = j.value("feature_dim", c.feature_dim);
  c.mu0 = j.contains("mu0") ? j["mu0"].get<std::vector<Real>>() : std::vector<Real>(static_cast<std::size_t>(c.feature_dim), 1.0);
  c.sigma = j.value("sigma", c.sigma);
  return c;
}

inline nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["task"] = c.task;
  j["dataset"] = c.dataset ? nlohmann::json(*c.dataset) : nlohmann::json(nullptr);
  j["sbm"] = c.sbm ? sbm_to_json(*c.sbm) : nlohmann::json(nullptr);
  j["normalize_features"] = c.normalize_features;
  j["split"] = split_to_json(c.split);
  j["model"] = hyper_to_json(c.model);
  j["seeds"] = c.seeds;
  j["workers"] = c.workers;
  j["output"] = c.output;
  j["checkpoint_prefix"] = c.checkpoint_prefix;
  j["grid"] = {{"k", c.grid_k}, {"t", c.grid_t}, {"csv", c.grid_csv}};
  j["robustness"] = {{"ratios", c.ratios}, {"mode", to_string(c.perturb_mode)}, {"csv", c.robustness_csv}};
  j["stability"] = {{"ratio", c.stability_ratio}};
  j["plot"] = {{"step", c.plot_step}, {"csv", c.plot_csv}};
  return j;
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  detail::check_keys(j,
                     {"task", "dataset", "sbm", "normalize_features", "split", "model", "seeds", "workers", "output",
                      "checkpoint_prefix", "grid", "robustness", "stability", "plot"},
                     "config");
  ExperimentConfig c;
  c.task = j.value("task", c.task);
  if (j.contains("dataset") && !j["dataset"].is_null()) c.dataset = j["dataset"].get<std::string>();
  if (j.contains("sbm") && !j["sbm"].is_null()) c.sbm = sbm_from_json(j["sbm"]);
  c.normalize_features = j.value("normalize_features", c.normalize_features);
  if (j.contains("split")) c.split = split_from_json(j["split"]);
  if (j.contains("model")) c.model = hyper_from_json(j["model"]);
  if (j.contains("seeds")) c.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
  c.workers = j.value("workers", c.workers);
  c.output = j.value("output", c.output);
  c.checkpoint_prefix = j.value("checkpoint_prefix", c.checkpoint_prefix);
  if (j.contains("grid")) {
    const auto& g = j["grid"];
    detail::check_keys(g, {"k", "t", "csv"}, "grid");
    if (g.contains("k")) c.grid_k = g["k"].get<std::vector<Real>>();
    if (g.contains("t")) c.grid_t = g["t"].get<std::vector<Real>>();
    c.grid_csv = g.value("csv", c.grid_csv);
  }
  if (j.contains("robustness")) {
    const auto& r = j["robustness"];
    detail::check_keys(r, {"ratios", "mode", "csv"}, "robustness");
    if (r.contains("ratios")) c.ratios = r["ratios"].get<std::vector<Real>>();
    if (r.contains("mode")) c.perturb_mode = perturb_mode_from_string(r["mode"].get<std::string>());
    c.robustness_csv = r.value("csv", c.robustness_csv);
  }
  if (j.contains("stability")) {
    detail::check_keys(j["stability"], {"ratio"}, "stability");
    c.stability_ratio = j["stability"].value("ratio", c.stability_ratio);
  }
  if (j.contains("plot")) {
    detail::check_keys(j["plot"], {"step", "csv"}, "plot");
    c.plot_step = j["plot"].value("step", c.plot_step);
    c.plot_csv = j["plot"].value("csv", c.plot_csv);
  }
  c.validate();
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error("invalid JSON in " + path.string() + ": " + e.what());
  }
  try {
    return config_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw Error("invalid config " + path.string() + ": " + e.what());
  }
}

/// Resolves a dataset path: as given if it exists, else under $SPCNET_DATA_DIR.
inline std::filesystem::path resolve_dataset_path(const std::string& p) {
  std::filesystem::path path(p);
  if (std::filesystem::exists(path)) return path;
  if (const char* root = std::getenv("SPCNET_DATA_DIR"); root && path.is_relative()) {
    auto alt = std::filesystem::path(root) / path;
    if (std::filesystem::exists(alt)) return alt;
  }
  return path;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct RunRecord {
  std::uint64_t seed = 0;
  Real test_acc = 0.0;
  std::optional<Real> val_acc;
  int best_epoch = 0;
  int epochs_run = 0;
  std::optional<Real> learned_k;
  std::optional<std::vector<Real>> learned_beta;
  Real seconds_per_epoch = 0.0;
};

struct GridCell {
  Real k = 0.0;
  Real t = 0.0;
  Real mean_val_acc = 0.0;
  Real mean_test_acc = 0.0;
  std::vector<RunRecord> runs;
};

struct GridResult {
  std::vector<GridCell> cells;  // k-major
  std::size_t best = 0;
};

struct FilterPoint {
  Real lambda = 0.0;
  Real response = 0.0;
};

struct StabilityRecord {
  std::uint64_t seed = 0;
  StabilityCheck check;
};

struct RunReport {
  std::string task;
  nlohmann::json config;
  std::vector<RunRecord> runs;
  std::optional<Summary> accuracy;
  std::optional<GridResult> grid;
  std::optional<RobustnessReport> robustness;
  std::vector<StabilityRecord> stability;
  std::vector<FilterPoint> filter_response;
  Real total_seconds = 0.0;
};

namespace detail {

inline nlohmann::json run_to_json(const RunRecord& r) {
  nlohmann::json j = {{"seed", r.seed}, {"test_accuracy", r.test_acc}, {"best_epoch", r.best_epoch}, {"epochs_run", r.epochs_run}};
  j["val_accuracy"] = r.val_acc ? nlohmann::json(*r.val_acc) : nlohmann::json(nullptr);
  if (r.learned_k) j["learned_k"] = *r.learned_k;
  if (r.learned_beta) j["learned_beta"] = *r.learned_beta;
  return j;
}

inline nlohmann::json summary_to_json(const Summary& s) {
  return {{"mean", s.mean}, {"std", s.std}, {"ci95", s.ci95}, {"n", s.n}};
}

}  // namespace detail

/// Report as JSON. Everything that depends on wall-clock time lives under
/// "timing"; the rest is a deterministic function of config and seeds.
inline nlohmann::json report_to_json(const RunReport& r) {
  nlohmann::json j;
  j["library_version"] = kVersion;
  j["task"] = r.task;
  j["config"] = r.config;
  nlohmann::json runs = nlohmann::json::array();
  std::vector<Real> per_epoch;
  for (const auto& run : r.runs) {
    runs.push_back(detail::run_to_json(run));
    per_epoch.push_back(run.seconds_per_epoch);
  }
  j["runs"] = runs;
  if (r.accuracy) {
    std::vector<Real> accs;
    for (const auto& run : r.runs) accs.push_back(run.test_acc);
    j["test_accuracies"] = accs;
    j["mean"] = r.accuracy->mean;
    j["std"] = r.accuracy->std;
    j["ci95"] = r.accuracy->ci95;
  }
  if (r.grid) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : r.grid->cells) {
      cells.push_back({{"k", c.k}, {"t", c.t}, {"mean_val_accuracy", c.mean_val_acc}, {"mean_test_accuracy", c.mean_test_acc}});
    }
    const auto& b = r.grid->cells[r.grid->best];
    j["grid"] = {{"cells", cells}, {"best", {{"k", b.k}, {"t", b.t}, {"mean_val_accuracy", b.mean_val_acc}}}};
  }
  if (r.robustness) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : r.robustness->cells) {
      cells.push_back({{"ratio", c.ratio}, {"seed", c.seed}, {"test_accuracy", c.test_acc}, {"num_edges", c.num_edges}});
    }
    nlohmann::json summary = nlohmann::json::array();
    for (const auto& s : r.robustness->per_ratio) {
      auto e = detail::summary_to_json(s.acc);
      e["ratio"] = s.ratio;
      summary.push_back(e);
    }
    j["robustness"] = {{"cells", cells}, {"summary", summary}};
  }
  if (!r.stability.empty()) {
    nlohmann::json st = nlohmann::json::array();
    for (const auto& s : r.stability) {
      st.push_back({{"seed", s.seed},
                    {"bound", s.check.bound},
                    {"observed", s.check.observed},
                    {"margin", s.check.margin},
                    {"constant", s.check.constant},
                    {"operator_distance", s.check.operator_distance},
                    {"spectral_radius", s.check.spectral_radius},
                    {"radius_aware_bound", s.check.radius_aware_bound}});
    }
    j["stability"] = st;
  }
  if (!r.filter_response.empty()) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : r.filter_response) pts.push_back({{"lambda", p.lambda}, {"response", p.response}});
    j["filter_response"] = pts;
  }
  j["timing"] = {{"total_seconds", r.total_seconds}, {"seconds_per_epoch", per_epoch}};
  return j;
}

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

/// Supplies the graph for a seed: a loaded dataset (shared by all seeds) or
/// a fresh SBM draw per seed.
class GraphSource {
 public:
  explicit GraphSource(const ExperimentConfig& c) : config_(c) {
    if (c.dataset) dataset_ = load_dataset(resolve_dataset_path(*c.dataset), c.normalize_features);
  }

  Graph for_seed(std::uint64_t seed) const {
    if (dataset_) return *dataset_;
    SbmConfig s = *config_.sbm;
    s.seed = seed;
    return generate_sbm(s);
  }

  bool is_fixed() const { return dataset_.has_value(); }
  const Graph& fixed() const { return *dataset_; }

 private:
  const ExperimentConfig& config_;
  std::optional<Graph> dataset_;
};

/// Split, train and score one seed.
inline RunRecord run_seed(const Graph& g, SplitProtocol protocol, const Hyper& hyper, std::uint64_t seed,
                          ModelParams* best_out = nullptr) {
  protocol.seed = seed;
  const SplitSpec split = make_split(g, protocol);
  const GraphContext ctx(g);
  const TrainResult tr = train(ctx, split, hyper, seed);
  RunRecord r;
  r.seed = seed;
  r.test_acc = split.test_idx.empty() ? 0.0 : evaluate(ctx, tr.best, split.test_idx);
  if (!split.val_idx.empty()) r.val_acc = evaluate(ctx, tr.best, split.val_idx);
  r.best_epoch = tr.best_epoch;
  r.epochs_run = static_cast<int>(tr.history.size());
  r.learned_k = tr.best.k;
  r.learned_beta = tr.best.beta;
  Real secs = 0.0;
  for (const auto& e : tr.history) secs += e.seconds;
  r.seconds_per_epoch = tr.history.empty() ? 0.0 : secs / static_cast<Real>(tr.history.size());
  if (best_out) *best_out = tr.best;
  return r;
}

inline std::vector<RunRecord> run_seeds(const ExperimentConfig& c, const GraphSource& src, const Hyper& hyper,
                                        bool save_checkpoints = false) {
  std::vector<RunRecord> out(c.seeds.size());
  parallel_for(c.seeds.size(), c.workers, [&](std::size_t i) {
    ModelParams best;
    out[i] = run_seed(src.for_seed(c.seeds[i]), c.split, hyper, c.seeds[i], &best);
    if (save_checkpoints && !c.checkpoint_prefix.empty()) {
      save_checkpoint(c.checkpoint_prefix + "_seed" + std::to_string(c.seeds[i]) + ".json", best);
    }
  });
  return out;
}

/// Evaluates every (k, t) over all seeds and picks the cell with the highest
/// mean validation accuracy; ties go to the smaller t, then the smaller k.
inline GridResult grid_search(const ExperimentConfig& c, const GraphSource& src) {
  if (c.grid_k.empty() || c.grid_t.empty()) throw Error("grid axes must be non-empty");
  GridResult res;
  for (Real k : c.grid_k) {
    for (Real t : c.grid_t) res.cells.push_back({k, t, 0.0, 0.0, std::vector<RunRecord>(c.seeds.size())});
  }
  const std::size_t ns = c.seeds.size();
  parallel_for(res.cells.size() * ns, c.workers, [&](std::size_t job) {
    auto& cell = res.cells[job / ns];
    Hyper h = c.model;
    h.k = cell.k;
    h.t = cell.t;
    const std::uint64_t seed = c.seeds[job % ns];
    cell.runs[job % ns] = run_seed(src.for_seed(seed), c.split, h, seed);
  });
  for (auto& cell : res.cells) {
    Real val = 0.0, test = 0.0;
    for (const auto& r : cell.runs) {
      if (!r.val_acc) throw Error("grid search requires a validation split");
      val += *r.val_acc;
      test += r.test_acc;
    }
    cell.mean_val_acc = val / static_cast<Real>(ns);
    cell.mean_test_acc = test / static_cast<Real>(ns);
  }
  for (std::size_t i = 1; i < res.cells.size(); ++i) {
    const auto& a = res.cells[i];
    const auto& b = res.cells[res.best];
    const bool better = a.mean_val_acc > b.mean_val_acc ||
                        (a.mean_val_acc == b.mean_val_acc && (a.t < b.t || (a.t == b.t && a.k < b.k)));
    if (better) res.best = i;
  }
  return res;
}

inline FilterSpec config_filter_spec(const ExperimentConfig& c) {
  const Hyper& h = c.model;
  if (h.variant == ModelVariant::Pcnet) {
    auto beta = h.beta_init.value_or(std::vector<Real>(static_cast<std::size_t>(h.big_k) + 1, 1.0 / (h.big_k + 1)));
    return FilterSpec::pcnet(std::move(beta), h.t, h.n, h.include_identity);
  }
  return FilterSpec::spcnet(h.k, h.t, h.n, h.include_identity);
}

inline std::vector<FilterPoint> filter_curve(const FilterSpec& spec, Real step) {
  if (!(step > 0.0)) throw Error("plot step must be positive");
  std::vector<FilterPoint> pts;
  const auto n = static_cast<Index>(std::llround(2.0 / step));
  for (Index i = 0; i <= n; ++i) {
    const Real lambda = std::min(2.0, static_cast<Real>(i) * step);
    pts.push_back({lambda, filter_response(spec, lambda)});
  }
  return pts;
}

namespace detail {

inline void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) return;
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

inline std::string fmt_real(Real v) {
  std::ostringstream ss;
  ss.precision(17);
  ss << v;
  return ss.str();
}

}  // namespace detail

inline std::string filter_csv(const std::vector<FilterPoint>& pts) {
  std::string s = "lambda,response\n";
  for (const auto& p : pts) s += detail::fmt_real(p.lambda) + "," + detail::fmt_real(p.response) + "\n";
  return s;
}

inline std::string grid_csv(const GridResult& g) {
  std::string s = "k,t,mean_val_accuracy,mean_test_accuracy\n";
  for (const auto& c : g.cells) {
    s += detail::fmt_real(c.k) + "," + detail::fmt_real(c.t) + "," + detail::fmt_real(c.mean_val_acc) + "," +
         detail::fmt_real(c.mean_test_acc) + "\n";
  }
  return s;
}

inline std::string robustness_csv(const RobustnessReport& r) {
  std::string s = "ratio,mean_acc,ci95\n";
  for (const auto& p : r.per_ratio) {
    s += detail::fmt_real(p.ratio) + "," + detail::fmt_real(p.acc.mean) + "," + detail::fmt_real(p.acc.ci95) + "\n";
  }
  return s;
}

/// Executes the configured task over all seeds. Writes CSV side outputs named
/// in the config; the caller decides where the report goes.
inline RunReport run(const ExperimentConfig& c) {
  c.validate();
  const auto start = std::chrono::steady_clock::now();
  RunReport rep;
  rep.task = c.task;
  rep.config = config_to_json(c);

  if (c.task == "plot-filter") {
    rep.filter_response = filter_curve(config_filter_spec(c), c.plot_step);
    detail::write_text(c.plot_csv, filter_csv(rep.filter_response));
  } else {
    const GraphSource src(c);
    if (c.task == "classify" || c.task == "sbm") {
      rep.runs = run_seeds(c, src, c.model, true);
    } else if (c.task == "grid") {
      rep.grid = grid_search(c, src);
      rep.runs = rep.grid->cells[rep.grid->best].runs;
      detail::write_text(c.grid_csv, grid_csv(*rep.grid));
    } else if (c.task == "robustness") {
      if (!src.is_fixed()) {
        // Per-seed SBM draws: one sweep per seed, merged ratio-major.
        RobustnessReport merged;
        std::vector<RobustnessReport> parts(c.seeds.size());
        parallel_for(c.seeds.size(), c.workers, [&](std::size_t i) {
          parts[i] = robustness_sweep(src.for_seed(c.seeds[i]), c.split, c.model, c.ratios, {c.seeds[i]}, c.perturb_mode, 1);
        });
        for (std::size_t r = 0; r < c.ratios.size(); ++r) {
          std::vector<Real> accs;
          for (const auto& p : parts) {
            merged.cells.push_back(p.cells[r]);
            accs.push_back(p.cells[r].test_acc);
          }
          merged.per_ratio.push_back({c.ratios[r], summarize(accs)});
        }
        rep.robustness = std::move(merged);
      } else {
        rep.robustness = robustness_sweep(src.fixed(), c.split, c.model, c.ratios, c.seeds, c.perturb_mode, c.workers);
      }
      detail::write_text(c.robustness_csv, robustness_csv(*rep.robustness));
    } else if (c.task == "stability") {
      const FilterSpec spec = config_filter_spec(c);
      rep.stability.resize(c.seeds.size());
      parallel_for(c.seeds.size(), c.workers, [&](std::size_t i) {
        const Graph g = src.for_seed(c.seeds[i]);
        const Graph gp = perturb(g, {c.stability_ratio, c.perturb_mode, c.seeds[i]});
        rep.stability[i] = {c.seeds[i], stability_check(build_normalized_laplacian(g), build_normalized_laplacian(gp), spec)};
      });
    }
  }
  if (!rep.runs.empty()) {
    std::vector<Real> accs;
    for (const auto& r : rep.runs) accs.push_back(r.test_acc);
    rep.accuracy = summarize(accs);
  }
  rep.total_seconds = std::chrono::duration<Real>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

}  // namespace spcnet
