#pragma once

#include "spcnet/model.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <string>

namespace spcnet {

// Checkpoint layout (one JSON object):
//   "format": "spcnet-checkpoint", "version": 1,
//   "hyper":  hyperparameter object (same keys as the "model" config section),
//   "W1", "W2": {"rows": r, "cols": c, "data": [row-major values]},
//   "b1", "b2": [values],
//   "k":      number    (SPCNET_L only),
//   "beta":   [numbers] (PCNET only)

inline nlohmann::json hyper_to_json(const Hyper& h) {
  nlohmann::json j = {
      {"variant", to_string(h.variant)}, {"hidden", h.hidden},
      {"dropout", h.dropout},            {"lr", h.lr},
      {"weight_decay", h.weight_decay},  {"epochs", h.epochs},
      {"patience", h.patience},          {"k", h.k},
      {"t", h.t},                        {"N", h.n},
      {"K", h.big_k},                    {"learn_beta", h.learn_beta},
      {"include_identity", h.include_identity},
  };
  j["beta_init"] = h.beta_init ? nlohmann::json(*h.beta_init) : nlohmann::json(nullptr);
  return j;
}

namespace detail {

inline void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                       const std::string& where) {
  if (!j.is_object()) throw Error(where + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }) == allowed.end()) {
      throw Error("unknown key '" + key + "' in " + where);
    }
  }
}

inline nlohmann::json matrix_to_json(const Matrix& m) {
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::vector<Real>(m.data(), m.data() + m.size())}};
}

inline Matrix matrix_from_json(const nlohmann::json& j) {
  Matrix m(j.at("rows").get<Index>(), j.at("cols").get<Index>());
  const auto data = j.at("data").get<std::vector<Real>>();
  if (static_cast<Index>(data.size()) != m.size()) throw Error("checkpoint matrix size mismatch");
  std::copy(data.begin(), data.end(), m.data());
  return m;
}

inline Vector vector_from_json(const nlohmann::json& j) {
  const auto data = j.get<std::vector<Real>>();
  return Eigen::Map<const Vector>(data.data(), static_cast<Index>(data.size()));
}

}  // namespace detail

inline Hyper hyper_from_json(const nlohmann::json& j) {
  detail::check_keys(j,
                     {"variant", "hidden", "dropout", "lr", "weight_decay", "epochs", "patience", "k", "t",
                      "N", "K", "learn_beta", "beta_init", "include_identity"},
                     "model");
  Hyper h;
  if (j.contains("variant")) h.variant = model_variant_from_string(j["variant"].get<std::string>());
  h.hidden = j.value("hidden", h.hidden);
  h.dropout = j.value("dropout", h.dropout);
  h.lr = j.value("lr", h.lr);
  h.weight_decay = j.value("weight_decay", h.weight_decay);
  h.epochs = j.value("epochs", h.epochs);
  h.patience = j.value("patience", h.patience);
  h.k = j.value("k", h.k);
  h.t = j.value("t", h.t);
  h.n = j.value("N", h.n);
  h.big_k = j.value("K", h.big_k);
  h.learn_beta = j.value("learn_beta", h.learn_beta);
  h.include_identity = j.value("include_identity", h.include_identity);
  if (j.contains("beta_init") && !j["beta_init"].is_null()) h.beta_init = j["beta_init"].get<std::vector<Real>>();
  return h;
}

inline nlohmann::json checkpoint_to_json(const ModelParams& p) {
  nlohmann::json j = {{"format", "spcnet-checkpoint"}, {"version", 1}, {"hyper", hyper_to_json(p.hyper)}};
  j["W1"] = detail::matrix_to_json(p.w1);
  j["b1"] = std::vector<Real>(p.b1.data(), p.b1.data() + p.b1.size());
  j["W2"] = detail::matrix_to_json(p.w2);
  j["b2"] = std::vector<Real>(p.b2.data(), p.b2.data() + p.b2.size());
  if (p.k) j["k"] = *p.k;
  if (p.beta) j["beta"] = *p.beta;
  return j;
}

inline ModelParams checkpoint_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "spcnet-checkpoint") throw Error("not an spcnet checkpoint");
  if (j.value("version", 0) != 1) throw Error("unsupported checkpoint version");
  ModelParams p;
  p.hyper = hyper_from_json(j.at("hyper"));
  p.w1 = detail::matrix_from_json(j.at("W1"));
  p.b1 = detail::vector_from_json(j.at("b1"));
  p.w2 = detail::matrix_from_json(j.at("W2"));
  p.b2 = detail::vector_from_json(j.at("b2"));
  if (j.contains("k")) p.k = j["k"].get<Real>();
  if (j.contains("beta")) p.beta = j["beta"].get<std::vector<Real>>();
  if ((p.hyper.variant == ModelVariant::SpcnetL) != p.k.has_value()) throw Error("checkpoint k inconsistent with variant");
  if ((p.hyper.variant == ModelVariant::Pcnet) != p.beta.has_value()) throw Error("checkpoint beta inconsistent with variant");
  return p;
}

inline void save_checkpoint(const std::filesystem::path& path, const ModelParams& p) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write checkpoint " + path.string());
  out << checkpoint_to_json(p).dump() << '\n';
}

inline ModelParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read checkpoint " + path.string());
  return checkpoint_from_json(nlohmann::json::parse(in));
}

}  // namespace spcnet
