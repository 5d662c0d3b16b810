#pragma once

// Simulation experiments: a grid of (data model, n, repetition) cells, each
// sketched, estimated and compared with the ground truth, one CSV row per
// cell.

#include <chrono>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "bnpsketch/dp_estim.hpp"
#include "bnpsketch/errors.hpp"
#include "bnpsketch/genmodel.hpp"
#include "bnpsketch/oracle.hpp"
#include "bnpsketch/pyp_estim.hpp"
#include "bnpsketch/random.hpp"
#include "bnpsketch/sketch.hpp"
#include "bnpsketch/tokenize.hpp"

namespace bnps {

struct ModelSpec {
  enum class Kind { dp, pyp, zipf, file };
  Kind kind = Kind::dp;
  double alpha = 0.0;
  double theta = 1.0;
  double exponent = 1.0;
  std::uint64_t vocab = 0;
  std::string path;
  std::string tokenizer = "lines";
  std::string label;
};

struct EstimatorSpec {
  enum class Prior { dp, pyp };
  Prior prior = Prior::dp;
  std::string fit = "eb-mle"; // none | eb-mle | eb-wasserstein
  std::string method = "exact"; // exact | mc | asymptotic
  std::optional<double> theta;
  std::optional<double> alpha;
  bool oracle = false; // use the data-generating (alpha, theta) of dp/pyp models
  std::uint64_t mc_samples = 100'000;
  Debias debias = Debias::none;
  std::uint64_t exact_cap = default_exact_cap;
  WassersteinConfig wasserstein = WassersteinConfig::defaults();
};

struct ExperimentConfig {
  std::vector<ModelSpec> models;
  std::vector<std::uint64_t> n_schedule;
  std::uint32_t width = 128;
  std::uint64_t repetitions = 20;
  std::uint64_t seed = 0;
  EstimatorSpec estimator;
  std::uint64_t r_max = 0;
  std::string output;
  bool record_wall_time = false;

  void validate() const {
    if (models.empty()) throw DataError("experiment config: no models");
    if (n_schedule.empty()) throw DataError("experiment config: empty n schedule");
    for (std::size_t i = 1; i < n_schedule.size(); ++i) {
      if (n_schedule[i] <= n_schedule[i - 1]) throw DataError("experiment config: n schedule must be strictly increasing");
    }
    if (repetitions < 1) throw DataError("experiment config: repetitions must be >= 1");
    if (width < 1 || width > max_sketch_width) throw DataError("experiment config: width out of range");
  }
};

namespace detail {

template <class T>
T json_get(const nlohmann::json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

inline ModelSpec parse_model(const nlohmann::json& j) {
  ModelSpec m;
  const std::string kind = j.at("model").get<std::string>();
  std::ostringstream label;
  if (kind == "dp") {
    m.kind = ModelSpec::Kind::dp;
    m.theta = j.at("theta").get<double>();
    label << "dp";
  } else if (kind == "pyp") {
    m.kind = ModelSpec::Kind::pyp;
    m.alpha = j.at("alpha").get<double>();
    m.theta = j.at("theta").get<double>();
    label << "pyp";
  } else if (kind == "zipf") {
    m.kind = ModelSpec::Kind::zipf;
    m.exponent = j.at("exponent").get<double>();
    m.vocab = j.at("vocab").get<std::uint64_t>();
    label << "zipf:" << m.exponent;
  } else if (kind == "file") {
    m.kind = ModelSpec::Kind::file;
    m.path = j.at("path").get<std::string>();
    m.tokenizer = json_get<std::string>(j, "tokenizer", "lines");
    label << "file";
  } else {
    throw DataError("unknown model '" + kind + "'");
  }
  m.label = json_get<std::string>(j, "label", label.str());
  if (m.kind == ModelSpec::Kind::dp || m.kind == ModelSpec::Kind::pyp) PriorParams{m.alpha, m.theta}.validate();
  return m;
}

inline EstimatorSpec parse_estimator(const nlohmann::json& j) {
  EstimatorSpec e;
  const std::string prior = json_get<std::string>(j, "prior", "dp");
  if (prior == "dp") {
    e.prior = EstimatorSpec::Prior::dp;
  } else if (prior == "pyp") {
    e.prior = EstimatorSpec::Prior::pyp;
  } else {
    throw DataError("unknown prior '" + prior + "'");
  }
  e.fit = json_get<std::string>(j, "fit", e.prior == EstimatorSpec::Prior::dp ? "eb-mle" : "none");
  e.method = json_get<std::string>(j, "method", "exact");
  if (j.contains("theta")) e.theta = j.at("theta").get<double>();
  if (j.contains("alpha")) e.alpha = j.at("alpha").get<double>();
  e.oracle = json_get<bool>(j, "oracle", false);
  if (e.oracle) e.fit = "none";
  e.mc_samples = json_get<std::uint64_t>(j, "mc_samples", e.mc_samples);
  e.debias = debias_from_string(json_get<std::string>(j, "debias", "none"));
  e.exact_cap = json_get<std::uint64_t>(j, "exact_cap", e.exact_cap);
  if (j.contains("wasserstein")) {
    const auto& w = j.at("wasserstein");
    if (w.contains("alphas")) e.wasserstein.alphas = w.at("alphas").get<std::vector<double>>();
    if (w.contains("thetas")) e.wasserstein.thetas = w.at("thetas").get<std::vector<double>>();
    e.wasserstein.num_reps = json_get<std::uint64_t>(w, "num_reps", e.wasserstein.num_reps);
    e.wasserstein.n_prime = json_get<std::uint64_t>(w, "n_prime", e.wasserstein.n_prime);
  }
  if (e.fit != "none" && e.fit != "eb-mle" && e.fit != "eb-wasserstein") throw DataError("unknown fit '" + e.fit + "'");
  if (e.method != "exact" && e.method != "mc" && e.method != "asymptotic") throw DataError("unknown method '" + e.method + "'");
  if (e.prior == EstimatorSpec::Prior::dp && (e.fit == "eb-wasserstein" || e.method != "exact")) {
    throw DataError("the dp prior supports only fit none|eb-mle with the exact method");
  }
  if (e.prior == EstimatorSpec::Prior::pyp && e.fit == "eb-mle") {
    throw DataError("eb-mle is available for the dp prior only; use eb-wasserstein");
  }
  if (e.oracle) return e;
  if (e.fit == "none" && !e.theta) throw DataError("fit none requires theta");
  if (e.prior == EstimatorSpec::Prior::pyp && e.fit == "none" && !e.alpha) throw DataError("fit none requires alpha for pyp");
  return e;
}

} // namespace detail

inline ExperimentConfig parse_experiment_config(const nlohmann::json& j) {
  ExperimentConfig cfg;
  try {
    for (const auto& m : j.at("models")) cfg.models.push_back(detail::parse_model(m));
    cfg.n_schedule = j.at("n").get<std::vector<std::uint64_t>>();
    cfg.width = j.at("width").get<std::uint32_t>();
    cfg.repetitions = detail::json_get<std::uint64_t>(j, "repetitions", cfg.repetitions);
    cfg.seed = detail::json_get<std::uint64_t>(j, "seed", cfg.seed);
    if (j.contains("estimator")) cfg.estimator = detail::parse_estimator(j.at("estimator"));
    cfg.r_max = detail::json_get<std::uint64_t>(j, "r_max", cfg.r_max);
    cfg.output = detail::json_get<std::string>(j, "output", "");
    cfg.record_wall_time = detail::json_get<bool>(j, "record_wall_time", false);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed experiment config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_experiment_config(j);
}

struct ExperimentRow {
  std::string model;
  std::optional<double> alpha_true, theta_true;
  std::uint64_t n = 0;
  std::uint32_t width = 0;
  std::uint64_t rep = 0;
  std::uint64_t seed = 0;
  std::vector<double> truth; // truth[r], r = 0..r_max
  std::vector<std::optional<double>> est;
  double theta_hat = 0.0;
  double alpha_hat = 0.0;
  std::uint64_t k_true = 0;
  double k_hat = 0.0;
  double gt_missing_mass = 0.0;
  std::string method;
  std::optional<double> mc_stderr;
  std::optional<double> wall_time;
};

/// A sample together with the true coverage probabilities it implies.
struct TruthSample {
  std::vector<std::uint64_t> symbols;
  std::vector<double> coverage; // r = 0..r_max
};

namespace detail {

// Token ids of a file with their relative frequencies over the whole file.
struct FileCorpus {
  std::vector<std::string> vocab;
  std::vector<double> weight;
  std::vector<std::uint64_t> tokens;
};

inline FileCorpus load_corpus(const ModelSpec& m) {
  std::ifstream in(m.path);
  if (!in) throw DataError("cannot open data file '" + m.path + "'");
  FileCorpus corpus;
  std::unordered_map<std::string, std::uint64_t> ids;
  tokenize(in, TokenizerSpec::parse(m.tokenizer), [&](std::string_view tok) {
    auto [it, fresh] = ids.try_emplace(std::string(tok), corpus.vocab.size());
    if (fresh) {
      corpus.vocab.emplace_back(tok);
      corpus.weight.push_back(0.0);
    }
    corpus.tokens.push_back(it->second);
    corpus.weight[it->second] += 1.0;
  });
  for (double& w : corpus.weight) w /= static_cast<double>(corpus.tokens.size());
  return corpus;
}

inline std::vector<double> coverage_from_weights(const std::vector<std::uint64_t>& symbols, const std::vector<double>& weights,
                                                 double residual, std::uint64_t r_max) {
  RawSample s;
  s.symbols = symbols;
  s.weights = weights;
  s.residual_mass = residual;
  return true_coverage_all(s, r_max);
}

inline std::string format_double(double x) {
  std::ostringstream out;
  out.precision(17);
  out << x;
  return out.str();
}

} // namespace detail

inline TruthSample draw_truth_sample(const ModelSpec& m, std::uint64_t n, std::uint64_t r_max, std::uint64_t seed,
                                     const detail::FileCorpus* corpus = nullptr) {
  TruthSample ts;
  switch (m.kind) {
  case ModelSpec::Kind::dp:
  case ModelSpec::Kind::pyp: {
    RawSample s = sample_pyp_sequence({m.kind == ModelSpec::Kind::dp ? 0.0 : m.alpha, m.theta}, n, seed);
    ts.coverage = true_coverage_all(s, r_max);
    ts.symbols = std::move(s.symbols);
    break;
  }
  case ModelSpec::Kind::zipf: {
    RawSample s = sample_zipf_sequence(m.exponent, m.vocab, n, seed);
    ts.coverage = true_coverage_all(s, r_max);
    ts.symbols = std::move(s.symbols);
    break;
  }
  case ModelSpec::Kind::file: {
    if (!corpus) throw DataError("file model needs a loaded corpus");
    if (n > corpus->tokens.size()) throw DataError("file model: n exceeds the number of tokens in the file");
    // Uniform subset of n token positions (partial Fisher-Yates).
    std::vector<std::uint64_t> pos(corpus->tokens.size());
    for (std::size_t i = 0; i < pos.size(); ++i) pos[i] = i;
    Rng rng = make_rng(seed);
    for (std::uint64_t i = 0; i < n; ++i) std::swap(pos[i], pos[i + uniform_below(rng, pos.size() - i)]);
    for (std::uint64_t i = 0; i < n; ++i) ts.symbols.push_back(corpus->tokens[pos[i]]);
    ts.coverage = detail::coverage_from_weights(ts.symbols, corpus->weight, 0.0, r_max);
    break;
  }
  }
  return ts;
}

/// Runs one experiment cell on a ready sketch.
inline void estimate_cell(const Sketch& sketch, const EstimatorSpec& e, std::uint64_t r_max, std::uint64_t seed,
                          ExperimentRow& row) {
  EstimateReport rep;
  if (e.prior == EstimatorSpec::Prior::dp) {
    const ThetaSource src = e.fit == "none" ? ThetaSource::fixed(*e.theta) : ThetaSource::fit();
    rep = dp_report(sketch, src, r_max);
  } else {
    PriorParams params{e.alpha.value_or(0.0), e.theta.value_or(1.0)};
    PriorSource source = PriorSource::given;
    if (e.fit == "eb-wasserstein") {
      WassersteinConfig wc = e.wasserstein;
      wc.seed = derive_seed(seed, {7});
      params = wasserstein_fit(sketch, wc).params;
      source = PriorSource::eb_wasserstein;
    }
    PypOptions opt;
    opt.method = e.method == "mc" ? EstimateMethod::pyp_mc
                 : e.method == "asymptotic" ? EstimateMethod::pyp_asymptotic
                                            : EstimateMethod::pyp_exact;
    opt.r_max = r_max;
    opt.mc_samples = e.mc_samples;
    opt.debias = e.debias;
    opt.seed = derive_seed(seed, {8});
    opt.exact_cap = e.exact_cap;
    if (params.alpha == 0.0) {
      // The Wasserstein grid includes alpha = 0, where the DP formulas are exact.
      rep = dp_report(sketch, ThetaSource::fixed(params.theta), r_max);
      rep.prior_source = source;
    } else {
      rep = pyp_report(sketch, params, source, opt);
    }
  }
  row.theta_hat = rep.prior.theta;
  row.alpha_hat = rep.prior.alpha;
  row.k_hat = rep.distinct;
  row.method = to_string(rep.method);
  if (rep.method == EstimateMethod::pyp_mc) row.method += "+" + to_string(e.debias);
  row.est.assign(r_max + 1, std::nullopt);
  for (std::size_t r = 0; r < rep.coverage.size() && r <= r_max; ++r) row.est[r] = rep.coverage[r];
  if (rep.mc_stderr) row.mc_stderr = (*rep.mc_stderr)[0];
}

/// Runs every (model, n, repetition) cell in a fixed order. Each cell's
/// randomness (data, hash, estimator) comes from derive_seed(seed, {model, n, rep}).
inline std::vector<ExperimentRow> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<ExperimentRow> rows;
  for (std::size_t mi = 0; mi < cfg.models.size(); ++mi) {
    const ModelSpec& m = cfg.models[mi];
    std::optional<detail::FileCorpus> corpus;
    if (m.kind == ModelSpec::Kind::file) corpus = detail::load_corpus(m);
    for (std::uint64_t n : cfg.n_schedule) {
      for (std::uint64_t rep = 0; rep < cfg.repetitions; ++rep) {
        const auto start = std::chrono::steady_clock::now();
        const std::uint64_t cell_seed = derive_seed(cfg.seed, {mi, n, rep});
        ExperimentRow row;
        row.model = m.label;
        if (m.kind == ModelSpec::Kind::dp || m.kind == ModelSpec::Kind::pyp) {
          row.alpha_true = m.kind == ModelSpec::Kind::dp ? 0.0 : m.alpha;
          row.theta_true = m.theta;
        }
        row.n = n;
        row.width = cfg.width;
        row.rep = rep;
        row.seed = cell_seed;

        const TruthSample ts = draw_truth_sample(m, n, cfg.r_max, derive_seed(cell_seed, {1}), corpus ? &*corpus : nullptr);
        row.truth = ts.coverage;
        const PartitionStats stats = partition_stats(ts.symbols);
        row.k_true = stats.k;
        row.gt_missing_mass = good_turing_coverage(stats, 0);

        const HashSpec spec = HashSpec::from_seed(derive_seed(cell_seed, {2}), cfg.width);
        Sketch sketch(spec);
        if (m.kind == ModelSpec::Kind::file) {
          for (std::uint64_t id : ts.symbols) sketch.insert(corpus->vocab[id]);
        } else {
          for (std::uint64_t id : ts.symbols) sketch.insert_prehashed(symbol_id_prehash(spec.symbol_seed, id));
        }
        EstimatorSpec est = cfg.estimator;
        if (est.oracle) {
          if (m.kind != ModelSpec::Kind::dp && m.kind != ModelSpec::Kind::pyp) {
            throw DataError("oracle parameters need a dp or pyp model");
          }
          est.theta = m.theta;
          est.alpha = m.kind == ModelSpec::Kind::dp ? 0.0 : m.alpha;
        }
        estimate_cell(sketch, est, cfg.r_max, cell_seed, row);
        if (cfg.record_wall_time) {
          row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        }
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

inline std::string experiment_csv_header(std::uint64_t r_max) {
  std::string h = "model,alpha_true,theta_true,n,J,rep,seed,truth_missing_mass,est_missing_mass,theta_hat,alpha_hat,k_true,k_hat";
  for (std::uint64_t r = 1; r <= r_max; ++r) h += ",truth_p" + std::to_string(r) + ",est_p" + std::to_string(r);
  h += ",gt_missing_mass,method,mc_stderr,wall_time";
  return h;
}

inline std::string experiment_csv(const std::vector<ExperimentRow>& rows, std::uint64_t r_max) {
  using detail::format_double;
  auto opt = [](const std::optional<double>& x) { return x ? format_double(*x) : std::string(); };
  std::ostringstream out;
  out << experiment_csv_header(r_max) << '\n';
  for (const auto& row : rows) {
    out << row.model << ',' << opt(row.alpha_true) << ',' << opt(row.theta_true) << ',' << row.n << ',' << row.width << ','
        << row.rep << ',' << row.seed << ',' << format_double(row.truth.at(0)) << ',' << opt(row.est.at(0)) << ','
        << format_double(row.theta_hat) << ',' << format_double(row.alpha_hat) << ',' << row.k_true << ','
        << format_double(row.k_hat);
    for (std::uint64_t r = 1; r <= r_max; ++r) out << ',' << format_double(row.truth.at(r)) << ',' << opt(row.est.at(r));
    out << ',' << format_double(row.gt_missing_mass) << ',' << row.method << ',' << opt(row.mc_stderr) << ','
        << opt(row.wall_time) << '\n';
  }
  return out.str();
}

} // namespace bnps
