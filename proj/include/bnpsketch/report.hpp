#pragma once

#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "bnpsketch/errors.hpp"
#include "bnpsketch/genmodel.hpp"

namespace bnps {

enum class PriorSource { given, eb_mle, eb_wasserstein };
enum class EstimateMethod { dp_exact, pyp_exact, pyp_mc, pyp_asymptotic };

inline std::string to_string(PriorSource s) {
  switch (s) {
  case PriorSource::given: return "given";
  case PriorSource::eb_mle: return "eb-mle";
  case PriorSource::eb_wasserstein: return "eb-wasserstein";
  }
  return "?";
}

inline std::string to_string(EstimateMethod m) {
  switch (m) {
  case EstimateMethod::dp_exact: return "dp-exact";
  case EstimateMethod::pyp_exact: return "pyp-exact";
  case EstimateMethod::pyp_mc: return "pyp-mc";
  case EstimateMethod::pyp_asymptotic: return "pyp-asymptotic";
  }
  return "?";
}

inline PriorSource prior_source_from_string(std::string_view s) {
  if (s == "given") return PriorSource::given;
  if (s == "eb-mle") return PriorSource::eb_mle;
  if (s == "eb-wasserstein") return PriorSource::eb_wasserstein;
  throw DataError("unknown prior source: " + std::string(s));
}

inline EstimateMethod estimate_method_from_string(std::string_view s) {
  if (s == "dp-exact") return EstimateMethod::dp_exact;
  if (s == "pyp-exact") return EstimateMethod::pyp_exact;
  if (s == "pyp-mc") return EstimateMethod::pyp_mc;
  if (s == "pyp-asymptotic") return EstimateMethod::pyp_asymptotic;
  throw DataError("unknown estimate method: " + std::string(s));
}

/// Everything an estimator run produces. Vectors are indexed by r;
/// freq_counts[0] is unused and kept at 0.
struct EstimateReport {
  std::uint64_t n = 0;
  std::uint32_t width = 0;
  PriorParams prior;
  PriorSource prior_source = PriorSource::given;
  EstimateMethod method = EstimateMethod::dp_exact;
  std::vector<double> coverage;
  std::vector<double> freq_counts;
  double distinct = 0.0;
  std::optional<std::vector<double>> mc_stderr;
  bool boundary_hit = false;
  double wall_time_s = 0.0;

  [[nodiscard]] std::uint64_t r_max() const { return coverage.empty() ? 0 : coverage.size() - 1; }
};

namespace detail {

inline nlohmann::json indexed_map(const std::vector<double>& v, std::size_t from) {
  nlohmann::json obj = nlohmann::json::object();
  for (std::size_t r = from; r < v.size(); ++r) obj[std::to_string(r)] = v[r];
  return obj;
}

inline std::vector<double> indexed_vector(const nlohmann::json& obj, std::size_t size) {
  std::vector<double> v(size, 0.0);
  for (const auto& [key, value] : obj.items()) {
    const std::size_t r = std::stoull(key);
    if (r >= size) v.resize(r + 1, 0.0);
    v[r] = value.get<double>();
  }
  return v;
}

} // namespace detail

inline nlohmann::json to_json(const EstimateReport& rep) {
  nlohmann::json j;
  j["n"] = rep.n;
  j["width"] = rep.width;
  j["prior"] = {{"alpha", rep.prior.alpha}, {"theta", rep.prior.theta}, {"source", to_string(rep.prior_source)}};
  j["method"] = to_string(rep.method);
  j["r_max"] = rep.r_max();
  j["coverage"] = detail::indexed_map(rep.coverage, 0);
  j["freq_counts"] = detail::indexed_map(rep.freq_counts, 1);
  j["distinct"] = rep.distinct;
  j["mc_stderr"] = rep.mc_stderr ? detail::indexed_map(*rep.mc_stderr, 0) : nlohmann::json(nullptr);
  j["boundary_hit"] = rep.boundary_hit;
  j["wall_time_s"] = rep.wall_time_s;
  return j;
}

inline EstimateReport report_from_json(const nlohmann::json& j) {
  EstimateReport rep;
  try {
    rep.n = j.at("n").get<std::uint64_t>();
    rep.width = j.at("width").get<std::uint32_t>();
    rep.prior.alpha = j.at("prior").at("alpha").get<double>();
    rep.prior.theta = j.at("prior").at("theta").get<double>();
    rep.prior_source = prior_source_from_string(j.at("prior").at("source").get<std::string>());
    rep.method = estimate_method_from_string(j.at("method").get<std::string>());
    const std::size_t size = j.at("r_max").get<std::size_t>() + 1;
    rep.coverage = detail::indexed_vector(j.at("coverage"), size);
    rep.freq_counts = detail::indexed_vector(j.at("freq_counts"), size);
    rep.distinct = j.at("distinct").get<double>();
    if (!j.at("mc_stderr").is_null()) rep.mc_stderr = detail::indexed_vector(j.at("mc_stderr"), size);
    rep.boundary_hit = j.at("boundary_hit").get<bool>();
    rep.wall_time_s = j.at("wall_time_s").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed estimate report: ") + e.what());
  }
  return rep;
}

/// Long-format CSV: quantity,r,value,mc_stderr.
inline std::string to_csv(const EstimateReport& rep) {
  std::ostringstream out;
  out.precision(17);
  out << "quantity,r,value,mc_stderr\n";
  out << "n,," << rep.n << ",\n";
  out << "width,," << rep.width << ",\n";
  out << "alpha,," << rep.prior.alpha << ",\n";
  out << "theta,," << rep.prior.theta << ",\n";
  for (std::size_t r = 0; r < rep.coverage.size(); ++r) {
    out << "coverage," << r << ',' << rep.coverage[r] << ',';
    if (rep.mc_stderr) out << (*rep.mc_stderr)[r];
    out << '\n';
  }
  for (std::size_t r = 1; r < rep.freq_counts.size(); ++r) out << "freq_count," << r << ',' << rep.freq_counts[r] << ",\n";
  out << "distinct,," << rep.distinct << ",\n";
  return out.str();
}

} // namespace bnps
