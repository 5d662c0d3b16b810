// bnpsketch: sketch token streams and estimate coverage, distinct counts and
// frequency counts from the sketch alone.
//
// Exit codes: 0 success, 1 usage error, 2 data or parse error, 3 numerical
// domain error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "bnpsketch/bnpsketch.hpp"

namespace {

using namespace bnps;

constexpr int exit_usage = 1;
constexpr int exit_data = 2;
constexpr int exit_domain = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::uint8_t> read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Sketch load_sketch(const std::string& path) { return Sketch::deserialize(read_bytes(path)); }

void write_output(const std::string& path, std::string_view data) {
  if (path.empty() || path == "-") {
    std::cout.write(data.data(), static_cast<std::streamsize>(data.size()));
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw DataError("write to '" + path + "' failed");
}

std::string_view as_chars(const std::vector<std::uint8_t>& bytes) {
  return {reinterpret_cast<const char*>(bytes.data()), bytes.size()};
}

// ---- sketch

struct SketchArgs {
  std::string input = "-";
  std::uint32_t width = 128;
  std::uint64_t seed = 0;
  std::string tokenizer = "lines";
  std::string dictionary;
  std::string output;
};

int run_sketch(const SketchArgs& a) {
  const TokenizerSpec tok = TokenizerSpec::parse(a.tokenizer);
  std::optional<std::unordered_set<std::string>> dict;
  if (!a.dictionary.empty()) {
    std::ifstream din(a.dictionary);
    if (!din) throw DataError("cannot open dictionary '" + a.dictionary + "'");
    dict = load_dictionary(din);
  }
  Sketch sketch(HashSpec::from_seed(a.seed, a.width));
  auto emit = [&sketch](std::string_view t) { sketch.insert(t); };
  if (a.input == "-") {
    tokenize(std::cin, tok, emit, dict ? &*dict : nullptr);
  } else {
    std::ifstream in(a.input, std::ios::binary);
    if (!in) throw DataError("cannot open input '" + a.input + "'");
    tokenize(in, tok, emit, dict ? &*dict : nullptr);
  }
  write_output(a.output, as_chars(sketch.serialize()));
  return 0;
}

// ---- estimate

struct EstimateArgs {
  std::string sketch;
  std::string prior = "dp";
  std::optional<double> theta;
  std::optional<double> alpha;
  std::string fit;
  std::string method = "exact";
  std::optional<std::uint64_t> r_max;
  std::uint64_t mc_samples = 100'000;
  std::string debias = "none";
  std::uint64_t seed = 0;
  std::string format = "json";
  std::uint64_t exact_cap = default_exact_cap;
  std::uint64_t w_reps = 5;
  std::uint64_t n_prime = 0;
  std::string output;
};

WassersteinConfig wasserstein_config(std::uint64_t reps, std::uint64_t n_prime, std::uint64_t seed) {
  WassersteinConfig wc = WassersteinConfig::defaults();
  wc.num_reps = reps;
  wc.n_prime = n_prime;
  wc.seed = seed;
  return wc;
}

int run_estimate(EstimateArgs a) {
  const Sketch sketch = load_sketch(a.sketch);
  if (a.fit.empty()) {
    if (a.prior == "dp") a.fit = a.theta ? "none" : "eb-mle";
    else a.fit = a.theta && a.alpha ? "none" : "eb-wasserstein";
  }
  EstimateReport rep;
  if (a.prior == "dp") {
    if (a.method != "exact") throw UsageError("the dp prior has only the exact method");
    if (a.fit == "eb-wasserstein") throw UsageError("eb-wasserstein fits the pyp prior; use --prior pyp");
    if (a.alpha && *a.alpha != 0.0) throw UsageError("--alpha is not used by the dp prior");
    if (a.fit == "none" && !a.theta) throw UsageError("--fit none requires --theta");
    rep = dp_report(sketch, a.fit == "none" ? ThetaSource::fixed(*a.theta) : ThetaSource::fit(), a.r_max);
  } else {
    if (a.fit == "eb-mle") throw UsageError("eb-mle is available for the dp prior only");
    PriorParams params;
    PriorSource source = PriorSource::given;
    if (a.fit == "none") {
      if (!a.theta || !a.alpha) throw UsageError("--prior pyp --fit none requires --alpha and --theta");
      params = {*a.alpha, *a.theta};
    } else {
      const WassersteinFit fit = wasserstein_fit(sketch, wasserstein_config(a.w_reps, a.n_prime, a.seed));
      params = fit.params;
      source = PriorSource::eb_wasserstein;
    }
    PypOptions opt;
    opt.method = a.method == "mc" ? EstimateMethod::pyp_mc
                 : a.method == "asymptotic" ? EstimateMethod::pyp_asymptotic
                                            : EstimateMethod::pyp_exact;
    opt.r_max = a.r_max;
    opt.mc_samples = a.mc_samples;
    opt.debias = debias_from_string(a.debias);
    opt.seed = a.seed;
    opt.exact_cap = a.exact_cap;
    if (params.alpha == 0.0 && source == PriorSource::eb_wasserstein && opt.method != EstimateMethod::pyp_asymptotic) {
      rep = dp_report(sketch, ThetaSource::fixed(params.theta), a.r_max);
      rep.prior_source = source;
    } else {
      rep = pyp_report(sketch, params, source, opt);
    }
  }
  if (a.format == "csv") {
    write_output(a.output, to_csv(rep));
  } else {
    write_output(a.output, to_json(rep).dump(2) + "\n");
  }
  return 0;
}

// ---- simulate

struct SimulateArgs {
  std::string model = "dp";
  double alpha = 0.0;
  double theta = 1.0;
  double exponent = 1.0;
  std::uint64_t vocab = 1000;
  std::uint64_t n = 0;
  std::uint64_t seed = 0;
  std::string emit = "tokens";
  std::uint32_t width = 128;
  std::uint64_t hash_seed = 0;
  std::uint64_t r_max = 10;
  std::string output;
};

int run_simulate(const SimulateArgs& a) {
  RawSample sample;
  if (a.model == "dp") {
    sample = sample_pyp_sequence({0.0, a.theta}, a.n, a.seed);
  } else if (a.model == "pyp") {
    sample = sample_pyp_sequence({a.alpha, a.theta}, a.n, a.seed);
  } else {
    sample = sample_zipf_sequence(a.exponent, a.vocab, a.n, a.seed);
  }
  if (a.emit == "tokens") {
    std::string out;
    for (std::uint64_t id : sample.symbols) {
      out += std::to_string(id);
      out += '\n';
    }
    write_output(a.output, out);
  } else if (a.emit == "sketch") {
    // Hash the same token strings that --emit tokens prints, so piping those
    // through the sketch command gives the identical file.
    Sketch sketch(HashSpec::from_seed(a.hash_seed, a.width));
    for (std::uint64_t id : sample.symbols) sketch.insert(std::to_string(id));
    write_output(a.output, as_chars(sketch.serialize()));
  } else {
    const PartitionStats st = partition_stats(sample);
    const std::vector<double> cov = true_coverage_all(sample, a.r_max);
    nlohmann::json j;
    j["model"] = a.model;
    if (a.model == "zipf") {
      j["exponent"] = a.exponent;
      j["vocab"] = a.vocab;
    } else {
      j["alpha"] = a.model == "dp" ? 0.0 : a.alpha;
      j["theta"] = a.theta;
    }
    j["n"] = a.n;
    j["seed"] = a.seed;
    j["k"] = st.k;
    nlohmann::json m = nlohmann::json::object();
    for (std::uint64_t r = 1; r <= a.r_max; ++r) m[std::to_string(r)] = st.m_at(r);
    j["m"] = m;
    nlohmann::json c = nlohmann::json::object();
    for (std::uint64_t r = 0; r <= a.r_max; ++r) c[std::to_string(r)] = cov[r];
    j["coverage"] = c;
    write_output(a.output, j.dump(2) + "\n");
  }
  return 0;
}

// ---- experiment

int run_experiment_cmd(const std::string& config_path, const std::string& output_override) {
  const ExperimentConfig cfg = load_experiment_config(config_path);
  const std::string csv = experiment_csv(run_experiment(cfg), cfg.r_max);
  write_output(output_override.empty() ? cfg.output : output_override, csv);
  return 0;
}

// ---- fit

struct FitArgs {
  std::string sketch;
  std::string fit = "eb-mle";
  double theta_lo = default_theta_lo;
  double theta_hi = default_theta_hi;
  std::uint64_t w_reps = 5;
  std::uint64_t n_prime = 0;
  std::uint64_t seed = 0;
  std::string output;
};

int run_fit(const FitArgs& a) {
  const Sketch sketch = load_sketch(a.sketch);
  std::ostringstream out;
  out.precision(17);
  if (a.fit == "eb-mle") {
    const ThetaFit fit = dp_fit_theta(sketch, a.theta_lo, a.theta_hi);
    nlohmann::json j;
    j["fit"] = "eb-mle";
    j["theta"] = fit.theta;
    j["loglik"] = fit.loglik;
    j["boundary_hit"] = fit.boundary_hit;
    j["bounds"] = {a.theta_lo, a.theta_hi};
    out << j.dump(2) << '\n';
  } else {
    const WassersteinFit fit = wasserstein_fit(sketch, wasserstein_config(a.w_reps, a.n_prime, a.seed));
    out << "# alpha_hat=" << fit.params.alpha << " theta_hat=" << fit.params.theta << " distance=" << fit.distance << '\n';
    out << "alpha,theta,distance\n";
    for (const auto& p : fit.surface) out << p.alpha << ',' << p.theta << ',' << p.distance << '\n';
  }
  write_output(a.output, out.str());
  return 0;
}

// ---- merge

int run_merge(const std::vector<std::string>& inputs, const std::string& output) {
  Sketch acc = load_sketch(inputs.at(0));
  for (std::size_t i = 1; i < inputs.size(); ++i) acc.merge(load_sketch(inputs[i]));
  write_output(output, as_chars(acc.serialize()));
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian nonparametric estimation from hashed count sketches"};
  app.require_subcommand(1);

  SketchArgs sk;
  auto* c_sketch = app.add_subcommand("sketch", "Hash a token stream into a sketch file");
  c_sketch->add_option("input", sk.input, "Input file ('-' for standard input)");
  c_sketch->add_option("--width,-J", sk.width, "Number of buckets J")->check(CLI::Range(1u, max_sketch_width));
  c_sketch->add_option("--seed", sk.seed, "Seed selecting the hash function");
  c_sketch->add_option("--tokenizer", sk.tokenizer, "lines | words | kmer:K | ngram:N");
  c_sketch->add_option("--dictionary", sk.dictionary, "Keep only words listed in this file (words, ngram)");
  c_sketch->add_option("--output,-o", sk.output, "Output sketch file (default: standard output)");

  EstimateArgs est;
  auto* c_est = app.add_subcommand("estimate", "Estimate coverage, frequency counts and distinct count");
  c_est->add_option("--sketch", est.sketch, "Sketch file")->required();
  c_est->add_option("--prior", est.prior)->check(CLI::IsMember({"dp", "pyp"}));
  c_est->add_option("--theta", est.theta);
  c_est->add_option("--alpha", est.alpha);
  c_est->add_option("--fit", est.fit, "none | eb-mle | eb-wasserstein")->check(CLI::IsMember({"none", "eb-mle", "eb-wasserstein"}));
  c_est->add_option("--method", est.method)->check(CLI::IsMember({"exact", "mc", "asymptotic"}));
  c_est->add_option("--r-max", est.r_max);
  c_est->add_option("--mc-samples", est.mc_samples);
  c_est->add_option("--debias", est.debias)->check(CLI::IsMember({"none", "tin"}));
  c_est->add_option("--seed", est.seed);
  c_est->add_option("--format", est.format)->check(CLI::IsMember({"json", "csv"}));
  c_est->add_option("--exact-cap", est.exact_cap, "Largest n for exact Pitman-Yor evaluation");
  c_est->add_option("--wasserstein-reps", est.w_reps);
  c_est->add_option("--n-prime", est.n_prime, "Simulation size for eb-wasserstein (0: min(n, 10000))");
  c_est->add_option("--output,-o", est.output);

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Draw synthetic data");
  c_sim->add_option("--model", sim.model)->check(CLI::IsMember({"dp", "pyp", "zipf"}));
  c_sim->add_option("--alpha", sim.alpha);
  c_sim->add_option("--theta", sim.theta);
  c_sim->add_option("--exponent", sim.exponent);
  c_sim->add_option("--vocab", sim.vocab);
  c_sim->add_option("--n", sim.n)->required();
  c_sim->add_option("--seed", sim.seed);
  c_sim->add_option("--emit", sim.emit)->check(CLI::IsMember({"tokens", "sketch", "truth"}));
  c_sim->add_option("--width,-J", sim.width)->check(CLI::Range(1u, max_sketch_width));
  c_sim->add_option("--hash-seed", sim.hash_seed);
  c_sim->add_option("--r-max", sim.r_max, "Largest r in the truth file");
  c_sim->add_option("--output,-o", sim.output);

  std::string exp_config, exp_output;
  auto* c_exp = app.add_subcommand("experiment", "Run a simulation experiment grid to CSV");
  c_exp->add_option("--config", exp_config)->required();
  c_exp->add_option("--output,-o", exp_output, "Overrides the config's output path");

  FitArgs fit;
  auto* c_fit = app.add_subcommand("fit", "Fit prior parameters to a sketch");
  c_fit->add_option("--sketch", fit.sketch)->required();
  c_fit->add_option("--fit", fit.fit)->check(CLI::IsMember({"eb-mle", "eb-wasserstein"}));
  c_fit->add_option("--theta-lo", fit.theta_lo);
  c_fit->add_option("--theta-hi", fit.theta_hi);
  c_fit->add_option("--wasserstein-reps", fit.w_reps);
  c_fit->add_option("--n-prime", fit.n_prime);
  c_fit->add_option("--seed", fit.seed);
  c_fit->add_option("--output,-o", fit.output);

  std::vector<std::string> merge_inputs;
  std::string merge_output;
  auto* c_merge = app.add_subcommand("merge", "Merge sketches built with the same hash");
  c_merge->add_option("inputs", merge_inputs)->required()->expected(1, -1);
  c_merge->add_option("--output,-o", merge_output);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_usage;
  }

  try {
    if (*c_sketch) return run_sketch(sk);
    if (*c_est) return run_estimate(est);
    if (*c_sim) return run_simulate(sim);
    if (*c_exp) return run_experiment_cmd(exp_config, exp_output);
    if (*c_fit) return run_fit(fit);
    if (*c_merge) return run_merge(merge_inputs, merge_output);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return exit_usage;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_domain;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_domain;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_data;
  } catch (const IncompatibleSketch& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_data;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_data;
  }
  return exit_usage;
}
