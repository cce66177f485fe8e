#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sagsim/algorithms/pipelines.hpp"
#include "sagsim/graph.hpp"

namespace sagsim {

inline constexpr const char* kRunSchemaVersion = "sagsim-run/1";

enum class Algorithm { mis, two_ruling_set, beta_ruling_set, sparsify, shatter, luby };

std::string to_string(Algorithm a);
Algorithm parse_algorithm(const std::string& name);

/// Everything needed to reproduce one run.
struct RunConfig {
  Algorithm algorithm = Algorithm::two_ruling_set;
  int beta = 2;  // only meaningful for brs; 2 for 2rs and 1 for the MIS variants
  PipelineOptions options;
  std::string graph;  // file path or generator descriptor
};

RulingSetResult execute(const Graph& g, const RunConfig& cfg);

struct RunRecord {
  RunConfig config;
  GraphStats graph;
  RulingSetResult result;
  double wall_seconds = 0.0;
  bool emit_set = false;

  /// 0 pass, 1 verification failure, 3 resource-audit failure.
  int exit_code() const;
  std::string to_json(int indent = 2) const;
  static std::string csv_header();
  std::string csv_row() const;
};

/// One CSV row for a run that threw before producing a result.
std::string csv_error_row(const RunConfig& cfg, const GraphStats& graph, const std::string& error);

/// Model for per-phase MPC cost: rounds <= c_g * (ceil(log2 ell) + 1) + c_a * ceil(1/eps).
struct PhaseSample {
  int ell = 1;
  double epsilon = 0.5;
  double rounds = 0.0;
};

struct PhaseCostFit {
  double c_g = 0.0;
  double c_a = 0.0;
  double quantile = 0.9;
  double max_ratio = 0.0;  // worst observed / predicted
  std::size_t samples = 0;
  std::size_t over_twice = 0;  // phases exceeding twice the fit
  double predict(int ell, double epsilon) const;
};

/// Nonnegative quantile regression over the two features: the constants minimize the pinball
/// loss at `quantile`, so the fit is an empirical upper envelope rather than a mean.
PhaseCostFit fit_phase_cost(const std::vector<PhaseSample>& samples, double quantile = 0.9);

/// Phase samples from a result: compressed phases that needed no overflow retry.
void collect_phase_samples(const RulingSetResult& r, double epsilon, std::vector<PhaseSample>& out);

}  // namespace sagsim
