#include "sagsim/harness.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace sagsim {

using nlohmann::json;

namespace {

std::string join_f(const std::vector<double>& fs) {
  std::ostringstream os;
  os << std::boolalpha;
  for (std::size_t i = 0; i < fs.size(); ++i) os << (i ? ";" : "") << fs[i];
  return os.str();
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

json verdict_json(const Verdict& v) {
  json j{{"pass", v.pass}, {"measured", v.measured}, {"bound", v.bound}};
  if (!std::isfinite(v.measured)) j["measured"] = nullptr;
  if (!v.pass) {
    j["witness"] = v.witness;
    j["detail"] = v.detail;
  }
  return j;
}

std::string config_columns(const RunConfig& cfg, const GraphStats& g, const std::vector<double>& fs,
                           const std::string& schedule) {
  const PipelineOptions& o = cfg.options;
  std::ostringstream os;
  os << std::boolalpha;
  os << to_string(cfg.algorithm) << ',' << to_string(o.engine.engine) << ',' << cfg.beta << ','
     << csv_escape(schedule) << ',' << csv_escape(join_f(fs)) << ',' << o.engine.epsilon << ','
     << to_string(o.engine.memory) << ',' << o.seed << ',' << csv_escape(cfg.graph) << ',' << g.n << ',' << g.m
     << ',' << g.max_degree << ',' << (o.engine.force_ell ? std::to_string(*o.engine.force_ell) : std::string())
     << ',' << o.engine.direct_only;
  return os.str();
}

}  // namespace

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::mis: return "mis";
    case Algorithm::two_ruling_set: return "2rs";
    case Algorithm::beta_ruling_set: return "brs";
    case Algorithm::sparsify: return "sparsify";
    case Algorithm::shatter: return "shatter";
    case Algorithm::luby: return "luby";
  }
  return "?";
}

Algorithm parse_algorithm(const std::string& name) {
  if (name == "mis") return Algorithm::mis;
  if (name == "2rs") return Algorithm::two_ruling_set;
  if (name == "brs") return Algorithm::beta_ruling_set;
  if (name == "sparsify") return Algorithm::sparsify;
  if (name == "shatter") return Algorithm::shatter;
  if (name == "luby") return Algorithm::luby;
  throw ConfigError("unknown algorithm '" + name + "'");
}

RulingSetResult execute(const Graph& g, const RunConfig& cfg) {
  switch (cfg.algorithm) {
    case Algorithm::mis: return mis(g, cfg.options);
    case Algorithm::two_ruling_set: return two_ruling_set(g, cfg.options);
    case Algorithm::beta_ruling_set: return beta_ruling_set(g, cfg.beta, cfg.options);
    case Algorithm::sparsify: return run_sparsify(g, cfg.options);
    case Algorithm::shatter: return run_shatter(g, cfg.options);
    case Algorithm::luby: return luby_mis(g, cfg.options);
  }
  throw ConfigError("unknown algorithm");
}

int RunRecord::exit_code() const {
  if (!result.success()) return 1;
  if (result.metrics.audit && !result.metrics.audit->pass) return 3;
  return 0;
}

std::string RunRecord::to_json(int indent) const {
  const PipelineOptions& o = config.options;
  const RulingSetResult& r = result;
  const PipelineMetrics& m = r.metrics;
  json j;
  j["version"] = kRunSchemaVersion;
  j["config"] = {
      {"algorithm", to_string(config.algorithm)},
      {"engine", to_string(o.engine.engine)},
      {"beta", r.beta},
      {"f_schedule", r.f_schedule},
      {"schedule", r.schedule},
      {"epsilon", o.engine.epsilon},
      {"memory_mode", to_string(o.engine.memory)},
      {"seed", o.seed},
      {"c", o.c},
      {"delta", o.shatter_delta},
      {"force_ell", o.engine.force_ell ? json(*o.engine.force_ell) : json(nullptr)},
      {"direct_only", o.engine.direct_only},
      {"overflow", o.engine.overflow == OverflowPolicy::shrink ? "shrink" : "abort"},
      {"shatter_iterations", o.shatter_iterations},
      {"shatter_phase_iterations", o.shatter_phase_iterations},
      {"graph", {{"source", config.graph}, {"n", graph.n}, {"m", graph.m}, {"max_degree", graph.max_degree}}},
  };
  json stages = json::array();
  for (const StageReport& s : r.stage_reports) {
    stages.push_back({{"index", s.index},
                      {"f", s.f},
                      {"input_size", s.input_size},
                      {"input_max_degree", s.input_max_degree},
                      {"output_size", s.output_size},
                      {"dominates_previous", verdict_json(s.dominates)},
                      {"degree_bound", verdict_json(s.degree)}});
  }
  j["result"] = {
      {"set_size", r.set.size()},
      {"independent", r.independent.pass},
      {"dominated", r.dominated.pass},
      {"beta", r.beta},
      {"success", r.success()},
      {"verdicts", {{"independent", verdict_json(r.independent)}, {"dominated", verdict_json(r.dominated)}}},
      {"stages", stages},
      {"shatter_size", r.shatter_size},
      {"residual_size", r.residual_size},
      {"max_residual_component", r.residual_components.empty() ? 0 : r.residual_components.back()},
  };
  if (emit_set) j["result"]["set"] = r.set;

  json programs = json::array();
  for (const ProgramReport& p : m.programs) {
    std::size_t compressed = 0, fallback = 0, direct = 0, bound_fail = 0, strict_fail = 0, growth_fail = 0;
    int max_ell = 0;
    for (const PhaseReport& ph : p.phases) {
      (ph.direct ? direct : ph.fallback ? fallback : compressed) += 1;
      if (ph.fallback || ph.direct) continue;
      max_ell = std::max(max_ell, ph.ell);
      bound_fail += ph.bound_ok ? 0 : 1;
      strict_fail += ph.strict_bound_ok ? 0 : 1;
      growth_fail += ph.growth_ok ? 0 : 1;
    }
    json pj{{"name", p.name},
            {"n", p.n},
            {"m", p.m},
            {"max_degree", p.max_degree},
            {"scheduled_rounds", p.scheduled_rounds},
            {"effective_rounds", p.effective_rounds},
            {"mpc_rounds", p.mpc_rounds},
            {"phases", {{"compressed", compressed},
                        {"fallback", fallback},
                        {"direct", direct},
                        {"max_ell", max_ell},
                        {"ball_bound_violations", bound_fail},
                        {"strict_ball_bound_violations", strict_fail},
                        {"growth_violations", growth_fail}}}};
    if (p.congestion) {
      pj["state_congested"] = {{"pass", p.congestion->pass}, {"worst_ratio", p.congestion->worst_ratio}};
    }
    programs.push_back(pj);
  }
  j["metrics"] = {
      {"congest_rounds", m.congest_rounds},
      {"mpc_rounds", m.mpc.round_count()},
      {"max_sent_words", m.mpc.max_sent()},
      {"max_recv_words", m.mpc.max_recv()},
      {"peak_machine_words", m.mpc.peak_machine_words()},
      {"peak_total_words", m.mpc.peak_total_words()},
      {"machines", m.mpc.peak_machines},
      {"wall_seconds", wall_seconds},
      {"programs", programs},
  };
  if (m.audit) {
    j["metrics"]["audit"] = {{"pass", m.audit->pass},
                             {"reason", m.audit->reason},
                             {"budget_words", m.audit->budget_words},
                             {"machine_count_warning", m.audit->machine_count_warning}};
  }
  return j.dump(indent);
}

std::string RunRecord::csv_header() {
  return "algorithm,engine,beta,schedule,f,epsilon,memory_mode,seed,graph,n,m,max_degree,force_ell,direct_only,"
         "set_size,independent,dominated,stages_dominate,degree_bound_ok,audit,"
         "congest_rounds,mpc_rounds,max_sent_words,max_recv_words,peak_machine_words,peak_total_words,"
         "machines,wall_seconds,note";
}

std::string RunRecord::csv_row() const {
  const RulingSetResult& r = result;
  const RoundMetrics& mm = r.metrics.mpc;
  bool stages_ok = true, degree_ok = true;
  for (const StageReport& s : r.stage_reports) {
    stages_ok = stages_ok && s.dominates.pass;
    degree_ok = degree_ok && s.degree.pass;
  }
  std::ostringstream os;
  os << std::boolalpha;
  os << config_columns(config, graph, r.f_schedule, r.schedule) << ',' << r.set.size() << ','
     << r.independent.pass << ',' << r.dominated.pass << ',' << stages_ok << ',' << degree_ok << ','
     << (r.metrics.audit ? (r.metrics.audit->pass ? "pass" : "fail") : "n/a") << ',' << r.metrics.congest_rounds
     << ',' << mm.round_count() << ',' << mm.max_sent() << ',' << mm.max_recv() << ',' << mm.peak_machine_words()
     << ',' << mm.peak_total_words() << ',' << mm.peak_machines << ',' << wall_seconds << ',';
  if (!r.success()) os << "verification failed";
  else if (r.metrics.audit && !r.metrics.audit->pass) os << csv_escape(r.metrics.audit->reason);
  return os.str();
}

std::string csv_error_row(const RunConfig& cfg, const GraphStats& graph, const std::string& error) {
  return config_columns(cfg, graph, {}, "") + ",,,,,,,,,,,,,,," + csv_escape("error: " + error);
}

double PhaseCostFit::predict(int ell, double epsilon) const {
  return c_g * (ceil_log2(static_cast<std::uint64_t>(ell)) + 1) + c_a * std::ceil(1.0 / epsilon - 1e-12);
}

PhaseCostFit fit_phase_cost(const std::vector<PhaseSample>& samples, double quantile) {
  if (!(quantile > 0.0 && quantile < 1.0)) throw ConfigError("fit quantile must be in (0,1)");
  PhaseCostFit fit;
  fit.quantile = quantile;
  fit.samples = samples.size();
  if (samples.empty()) return fit;

  // Pinball loss is piecewise linear and convex in (c_g, c_a), so an optimum sits on a vertex:
  // a line through two distinct observations, or a single-feature line through one.
  struct Point {
    double x1, x2, y;
    std::size_t count;
  };
  std::vector<Point> pts;
  {
    std::vector<std::array<double, 3>> raw;
    raw.reserve(samples.size());
    for (const PhaseSample& s : samples) {
      raw.push_back({static_cast<double>(ceil_log2(static_cast<std::uint64_t>(s.ell)) + 1),
                     std::ceil(1.0 / s.epsilon - 1e-12), s.rounds});
    }
    std::sort(raw.begin(), raw.end());
    for (const auto& r : raw) {
      if (!pts.empty() && pts.back().x1 == r[0] && pts.back().x2 == r[1] && pts.back().y == r[2]) {
        ++pts.back().count;
      } else {
        pts.push_back({r[0], r[1], r[2], 1});
      }
    }
  }
  auto loss = [&](double g, double a) {
    double e = 0;
    for (const Point& p : pts) {
      const double d = p.y - (g * p.x1 + a * p.x2);
      e += static_cast<double>(p.count) * (d >= 0 ? quantile * d : (quantile - 1.0) * d);
    }
    return e;
  };
  double best = std::numeric_limits<double>::infinity();
  auto consider = [&](double g, double a) {
    if (!(g >= 0.0) || !(a >= 0.0)) return;
    const double e = loss(g, a);
    if (e < best - 1e-12) {
      best = e;
      fit.c_g = g;
      fit.c_a = a;
    }
  };
  for (std::size_t i = 0; i < pts.size(); ++i) {
    consider(pts[i].y / pts[i].x1, 0.0);
    consider(0.0, pts[i].y / pts[i].x2);
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const double det = pts[i].x1 * pts[j].x2 - pts[i].x2 * pts[j].x1;
      if (std::abs(det) < 1e-12) continue;
      consider((pts[i].y * pts[j].x2 - pts[i].x2 * pts[j].y) / det, (pts[i].x1 * pts[j].y - pts[i].y * pts[j].x1) / det);
    }
  }
  for (const PhaseSample& s : samples) {
    const double p = fit.predict(s.ell, s.epsilon);
    const double ratio = p > 0 ? s.rounds / p : std::numeric_limits<double>::infinity();
    fit.max_ratio = std::max(fit.max_ratio, ratio);
    fit.over_twice += ratio > 2.0 ? 1 : 0;
  }
  return fit;
}

void collect_phase_samples(const RulingSetResult& r, double epsilon, std::vector<PhaseSample>& out) {
  for (const ProgramReport& p : r.metrics.programs) {
    for (const PhaseReport& ph : p.phases) {
      if (ph.fallback || ph.direct || ph.overflow_retries > 0) continue;
      out.push_back({ph.ell, epsilon, static_cast<double>(ph.mpc_rounds)});
    }
  }
}

}  // namespace sagsim
