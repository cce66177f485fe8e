// sagsim: generate graphs, run one algorithm, or sweep a benchmark grid.
// Exit codes: 0 pass, 1 verification failure, 2 usage error, 3 resource-audit failure.

#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "sagsim/harness.hpp"

using namespace sagsim;

namespace {

constexpr int kPass = 0;
constexpr int kVerifyFail = 1;
constexpr int kUsage = 2;
constexpr int kAudit = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EngineFlags {
  std::string engine = "mpc-v1";
  double epsilon = 0.5;
  std::string memory = "unrestricted";
  std::uint64_t seed = 1;
  std::optional<double> f;
  std::optional<int> force_ell;
  double c = 3.0;
  double delta = 1.0;
  int shatter_iterations = 0;
  int phase_iterations = 0;
  std::string overflow = "shrink";
  bool direct_only = false;
};

void add_engine_flags(CLI::App* cmd, EngineFlags& e) {
  cmd->add_option("--engine", e.engine, "congest | mpc-v1 | mpc-v2")->capture_default_str();
  cmd->add_option("--epsilon", e.epsilon, "machine memory exponent, S = ceil(n^eps)")->capture_default_str();
  cmd->add_option("--memory", e.memory, "unrestricted | input-linear")->capture_default_str();
  cmd->add_option("--f", e.f, "sparsification parameter (overrides the schedule; must exceed 3)");
  cmd->add_option("--force-ell", e.force_ell, "fixed phase length for the compressed engines");
  cmd->add_option("--c", e.c, "sparsification constant (>= 3)")->capture_default_str();
  cmd->add_option("--delta", e.delta, "shatter phase-length parameter")->capture_default_str();
  cmd->add_option("--shatter-iterations", e.shatter_iterations, "total shatter iterations (0: default)");
  cmd->add_option("--phase-iterations", e.phase_iterations, "shatter iterations per phase (0: default)");
  cmd->add_option("--overflow", e.overflow, "shrink | abort, on ball overflow")->capture_default_str();
  cmd->add_flag("--direct-only", e.direct_only, "uncompressed baseline: one aggregation per round");
}

PipelineOptions to_options(const EngineFlags& e) {
  PipelineOptions o;
  o.engine.engine = parse_engine(e.engine);
  o.engine.epsilon = e.epsilon;
  o.engine.memory = parse_memory_mode(e.memory);
  o.engine.force_ell = e.force_ell;
  if (e.overflow == "shrink") o.engine.overflow = OverflowPolicy::shrink;
  else if (e.overflow == "abort") o.engine.overflow = OverflowPolicy::abort;
  else throw ConfigError("--overflow must be shrink or abort");
  o.engine.direct_only = e.direct_only;
  o.seed = e.seed;
  o.f = e.f;
  o.c = e.c;
  o.shatter_delta = e.delta;
  o.shatter_iterations = e.shatter_iterations;
  o.shatter_phase_iterations = e.phase_iterations;
  if (!(e.epsilon > 0.0 && e.epsilon < 1.0)) throw ConfigError("--epsilon must lie in (0,1)");
  if (e.force_ell && *e.force_ell < 1) throw ConfigError("--force-ell must be >= 1");
  return o;
}

struct GenFlags {
  std::string model;
  std::size_t n = 0;
  double p = 0.0;
  std::size_t d = 0;
  std::size_t k = 0;
  std::uint64_t seed = 1;
};

void add_gen_flags(CLI::App* cmd, GenFlags& g, bool with_n) {
  cmd->add_option("--model", g.model, "gnp | random_regular | path | cycle | clique | star | disjoint_cliques")
      ->required();
  if (with_n) cmd->add_option("--n", g.n, "number of nodes")->required();
  cmd->add_option("--p", g.p, "gnp edge probability in [0,1]");
  cmd->add_option("--d", g.d, "random_regular degree");
  cmd->add_option("--k", g.k, "disjoint_cliques clique size");
}

Graph generate(const GenFlags& f, std::size_t n, std::uint64_t seed) {
  if (f.p < 0.0 || f.p > 1.0) throw UsageError("--p must lie in [0,1]");
  GenParams gp;
  gp.n = n;
  gp.p = f.p;
  gp.d = f.d;
  gp.k = f.k;
  return gen_graph(parse_graph_model(f.model), gp, seed);
}

std::string descriptor(const GenFlags& f, std::size_t n, std::uint64_t seed) {
  std::ostringstream os;
  os << f.model << "(n=" << n;
  if (f.model == "gnp") os << ";p=" << f.p;
  if (f.model == "random_regular") os << ";d=" << f.d;
  if (f.model == "disjoint_cliques") os << ";k=" << f.k;
  os << ";seed=" << seed << ")";
  return os.str();
}

std::vector<std::uint64_t> parse_seeds(const std::string& spec) {
  std::vector<std::uint64_t> out;
  if (spec.empty()) return out;
  const auto dots = spec.find("..");
  try {
    if (dots == std::string::npos) {
      out.push_back(std::stoull(spec));
      return out;
    }
    const std::uint64_t a = std::stoull(spec.substr(0, dots));
    const std::uint64_t b = std::stoull(spec.substr(dots + 2));
    for (std::uint64_t s = a; s <= b; ++s) out.push_back(s);
  } catch (const std::logic_error&) {
    throw UsageError("--seeds expects A..B or a single integer");
  }
  return out;
}

template <class T>
std::vector<T> parse_list(const std::string& spec, const char* flag) {
  std::vector<T> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::istringstream is(item);
    T v;
    if (!(is >> v) || !is.eof()) throw UsageError(std::string(flag) + " expects a comma-separated list");
    out.push_back(v);
  }
  return out;
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write " + path);
  out << text;
}

int cmd_gen(const GenFlags& f, const std::string& out) {
  const Graph g = generate(f, f.n, f.seed);
  if (out.empty() || out == "-") write_graph(g, std::cout);
  else save_graph(g, out);
  return kPass;
}

struct RunFlags {
  std::string graph;
  std::string algo = "2rs";
  std::optional<int> beta;
  bool emit_set = false;
  std::string out;
};

RunConfig make_config(const std::string& algo, std::optional<int> beta, const EngineFlags& e) {
  RunConfig cfg;
  cfg.algorithm = parse_algorithm(algo);
  if (beta && cfg.algorithm != Algorithm::beta_ruling_set && !(cfg.algorithm == Algorithm::two_ruling_set && *beta == 2)) {
    throw UsageError("--beta only applies to --algo brs");
  }
  switch (cfg.algorithm) {
    case Algorithm::beta_ruling_set:
      cfg.beta = beta.value_or(2);
      if (cfg.beta < 2) throw UsageError("--beta must be >= 2");
      break;
    case Algorithm::two_ruling_set: cfg.beta = 2; break;
    default: cfg.beta = 1;
  }
  cfg.options = to_options(e);
  return cfg;
}

RunRecord run_one(const Graph& g, const RunConfig& cfg) {
  RunRecord rec;
  rec.config = cfg;
  rec.graph = graph_stats(g);
  const auto t0 = std::chrono::steady_clock::now();
  rec.result = execute(g, cfg);
  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

int cmd_run(const RunFlags& f, const EngineFlags& e) {
  RunConfig cfg = make_config(f.algo, f.beta, e);
  cfg.graph = f.graph;
  const Graph g = load_graph(f.graph);
  RunRecord rec = run_one(g, cfg);
  rec.emit_set = f.emit_set;
  write_output(f.out, rec.to_json() + "\n");
  return rec.exit_code();
}

struct BenchFlags {
  GenFlags gen;
  std::string n_list;
  std::string seeds = "1..1";
  std::string beta_list;
  std::string algo = "2rs";
  std::uint64_t graph_seed = 1;
  std::string out;
};

std::string trend(const std::vector<double>& ys) {
  if (ys.size() < 2) return "n/a";
  bool nonincreasing = true;
  for (std::size_t i = 1; i < ys.size(); ++i) nonincreasing = nonincreasing && ys[i] <= ys[i - 1];
  return nonincreasing ? "non-increasing" : "mixed";
}

int cmd_bench(const BenchFlags& b, const EngineFlags& e) {
  const auto ns = parse_list<std::size_t>(b.n_list, "--n");
  const auto seeds = parse_seeds(b.seeds);
  auto betas = parse_list<int>(b.beta_list, "--beta");
  const Algorithm algo = parse_algorithm(b.algo);
  if (!betas.empty() && algo != Algorithm::beta_ruling_set) throw UsageError("--beta only applies to --algo brs");
  if (betas.empty()) betas.push_back(algo == Algorithm::beta_ruling_set ? 2 : 0);
  // Validate every flag before the first run.
  (void)to_options(e);
  if (b.gen.p < 0.0 || b.gen.p > 1.0) throw UsageError("--p must lie in [0,1]");

  std::ostringstream csv;
  csv << RunRecord::csv_header() << "\n";
  int code = kPass;
  std::vector<PhaseSample> samples;
  std::map<std::pair<std::size_t, int>, std::pair<double, int>> by_beta;  // (n, beta) -> (sum rounds, count)
  for (std::size_t n : ns) {
    const Graph g = generate(b.gen, n, b.graph_seed);
    const GraphStats st = graph_stats(g);
    for (int beta : betas) {
      for (std::uint64_t seed : seeds) {
        EngineFlags ef = e;
        ef.seed = seed;
        RunConfig cfg = make_config(b.algo, beta > 0 ? std::optional<int>(beta) : std::nullopt, ef);
        cfg.graph = descriptor(b.gen, n, b.graph_seed);
        try {
          RunRecord rec = run_one(g, cfg);
          csv << rec.csv_row() << "\n";
          const int c = rec.exit_code();
          if (c == kVerifyFail || (c == kAudit && code == kPass)) code = c;
          collect_phase_samples(rec.result, cfg.options.engine.epsilon, samples);
          auto& acc = by_beta[{n, cfg.beta}];
          acc.first += static_cast<double>(rec.result.metrics.mpc.round_count());
          acc.second += 1;
        } catch (const CapacityError& ex) {
          csv << csv_error_row(cfg, st, ex.what()) << "\n";
          if (code == kPass) code = kAudit;
        } catch (const ExecutionError& ex) {
          csv << csv_error_row(cfg, st, ex.what()) << "\n";
          code = kVerifyFail;
        }
      }
    }
  }
  if (!ns.empty() && !seeds.empty()) {
    const PhaseCostFit fit = fit_phase_cost(samples);
    std::ostringstream note;
    note << "c_g=" << fit.c_g << ";c_a=" << fit.c_a << ";max_ratio=" << fit.max_ratio
         << ";phases=" << fit.samples << ";over_2x=" << fit.over_twice;
    for (std::size_t n : ns) {
      std::vector<double> ys;
      for (int beta : betas) {
        const auto it = by_beta.find({n, beta > 0 ? beta : (algo == Algorithm::two_ruling_set ? 2 : 1)});
        if (it != by_beta.end() && it->second.second > 0) ys.push_back(it->second.first / it->second.second);
      }
      note << ";beta_trend_n" << n << "=" << trend(ys);
    }
    // Summary row: same column count, algorithm "summary", fitted constants in the note.
    csv << "summary" << std::string(28, ',') << note.str() << "\n";
  }
  write_output(b.out, csv.str());
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sagsim: round-compression simulator for low-memory MPC ruling-set algorithms"};
  app.require_subcommand(1);

  GenFlags gen;
  std::string gen_out;
  auto* g = app.add_subcommand("gen", "generate a graph file");
  add_gen_flags(g, gen, true);
  g->add_option("--seed", gen.seed, "generator seed")->capture_default_str();
  g->add_option("--out", gen_out, "output file (default: stdout)");

  RunFlags run;
  EngineFlags run_engine;
  auto* r = app.add_subcommand("run", "run one algorithm and print a JSON record");
  r->add_option("--graph", run.graph, "edge-list file")->required();
  r->add_option("--algo", run.algo, "mis | 2rs | brs | sparsify | shatter | luby")->capture_default_str();
  r->add_option("--beta", run.beta, "ruling-set parameter for brs");
  r->add_option("--seed", run_engine.seed, "tape seed")->capture_default_str();
  r->add_flag("--emit-set", run.emit_set, "include the chosen set in the JSON");
  r->add_option("--out", run.out, "output file (default: stdout)");
  add_engine_flags(r, run_engine);

  BenchFlags bench;
  EngineFlags bench_engine;
  auto* b = app.add_subcommand("bench", "sweep seeds, sizes and beta; print CSV");
  add_gen_flags(b, bench.gen, false);
  b->add_option("--n", bench.n_list, "comma-separated node counts")->required();
  b->add_option("--seeds", bench.seeds, "seed range A..B")->capture_default_str();
  b->add_option("--beta", bench.beta_list, "comma-separated beta values (brs only)");
  b->add_option("--algo", bench.algo, "mis | 2rs | brs | sparsify | shatter | luby")->capture_default_str();
  b->add_option("--graph-seed", bench.graph_seed, "generator seed shared by every row")->capture_default_str();
  b->add_option("--out", bench.out, "output file (default: stdout)");
  add_engine_flags(b, bench_engine);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (g->parsed()) return cmd_gen(gen, gen_out);
    if (r->parsed()) return cmd_run(run, run_engine);
    if (b->parsed()) return cmd_bench(bench, bench_engine);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const ConfigError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const ParseError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kUsage;
  } catch (const CapacityError& e) {
    std::cerr << "resource failure: " << e.what() << "\n";
    return kAudit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kVerifyFail;
  }
  return kUsage;
}
