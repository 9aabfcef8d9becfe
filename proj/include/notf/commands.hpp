#pragma once

// Experiment commands behind the `notf` CLI. Each command reads its inputs,
// writes its artifacts into an output directory and returns a summary. All of
// them are deterministic given their inputs and seeds; the only
// nondeterministic values (timestamps, wall times) live in manifest.json and
// trace.csv.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "notf/eval.hpp"
#include "notf/io.hpp"
#include "notf/solver.hpp"
#include "notf/synth.hpp"

namespace notf {

struct RunReport {
  json config;
  std::optional<EvalReport> eval;
  std::map<std::string, fs::path> artifacts;
  json extra = json::object();

  json to_json() const {
    json j;
    j["config"] = config;
    j["eval"] = eval ? notf::to_json(*eval) : json(nullptr);
    json a = json::object();
    for (const auto& [k, v] : artifacts) a[k] = v.filename().string();
    j["artifacts"] = a;
    for (const auto& [k, v] : extra.items()) j[k] = v;
    return j;
  }
};

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// ---------------------------------------------------------------------------
// synth

inline RunReport cmd_synth(const SynthSpec& spec, const fs::path& out_dir) {
  const SynthInstance inst = generate(spec);
  fs::create_directories(out_dir);
  RunReport rep;
  rep.config = {{"command", "synth"}, {"spec", to_json(spec)}};
  rep.artifacts = {{"truth_factors", out_dir / "truth.factors"},
                   {"truth", out_dir / "x.triples"},
                   {"observation", out_dir / "o.triples"},
                   {"flips", out_dir / "flips.csv"}};
  save_factors(rep.artifacts["truth_factors"], inst.factors);
  save_triples(rep.artifacts["truth"], inst.x);
  save_triples(rep.artifacts["observation"], inst.o);
  {
    auto out = detail::open_out(rep.artifacts["flips"]);
    out << "i,j,k\n";
    for (const auto& p : inst.flipped_positions) out << p.i << ',' << p.j << ',' << p.k << '\n';
  }
  rep.extra["hamming"] = inst.flipped_positions.size();
  rep.extra["truth_nonzeros"] = count_nonzero(inst.x);

  json manifest = rep.to_json();
  manifest["created"] = utc_timestamp();
  write_json(out_dir / "manifest.json", manifest);
  rep.artifacts["manifest"] = out_dir / "manifest.json";
  return rep;
}

inline json to_json(const OccurrenceSpec& s) {
  return {{"dims", {s.dims[0], s.dims[1], s.dims[2]}},
          {"density", s.density},
          {"communities", s.communities},
          {"max_count", s.max_count},
          {"seed", s.seed}};
}

inline RunReport cmd_synth_occurrence(const OccurrenceSpec& spec, const fs::path& out_dir) {
  const OccurrenceInstance inst = generate_occurrence(spec);
  fs::create_directories(out_dir);
  RunReport rep;
  rep.config = {{"command", "synth"}, {"occurrence", to_json(spec)}};
  rep.artifacts = {{"truth_factors", out_dir / "truth.factors"}, {"observation", out_dir / "o.triples"}};
  ModeLabels labels;
  const char* prefix[3] = {"FC", "FI", "Role"};
  for (std::size_t d = 0; d < 3; ++d)
    for (std::size_t i = 0; i < spec.dims[d]; ++i) labels[d].push_back(prefix[d] + std::to_string(i));
  save_factors(rep.artifacts["truth_factors"], inst.factors);
  save_triples(rep.artifacts["observation"], inst.o, labels);
  rep.extra["nonzeros"] = count_nonzero(inst.o);

  json manifest = rep.to_json();
  manifest["created"] = utc_timestamp();
  write_json(out_dir / "manifest.json", manifest);
  rep.artifacts["manifest"] = out_dir / "manifest.json";
  return rep;
}

// ---------------------------------------------------------------------------
// factorize

struct FactorizeOptions {
  std::optional<fs::path> truth;  // ground truth for the report, when known
  double threshold = kDefaultBinarizeThreshold;
};

inline RunReport cmd_factorize(const fs::path& input, const SolverConfig& cfg, const fs::path& out_dir,
                               const FactorizeOptions& opts = {}) {
  const TripleData data = load_triples(input);
  std::optional<Tensor3> truth;
  if (opts.truth) {
    truth = load_triples(*opts.truth).tensor;
    truth->require_same_shape(data.tensor, "factorize --truth");
  }

  const SolveResult res = solve(data.tensor, cfg);
  const Tensor3 recon = cp_reconstruct(res.factors);

  fs::create_directories(out_dir);
  RunReport rep;
  rep.config = {{"command", "factorize"}, {"input", input.string()}, {"solver", to_json(cfg)}};
  if (opts.truth) rep.config["truth"] = opts.truth->string();
  rep.config["threshold"] = opts.threshold;

  EvalReport ev = evaluate(recon, data.tensor, truth ? &*truth : nullptr, opts.threshold);
  ev.outer_iterations = res.trace.outer_iterations();
  ev.converged = res.trace.converged;
  ev.variant = cfg.variant;
  ev.rank = cfg.rank;
  rep.eval = ev;

  rep.artifacts = {{"factors", out_dir / "factors.factors"},
                   {"error", out_dir / "u.triples"},
                   {"trace", out_dir / "trace.csv"},
                   {"report", out_dir / "report.json"}};
  save_factors(rep.artifacts["factors"], res.factors);
  save_triples(rep.artifacts["error"], res.u);
  {
    auto out = detail::open_out(rep.artifacts["trace"]);
    write_trace_csv(out, res.trace);
  }
  const auto& last = res.trace.records.back();
  rep.extra["trace"] = {{"outer_iterations", res.trace.outer_iterations()},
                        {"converged", res.trace.converged},
                        {"final_res1", last.res1},
                        {"final_res2", last.res2},
                        {"final_objective", last.objective}};
  const auto nz = factor_nonzero_ratio(res.factors);
  rep.extra["factor_nonzero_ratio"] = {nz[0], nz[1], nz[2]};
  write_json(rep.artifacts["report"], rep.to_json());
  return rep;
}

// ---------------------------------------------------------------------------
// eval

struct EvalOptions {
  fs::path recon;                      // .factors or .triples
  fs::path reference;                  // observation O
  std::optional<fs::path> truth;       // ground truth X
  std::optional<fs::path> run_report;  // report.json of a factorize run
  std::optional<double> noise_ratio;
  double threshold = kDefaultBinarizeThreshold;
  std::optional<int> histogram_mode;
};

inline bool is_factor_file(const fs::path& p) {
  auto in = detail::open_in(p);
  std::string first;
  std::getline(in, first);
  return first.rfind("notf-factors", 0) == 0;
}

inline EvalReport cmd_eval(const EvalOptions& opts, const fs::path& out_dir) {
  const TripleData ref = load_triples(opts.reference);
  Tensor3 recon = is_factor_file(opts.recon) ? cp_reconstruct(load_factors(opts.recon)) : load_triples(opts.recon).tensor;
  recon.require_same_shape(ref.tensor, "eval");
  std::optional<Tensor3> truth;
  if (opts.truth) {
    truth = load_triples(*opts.truth).tensor;
    truth->require_same_shape(ref.tensor, "eval --truth");
  }

  EvalReport ev = evaluate(recon, ref.tensor, truth ? &*truth : nullptr, opts.threshold);
  ev.noise_ratio = opts.noise_ratio;
  if (opts.run_report) {
    const json run = read_json(*opts.run_report);
    const json& e = run.at("eval");
    ev.outer_iterations = e.at("outer_iterations").get<int>();
    ev.converged = e.at("converged").get<bool>();
    ev.rank = e.at("rank").get<Eigen::Index>();
    ev.variant = parse_variant(e.at("variant").get<std::string>()).value_or(NormVariant::L0);
  }

  fs::create_directories(out_dir);
  write_json(out_dir / "eval.json", to_json(ev));
  {
    auto out = detail::open_out(out_dir / "eval.csv");
    out << kEvalCsvHeader << '\n' << to_csv_row(ev) << '\n';
  }
  if (opts.histogram_mode) {
    const int mode = *opts.histogram_mode;
    const auto per_slice = slice_error_histogram(recon, ref.tensor, mode, opts.threshold);
    {
      auto out = detail::open_out(out_dir / "slice_errors.csv");
      out << "index,label,errors\n";
      const auto& labels = ref.labels;
      for (std::size_t i = 0; i < per_slice.size(); ++i) {
        std::string label;
        if (labels && !(*labels)[static_cast<std::size_t>(mode - 1)].empty()) {
          label = (*labels)[static_cast<std::size_t>(mode - 1)][i];
        }
        out << i << ',' << label << ',' << per_slice[i] << '\n';
      }
    }
    std::map<std::size_t, std::size_t> bins;
    for (std::size_t e : per_slice) ++bins[e];
    auto out = detail::open_out(out_dir / "error_histogram.csv");
    out << "errors,slices\n";
    for (const auto& [e, n] : bins) out << e << ',' << n << '\n';
  }
  return ev;
}

// ---------------------------------------------------------------------------
// communities

inline void write_communities_csv(std::ostream& out, const std::vector<Community>& cs) {
  out << "rank,mode,index,label,weight\n";
  for (const auto& c : cs)
    for (std::size_t d = 0; d < 3; ++d)
      for (const auto& m : c.members[d]) {
        out << c.rank_index << ',' << d + 1 << ',' << m.index << ',' << m.label.value_or("") << ','
            << format_double(m.weight) << '\n';
      }
}

inline void write_communities_text(std::ostream& out, const std::vector<Community>& cs) {
  const char* names[3] = {"mode1", "mode2", "mode3"};
  for (const auto& c : cs) {
    out << "community " << c.rank_index << ": " << c.members[0].size() << " / " << c.members[1].size() << " / "
        << c.members[2].size() << " members\n";
    for (std::size_t d = 0; d < 3; ++d) {
      out << "  " << names[d] << ':';
      for (const auto& m : c.members[d]) {
        out << ' ' << (m.label ? *m.label : std::to_string(m.index)) << '(' << format_double(m.weight) << ')';
      }
      out << '\n';
    }
  }
}

inline std::vector<Community> cmd_communities(const fs::path& factors_path, const std::optional<fs::path>& labels_path,
                                              double threshold, const fs::path& out_dir) {
  const FactorTriple f = load_factors(factors_path);
  std::optional<ModeLabels> labels;
  if (labels_path) labels = load_labels(*labels_path);
  auto cs = extract_communities(f, labels, threshold);

  fs::create_directories(out_dir);
  {
    auto out = detail::open_out(out_dir / "communities.csv");
    write_communities_csv(out, cs);
  }
  {
    auto out = detail::open_out(out_dir / "communities.txt");
    write_communities_text(out, cs);
  }
  auto out = detail::open_out(out_dir / "community_sizes.csv");
  out << "rank,mode1,mode2,mode3\n";
  for (const auto& c : cs) {
    out << c.rank_index << ',' << c.members[0].size() << ',' << c.members[1].size() << ',' << c.members[2].size()
        << '\n';
  }
  return cs;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepGrid {
  std::vector<double> noise_ratios{0.1};
  std::vector<Eigen::Index> ranks{3};
  std::vector<NormVariant> variants{NormVariant::L0};
  std::vector<std::uint64_t> seeds{0};

  std::size_t size() const { return noise_ratios.size() * ranks.size() * variants.size() * seeds.size(); }
};

struct SweepRow {
  NormVariant variant = NormVariant::L0;
  double noise_ratio = 0.0;
  Eigen::Index rank = 0;
  std::uint64_t seed = 0;
  std::string status = "ok";
  EvalReport eval;
  std::array<double, 3> nonzero_ratio{};
};

inline const char* kSweepCsvHeader =
    "variant,noise,rank,seed,status,converged,iterations,fp_truth,fn_truth,fp_observation,fn_observation,"
    "mse_truth,mse_observation,nz_a,nz_b,nz_c";

inline std::string to_csv_row(const SweepRow& r) {
  std::ostringstream s;
  s << to_string(r.variant) << ',' << format_double(r.noise_ratio) << ',' << r.rank << ',' << r.seed << ','
    << r.status;
  if (r.status != "ok") {
    s << ",,,,,,,,,,,";
    return s.str();
  }
  const auto& e = r.eval;
  s << ',' << (e.converged ? 1 : 0) << ',' << e.outer_iterations << ',' << e.vs_truth->fp << ',' << e.vs_truth->fn
    << ',' << e.vs_observation.fp << ',' << e.vs_observation.fn << ',' << format_double(*e.mse_vs_truth) << ','
    << format_double(e.mse_vs_observation) << ',' << format_double(r.nonzero_ratio[0]) << ','
    << format_double(r.nonzero_ratio[1]) << ',' << format_double(r.nonzero_ratio[2]);
  return s.str();
}

// One synthetic run: generate with `seed`, initialize CP-ALS with `seed`.
inline SweepRow run_synthetic(SynthSpec spec, SolverConfig cfg, double threshold = kDefaultBinarizeThreshold) {
  SweepRow row{cfg.variant, spec.noise_ratio, cfg.rank, spec.seed, "ok", {}, {}};
  cfg.init.seed = spec.seed;
  try {
    const SynthInstance inst = generate(spec);
    const SolveResult res = solve(inst.o, cfg);
    const Tensor3 recon = cp_reconstruct(res.factors);
    row.eval = evaluate(recon, inst.o, &inst.x, threshold);
    row.eval.outer_iterations = res.trace.outer_iterations();
    row.eval.converged = res.trace.converged;
    row.eval.variant = cfg.variant;
    row.eval.rank = cfg.rank;
    row.eval.noise_ratio = spec.noise_ratio;
    row.nonzero_ratio = factor_nonzero_ratio(res.factors);
  } catch (const DivergenceError& e) {
    row.status = "diverged@" + std::to_string(e.iteration());
  } catch (const std::exception& e) {
    row.status = "error";
  }
  return row;
}

// Runs the cross product noise x rank x variant x seed (in that nesting
// order) with up to `jobs` worker threads and writes sweep.csv once at the end.
inline std::vector<SweepRow> cmd_sweep(const SweepGrid& grid, const SynthSpec& base_spec, const SolverConfig& base_cfg,
                                       const fs::path& out_dir, unsigned jobs = 1,
                                       double threshold = kDefaultBinarizeThreshold) {
  if (grid.size() == 0) throw DomainError("sweep: empty grid");
  struct Job {
    SynthSpec spec;
    SolverConfig cfg;
  };
  std::vector<Job> work;
  for (double noise : grid.noise_ratios)
    for (Eigen::Index rank : grid.ranks)
      for (NormVariant v : grid.variants)
        for (std::uint64_t seed : grid.seeds) {
          Job j{base_spec, base_cfg};
          j.spec.noise_ratio = noise;
          j.spec.seed = seed;
          j.cfg.rank = rank;
          j.cfg.variant = v;
          j.spec.validate();
          j.cfg.validate();
          work.push_back(j);
        }

  std::vector<SweepRow> rows(work.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t n = next++; n < work.size(); n = next++) rows[n] = run_synthetic(work[n].spec, work[n].cfg, threshold);
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(work.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  fs::create_directories(out_dir);
  {
    auto out = detail::open_out(out_dir / "sweep.csv");
    out << kSweepCsvHeader << '\n';
    for (const auto& r : rows) out << to_csv_row(r) << '\n';
  }
  json manifest = {{"command", "sweep"},
                   {"spec", to_json(base_spec)},
                   {"solver", to_json(base_cfg)},
                   {"threshold", threshold},
                   {"runs", rows.size()},
                   {"created", utc_timestamp()}};
  write_json(out_dir / "manifest.json", manifest);
  return rows;
}

}  // namespace notf
