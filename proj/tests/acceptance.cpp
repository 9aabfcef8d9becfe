// Acceptance gate. Prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "notf/notf.hpp"
#include "oracles.hpp"

using namespace notf;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::printf("%s C%d %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", id, title.c_str(), o.detail.c_str(), secs);
  std::fflush(stdout);
}

template <class T>
double median(std::vector<T> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? static_cast<double>(v[n / 2]) : 0.5 * (static_cast<double>(v[n / 2 - 1]) + static_cast<double>(v[n / 2]));
}

SweepRow run(double noise, Eigen::Index rank, NormVariant v, std::uint64_t seed) {
  SynthSpec spec;
  spec.noise_ratio = noise;
  spec.seed = seed;
  SolverConfig cfg;
  cfg.rank = rank;
  cfg.variant = v;
  return run_synthetic(spec, cfg);
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("notf_acceptance_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

const std::vector<double> kNoise{0.02, 0.05, 0.10};
const std::vector<std::uint64_t> kSeeds{0, 1, 2, 3, 4};

Outcome noiseless_recovery() {
  SynthSpec spec;
  spec.noise_ratio = 0.0;
  const SynthInstance inst = generate(spec);
  const SolveResult r = solve(inst.o, SolverConfig{});
  const auto& last = r.trace.records.back();
  const Confusion c = confusion_counts(cp_reconstruct(r.factors), inst.x);
  std::ostringstream s;
  s << "converged=" << r.trace.converged << " iters=" << r.trace.outer_iterations() << " res1=" << last.res1
    << " res2=" << last.res2 << " fp=" << c.fp << " fn=" << c.fn;
  return {r.trace.converged && last.res1 < 1e-3 && last.res2 < 1e-3 && c == Confusion{0, 0}, s.str()};
}

Outcome rank3_ordering() {
  std::size_t l0_runs = 0, l0_zero_fp = 0, l2_fail = 0;
  std::vector<double> l0_fn_frac;
  std::vector<int> l0_iters, l1_iters;
  std::string problems;
  for (double noise : kNoise)
    for (std::uint64_t seed : kSeeds) {
      SynthSpec spec;
      spec.noise_ratio = noise;
      spec.seed = seed;
      const double positives = static_cast<double>(count_nonzero(generate(spec).x));
      const SweepRow r0 = run(noise, 3, NormVariant::L0, seed);
      const SweepRow r1 = run(noise, 3, NormVariant::L1, seed);
      const SweepRow r2 = run(noise, 3, NormVariant::L2, seed);
      if (r0.status != "ok" || r1.status != "ok" || r2.status != "ok") {
        problems += " status@" + format_double(noise) + "/" + std::to_string(seed);
        ++l2_fail;
        continue;
      }
      ++l0_runs;
      l0_zero_fp += r0.eval.vs_truth->fp == 0;
      l0_fn_frac.push_back(static_cast<double>(r0.eval.vs_truth->fn) / positives);
      l0_iters.push_back(r0.eval.outer_iterations);
      l1_iters.push_back(r1.eval.outer_iterations);
      if (!(r2.eval.vs_truth->fn == 0 && r2.eval.vs_truth->fp > r0.eval.vs_truth->fp)) ++l2_fail;
    }
  const std::size_t total = kNoise.size() * kSeeds.size();
  const double fp_share = static_cast<double>(l0_zero_fp) / static_cast<double>(total);
  const double fn_med = l0_fn_frac.empty() ? 1.0 : median(l0_fn_frac);
  const double it0 = median(l0_iters), it1 = median(l1_iters);
  std::ostringstream s;
  s << "l0 fp=0 in " << l0_zero_fp << "/" << total << ", l0 median fn/TP=" << fn_med << ", l2 violations=" << l2_fail
    << ", median iters l1=" << it1 << " vs l0=" << it0 << problems;
  return {l0_runs == total && fp_share >= 0.8 && fn_med <= 0.05 && l2_fail == 0 && it1 > it0, s.str()};
}

Outcome rank6_exact() {
  std::string hits;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SweepRow r = run(0.10, 6, NormVariant::L0, seed);
    if (r.status == "ok" && r.eval.vs_truth->fp == 0 && r.eval.vs_truth->fn == 0) hits += " " + std::to_string(seed);
  }
  return {!hits.empty(), hits.empty() ? "no seed in 0..9 reached fp=fn=0" : "exact at seeds" + hits};
}

Outcome denoising() {
  std::size_t converged = 0, violations = 0;
  for (std::uint64_t seed : kSeeds) {
    const SweepRow r = run(0.10, 3, NormVariant::L0, seed);
    if (r.status != "ok" || !r.eval.converged) continue;
    ++converged;
    violations += r.eval.mse_vs_observation < *r.eval.mse_vs_truth;
  }
  std::ostringstream s;
  s << converged << " converged runs, " << violations << " with mse(O) < mse(X)";
  return {converged > 0 && violations == 0, s.str()};
}

Outcome factor_sparsity() {
  std::size_t sparser = 0;
  std::ostringstream s;
  for (std::uint64_t seed : kSeeds) {
    const SweepRow r0 = run(0.10, 3, NormVariant::L0, seed);
    const SweepRow r2 = run(0.10, 3, NormVariant::L2, seed);
    bool all = r0.status == "ok" && r2.status == "ok";
    for (std::size_t d = 0; d < 3 && all; ++d) all = r0.nonzero_ratio[d] < r2.nonzero_ratio[d];
    sparser += all;
    if (seed == 0) {
      s << "seed0 l0=(" << r0.nonzero_ratio[0] << "," << r0.nonzero_ratio[1] << "," << r0.nonzero_ratio[2] << ") l2=("
        << r2.nonzero_ratio[0] << "," << r2.nonzero_ratio[1] << "," << r2.nonzero_ratio[2] << "); ";
    }
  }
  s << sparser << "/" << kSeeds.size() << " seeds sparser in all modes";
  return {sparser >= 4, s.str()};
}

Outcome prox_suite() {
  std::mt19937_64 gen(2024);
  const Dims dims{25, 20, 20};  // 10^4 entries
  const double tau = 10.0, t = 1.0 / tau;
  const Tensor3 z = oracle::random_tensor(gen, dims, -2.0, 2.0);
  const Tensor3 p0 = prox_l0(z, t), p1 = prox_l1(z, t), p2 = prox_l2(z, tau);
  std::size_t l0_bad = 0;
  double l1_err = 0, l2_err = 0;
  for (std::size_t n = 0; n < z.size(); ++n) {
    const double zn = z[n];
    l0_bad += p0[n] != oracle::l0_two_candidate(zn, t);
    const double x1 =
        oracle::grid_argmin([&](double v) { return std::abs(v) + (v - zn) * (v - zn) / (2 * t); }, -2.5, 2.5, 1e-4);
    l1_err = std::max(l1_err, std::abs(p1[n] - x1));
    const double x2 =
        oracle::golden_min([&](double v) { return 0.5 * v * v + 0.5 * tau * (v - zn) * (v - zn); }, -2.5, 2.5);
    l2_err = std::max(l2_err, std::abs(p2[n] - x2));
  }
  std::ostringstream s;
  s << "l0 mismatches=" << l0_bad << ", l1 max err=" << l1_err << ", l2 max err=" << l2_err;
  return {l0_bad == 0 && l1_err <= 1e-3 && l2_err <= 1e-6, s.str()};
}

Outcome algebra_suite() {
  std::mt19937_64 gen(7);
  bool fold_ok = true;
  double ident = 0, recon = 0, penrose = 0;
  for (int trial = 0; trial < 20; ++trial) {
    std::uniform_int_distribution<std::size_t> d(1, 7);
    const Dims dims{d(gen), d(gen), d(gen)};
    const Tensor3 t = oracle::random_tensor(gen, dims);
    for (int mode = 1; mode <= 3; ++mode) fold_ok &= fold(unfold(t, mode), mode, dims) == t;

    const Eigen::Index r = 1 + trial % 4;
    const Matrix a = oracle::random_matrix(gen, static_cast<Eigen::Index>(dims[0]), r, -1, 1);
    const Matrix b = oracle::random_matrix(gen, static_cast<Eigen::Index>(dims[1]), r, -1, 1);
    const Matrix c = oracle::random_matrix(gen, static_cast<Eigen::Index>(dims[2]), r, -1, 1);
    const Tensor3 x = cp_reconstruct({a, b, c});
    ident = std::max({ident, (unfold(x, 1) - a * khatri_rao(c, b).transpose()).cwiseAbs().maxCoeff(),
                      (unfold(x, 2) - b * khatri_rao(c, a).transpose()).cwiseAbs().maxCoeff(),
                      (unfold(x, 3) - c * khatri_rao(b, a).transpose()).cwiseAbs().maxCoeff()});
    const Tensor3 loop = oracle::cp_triple_loop(a, b, c);
    for (std::size_t n = 0; n < x.size(); ++n) recon = std::max(recon, std::abs(x[n] - loop[n]));

    Matrix m = oracle::random_matrix(gen, 12, 4, -1, 1);
    if (trial % 2) m.col(3) = m.col(0) - m.col(1);
    const Matrix g = m.transpose() * m, p = pinv_psd(g);
    penrose = std::max({penrose, (g * p * g - g).norm(), (p * g * p - p).norm(), (g * p - (g * p).transpose()).norm(),
                        (p * g - (p * g).transpose()).norm()});
  }
  std::ostringstream s;
  s << "fold bit-exact=" << fold_ok << ", identity err=" << ident << ", triple-loop err=" << recon
    << ", penrose err=" << penrose;
  return {fold_ok && ident <= 1e-10 && recon <= 1e-12 && penrose <= 1e-9, s.str()};
}

Outcome solver_invariants() {
  SynthSpec spec;
  spec.noise_ratio = 0.0;
  const SynthInstance inst = generate(spec);
  SolverConfig cfg;
  bool nonneg = true, inner_cap = true;
  const SolveResult a = solve(inst.o, cfg, [&](const AdmmState& s) {
    nonneg &= s.factors.A.minCoeff() >= 0.0 && s.factors.B.minCoeff() >= 0.0 && s.factors.C.minCoeff() >= 0.0;
    inner_cap &= s.trace.records.back().inner_res1.size() <= 10;
  });
  const SolveResult b = solve(inst.o, cfg);
  bool same = a.trace.records.size() == b.trace.records.size() && a.factors == b.factors && a.u == b.u;
  for (std::size_t n = 0; same && n < a.trace.records.size(); ++n) {
    const auto &x = a.trace.records[n], &y = b.trace.records[n];
    same = x.res1 == y.res1 && x.res2 == y.res2 && x.inner_res1 == y.inner_res1 && x.objective == y.objective;
  }
  // Noisy runs for the cap as well.
  for (std::uint64_t seed : kSeeds) {
    SynthSpec noisy;
    noisy.seed = seed;
    solve(generate(noisy).o, cfg, [&](const AdmmState& s) {
      nonneg &= s.factors.A.minCoeff() >= 0.0 && s.factors.B.minCoeff() >= 0.0 && s.factors.C.minCoeff() >= 0.0;
      inner_cap &= s.trace.records.back().inner_res1.size() <= 10;
    });
  }
  const auto& last = a.trace.records.back();
  const bool inner_done = !last.inner_res1.empty() && last.inner_res1.back() < cfg.eps;
  std::ostringstream s;
  s << "nonneg=" << nonneg << " deterministic=" << same << " inner<=10=" << inner_cap
    << " final inner sweeps=" << last.inner_res1.size() << " final inner res1=" << last.inner_res1.back();
  return {nonneg && same && inner_cap && inner_done, s.str()};
}

Outcome pipeline_roundtrip() {
  const fs::path dir = scratch("pipeline");
  std::size_t mismatches = 0, runs = 0;
  for (double noise : kNoise) {
    SynthSpec spec;
    spec.noise_ratio = noise;
    const std::string tag = format_double(noise);
    cmd_synth(spec, dir / ("data" + tag));
    SolverConfig cfg;
    cfg.init.seed = spec.seed;
    cmd_factorize(dir / ("data" + tag) / "o.triples", cfg, dir / ("run" + tag));
    EvalOptions eo;
    eo.recon = dir / ("run" + tag) / "factors.factors";
    eo.reference = dir / ("data" + tag) / "o.triples";
    eo.truth = dir / ("data" + tag) / "x.triples";
    eo.run_report = dir / ("run" + tag) / "report.json";
    eo.noise_ratio = noise;
    const EvalReport from_files = cmd_eval(eo, dir / ("eval" + tag));
    const SweepRow direct = run_synthetic(spec, cfg);
    ++runs;
    if (to_csv_row(from_files) != to_csv_row(direct.eval)) ++mismatches;
  }
  // Byte stability: load and save each artifact again.
  bool stable = true;
  const fs::path d = dir / "data0.1";
  for (const char* f : {"o.triples", "x.triples"}) {
    save_triples(dir / "again.triples", load_triples(d / f).tensor);
    stable &= slurp(d / f) == slurp(dir / "again.triples");
  }
  for (const fs::path& f : {d / "truth.factors", dir / "run0.1" / "factors.factors"}) {
    save_factors(dir / "again.factors", load_factors(f));
    stable &= slurp(f) == slurp(dir / "again.factors");
  }
  const TripleData u = load_triples(dir / "run0.1" / "u.triples");
  save_triples(dir / "again.triples", u.tensor);
  stable &= slurp(dir / "run0.1" / "u.triples") == slurp(dir / "again.triples");
  std::ostringstream s;
  s << mismatches << "/" << runs << " file-based reports differ from in-memory runs, byte-stable=" << stable;
  return {mismatches == 0 && stable, s.str()};
}

Outcome occurrence_standin() {
  const fs::path dir = scratch("occurrence");
  OccurrenceSpec spec;
  cmd_synth_occurrence(spec, dir / "data");
  const TripleData data = load_triples(dir / "data" / "o.triples");
  const double density = static_cast<double>(count_nonzero(data.tensor)) / static_cast<double>(data.tensor.size());
  SolverConfig cfg;
  cfg.rank = 20;
  const RunReport rep = cmd_factorize(dir / "data" / "o.triples", cfg, dir / "run");
  EvalOptions eo;
  eo.recon = dir / "run" / "factors.factors";
  eo.reference = dir / "data" / "o.triples";
  eo.run_report = dir / "run" / "report.json";
  eo.histogram_mode = 1;
  cmd_eval(eo, dir / "eval");
  const auto cs = cmd_communities(dir / "run" / "factors.factors", dir / "data" / "o.triples",
                                  kDefaultMembershipThreshold, dir / "comm");
  const bool outputs = fs::file_size(dir / "eval" / "slice_errors.csv") > 0 &&
                       fs::file_size(dir / "eval" / "error_histogram.csv") > 0 &&
                       fs::file_size(dir / "comm" / "communities.csv") > 0 && cs.size() == 20;
  std::ostringstream s;
  s << "density=" << density << " iters=" << rep.eval->outer_iterations << " converged=" << rep.eval->converged
    << " errors vs O=" << rep.eval->vs_observation.fp + rep.eval->vs_observation.fn << " outputs=" << outputs;
  return {std::abs(density - 0.0102) < 5e-5 && all_finite(load_factors(dir / "run" / "factors.factors")) && outputs,
          s.str()};
}

}  // namespace

int main() {
  report(1, "noiseless recovery", noiseless_recovery);
  report(2, "rank-3 error-model ordering", rank3_ordering);
  report(3, "rank-6 exact recovery", rank6_exact);
  report(4, "de-noising direction", denoising);
  report(5, "factor sparsity", factor_sparsity);
  report(6, "prox oracle suite", prox_suite);
  report(7, "algebra suite", algebra_suite);
  report(8, "solver invariants", solver_invariants);
  report(9, "pipeline round-trip", pipeline_roundtrip);
  report(10, "occurrence stand-in at R=20", occurrence_standin);
  std::printf("%d criteria failed\n", failures);
  return failures ? 1 : 0;
}
