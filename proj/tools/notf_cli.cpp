// notf: command-line front end for synthetic generation, factorization,
// evaluation, community listing and parameter sweeps.
//
// Exit codes: 0 success, 1 usage or parse error, 2 solver divergence,
// 3 shape or validation error.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "notf/notf.hpp"

namespace {

using namespace notf;

void add_solver_flags(CLI::App* cmd, SolverConfig& cfg, std::string& variant) {
  cmd->add_option("--rank", cfg.rank, "CP rank R")->check(CLI::PositiveNumber);
  cmd->add_option("--tau", cfg.tau, "ADMM penalty parameter")->check(CLI::PositiveNumber);
  cmd->add_option("--eps", cfg.eps, "stopping tolerance for res1 and res2")->check(CLI::PositiveNumber);
  cmd->add_option("--variant", variant, "error model")->check(CLI::IsMember({"l0", "l1", "l2"}));
  cmd->add_option("--max-outer", cfg.max_outer_iters, "outer ADMM iteration cap")->check(CLI::PositiveNumber);
  cmd->add_option("--max-inner", cfg.max_inner_iters, "inner ALS sweep cap")->check(CLI::PositiveNumber);
  cmd->add_option("--init-iters", cfg.init.max_iters, "CP-ALS initialization iterations")->check(CLI::PositiveNumber);
}

void add_spec_flags(CLI::App* cmd, std::vector<std::size_t>& dims, SynthSpec& spec, std::vector<double>& sparsity) {
  cmd->add_option("--dims", dims, "tensor dimensions N1,N2,N3")->delimiter(',')->expected(3);
  cmd->add_option("--true-rank", spec.true_rank, "rank of the generating factors")->check(CLI::PositiveNumber);
  cmd->add_option("--sparsity", sparsity, "zero fraction of A,B,C")->delimiter(',')->expected(3);
}

void apply_spec(SynthSpec& spec, const std::vector<std::size_t>& dims, const std::vector<double>& sparsity) {
  if (!dims.empty()) spec.dims = {dims[0], dims[1], dims[2]};
  if (!sparsity.empty()) spec.sparsity = {sparsity[0], sparsity[1], sparsity[2]};
}

void print_report(const RunReport& rep) { std::cout << rep.to_json().dump(2) << '\n'; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Non-negative occurrence tensor factorization"};
  app.require_subcommand(1);

  // synth
  SynthSpec spec;
  std::vector<std::size_t> dims;
  std::vector<double> sparsity;
  std::string synth_out;
  bool occurrence = false;
  OccurrenceSpec occ;
  auto* synth = app.add_subcommand("synth", "generate a synthetic instance");
  add_spec_flags(synth, dims, spec, sparsity);
  synth->add_option("--noise", spec.noise_ratio, "flip-noise ratio")->check(CLI::Range(0.0, 1.0));
  synth->add_option("--seed", spec.seed, "RNG seed");
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_flag("--occurrence", occurrence, "community-structured count tensor instead of the binary benchmark");
  synth->add_option("--density", occ.density, "nonzero fraction (--occurrence)")->check(CLI::Range(0.0, 1.0));
  synth->add_option("--communities", occ.communities, "planted communities (--occurrence)")->check(CLI::PositiveNumber);
  synth->add_option("--max-count", occ.max_count, "largest planted count (--occurrence)")->check(CLI::PositiveNumber);

  // factorize
  SolverConfig cfg;
  std::string variant = "l0";
  std::string fact_input, fact_out, fact_truth;
  double fact_threshold = kDefaultBinarizeThreshold;
  std::uint64_t fact_seed = 0;
  auto* factorize = app.add_subcommand("factorize", "factorize a triple file");
  factorize->add_option("--input", fact_input, "observation triple file")->required()->check(CLI::ExistingFile);
  factorize->add_option("--out", fact_out, "output directory")->required();
  factorize->add_option("--truth", fact_truth, "ground-truth triple file")->check(CLI::ExistingFile);
  factorize->add_option("--threshold", fact_threshold, "positive-entry threshold for confusion counts");
  factorize->add_option("--seed", fact_seed, "CP-ALS initialization seed");
  add_solver_flags(factorize, cfg, variant);

  // eval
  EvalOptions eval_opts;
  std::string eval_recon, eval_ref, eval_truth, eval_run, eval_out;
  double eval_noise = -1.0;
  int hist_mode = 0;
  auto* eval = app.add_subcommand("eval", "score a reconstruction");
  eval->add_option("--recon", eval_recon, "factor file or triple file")->required()->check(CLI::ExistingFile);
  eval->add_option("--reference", eval_ref, "observation triple file")->required()->check(CLI::ExistingFile);
  eval->add_option("--truth", eval_truth, "ground-truth triple file")->check(CLI::ExistingFile);
  eval->add_option("--run", eval_run, "report.json of the factorize run")->check(CLI::ExistingFile);
  eval->add_option("--noise", eval_noise, "noise ratio to record in the report");
  eval->add_option("--threshold", eval_opts.threshold, "positive-entry threshold");
  eval->add_option("--histogram-mode", hist_mode, "write per-slice error counts along this mode")
      ->check(CLI::Range(1, 3));
  eval->add_option("--out", eval_out, "output directory")->required();

  // communities
  std::string comm_factors, comm_labels, comm_out;
  double comm_threshold = kDefaultMembershipThreshold;
  auto* communities = app.add_subcommand("communities", "list rank-one communities");
  communities->add_option("--factors", comm_factors, "factor file")->required()->check(CLI::ExistingFile);
  communities->add_option("--labels", comm_labels, "triple file or JSON with per-mode labels")
      ->check(CLI::ExistingFile);
  communities->add_option("--threshold", comm_threshold, "membership threshold")->check(CLI::PositiveNumber);
  communities->add_option("--out", comm_out, "output directory")->required();

  // sweep
  SweepGrid grid;
  std::vector<std::string> sweep_variants;
  std::vector<std::size_t> sweep_dims;
  std::vector<double> sweep_sparsity;
  SynthSpec sweep_spec;
  SolverConfig sweep_cfg;
  std::string sweep_out;
  unsigned jobs = 1;
  double sweep_threshold = kDefaultBinarizeThreshold;
  auto* sweep = app.add_subcommand("sweep", "run a grid of synthetic experiments");
  sweep->add_option("--noise", grid.noise_ratios, "noise ratios")->delimiter(',');
  sweep->add_option("--ranks", grid.ranks, "CP ranks")->delimiter(',');
  sweep->add_option("--variants", sweep_variants, "error models")->delimiter(',')->check(CLI::IsMember({"l0", "l1", "l2"}));
  sweep->add_option("--seeds", grid.seeds, "seeds (instance and initialization)")->delimiter(',');
  sweep->add_option("--jobs", jobs, "concurrent runs")->check(CLI::PositiveNumber);
  sweep->add_option("--threshold", sweep_threshold, "positive-entry threshold");
  sweep->add_option("--out", sweep_out, "output directory")->required();
  add_spec_flags(sweep, sweep_dims, sweep_spec, sweep_sparsity);
  sweep->add_option("--tau", sweep_cfg.tau, "ADMM penalty parameter")->check(CLI::PositiveNumber);
  sweep->add_option("--eps", sweep_cfg.eps, "stopping tolerance")->check(CLI::PositiveNumber);
  sweep->add_option("--max-outer", sweep_cfg.max_outer_iters, "outer ADMM iteration cap")->check(CLI::PositiveNumber);
  sweep->add_option("--max-inner", sweep_cfg.max_inner_iters, "inner ALS sweep cap")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*synth) {
      if (occurrence) {
        if (!dims.empty()) occ.dims = {dims[0], dims[1], dims[2]};
        occ.seed = spec.seed;
        print_report(cmd_synth_occurrence(occ, synth_out));
      } else {
        apply_spec(spec, dims, sparsity);
        print_report(cmd_synth(spec, synth_out));
      }
    } else if (*factorize) {
      cfg.variant = *parse_variant(variant);
      cfg.init.seed = fact_seed;
      FactorizeOptions opts;
      if (!fact_truth.empty()) opts.truth = fact_truth;
      opts.threshold = fact_threshold;
      const RunReport rep = cmd_factorize(fact_input, cfg, fact_out, opts);
      print_report(rep);
    } else if (*eval) {
      eval_opts.recon = eval_recon;
      eval_opts.reference = eval_ref;
      if (!eval_truth.empty()) eval_opts.truth = eval_truth;
      if (!eval_run.empty()) eval_opts.run_report = eval_run;
      if (eval_noise >= 0.0) eval_opts.noise_ratio = eval_noise;
      if (hist_mode) eval_opts.histogram_mode = hist_mode;
      const EvalReport ev = cmd_eval(eval_opts, eval_out);
      std::cout << to_json(ev).dump(2) << '\n' << kEvalCsvHeader << '\n' << to_csv_row(ev) << '\n';
    } else if (*communities) {
      std::optional<fs::path> labels;
      if (!comm_labels.empty()) labels = comm_labels;
      const auto cs = cmd_communities(comm_factors, labels, comm_threshold, comm_out);
      write_communities_text(std::cout, cs);
    } else if (*sweep) {
      if (!sweep_variants.empty()) {
        grid.variants.clear();
        for (const auto& v : sweep_variants) grid.variants.push_back(*parse_variant(v));
      }
      apply_spec(sweep_spec, sweep_dims, sweep_sparsity);
      const auto rows = cmd_sweep(grid, sweep_spec, sweep_cfg, sweep_out, jobs, sweep_threshold);
      std::cout << kSweepCsvHeader << '\n';
      for (const auto& r : rows) std::cout << to_csv_row(r) << '\n';
    }
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 1;
  } catch (const DivergenceError& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return 2;
  } catch (const DimensionError& e) {
    std::cerr << "shape error: " << e.what() << '\n';
    return 3;
  } catch (const DomainError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
