#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "ac2cd/harness.hpp"

namespace {

using namespace ac2cd;

void add_instance_flags(CLI::App* cmd, InstanceSpec& spec, std::string& family) {
  cmd->add_option("--family", family, "chebyshev | svm | logexp | nonconvex");
  cmd->add_option("-n,--n", spec.n, "number of variables");
  cmd->add_option("-m,--m", spec.m, "number of rows / feature dimension");
  cmd->add_option("--seed", spec.seed, "instance seed");
  cmd->add_option("--regime", spec.regime, "logexp parameter regime (1 or 2)");
  cmd->add_option("--neg-fraction", spec.neg_fraction, "fraction of negative diagonal entries");
  cmd->add_option("-C,--svm-c", spec.c_bound, "SVM box bound C");
  cmd->add_option("--toy-dim", spec.toy_dim, "generated SVM toy feature count");
  cmd->add_option("--path", spec.path, "dataset or serialized instance to load");
}

int run_solve(const std::string& config_path, ExperimentConfig cfg, bool have_family,
              const std::string& family, bool quiet) {
  if (!config_path.empty()) {
    cfg = parse_config_file(config_path);
    if (cfg.methods.size() > 1) cfg.methods.resize(1);
  }
  if (have_family) cfg.instance.family = family_from_name(family);
  if (cfg.methods.empty()) cfg.methods.push_back(MethodSpec{});
  const ExperimentResult result = run_experiment(cfg);
  if (!quiet) std::cout << format_summary_table(result.rows);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AC2CD: almost cyclic 2-coordinate descent for singly linearly "
               "constrained problems with bounds"};
  app.require_subcommand(1);

  // solve -------------------------------------------------------------------
  auto* solve_cmd = app.add_subcommand("solve", "run one method on one instance");
  ExperimentConfig solve_cfg;
  solve_cfg.methods = {MethodSpec{}};
  std::string solve_config_path, solve_family;
  bool quiet = false;
  add_instance_flags(solve_cmd, solve_cfg.instance, solve_family);
  solve_cmd->add_option("--config", solve_config_path, "experiment config file");
  auto& method = solve_cfg.methods.front();
  std::string method_name = "ac2cd";
  std::string stepsize_flag, index_rule_flag;
  solve_cmd->add_option("--method", method_name, "ac2cd | rcd-unif | rcd-lips | mvp");
  solve_cmd->add_option("--stepsize", stepsize_flag, "armijo | lipschitz | quadratic | exact");
  solve_cmd->add_option("--index-rule", index_rule_flag, "threshold | rate | fixed");
  solve_cmd->add_option("--tau", method.tau, "bound-distance threshold factor");
  solve_cmd->add_option("--gamma", method.gamma, "stepsize gamma");
  solve_cmd->add_option("--eps", solve_cfg.stop.eps, "stationarity tolerance");
  solve_cmd->add_option("--nu", solve_cfg.stop.nu, "normalized-error tolerance");
  solve_cmd->add_option("--max-outer", solve_cfg.stop.max_outer, "outer iteration cap");
  solve_cmd->add_option("--max-inner", solve_cfg.stop.max_inner, "baseline inner-step budget");
  solve_cmd->add_option("--run-seed", method.seed, "solver rng seed");
  solve_cmd->add_option("--start-seed", solve_cfg.run.start_seed, "starting-point seed");
  solve_cmd->add_option("--out", solve_cfg.run.out, "output directory");
  solve_cmd->add_flag("--quiet", quiet, "suppress the summary table");

  // bench -------------------------------------------------------------------
  auto* bench_cmd = app.add_subcommand("bench", "run a multi-method comparison");
  std::string bench_config_path, bench_out;
  bench_cmd->add_option("--config", bench_config_path, "experiment config file")->required();
  bench_cmd->add_option("--out", bench_out, "override output directory");

  // gen ---------------------------------------------------------------------
  auto* gen_cmd = app.add_subcommand("gen", "generate an instance or toy dataset");
  InstanceSpec gen_spec;
  std::string gen_family = "chebyshev", gen_out = "instance.txt";
  bool gen_dataset = false, gen_eigen = false;
  add_instance_flags(gen_cmd, gen_spec, gen_family);
  gen_cmd->add_option("--out", gen_out, "output file");
  gen_cmd->add_flag("--dataset", gen_dataset, "write a sparse classification dataset (svm)");
  gen_cmd->add_flag("--eigen-stats", gen_eigen, "print Hessian eigenvalue statistics (small n)");

  // verify ------------------------------------------------------------------
  auto* verify_cmd = app.add_subcommand("verify", "run the oracle verification suite");
  std::string verify_level = "fast";
  std::uint64_t verify_seed = 1;
  verify_cmd->add_option("--level", verify_level, "fast | full");
  verify_cmd->add_option("--seed", verify_seed, "suite seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve_cmd) {
      // Family-aware defaults: the separable family has no quadratic structure
      // and its protocol pins j(k).
      if (!solve_cmd->count("--config")) {
        if (solve_cmd->count("--family")) {
          solve_cfg.instance.family = family_from_name(solve_family);
        }
        auto& spec = solve_cfg.methods.front();
        spec.name = method_name;
        if (!stepsize_flag.empty()) {
          spec.stepsize = stepsize_flag;
        } else if (solve_cfg.instance.family == Family::LogExpEquality) {
          spec.stepsize = "lipschitz";
        }
        if (!index_rule_flag.empty()) {
          spec.index_rule = index_rule_flag;
        } else if (solve_cfg.instance.family == Family::LogExpEquality) {
          spec.index_rule = "fixed";
        }
        if (spec.name != "ac2cd") {
          // Baselines still need the leading ac2cd run for their target.
          MethodSpec lead;
          if (solve_cfg.instance.family == Family::LogExpEquality) {
            lead.stepsize = "lipschitz";
            lead.index_rule = "fixed";
          }
          solve_cfg.methods = {lead, spec};
        }
        return run_solve("", solve_cfg, false, "", quiet);
      }
      return run_solve(solve_config_path, solve_cfg, solve_cmd->count("--family") > 0,
                       solve_family, quiet);
    }
    if (*bench_cmd) {
      ExperimentConfig cfg = parse_config_file(bench_config_path);
      if (!bench_out.empty()) cfg.run.out = bench_out;
      const ExperimentResult result = run_experiment(cfg);
      std::cout << format_summary_table(result.rows);
      return 0;
    }
    if (*gen_cmd) {
      gen_spec.family = family_from_name(gen_family);
      if (gen_dataset) {
        if (gen_spec.family != Family::SvmDual) {
          throw Error(ErrorCode::ConfigError, "--dataset applies to the svm family");
        }
        std::ofstream out(gen_out);
        out << make_svm_toy_dataset(gen_spec.n, gen_spec.toy_dim, gen_spec.seed);
        std::cout << "wrote dataset " << gen_out << " (" << gen_spec.n << " samples)\n";
        return 0;
      }
      const GeneratedInstance inst = build_instance(gen_spec);
      write_instance_file(inst, gen_out);
      std::cout << "wrote " << family_name(inst.family) << " instance " << gen_out
                << " (n = " << inst.n << ", m = " << inst.m << ")\n";
      if (inst.family == Family::NonconvexSimplex) {
        std::cout << "diagonal: " << inst.neg_count << " negative, " << (inst.m - inst.neg_count)
                  << " positive entries\n";
      }
      if (gen_eigen && inst.quadratic) {
        const EigenStats stats = eigen_stats(*inst.quadratic);
        std::cout << "eigenvalues of Q^T D Q: " << stats.n_neg << " negative, " << stats.n_pos
                  << " positive, lambda_min = " << stats.lambda_min
                  << ", lambda_max = " << stats.lambda_max << "\n";
      }
      return 0;
    }
    if (*verify_cmd) {
      const auto checks = verify_suite(verify_level, verify_seed);
      bool all_pass = true;
      for (const auto& check : checks) {
        std::cout << (check.pass ? "PASS" : "FAIL") << "  " << check.name
                  << "  margin=" << check.margin << "  (" << check.detail << ")\n";
        all_pass = all_pass && check.pass;
      }
      std::cout << (all_pass ? "verification suite passed" : "verification suite FAILED") << "\n";
      return all_pass ? 0 : 1;
    }
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  }
  return 0;
}
