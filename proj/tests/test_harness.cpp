#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "test_helpers.hpp"

using namespace ac2cd;
using testing::strip_wall_column;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::filesystem::path temp_dir(const std::string& tag) {
  const auto dir = std::filesystem::temp_directory_path() / ("ac2cd_test_" + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("experiment config round-trips losslessly") {
  ExperimentConfig cfg;
  cfg.instance.family = Family::LogExpEquality;
  cfg.instance.n = 123;
  cfg.instance.seed = 99;
  cfg.instance.regime = 1;
  cfg.stop.eps = 0.025;
  cfg.stop.nu = 3e-7;
  cfg.run.repetitions = 4;
  cfg.run.out = "some/dir";
  MethodSpec ac;
  ac.stepsize = "lipschitz";
  ac.index_rule = "fixed";
  ac.tau = 0.75;
  ac.seed = 5;
  MethodSpec rcd;
  rcd.name = "rcd-lips";
  rcd.shuffle = false;
  cfg.methods = {ac, rcd};

  const std::string once = write_config(cfg);
  std::istringstream in(once);
  const ExperimentConfig parsed = parse_config(in);
  CHECK(write_config(parsed) == once);
  CHECK(parsed.methods.size() == 2);
  CHECK(parsed.methods[1].name == "rcd-lips");
  CHECK(parsed.stop.nu == 3e-7);
  CHECK(parsed.instance.family == Family::LogExpEquality);
}

TEST_CASE("config parser reports unknown keys and malformed lines") {
  {
    std::istringstream in("[instance]\nbogus = 3\n");
    CHECK_THROWS_WITH_AS(parse_config(in), doctest::Contains("unknown key"), Error);
  }
  {
    std::istringstream in("[instance\n");
    CHECK_THROWS_AS(parse_config(in), Error);
  }
  {
    std::istringstream in("n = 4\n");
    CHECK_THROWS_AS(parse_config(in), Error);
  }
  {
    std::istringstream in("# comments and blanks only\n\n");
    CHECK_NOTHROW(parse_config(in));
  }
}

TEST_CASE("error curve starts at the initial normalized error") {
  RunTrace trace;
  trace.records.push_back(TraceRecord{.k = 0, .objective = 3.0, .wall_time = 0.0});
  trace.records.push_back(TraceRecord{.k = 1, .objective = 2.0, .wall_time = 0.5});
  trace.records.push_back(TraceRecord{.k = 2, .objective = 2.0, .wall_time = 0.9});
  std::ostringstream out;
  emit_error_curve(trace, 2.0, out);
  std::istringstream lines(out.str());
  std::string header, first, second, third;
  std::getline(lines, header);
  std::getline(lines, first);
  std::getline(lines, second);
  std::getline(lines, third);
  CHECK(header == "wall_time,normalized_error,clamped");
  // (3 - 2) / (1 + 2) = 1/3.
  CHECK(first.find(format_double(1.0 / 3.0)) != std::string::npos);
  CHECK(first.back() == '0');
  CHECK(third.find("1e-16") != std::string::npos);
  CHECK(third.back() == '1');
}

TEST_CASE("error curve is non-increasing for a convex run") {
  const GeneratedInstance inst = gen_chebyshev(30, 6, 3);
  Ac2cdConfig cfg;
  cfg.epsilon = 1e-6;
  const SolveResult res = solve(inst.problem, inst.default_start(2), cfg);
  std::ostringstream out;
  emit_error_curve(res.trace, res.objective, out);
  std::istringstream lines(out.str());
  std::string line;
  std::getline(lines, line);  // header
  double prev = std::numeric_limits<double>::infinity();
  while (std::getline(lines, line)) {
    const auto c1 = line.find(',');
    const auto c2 = line.rfind(',');
    const double err = parse_double(line.substr(c1 + 1, c2 - c1 - 1));
    CHECK(err <= prev + 1e-15);
    prev = err;
  }
}

TEST_CASE("single-method experiment produces one row matching the trace") {
  const auto dir = temp_dir("single");
  ExperimentConfig cfg;
  cfg.instance.family = Family::Chebyshev;
  cfg.instance.n = 40;
  cfg.instance.m = 8;
  cfg.instance.seed = 5;
  cfg.run.out = dir.string();
  cfg.methods = {MethodSpec{}};
  const ExperimentResult result = run_experiment(cfg);
  REQUIRE(result.rows.size() == 1);
  CHECK(result.rows[0].method == "ac2cd");
  CHECK(result.rows[0].status == "Converged");

  // The summary objective equals the last trace record exactly.
  const std::string trace = read_file((dir / "ac2cd_rep0.trace.csv").string());
  std::istringstream lines(trace);
  std::string line, last_data;
  std::getline(lines, line);  // header
  while (std::getline(lines, line)) {
    if (!line.empty() && line[0] != '#') last_data = line;
  }
  const auto c1 = last_data.find(',');
  const auto c2 = last_data.find(',', c1 + 1);
  CHECK(parse_double(last_data.substr(c1 + 1, c2 - c1 - 1)) == result.rows[0].objective);
}

TEST_CASE("experiments are deterministic apart from wall time") {
  ExperimentConfig cfg;
  cfg.instance.family = Family::Chebyshev;
  cfg.instance.n = 60;
  cfg.instance.m = 10;
  cfg.instance.seed = 8;
  cfg.stop.eps = 1e-4;
  cfg.methods = {MethodSpec{}, MethodSpec{}, MethodSpec{}};
  cfg.methods[1].name = "rcd-unif";
  cfg.methods[2].name = "mvp";

  const auto dir_a = temp_dir("det_a");
  const auto dir_b = temp_dir("det_b");
  cfg.run.out = dir_a.string();
  run_experiment(cfg);
  cfg.run.out = dir_b.string();
  run_experiment(cfg);
  for (const char* name : {"ac2cd_rep0.trace.csv", "rcd-unif_rep0.trace.csv",
                           "mvp_rep0.trace.csv", "summary.csv"}) {
    CAPTURE(name);
    CHECK(strip_wall_column(read_file((dir_a / name).string())) ==
          strip_wall_column(read_file((dir_b / name).string())));
  }
}

TEST_CASE("repetitions emit per-run rows plus an average row") {
  const auto dir = temp_dir("reps");
  ExperimentConfig cfg;
  cfg.instance.family = Family::NonconvexSimplex;
  cfg.instance.n = 30;
  cfg.instance.m = 20;
  cfg.instance.seed = 4;
  cfg.run.repetitions = 10;
  cfg.run.out = dir.string();
  cfg.methods = {MethodSpec{}, MethodSpec{}};
  cfg.methods[1].name = "mvp";
  const ExperimentResult result = run_experiment(cfg);
  Index ac_rows = 0, mvp_rows = 0, avg_rows = 0;
  for (const auto& row : result.rows) {
    if (row.repetition < 0) {
      ++avg_rows;
      CHECK(row.status == "avg");
    } else if (row.method == "ac2cd") {
      ++ac_rows;
    } else {
      ++mvp_rows;
    }
  }
  CHECK(ac_rows == 10);
  CHECK(mvp_rows == 10);
  CHECK(avg_rows == 2);
  const std::string summary = read_file((dir / "summary.csv").string());
  CHECK(summary.find("avg") != std::string::npos);
}

TEST_CASE("baselines must follow an ac2cd run") {
  ExperimentConfig cfg;
  cfg.methods = {MethodSpec{}};
  cfg.methods[0].name = "mvp";
  CHECK_THROWS_WITH_AS(run_experiment(cfg), doctest::Contains("ac2cd"), Error);
  cfg.methods.clear();
  CHECK_THROWS_AS(run_experiment(cfg), Error);
}

TEST_CASE("parallel repetitions match the sequential results") {
  ExperimentConfig cfg;
  cfg.instance.family = Family::Chebyshev;
  cfg.instance.n = 30;
  cfg.instance.m = 6;
  cfg.instance.seed = 21;
  cfg.run.repetitions = 4;
  cfg.methods = {MethodSpec{}};

  const auto dir_seq = temp_dir("par_seq");
  cfg.run.out = dir_seq.string();
  run_experiment(cfg);

  const auto dir_par = temp_dir("par_par");
  cfg.run.out = dir_par.string();
  setenv("AC2CD_THREADS", "4", 1);
  run_experiment(cfg);
  unsetenv("AC2CD_THREADS");

  for (int rep = 0; rep < 4; ++rep) {
    const std::string name = "ac2cd_rep" + std::to_string(rep) + ".trace.csv";
    CHECK(strip_wall_column(read_file((dir_seq / name).string())) ==
          strip_wall_column(read_file((dir_par / name).string())));
  }
}

TEST_CASE("random feasible points satisfy the constraints") {
  for (const auto& inst : {gen_chebyshev(15, 5, 2), gen_nonconvex(12, 8, 0.5, 3)}) {
    for (int s = 0; s < 10; ++s) {
      CHECK_NOTHROW(project_report_feasibility(random_feasible_point(inst, s), inst.problem));
    }
  }
}

TEST_CASE("fast verification suite passes and the fault hook trips it") {
  const auto checks = verify_suite("fast", 1);
  for (const auto& check : checks) {
    CAPTURE(check.name);
    CAPTURE(check.margin);
    CHECK(check.pass);
  }
  const auto faulted = verify_suite("fast", 1, true);
  bool cache_failed = false;
  for (const auto& check : faulted) {
    if (check.name == "cache-coherence") cache_failed = !check.pass;
  }
  CHECK(cache_failed);
  CHECK_THROWS_AS(verify_suite("bogus", 1), Error);
}
