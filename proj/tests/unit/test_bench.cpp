#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "blo/bench.hpp"

using namespace blo;

namespace {

struct Cli {
  int code = 0;
  std::string out;
  std::string err;
};

Cli cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli_run(args, out, err);
  return Cli{code, out.str(), err.str()};
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "blo_unit_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

std::size_t count_lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

CsvRow row(std::uint64_t id, std::string method, std::size_t t, std::optional<double> err) {
  CsvRow r;
  r.run_id = id;
  r.method = std::move(method);
  r.t = t;
  r.F_value = 1.0 / (1.0 + static_cast<double>(t));
  r.x_rel_err = err;
  r.k_bar = 1 + t % 3;
  return r;
}

}  // namespace

TEST_CASE("config: entries") {
  const ConfigEntries e = parse_config_entries(
      "# comment\n\nproblem.name = convex-quadratic   # trailing\n  solver.K=12\n");
  REQUIRE(e.size() == 2);
  CHECK(e[0] == std::pair<std::string, std::string>{"problem.name", "convex-quadratic"});
  CHECK(e[1] == std::pair<std::string, std::string>{"solver.K", "12"});
  CHECK_THROWS_AS(parse_config_entries("solver.K 12\n"), ConfigError);
}

TEST_CASE("config: problem defaults and overrides") {
  const ExperimentConfig sine = parse_config("");
  CHECK(sine.problem == "nonconvex-sine");
  CHECK(sine.solver == SolverConfig::nonconvex_defaults());

  const ExperimentConfig hc = parse_config("problem.name = hyperclean\nsolver.T = 7\n");
  CHECK(hc.solver.T == 7);
  CHECK(hc.solver.K == SolverConfig::hyperclean_defaults().K);

  const ExperimentConfig later = parse_config("solver.K = 3\nsolver.K = 9\n");
  CHECK(later.solver.K == 9);

  const ExperimentConfig starts = parse_config("init.x0 = 5\ninit.z0 = random\n");
  CHECK(starts.x0 == std::vector<double>{5.0});
  CHECK_FALSE(starts.z0.has_value());
}

TEST_CASE("config: errors name the key") {
  try {
    parse_config("solver.K = 10\nsolver.bogus = 1\n");
    FAIL("no throw");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "solver.bogus");
  }
  try {
    parse_config("solver.T = -3\n");
    FAIL("no throw");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "solver.T");
  }
  CHECK_THROWS_AS(parse_config("problem.name = knapsack\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("solver.method = rhg\nsolver.alpha_x = 0\n"), ConfigError);
}

TEST_CASE("config: canonical emission is a fixed point") {
  for (const char* text :
       {"", "problem.name = hyperclean\nproblem.n_train = 30\nsolver.alpha_x = 0.0123\n",
        "problem.name = convex-quadratic\nproblem.n = 4\ninit.x0 = 1,2,3,4\nsolver.alpha_y = 0.1,0.2\n",
        "solver.method = t-rhg\nsolver.truncate_at = 5\nrun.repetitions = 3\ninit.seed = 77\n"}) {
    CAPTURE(text);
    const ExperimentConfig c = parse_config(text);
    const std::string once = emit_config(c);
    CHECK(parse_config(once) == c);
    CHECK(emit_config(parse_config(once)) == once);
    // Sorted keys.
    const ConfigEntries e = parse_config_entries(once);
    CHECK(std::is_sorted(e.begin(), e.end()));
  }
}

TEST_CASE("start points") {
  ExperimentConfig c;
  c.x0 = std::vector<double>{5.0};
  c.z0 = std::vector<double>{1.0};
  const ProblemPtr sine = make_problem(c);
  const auto [x, z] = start_point(*sine, c, 0);
  CHECK(x == Vector{5.0});
  CHECK(z == Vector{1.0});

  ExperimentConfig q;
  q.problem = "convex-quadratic";
  q.problem_n = 3;
  q.x0 = std::vector<double>{0.5};
  q.init_seed = 4;
  const ProblemPtr quad = make_problem(q);
  const auto [qx, qz] = start_point(*quad, q, 2);
  CHECK(qx == Vector(3, 0.5));
  const auto [qx2, qz2] = start_point(*quad, q, 2);
  CHECK(qz == qz2);
  CHECK_FALSE(qz == start_point(*quad, q, 3).second);
  for (double v : qz) {
    CHECK(v >= q.init_lo);
    CHECK(v <= q.init_hi);
  }

  ExperimentConfig r;
  r.init_seed = 9;
  for (std::uint64_t id = 0; id < 20; ++id) {
    const auto [rx, rz] = start_point(*sine, r, id);
    CHECK(rx[0] >= 1.0);
    CHECK(rx[0] <= 10.0);
    CHECK(std::abs(rz[0]) <= 2.0);
  }

  const ExperimentConfig two = parse_config("init.x0 = 1,2\n");
  CHECK_THROWS_AS(start_point(*make_problem(two), two, 0), InvalidArgument);
}

TEST_CASE("csv: header and formatting") {
  CHECK(csv_header() ==
        "run_id,method,t,F_value,x_rel_err,F_rel_err,k_bar,grad_norm_x,grad_norm_z,residual,wall_millis");
  CsvRow r = row(3, "rhg", 7, std::nullopt);
  r.F_value = 0.1;
  r.residual = 1e-300;
  CHECK(format_row(r) == "3,rhg,7,0.10000000000000001,,,2,0,0,1e-300,");
}

TEST_CASE("csv: round trip") {
  std::vector<CsvRow> rows;
  for (std::size_t t = 0; t < 20; ++t) {
    CsvRow r = row(t % 2, "iaptt-gm", t, 1.0 / 3.0 + static_cast<double>(t));
    r.F_rel_err = -0.0;
    r.grad_norm_x = 1e-17 * static_cast<double>(t);
    r.wall_millis = 0.25 * static_cast<double>(t);
    rows.push_back(r);
  }
  rows.push_back(row(9, "bda", 0, std::nullopt));
  std::stringstream s;
  write_csv(s, rows);
  CHECK(s.str().find('\r') == std::string::npos);
  CHECK(read_csv(s) == rows);
}

TEST_CASE("csv: schema errors") {
  std::stringstream bad_header("run_id,method,t\n");
  CHECK_THROWS_AS(read_csv(bad_header), SchemaError);
  std::stringstream short_row(csv_header() + "\n1,rhg,3\n");
  CHECK_THROWS_AS(read_csv(short_row), SchemaError);
  std::stringstream bad_number(csv_header() + "\n1,rhg,3,abc,,,1,0,0,0,\n");
  CHECK_THROWS_AS(read_csv(bad_number), SchemaError);
  std::stringstream empty;
  CHECK_THROWS_AS(read_csv(empty), SchemaError);
}

TEST_CASE("sweep plan ids") {
  const auto plan = plan_sweep({Method::iaptt_gm, Method::rhg},
                               {{{1.0}, {2.0}}, {{5.0}, {1.0}}, {{7.0}, {-1.0}}});
  REQUIRE(plan.size() == 6);
  for (std::size_t i = 0; i < plan.size(); ++i) CHECK(plan[i].run_id == i);
  CHECK(plan[4].method == Method::rhg);
  CHECK(plan[4].x0 == std::vector<double>{5.0});
}

TEST_CASE("parallel runs reproduce serial output") {
  ExperimentConfig c = parse_config("solver.T = 30\nsolver.K = 10\nrun.repetitions = 6\ninit.seed = 3\n");
  const auto serial = run_experiment(c);
  c.parallelism = 4;
  CHECK(run_experiment(c) == serial);
  CHECK(serial.size() == 180);

  ExperimentConfig base = parse_config("solver.T = 25\nsolver.K = 10\n");
  const auto plan = plan_sweep({Method::iaptt_gm, Method::ia_gm, Method::rhg},
                               {{{1.0}, {2.0}}, {{5.0}, {1.0}}, {{7.0}, {-1.0}}});
  CHECK(run_sweep(base, plan, 1) == run_sweep(base, plan, 3));
}

TEST_CASE("summaries") {
  std::vector<CsvRow> a;
  for (std::size_t t = 0; t < 5; ++t) a.push_back(row(0, "slow", t, 1.0 - 0.2 * t));
  for (std::size_t t = 0; t < 5; ++t) a.push_back(row(1, "fast", t, 0.5 / (1.0 + t)));
  std::vector<CsvRow> b;
  for (std::size_t t = 0; t < 3; ++t) b.push_back(row(0, "never", t, std::nullopt));

  const auto s = summarize({{"a.csv", a}, {"b.csv", b}}, 0.3);
  REQUIRE(s.size() == 3);
  CHECK(s[0].method == "fast");
  CHECK(s[0].iterations_to_threshold == 1u);
  CHECK(s[1].method == "slow");
  CHECK(s[1].iterations_to_threshold == 4u);
  CHECK(s[1].iterations == 5);
  CHECK(s[2].method == "never");
  CHECK_FALSE(s[2].iterations_to_threshold.has_value());
  CHECK(s[2].source == "b.csv");
  CHECK(s[0].mean_k_bar == doctest::Approx((1 + 2 + 3 + 1 + 2) / 5.0));

  std::ostringstream csv;
  write_summary_csv(csv, s);
  CHECK(csv.str().find("b.csv,0,never,3,,,,2,\n") != std::string::npos);
  CHECK(format_summary_table(s).find("iters_to_threshold") != std::string::npos);
}

TEST_CASE("cli: run is reproducible and matches the schema") {
  const Cli first = cli({"run"});
  REQUIRE(first.code == kExitOk);
  CHECK(count_lines(first.out) == 501);
  CHECK(first.out.rfind(csv_header() + "\n", 0) == 0);
  CHECK(cli({"run"}).out == first.out);

  const auto path = scratch("run.csv");
  CHECK(cli({"run", "--T", "10", "--x0", "5", "--z0", "1", "-o", path.string()}).code == kExitOk);
  std::ifstream in(path, std::ios::binary);
  CHECK(read_csv(in).size() == 10);
}

TEST_CASE("cli: config files and emitted configs") {
  const auto cfg = scratch("exp.cfg");
  write_file(cfg, "problem.name = convex-quadratic\nproblem.n = 2\nsolver.T = 5\n");
  const Cli emitted = cli({"run", "--config", cfg.string(), "--K", "7", "--emit-config"});
  REQUIRE(emitted.code == kExitOk);
  const ExperimentConfig c = parse_config(emitted.out);
  CHECK(c.problem == "convex-quadratic");
  CHECK(c.solver.K == 7);
  CHECK(c.solver.T == 5);

  const auto round = scratch("emitted.cfg");
  write_file(round, emitted.out);
  CHECK(cli({"run", "--config", round.string(), "--emit-config"}).out == emitted.out);
  CHECK(cli({"run", "--config", round.string()}).out ==
        cli({"run", "--config", cfg.string(), "--K", "7"}).out);
}

TEST_CASE("cli: usage errors exit with 2") {
  const Cli unknown = cli({"run", "--set", "solver.bogus=1"});
  CHECK(unknown.code == kExitUsage);
  CHECK(unknown.err.find("solver.bogus") != std::string::npos);

  CHECK(cli({"run", "--frobnicate"}).code == kExitUsage);
  CHECK(cli({"run", "--config", scratch("missing.cfg").string()}).code == kExitUsage);
  CHECK(cli({"sweep", "--methods", "nope"}).code == kExitUsage);
  CHECK(cli({"verify", "--suite", "everything"}).code == kExitUsage);
  CHECK(cli({"teleport"}).code == kExitUsage);
  CHECK(cli({}).code == kExitUsage);
  CHECK(cli({"--help"}).code == kExitOk);

  const auto bad = scratch("bad.csv");
  write_file(bad, "a,b,c\n1,2,3\n");
  CHECK(cli({"summarize", bad.string()}).code == kExitUsage);
}

TEST_CASE("cli: list") {
  const Cli l = cli({"list"});
  CHECK(l.code == kExitOk);
  for (const std::string& p : catalog_problems()) CHECK(l.out.find(p) != std::string::npos);
  for (Method m : all_methods()) CHECK(l.out.find(std::string(to_string(m))) != std::string::npos);
}

TEST_CASE("cli: sweep and summarize") {
  const Cli serial = cli({"sweep", "--T", "20", "--K", "10"});
  REQUIRE(serial.code == kExitOk);
  CHECK(count_lines(serial.out) == 1 + 9 * 20);
  CHECK(count_lines(serial.err) == 9);
  CHECK(cli({"sweep", "--T", "20", "--K", "10", "--parallelism", "4"}).out == serial.out);

  const auto log = scratch("sweep.csv");
  write_file(log, serial.out);
  const auto summary = scratch("summary.csv");
  const Cli s = cli({"summarize", log.string(), "--threshold", "0.5", "-o", summary.string()});
  CHECK(s.code == kExitOk);
  CHECK(count_lines(s.out) == 10);
  std::ifstream in(summary);
  std::string header;
  std::getline(in, header);
  CHECK(header.rfind("source,run_id,method", 0) == 0);
}

TEST_CASE("cli: verify rate") {
  const Cli v = cli({"verify", "--suite", "rate", "--K", "10,40,160,640"});
  CHECK(v.code == kExitOk);
  CHECK(v.out.find("K   640") != std::string::npos);
}

TEST_CASE("cli: verify fixed points") {
  CHECK(cli({"verify", "--suite", "fixed-point", "--samples", "10"}).code == kExitOk);
}
