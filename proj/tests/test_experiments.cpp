#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "isac/experiments.hpp"

using namespace isac;

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(ISAC_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("isac_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

ScenarioConfig small() {
  ScenarioConfig cfg;
  cfg.num_tx_antennas = 4;
  return cfg;
}

}  // namespace

TEST_CASE("csv rendering") {
  Table t;
  t.meta = {{"seed", "3"}};
  t.columns = {"a", "b"};
  t.add_row({"1", "x,y"});
  t.add_row({"say \"hi\"", "2"});
  CHECK(to_csv(t) == "# seed=3\na,b\n1,\"x,y\"\n\"say \"\"hi\"\"\",2\n");
  CHECK_THROWS_AS(t.add_row({"1"}), std::invalid_argument);
  CHECK(format_number(0.5) == "0.5");
  CHECK(format_number(1e-20) == "1e-20");
  CHECK(format_number(std::nan("")) == "nan");
}

TEST_CASE("hashing and seeds") {
  ScenarioConfig a;
  ScenarioConfig b;
  CHECK(config_hash(a) == config_hash(b));
  b.taper_width = 0.04;
  CHECK(config_hash(a) != config_hash(b));
  CHECK(hex64(0xabcULL) == "0000000000000abc");

  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(trial_seed(7, i));
  CHECK(seen.size() == 1000);
  CHECK(trial_seed(7, 3) == trial_seed(7, 3));
  CHECK(trial_seed(7, 3) != trial_seed(8, 3));
}

TEST_CASE("sweep parameters") {
  CHECK(parse_sweep_param("delta") == SweepParam::delta);
  CHECK(parse_sweep_param("num_antennas") == SweepParam::num_antennas);
  CHECK_THROWS_AS(parse_sweep_param("beta"), ConfigError);
  const ScenarioConfig cfg = small();
  CHECK(apply_sweep(cfg, SweepParam::delta, 0.05).taper_width == 0.05);
  CHECK(apply_sweep(cfg, SweepParam::gamma_db, 8.0).sinr_threshold_db == 8.0);
  CHECK(apply_sweep(cfg, SweepParam::alpha, 0.5).similarity_coeff == 0.5);
  CHECK(apply_sweep(cfg, SweepParam::num_antennas, 12.0).tx() == 12);
  CHECK_THROWS_AS(apply_sweep(cfg, SweepParam::num_antennas, 1.0), ConfigError);
  CHECK_THROWS_AS(apply_sweep(cfg, SweepParam::num_antennas, 6.5), ConfigError);
  CHECK_THROWS_AS(apply_sweep(cfg, SweepParam::alpha, 2.5), ConfigError);
  CHECK_THROWS_AS(run_sweep(cfg, SweepParam::delta, {}, 1, 1, 1), ConfigError);
}

TEST_CASE("summary statistics") {
  std::vector<TrialOutcome> trials(4);
  const double scnr[] = {1.0, 2.0, 3.0, 10.0};
  for (int i = 0; i < 4; ++i) {
    trials[static_cast<size_t>(i)].scnr_db = scnr[i];
    trials[static_cast<size_t>(i)].sum_rate = 2.0;
  }
  trials[3].status = TrialStatus::infeasible;
  const Summary s = summarize(trials);
  CHECK(s.ok == 3);
  CHECK(s.failed == 1);
  CHECK(s.scnr_mean == doctest::Approx(2.0));
  CHECK(s.scnr_se == doctest::Approx(1.0 / std::sqrt(3.0)));
  CHECK(s.rate_se == 0.0);
}

TEST_CASE("trials are independent of the worker count") {
  const ScenarioConfig cfg = small();
  const auto one = run_trials(cfg, 5, 4, 1);
  const auto three = run_trials(cfg, 5, 4, 3);
  REQUIRE(one.size() == 4);
  for (size_t i = 0; i < 4; ++i) {
    CHECK(one[i].index == static_cast<int>(i));
    CHECK(one[i].seed == trial_seed(5, i));
    CHECK(one[i].status == TrialStatus::ok);
    CHECK(one[i].scnr_db == three[i].scnr_db);
    CHECK(one[i].sum_rate == three[i].sum_rate);
  }
  const Table t = montecarlo_table(cfg, 5, one);
  CHECK(to_csv(t) == to_csv(montecarlo_table(cfg, 5, three)));
  REQUIRE(t.rows.size() == 6);
  double sum = 0.0;
  for (const auto& r : one) sum += r.scnr_db;
  CHECK(t.rows[4][0] == "mean");
  CHECK(std::stod(t.rows[4][5]) == doctest::Approx(sum / 4.0).epsilon(1e-9));
  CHECK(t.rows[5][0] == "stderr");
  CHECK_THROWS_AS(run_trials(cfg, 5, 0, 1), std::invalid_argument);
}

TEST_CASE("failed trials are recorded") {
  ScenarioConfig cfg = small();
  cfg.sinr_threshold_db = 60.0;
  const auto trials = run_trials(cfg, 1, 1, 1);
  CHECK(trials[0].status == TrialStatus::infeasible);
  CHECK(!trials[0].error.empty());
  const Table t = tradeoff_table(cfg, 1, SweepParam::gamma_db, {{60.0, trials}});
  CHECK(t.rows[0][1] == "0");
  CHECK(t.rows[0][2] == "1");
}

TEST_CASE("mean trace holds converged values") {
  std::vector<TrialOutcome> trials(2);
  trials[0].trace = {{1, 10.0, 0.5}, {2, 100.0, 0.25}};
  trials[1].trace = {{1, 1000.0, 0.1}};
  const auto m = mean_trace(trials);
  REQUIRE(m.size() == 2);
  CHECK(linear_to_db(m[0].scnr) == doctest::Approx(20.0));
  CHECK(linear_to_db(m[1].scnr) == doctest::Approx(25.0));
  CHECK(m[1].beampattern_mse == doctest::Approx(0.175));
}

TEST_CASE("tables have fixed columns") {
  const ScenarioConfig cfg = small();
  const DesignRun run = run_design(cfg, 4);
  const Table conv = convergence_table(cfg, 4, run.solution.scnr_trace);
  CHECK(conv.columns == std::vector<std::string>{"outer_iter", "scnr_db", "beampattern_mse"});
  CHECK(conv.rows.size() == run.solution.scnr_trace.size());
  const std::string csv = to_csv(conv);
  CHECK(csv.rfind("# config_hash=" + hex64(config_hash(cfg)) + "\n# seed=4\n", 0) == 0);
  CHECK(csv.find('\r') == std::string::npos);

  const BeampatternComparison c = compare_beampatterns(cfg, 4);
  const Table bp = beampattern_table(cfg, 4, c);
  CHECK(bp.columns ==
        std::vector<std::string>{"angle_deg", "gain_db_proposed", "gain_db_no_taper", "gain_db_reference"});
  CHECK(bp.rows.front()[0] == "-90");
  CHECK(bp.rows.back()[0] == "89.5");
}

TEST_CASE("svg chart") {
  const std::string svg = svg_line_chart("t<1>", "x", "y", {{"a", {0, 1, 2}, {1, 4, 9}}, {"b", {0, 2}, {0, 0}}});
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("t&lt;1&gt;") != std::string::npos);
  size_t lines = 0;
  for (size_t p = svg.find("<polyline"); p != std::string::npos; p = svg.find("<polyline", p + 1)) ++lines;
  CHECK(lines == 2);
  CHECK(svg == svg_line_chart("t<1>", "x", "y", {{"a", {0, 1, 2}, {1, 4, 9}}, {"b", {0, 2}, {0, 0}}}));
}

TEST_CASE("command line exit codes and outputs") {
  const auto dir = scratch("cli");
  const std::string out = (dir / "out").string();
  std::ofstream(dir / "m4.yaml") << "num_tx_antennas: 4\n";
  std::ofstream(dir / "bad.yaml") << "num_tx_antennas: 4\nbogus: 1\n";
  std::ofstream(dir / "g60.yaml") << "num_tx_antennas: 4\nsinr_threshold_db: 60\n";
  const std::string m4 = (dir / "m4.yaml").string();

  CHECK(run_cli("design --config " + m4 + " --seed 3 --out " + out + " --emit-plots") == 0);
  const std::string first = read_file(dir / "out" / "convergence.csv");
  CHECK(first.find("outer_iter,scnr_db,beampattern_mse\n") != std::string::npos);
  CHECK(std::filesystem::exists(dir / "out" / "summary.json"));
  CHECK(std::filesystem::exists(dir / "out" / "convergence.svg"));
  CHECK(run_cli("design --config " + m4 + " --seed 3 --out " + out) == 0);
  CHECK(read_file(dir / "out" / "convergence.csv") == first);

  CHECK(run_cli("design --config " + (dir / "bad.yaml").string() + " --out " + out) == 2);
  CHECK(run_cli("design --config " + (dir / "missing.yaml").string() + " --out " + out) == 2);
  CHECK(run_cli("design --config " + (dir / "g60.yaml").string() + " --out " + out) == 3);
  CHECK(run_cli("sweep --param beta --values 1 --out " + out) == 2);
  CHECK(run_cli("frobnicate") == 2);

  CHECK(run_cli("sweep --config " + m4 + " --param delta --values 0.01,0.05 --trials 2 --out " + out) == 0);
  const std::string sweep = read_file(dir / "out" / "tradeoff.csv");
  CHECK(sweep.find("value,trials_ok,trials_failed,scnr_db_mean,scnr_db_se,sum_rate_mean,sum_rate_se\n") !=
        std::string::npos);
  CHECK(sweep.find("\n0.05,2,0,") != std::string::npos);

  CHECK(run_cli("montecarlo --config " + m4 + " --trials 2 --workers 2 --out " + out) == 0);
  CHECK(std::filesystem::exists(dir / "out" / "montecarlo.csv"));
  std::filesystem::remove_all(dir);
}
