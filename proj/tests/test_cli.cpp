// End-to-end tests driving the installed CLI binary (path injected at compile
// time). Each case shells out, captures stdout, and checks schema + exit code.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace {

struct RunResult {
  int code = -1;
  std::string out;
};

RunResult run_cli(const std::string& args, const std::string& env_prefix = "") {
  const std::string cmd = env_prefix + std::string(LPLDP_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult r;
  char buf[4096];
  std::size_t k;
  while ((k = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, k);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::string cur;
  for (char ch : text) {
    if (ch == '\n') {
      lines.push_back(cur);
      cur.clear();
    } else
      cur += ch;
  }
  if (!cur.empty()) lines.push_back(cur);
  return lines;
}

struct CsvRow {
  double w = 0, value = 0;
  std::string kind, p, speed;
};

std::vector<CsvRow> parse_csv(const std::string& text) {
  const auto lines = lines_of(text);
  REQUIRE(lines.size() >= 2);
  CHECK(lines[0] == "# schema: lp-ldp.rate-curve.v1");
  CHECK(lines[1] == "w,value,kind,p,speed");
  std::vector<CsvRow> rows;
  for (std::size_t i = 2; i < lines.size(); ++i) {
    std::istringstream ss(lines[i]);
    std::string f[5];
    for (int j = 0; j < 5; ++j) REQUIRE(std::getline(ss, f[j], ','));
    CsvRow row;
    row.w = std::strtod(f[0].c_str(), nullptr);
    row.value = f[1] == "inf" ? INFINITY : std::strtod(f[1].c_str(), nullptr);
    row.kind = f[2];
    row.p = f[3];
    row.speed = f[4];
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST_CASE("rate: closed-form gaussian curve as csv") {
  const RunResult r = run_cli("rate --p 2 --kind j2 --w 0:0.9:0.1");
  REQUIRE(r.code == 0);
  const auto rows = parse_csv(r.out);
  REQUIRE(rows.size() == 10);
  CHECK(rows[0].w == 0.0);
  CHECK(rows[0].value == 0.0);
  CHECK(rows[0].kind == "j2");
  CHECK(rows[0].p == "2");
  CHECK(rows[0].speed == "n");
  CHECK(rows[3].value ==
        doctest::Approx(-0.5 * std::log1p(-0.09)).epsilon(1e-14));  // w = 0.3
}

TEST_CASE("rate: quenched dominates cramer pointwise at p = 4") {
  const RunResult r = run_cli("rate --p 4 --kind quenched --kind cramer --w 0.15:0.75:0.15");
  REQUIRE(r.code == 0);
  const auto rows = parse_csv(r.out);
  std::map<std::string, std::map<double, double>> val;
  for (const CsvRow& row : rows) val[row.kind][row.w] = row.value;
  REQUIRE(val.count("quenched") == 1);
  REQUIRE(val.count("cramer") == 1);
  REQUIRE(val["quenched"].size() == 5);
  for (const auto& [w, q] : val["quenched"]) {
    CHECK(q >= val["cramer"][w] - 1e-9);
    if (w > 0.0) CHECK(q > val["cramer"][w]);
  }
}

TEST_CASE("rate: json format with infinity sentinels") {
  const RunResult r =
      run_cli("rate --p inf --kind quenched --kind cramer --w 0:0.9:0.3 --format json");
  REQUIRE(r.code == 0);
  const nlohmann::json doc = nlohmann::json::parse(r.out);
  CHECK(doc.at("schema") == "lp-ldp.rate-curve.v1");
  REQUIRE(doc.at("curves").size() == 2);
  const auto& qc = doc["curves"][0];
  CHECK(qc.at("p") == "inf");
  CHECK(qc.at("kind") == "quenched");
  // finite below sqrt(2/pi) ~ 0.7979, infinite beyond
  CHECK(qc.at("value")[1].is_number());  // w = 0.3
  CHECK(qc.at("value")[3] == "inf");     // w = 0.9
}

TEST_CASE("rate: mixed-speed co-plot is refused without the explicit flag") {
  const RunResult refuse = run_cli("rate --p 1.5 --kind annealed --kind cramer --w 0.3");
  CHECK(refuse.code == 1);
  const RunResult allow =
      run_cli("rate --p 1.5 --kind annealed --kind cramer --w 0.3 --allow-mixed-speed");
  CHECK(allow.code == 0);
  const auto rows = parse_csv(allow.out);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].speed != rows[1].speed);
}

TEST_CASE("rate: validation failures exit with code 1") {
  CHECK(run_cli("rate --p 0.5 --kind j2").code == 1);
  CHECK(run_cli("rate --kind j2 --w 0.5:0.1:0.1").code == 1);
  CHECK(run_cli("rate --kind no-such-kind").code == 1);
  CHECK(run_cli("rate --kind j2 --no-such-flag").code == 1);
  CHECK(run_cli("rate --kind j2 --w 0.3 --out /no-such-dir/x.csv").code == 1);
  CHECK(run_cli("").code == 1);  // a subcommand is required
}

TEST_CASE("mc: seeded runs are byte-identical and thread-count independent") {
  const std::string args = "mc --p 2 --w 0.3 --n 50 --reps 20000 --dir e1 --seed 7";
  const RunResult a = run_cli(args + " --threads 1");
  const RunResult b = run_cli(args + " --threads 4");
  const RunResult c = run_cli(args, "LP_LDP_THREADS=2 ");
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out == c.out);
  const nlohmann::json j = nlohmann::json::parse(lines_of(a.out)[0]);
  CHECK(j.at("schema") == "lp-ldp.mc-estimate.v1");
  CHECK(j.at("n") == 50);
  CHECK(j.at("seed") == 7);
  CHECK(j.at("p_hat").get<double>() > 0.0);

  const RunResult other = run_cli("mc --p 2 --w 0.3 --n 50 --reps 20000 --dir typical --seed 8");
  const RunResult same_dir =
      run_cli("mc --p 2 --w 0.3 --n 50 --reps 20000 --dir typical --seed 9");
  REQUIRE(other.code == 0);
  CHECK(other.out != same_dir.out);
}

TEST_CASE("mc: tilted importance sampling runs end to end") {
  const RunResult r =
      run_cli("mc --p 4 --w 0.35 --n 30 --reps 5000 --method tilted --dir typical --seed 5");
  REQUIRE(r.code == 0);
  const nlohmann::json j = nlohmann::json::parse(lines_of(r.out)[0]);
  CHECK(j.at("method") == "tilted");
  CHECK(j.at("p_hat").get<double>() > 0.0);
  CHECK(j.at("acceptance_rate").get<double>() > 0.0);
}

TEST_CASE("mc: glivenko-cantelli and max-scaling reports") {
  const RunResult gc = run_cli("mc --gc --dir typical --r 1 --n 100,1000 --seed 3");
  REQUIRE(gc.code == 0);
  const nlohmann::json gj = nlohmann::json::parse(gc.out);
  CHECK(gj.at("schema") == "lp-ldp.gc-report.v1");
  REQUIRE(gj.at("wasserstein_r").size() == 2);
  CHECK(gj.at("wasserstein_r")[0].get<double>() > gj.at("wasserstein_r")[1].get<double>());

  const RunResult ms = run_cli("mc --dir e1 --check max-scaling --n 100,1e3");
  REQUIRE(ms.code == 0);
  const nlohmann::json mj = nlohmann::json::parse(ms.out);
  CHECK(mj.at("schema") == "lp-ldp.max-scaling.v1");
  REQUIRE(mj.at("max_abs_coord_sqrt_n_over_log_n").size() == 2);
  CHECK(mj.at("max_abs_coord_sqrt_n_over_log_n")[1].get<double>() >
        mj.at("max_abs_coord_sqrt_n_over_log_n")[0].get<double>());
}

TEST_CASE("mc: validation failures exit with code 1") {
  CHECK(run_cli("mc --method bogus").code == 1);
  CHECK(run_cli("mc --n 0").code == 1);
  CHECK(run_cli("mc --n 100 --reps 1e13").code == 1);
  CHECK(run_cli("mc --dir nowhere").code == 1);
  CHECK(run_cli("mc --check bogus").code == 1);
  CHECK(run_cli("mc --p 1 --method tilted").code == 1);
}

TEST_CASE("variational: gaussian case recovers the closed-form value") {
  const RunResult r = run_cli("variational --p 2 --w 0.5");
  REQUIRE(r.code == 0);
  const nlohmann::json j = nlohmann::json::parse(r.out);
  CHECK(j.at("schema") == "lp-ldp.variational.v1");
  CHECK(j.at("w") == 0.5);
  CHECK(std::fabs(j.at("value").get<double>() - 0.14384103622589) < 5e-3);
  CHECK(j.at("kkt_residual").get<double>() < 1e-6);
  CHECK(j.at("minimizer").at("kind") == "grid_discrete");
  CHECK(j.at("objective_trace").size() >= 1);

  const RunResult z = run_cli("variational --p 4 --w 0");
  REQUIRE(z.code == 0);
  const nlohmann::json jz = nlohmann::json::parse(z.out);
  // Only the entropy cost remains at w = 0; its grid-discrete minimum is a
  // hair above zero (the reference cell masses need an O(1e-4) moment tilt).
  CHECK(std::fabs(jz.at("value").get<double>()) < 1e-6);
}

TEST_CASE("variational: compact-law objective distinguishes witness from mu2") {
  const RunResult r = run_cli("variational --gamma uniform --w 0.83");
  REQUIRE(r.code == 0);
  const nlohmann::json j = nlohmann::json::parse(r.out);
  CHECK(j.at("schema") == "lp-ldp.variational.v1");
  CHECK(j.at("objective_at_discretized_mu2") == "inf");
  const double witness = j.at("objective_at_spread_witness").get<double>();
  CHECK(witness > 2.0);
  CHECK(witness < 3.5);
  const double value = j.at("value").get<double>();
  CHECK(value <= witness + 1e-6);
  CHECK(value > 0.5);
  CHECK(j.at("gamma").at("kind") == "uniform_interval");
}

TEST_CASE("variational: argument validation") {
  CHECK(run_cli("variational --w 0.5").code == 1);                    // need --p xor --gamma
  CHECK(run_cli("variational --p 2 --gamma uniform --w 0.5").code == 1);
  CHECK(run_cli("variational --p 1.5 --w 0.5").code == 1);            // objective needs p >= 2
  CHECK(run_cli("variational --p 2 --w 0.5 --grid 0:1:2").code == 1); // too few grid points
}

TEST_CASE("selftest: single criteria run and report") {
  const RunResult r = run_cli("selftest --only sub2-closed-form");
  CHECK(r.code == 0);
  CHECK(r.out.find("PASS sub2-closed-form") != std::string::npos);
  CHECK(r.out.find("SELFTEST PASS") != std::string::npos);
  CHECK(run_cli("selftest --only no-such-criterion").code == 1);
}

TEST_CASE("selftest: quadrature fault injection is caught") {
  const RunResult r = run_cli("selftest --only p2-equalities --inject-quadrature-fault");
  CHECK(r.code == 3);
  CHECK(r.out.find("FAIL p2-equalities") != std::string::npos);
}

TEST_CASE("config file provides defaults and flags override them") {
  const std::string path = "lpldp_cli_test_config.toml";
  {
    std::ofstream f(path);
    f << "[rate]\np = \"4\"\nkind = \"quenched\"\nw = \"0.3\"\n";
  }
  const RunResult from_cfg = run_cli("--config " + path + " rate");
  REQUIRE(from_cfg.code == 0);
  const auto rows = parse_csv(from_cfg.out);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].kind == "quenched");
  CHECK(rows[0].p == "4");
  CHECK(rows[0].w == 0.3);

  const RunResult overridden = run_cli("--config " + path + " rate --p 2 --kind j2");
  REQUIRE(overridden.code == 0);
  const auto orow = parse_csv(overridden.out);
  REQUIRE(orow.size() == 1);
  CHECK(orow[0].kind == "j2");
  CHECK(orow[0].p == "2");
  CHECK(orow[0].w == 0.3);  // still from the config file
  CHECK(orow[0].value == doctest::Approx(0.0471553397356206).epsilon(1e-12));
  std::remove(path.c_str());
}

TEST_CASE("output lands in --out files verbatim") {
  const std::string path = "lpldp_cli_test_out.csv";
  const RunResult to_file = run_cli("rate --kind j2 --w 0.3 --out " + path);
  REQUIRE(to_file.code == 0);
  CHECK(to_file.out.empty());
  std::ifstream f(path);
  REQUIRE(f.good());
  std::stringstream ss;
  ss << f.rdbuf();
  const RunResult to_stdout = run_cli("rate --kind j2 --w 0.3");
  CHECK(ss.str() == to_stdout.out);
  std::remove(path.c_str());
}
