#include <sys/wait.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "doctest.h"
#include "evseq/models.hpp"
#include "json.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace evseq;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result invoke(std::initializer_list<std::string> args, const std::string& stdin_text = "") {
  std::vector<std::string> owned{"evseq"};
  owned.insert(owned.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : owned) argv.push_back(a.c_str());
  std::istringstream in(stdin_text);
  std::ostringstream out, err;
  const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), in, out, err);
  return {code, out.str(), err.str()};
}

/// Runs the installed binary through the shell, capturing stdout.
Result shell(const std::string& args) {
  const std::string cmd = std::string(EVSEQ_BIN) + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::string out;
  std::array<char, 4096> buf{};
  std::size_t got = 0;
  while ((got = std::fread(buf.data(), 1, buf.size(), p)) > 0) out.append(buf.data(), got);
  const int status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out, ""};
}

std::string data(const std::string& name) { return std::string(EVSEQ_DATA) + "/" + name; }

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

struct TempFile {
  fs::path path;
  explicit TempFile(const std::string& name, const std::string& contents = "")
      : path(fs::temp_directory_path() / ("evseq_cli_test_" + name)) {
    if (!contents.empty()) std::ofstream(path, std::ios::binary) << contents;
  }
  ~TempFile() { fs::remove(path); }
  std::string str() const { return path.string(); }
};

std::vector<TrajectoryRecord> parse(const std::string& text) {
  std::istringstream in(text);
  return cli::read_trajectory(in);
}

}  // namespace

TEST_CASE("run reproduces the golden trajectories") {
  struct Case {
    std::vector<std::string> args;
    std::string golden;
  };
  const std::vector<Case> cases = {
      {{"--delta0", "0", "--dplus", "0.3", "--input", data("run_small.csv")}, "run_small.expected.csv"},
      {{"--delta0", "0.2", "--dplus", "0.2", "--input", data("run_crossing.csv")}, "run_null.expected.csv"},
      {{"--delta0", "0", "--dplus", "0.5", "--input", data("run_crossing.csv")}, "run_crossing.expected.csv"},
  };
  for (const auto& c : cases) {
    std::string joined = "run --model t --alpha 0.05";
    for (const auto& a : c.args) joined += " " + a;
    const auto expected = slurp(data(c.golden));
    REQUIRE_FALSE(expected.empty());
    const auto r1 = shell(joined);
    const auto r2 = shell(joined);
    CHECK(r1.code == 0);
    CHECK(r1.out == expected);
    CHECK(r2.out == r1.out);
  }
}

TEST_CASE("golden trajectories agree with the reference density") {
  const auto small = parse(slurp(data("run_small.expected.csv")));
  REQUIRE(small.size() == 3);
  CHECK(small[2].statistic == doctest::Approx(2 * std::sqrt(3.0)).epsilon(1e-14));
  CHECK(std::abs(small[0].log_e - std::log(static_cast<double>(oracle::norm_cdf_series(0.3)) / 0.5)) <= 1e-14);
  const std::vector<double> y{2, 4, 6};
  for (std::size_t n = 2; n <= 3; ++n) {
    const double ref = oracle::t_log_evalue_raw(std::span(y).first(n), 0.0, 0.3);
    CHECK(std::abs(small[n - 1].log_e - ref) <= 1e-9);
  }

  const auto null = parse(slurp(data("run_null.expected.csv")));
  REQUIRE(null.size() == 30);
  for (const auto& r : null) {
    CHECK(r.log_e == 0.0);
    CHECK_FALSE(r.rejected);
  }

  std::ifstream raw(data("run_crossing.csv"));
  std::string line;
  std::getline(raw, line);
  std::vector<double> ys;
  while (std::getline(raw, line)) ys.push_back(std::stod(line));
  const auto crossing = parse(slurp(data("run_crossing.expected.csv")));
  REQUIRE(crossing.size() == ys.size());
  for (std::size_t n = 2; n <= ys.size(); n += 3) {
    const double ref = oracle::t_log_evalue_raw(std::span(ys).first(n), 0.0, 0.5);
    CHECK(std::abs(crossing[n - 1].log_e - ref) <= 1e-9 * std::max(1.0, std::abs(ref)));
  }
  for (const auto& r : crossing) CHECK(r.rejected == (r.n >= 17));
  CHECK(std::exp(crossing[16].log_e) >= 25.0);
  CHECK(std::exp(crossing[15].log_e) < 20.0);
}

TEST_CASE("run summary") {
  const auto r = invoke({"run", "--model", "t", "--delta0", "0", "--dplus", "0.5", "--input", data("run_crossing.csv")});
  CHECK(r.code == 0);
  CHECK(r.out.rfind(cli::kTrajectoryHeader, 0) == 0);
  CHECK(r.err.find("rejected: yes, tau=17") != std::string::npos);

  TempFile out("summary.csv");
  const auto w = invoke({"run", "--model", "t", "--delta0", "0", "--dplus", "0.5", "--input", data("run_crossing.csv"),
                      "--output", out.str()});
  CHECK(w.code == 0);
  CHECK(w.out.find("tau=17") != std::string::npos);
  CHECK(slurp(out.str()) == slurp(data("run_crossing.expected.csv")));

  const auto neg = invoke({"run", "--model", "t", "--delta0", "0", "--dplus", "-0.5"}, "y\n1\n2\n");
  CHECK(neg.code == 0);
  CHECK(neg.err.find("note:") != std::string::npos);
}

TEST_CASE("standard input, files and JSON lines agree") {
  const auto file = invoke({"run", "--model", "t", "--delta0", "0", "--dplus", "0.5", "--input", data("run_crossing.csv")});
  const auto piped = invoke({"run", "--model", "t", "--delta0", "0", "--dplus", "0.5"}, slurp(data("run_crossing.csv")));
  CHECK(file.out == piped.out);

  std::ifstream raw(data("run_crossing.csv"));
  std::string line, jsonl;
  std::getline(raw, line);
  while (std::getline(raw, line)) jsonl += "{\"y\": " + line + "}\n";
  const auto j = invoke({"run", "--model", "t", "--delta0", "0", "--dplus", "0.5", "--format", "jsonl"}, jsonl);
  CHECK(j.code == 0);
  CHECK(j.out == file.out);
}

TEST_CASE("chisq, bernoulli and linreg runs") {
  const auto chi = invoke({"run", "--model", "chisq", "--sigma0", "1", "--splus", "2"}, "y\n1\n2\n3\n");
  REQUIRE(chi.code == 0);
  const auto ct = parse(chi.out);
  CHECK(ct[2].statistic == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(ct[2].log_e == doctest::Approx(2 * std::log(0.5) + 0.75).epsilon(1e-14));

  const auto bern = invoke({"run", "--model", "bernoulli", "--theta0", "0.5", "--tplus", "0.9"}, "y\n1\n1\n");
  REQUIRE(bern.code == 0);
  CHECK(parse(bern.out)[1].log_e == doctest::Approx(std::log(1.64)).epsilon(1e-14));
  const auto flipped = invoke({"run", "--model", "bernoulli", "--theta0", "0.5", "--tplus", "0.9"}, "y\n0\n0\n");
  CHECK(parse(flipped.out)[1].log_e == parse(bern.out)[1].log_e);

  const std::string reg_csv = "y,x,z1,z2\n"
                              "1.2,0.3,1,0.5\n"
                              "0.1,-1.1,1,-0.2\n"
                              "2.5,1.4,1,0.9\n"
                              "0.7,0.2,1,-1.3\n"
                              "1.9,0.8,1,0.4\n"
                              "-0.4,-0.9,1,1.1\n";
  const auto reg = invoke({"run", "--model", "linreg", "--delta0", "0", "--dplus", "0.4"}, reg_csv);
  REQUIRE(reg.code == 0);
  const auto rt = parse(reg.out);
  REQUIRE(rt.size() == 6);
  Eigen::MatrixXd z(6, 2);
  Eigen::VectorXd x(6), y(6);
  z << 1, 0.5, 1, -0.2, 1, 0.9, 1, -1.3, 1, 0.4, 1, 1.1;
  x << 0.3, -1.1, 1.4, 0.2, 0.8, -0.9;
  y << 1.2, 0.1, 2.5, 0.7, 1.9, -0.4;
  const auto o = oracle::ols_t(z, y, x);
  CHECK(std::abs(rt[5].statistic - o.t) <= 1e-9 * std::abs(o.t));
  const double ref = std::log(oracle::nct_pdf_mixture(o.t, o.dof, 0.4 * o.b_norm) /
                              oracle::nct_pdf_mixture(o.t, o.dof, 0.0));
  CHECK(std::abs(rt[5].log_e - ref) <= 1e-9);
  // Uninformative startup rows stay at e = 1.
  CHECK(rt[0].log_e == 0.0);
  CHECK(rt[2].log_e == 0.0);
}

TEST_CASE("prior files") {
  TempFile prior("prior.csv", "delta,weight\n0.2,0.3\n0.6,0.7\n");
  const auto r = invoke({"run", "--model", "t", "--delta0", "0", "--prior", prior.str()}, "y\n0.4\n1.3\n-0.2\n0.9\n");
  REQUIRE(r.code == 0);
  const auto tr = parse(r.out);
  TTestState s;
  for (double v : {0.4, 1.3, -0.2, 0.9}) s = TTest{}.update(s, v);
  const double a = t_log_evalue(s, 0.0, 0.2);
  const double b = t_log_evalue(s, 0.0, 0.6);
  CHECK(std::abs(tr[3].log_e - std::log(0.3 * std::exp(a) + 0.7 * std::exp(b))) <= 1e-13);

  TempFile bad("bad_prior.csv", "delta,weight\n0.2,0.3\n0.6,0.6\n");
  CHECK(invoke({"run", "--model", "t", "--delta0", "0", "--prior", bad.str()}, "y\n1\n").code == cli::kExitConfig);
  TempFile header("bad_header.csv", "effect,weight\n0.2,1\n");
  CHECK(invoke({"run", "--model", "t", "--delta0", "0", "--prior", header.str()}, "y\n1\n").code == cli::kExitConfig);
}

TEST_CASE("exit codes") {
  const std::string ok = "y\n1\n2\n";
  CHECK(invoke({"run", "--delta0", "0", "--dplus", "0.3"}, ok).code == cli::kExitConfig);
  CHECK(invoke({"run", "--model", "anova", "--delta0", "0", "--dplus", "0.3"}, ok).code == cli::kExitConfig);
  CHECK(invoke({"run", "--model", "t", "--dplus", "0.3"}, ok).code == cli::kExitConfig);
  CHECK(invoke({"run", "--model", "t", "--delta0", "0"}, ok).code == cli::kExitConfig);
  CHECK(invoke({"run", "--model", "t", "--delta0", "0", "--tplus", "0.8"}, ok).code == cli::kExitConfig);
  CHECK(invoke({"run", "--model", "t", "--delta0", "0", "--dplus", "0.3", "--alpha", "1.5"}, ok).code ==
        cli::kExitConfig);
  CHECK(invoke({"run", "--model", "t", "--delta0", "0", "--dplus", "0.3", "--format", "xml"}, ok).code ==
        cli::kExitConfig);
  CHECK(invoke({"run", "--model", "bernoulli", "--theta0", "0.4", "--tplus", "0.8"}, "y\n1\n").code ==
        cli::kExitConfig);
  CHECK(invoke({"frobnicate"}).code == cli::kExitConfig);

  const auto bad_row = invoke({"run", "--model", "t", "--delta0", "0", "--dplus", "0.3"}, "y\n1\nabc\n3\n");
  CHECK(bad_row.code == cli::kExitData);
  CHECK(bad_row.err.find("row 2") != std::string::npos);
  CHECK(invoke({"run", "--model", "t", "--delta0", "0", "--dplus", "0.3"}, "y\n0\n1\n").code == cli::kExitData);
  CHECK(invoke({"run", "--model", "bernoulli", "--theta0", "0.6", "--tplus", "0.8"}, "y\n1\n2\n").code ==
        cli::kExitData);
  CHECK(invoke({"run", "--model", "t", "--delta0", "0", "--dplus", "0.3"}, "x\n1\n").code == cli::kExitData);
  CHECK(invoke({"run", "--model", "linreg", "--delta0", "0", "--dplus", "0.3"}, "y,x,z1\n5,1,1\n5,2,1\n5,3,1\n").code ==
        cli::kExitData);
  CHECK(invoke({"run", "--model", "t", "--delta0", "0", "--dplus", "0.3", "--format", "jsonl"}, "{\"y\": 1}\n{\"y\"\n")
            .code == cli::kExitData);

  // Through the real binary as well.
  CHECK(shell("run --model t --delta0 0 --dplus 0.3 --input " + data("missing.csv")).code != 0);
  CHECK(shell("run --model t --delta0 0 --alpha 2 --dplus 0.3 --input " + data("run_small.csv")).code ==
        cli::kExitConfig);
}

TEST_CASE("plot") {
  const auto crossing = slurp(data("run_crossing.expected.csv"));
  TempFile svg1("a.svg"), svg2("b.svg");
  CHECK(invoke({"plot", "--input", data("run_crossing.expected.csv"), "--output", svg1.str()}).code == 0);
  CHECK(invoke({"plot", "--output", svg2.str()}, crossing).code == 0);
  const auto a = slurp(svg1.str());
  CHECK(a == slurp(svg2.str()));
  CHECK(a.find("<svg") != std::string::npos);
  CHECK(a.find("tau = 17") != std::string::npos);
  CHECK(a.find("stroke-dasharray") != std::string::npos);

  const auto flat = cli::render_svg(parse(slurp(data("run_null.expected.csv"))), 0.05);
  CHECK(flat.find("tau =") == std::string::npos);
  CHECK(flat == cli::render_svg(parse(slurp(data("run_null.expected.csv"))), 0.05));

  CHECK(invoke({"plot"}, "").code == cli::kExitData);
  CHECK(invoke({"plot"}, std::string(cli::kTrajectoryHeader) + "\n").code == cli::kExitData);
  CHECK(invoke({"plot"}, "n,e\n1,1\n").code == cli::kExitData);
  CHECK(invoke({"plot"}, std::string(cli::kTrajectoryHeader) + "\n1,1,0,1,maybe\n").code == cli::kExitData);

  // run -> plot round trip, including non-finite statistics.
  const auto run = invoke({"run", "--model", "t", "--delta0", "0", "--dplus", "0.3"}, "y\n3\n3\n3\n");
  REQUIRE(run.code == 0);
  CHECK(run.out.find("inf") != std::string::npos);
  CHECK(invoke({"plot"}, run.out).code == 0);
}

TEST_CASE("verify subcommands") {
  const auto ce = invoke({"verify", "counterexample", "--n", "5", "--deltas", "0.2,0.1,0.05"});
  CHECK(ce.code == 0);
  const auto j = nlohmann::json::parse(ce.out);
  CHECK(j["schema"] == "evseq-report/1");
  CHECK(j["check"] == "counterexample");
  bool saw_coefficient = false;
  for (const auto& row : j["rows"]) {
    if (row["key"] == "coefficient") {
      saw_coefficient = true;
      CHECK(std::abs(row["estimate"].get<double>() - 2.0 / 3.0) <= 0.01);
    }
  }
  CHECK(saw_coefficient);

  CHECK(invoke({"verify", "mlr", "--nu", "2", "--lplus", "1", "--l0", "0"}).code == 0);
  CHECK(invoke({"verify", "mlr", "--nu", "2", "--lplus", "0", "--l0", "1"}).code == cli::kExitFailedCheck);
  CHECK(invoke({"verify", "quadrature", "--nu", "3", "--lplus", "1", "--l0", "0"}).code == 0);
  CHECK(invoke({"verify", "positivity", "--nmax", "12"}).code == 0);

  const auto mc = invoke({"verify", "mc", "--model", "chisq", "--sigma0", "1", "--splus", "1.2", "--mu", "0", "--sigma",
                       "0.8", "--reps", "2000", "--checkpoints", "2,5"});
  CHECK(mc.code == 0);
  CHECK(nlohmann::json::parse(mc.out)["rows"].size() == 2);

  CHECK(invoke({"verify", "type1", "--model", "bernoulli", "--theta0", "0.6", "--tplus", "0.8", "--theta", "0.5",
             "--reps", "500"})
            .code == 0);
  CHECK(invoke({"verify", "type1", "--model", "t", "--delta0", "0", "--dplus", "0.5", "--mu", "2", "--reps", "100"})
            .code == cli::kExitConfig);
  CHECK(invoke({"verify", "epower", "--model", "t", "--delta0", "0", "--dplus", "0.5", "--mu", "0.5", "--n", "10",
             "--reps", "200"})
            .code == 0);
  CHECK(invoke({"verify", "counterexample", "--n", "30"}).code == cli::kExitConfig);

  TempFile report("report.json");
  const auto a = invoke({"verify", "mc", "--model", "t", "--delta0", "0", "--dplus", "0.5", "--reps", "1000", "--seed",
                      "3", "--output", report.str()});
  const auto b = invoke({"verify", "mc", "--model", "t", "--delta0", "0", "--dplus", "0.5", "--reps", "1000", "--seed",
                      "3"});
  auto ja = nlohmann::json::parse(slurp(report.str()));
  auto jb = nlohmann::json::parse(b.out);
  ja.erase("runtime_seconds");
  jb.erase("runtime_seconds");
  CHECK(ja == jb);
}
