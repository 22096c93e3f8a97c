#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "covevo/cli.hpp"
#include "covevo/errors.hpp"

using covevo::cli::run;
using Json = nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("threshold as json") {
  const auto r = invoke({"threshold", "--lambda", "3:1", "--rho", "6:1"});
  REQUIRE(r.code == 0);
  const auto j = Json::parse(r.out);
  CHECK(j["schema"] == 1);
  CHECK(j["command"] == "threshold");
  CHECK(std::fabs(j["epsilon_star"].get<double>() - 0.4294) <= 5e-4);
}

TEST_CASE("covariance at y = 1") {
  const auto r = invoke({"covariance", "--lambda", "3:1", "--rho", "6:1", "--epsilon", "0.4", "--y", "1", "--method",
                         "analytic"});
  REQUIRE(r.code == 0);
  const auto j = Json::parse(r.out);
  CHECK(j["labels"][0] == "l3");
  CHECK(j["matrix"][0][0].get<double>() == doctest::Approx(0.72).epsilon(1e-14));
  CHECK(j["matrix"][0][1].get<double>() == j["matrix"][1][0].get<double>());
}

TEST_CASE("ode covariance") {
  const auto r = invoke({"covariance", "--lambda", "3:1", "--rho", "6:1", "--epsilon", "0.4", "--y", "0.8", "--method",
                         "ode", "--step", "1e-3"});
  REQUIRE(r.code == 0);
  CHECK(Json::parse(r.out)["step"] == 1e-3);
}

TEST_CASE("verify report") {
  const auto r = invoke({"verify", "--lambda", "3:1", "--rho", "6:1", "--epsilon", "0.4", "--y", "0.6", "--step", "1e-4"});
  REQUIRE(r.code == 0);
  const auto j = Json::parse(r.out);
  CHECK(j["max_abs_diff"].get<double>() <= 1e-5);
  CHECK(j["pass"] == true);

  const auto grid = invoke({"verify", "--lambda", "2:0.5,3:0.5", "--rho", "6:1", "--eps-grid", "0.35,0.4", "--y-grid",
                            "0.9:0.7:3", "--step", "1e-3"});
  REQUIRE(grid.code == 0);
  CHECK(Json::parse(grid.out)["points"].size() == 6);
}

TEST_CASE("alpha, evolve and waterfall") {
  const auto a = invoke({"alpha", "--lambda", "3:1", "--rho", "6:1"});
  REQUIRE(a.code == 0);
  const auto ja = Json::parse(a.out);
  CHECK(ja["alpha"].get<double>() == doctest::Approx(0.5603547392).epsilon(1e-8));
  CHECK(ja["alpha_regular"].is_number());

  const auto e = invoke({"evolve", "--lambda", "3:1", "--rho", "6:1", "--epsilon", "0.4", "--y-grid", "1,0.5", "--format",
                         "csv"});
  REQUIRE(e.code == 0);
  CHECK(e.out.rfind("y,tau,x,e,r1_mean,l3,r2,r3,r4,r5,r6\n", 0) == 0);
  CHECK(e.out.find("\n1,0,0.40000000000000002,") != std::string::npos);

  const auto w = invoke({"waterfall", "--lambda", "3:1", "--rho", "6:1", "--n", "2048", "--eps-range", "0.40:0.46:4"});
  REQUIRE(w.code == 0);
  const auto jw = Json::parse(w.out);
  REQUIRE(jw["points"].size() == 4);
  CHECK(jw["points"][3]["p_block"].get<double>() > jw["points"][0]["p_block"].get<double>());

  CHECK(invoke({"waterfall", "--lambda", "3:1", "--rho", "6:1", "--eps", "0.4"}).code == 2);
}

TEST_CASE("simulate is deterministic") {
  const std::vector<std::string> args{"simulate", "--lambda", "3:1",     "--rho",  "6:1",     "--n",
                                      "600",      "--epsilon", "0.42", "--trials", "20", "--seed",
                                      "9",        "--tau-grid", "0.02,0.05"};
  const auto a = invoke(args);
  auto threaded = args;
  threaded.insert(threaded.end(), {"--threads", "3"});
  const auto b = invoke(threaded);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  const auto j = Json::parse(a.out);
  CHECK(j["trials"] == 20);
  CHECK(j["labels"].size() == 7);
}

TEST_CASE("trajectory export") {
  const std::string path = "cli_test_trajectories.ndjson";
  const auto r = invoke({"simulate", "--lambda", "3:1", "--rho", "6:1", "--n", "600", "--epsilon", "0.4", "--trials",
                         "3", "--tau-grid", "0.01", "--record-trajectories", path});
  REQUIRE(r.code == 0);
  std::ifstream in(path);
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) {
    const auto j = Json::parse(line);
    CHECK(j["trial_id"] == lines);
    ++lines;
  }
  CHECK(lines == 3);
  std::remove(path.c_str());
}

TEST_CASE("exit codes") {
  CHECK(invoke({}).code == 1);
  const auto unknown = invoke({"bogus"});
  CHECK(unknown.code == 1);
  CHECK(unknown.err.find("usage") != std::string::npos);

  const auto bad = invoke({"threshold", "--lambda", "3:1,q", "--rho", "6:1"});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("'q'") != std::string::npos);
  CHECK(invoke({"threshold", "--lambda", "3:1"}).code == 2);
  CHECK(invoke({"threshold", "--lambda", "3:1", "--rho", "6:1", "--format", "xml"}).code == 2);
  CHECK(invoke({"covariance", "--lambda", "3:1", "--rho", "6:1", "--epsilon", "0", "--y", "1"}).code == 2);
  CHECK(invoke({"alpha", "--lambda", "2:1", "--rho", "4:1"}).code == 3);
  CHECK(invoke({"evolve", "--lambda", "3:1", "--rho", "6:1", "--epsilon", "0", "--y-grid", "1"}).code == 3);
}

TEST_CASE("csv output and byte-identical reruns") {
  const std::vector<std::string> args{"covariance", "--lambda", "2:0.5,3:0.5", "--rho", "6:1", "--epsilon", "0.3", "--y",
                                      "0.7", "--format", "csv"};
  const auto a = invoke(args);
  const auto b = invoke(args);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out.rfind("label,l2,l3,r1,r2,r3,r4,r5\n", 0) == 0);
}

TEST_CASE("ensemble file") {
  const std::string path = "cli_test_ensemble.json";
  {
    std::ofstream f(path);
    f << R"({"lambda":{"3":1},"rho":{"6":1},"n":2000})";
  }
  const auto r = invoke({"threshold", "--ensemble", path});
  REQUIRE(r.code == 0);
  CHECK(Json::parse(r.out)["ensemble"]["n"] == 2000);
  CHECK(invoke({"threshold", "--ensemble", path, "--lambda", "3:1"}).code == 2);
  std::remove(path.c_str());
}

TEST_CASE("list and range parsing") {
  CHECK(covevo::cli::parse_list("0.1, 0.2,3") == std::vector<double>{0.1, 0.2, 3.0});
  CHECK_THROWS_AS(covevo::cli::parse_list("0.1,,2"), covevo::ValidationError);
  const auto r = covevo::cli::parse_range("0:1:5");
  CHECK(r == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
  CHECK_THROWS_AS(covevo::cli::parse_range("0:1"), covevo::ValidationError);
  CHECK_THROWS_AS(covevo::cli::parse_range("0:1:2.5"), covevo::ValidationError);
}
