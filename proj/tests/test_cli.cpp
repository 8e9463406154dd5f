#include <catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#ifndef THERMALFIELD_BIN
#error "THERMALFIELD_BIN must point at the CLI binary"
#endif

namespace {

struct RunResult {
  int code;
  std::string out;
};

RunResult run(const std::string& args) {
  const std::string out_path = std::string(std::tmpnam(nullptr)) + ".out";
  const std::string cmd = std::string(THERMALFIELD_BIN) + " " + args + " > " + out_path + " 2>&1";
  const int status = std::system(cmd.c_str());
  std::ifstream in(out_path);
  std::stringstream buf;
  buf << in.rdbuf();
  std::remove(out_path.c_str());
  return {WEXITSTATUS(status), buf.str()};
}

int count_lines(const std::string& s) {
  return int(std::count(s.begin(), s.end(), '\n'));
}

const char* kKms1 = R"('{"state":"kms","mass":0.0,"beta":[1,0,0,0]}')";

}  // namespace

TEST_CASE("help and bad flags") {
  CHECK(run("--help").code == 0);
  CHECK(run("eval --help").code == 0);
  CHECK(run("check --help").code == 0);
  CHECK(run(std::string("eval --state ") + kKms1 + " --no-such-flag").code == 2);
  CHECK(run("").code == 2);
}

TEST_CASE("eval grid emits the documented CSV") {
  const auto r = run(std::string("eval --state ") + kKms1 +
                     " --tn 11 --rn 11 --rmin 0 --rmax 1 --sigma 0.25");
  CHECK(r.code == 0);
  CHECK(count_lines(r.out) == 122);  // header + 121 rows
  CHECK(r.out.substr(0, 20) == "t,r,sigma,re,im,err\n");
  CHECK(r.out.find("\r") == std::string::npos);

  // byte stability across runs
  const auto r2 = run(std::string("eval --state ") + kKms1 +
                      " --tn 11 --rn 11 --rmin 0 --rmax 1 --sigma 0.25");
  CHECK(r.out == r2.out);
}

TEST_CASE("eval error paths") {
  // weights not summing to 1: config error
  CHECK(run("eval --state "
            R"('{"state":"mixture","mass":0,"components":[{"w":0.4,"beta":[1,0,0,0]},{"w":0.5,"beta":[2,0,0,0]}]}')")
            .code == 2);
  // sigma = 0 grid refuses the singular boundary
  CHECK(run("eval --state "
            R"('{"state":"vacuum","mass":0.0}')"
            " --beta 1,0,0,0 --sigma 0 --tn 3 --rn 3")
            .code == 3);
  CHECK(run(std::string("eval --state ") + kKms1 + " --q 1,2,3").code == 2);
  CHECK(run("eval --state /nonexistent.json").code == 2);
}

TEST_CASE("check verdicts and exit codes") {
  const auto pass = run(std::string("check --state ") + kKms1 + " --beta 1,0,0,0");
  CHECK(pass.code == 0);
  const auto j = nlohmann::json::parse(pass.out);
  CHECK(j["verdict"] == "pass");
  CHECK(j["lte"]["verdict"] == "pass");
  CHECK(j["lkms"]["verdict"] == "pass");
  CHECK(j["config"]["profile"] == "default");

  const auto fail = run("check --state "
                        R"('{"state":"vacuum","mass":0.0}')"
                        " --beta 1,0,0,0 --which lte --order 0");
  CHECK(fail.code == 1);
  const auto jf = nlohmann::json::parse(fail.out);
  const double disc = jf["lte"]["per_order_discrepancy"][0]["discrepancy"].get<double>();
  CHECK(disc == Catch::Approx(1.0 / 12.0).epsilon(1e-4));

  CHECK(run(std::string("check --state ") + kKms1).code == 2);  // no --beta, no --extract
  CHECK(run(std::string("check --state ") + kKms1 + " --beta 0,1,0,0").code == 2);
}

TEST_CASE("check with extraction records the hot-bang factor") {
  const auto r = run("check --state "
                     R"('{"state":"hotbang","A":1.0}')"
                     " --q 1,0,0,0 --extract");
  CHECK(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["hotbang_factor"].get<double>() == Catch::Approx(2.0).epsilon(1e-4));
  CHECK(j.contains("extracted"));
}

TEST_CASE("hot-bang sweep ratio is constant") {
  const auto r = run("sweep-hotbang --A 1 --q 1,0,0,0 --q 2,0,0,0 --q 2,1,0,0");
  CHECK(r.code == 0);
  CHECK(count_lines(r.out) == 4);
  CHECK(run("sweep-hotbang --A 1").code == 2);
  CHECK(run("sweep-hotbang --A 1 --q 0,1,0,0").code == 2);
}

TEST_CASE("profile selection via flag and environment") {
  const auto strict = run(std::string("check --state ") + kKms1 + " --beta 1,0,0,0 --profile strict");
  CHECK(nlohmann::json::parse(strict.out)["config"]["profile"] == "strict");
  CHECK(run(std::string("check --state ") + kKms1 + " --beta 1,0,0,0 --profile bogus").code == 2);

  const std::string out_path = std::string(std::tmpnam(nullptr)) + ".env";
  const std::string cmd = std::string("THERMALFIELD_PROFILE=fast ") + THERMALFIELD_BIN +
                          " check --state " + kKms1 + " --beta 1,0,0,0 > " + out_path;
  REQUIRE(std::system(cmd.c_str()) == 0);
  std::ifstream in(out_path);
  std::stringstream buf;
  buf << in.rdbuf();
  std::remove(out_path.c_str());
  CHECK(nlohmann::json::parse(buf.str())["config"]["profile"] == "fast");
}

TEST_CASE("calibrate emits the coefficient table") {
  const auto r = run("calibrate");
  CHECK(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["coefficients"].size() == 5);
  CHECK(j["coefficients"][0]["c_n"].get<double>() == Catch::Approx(1.0 / 12.0).epsilon(1e-8));
}
