#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

// DHYM_BIN is injected by the build: the full path of the command-line tool.
#ifndef DHYM_BIN
#error "DHYM_BIN must be defined to the path of the dhym binary"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path& work_root() {
  static const fs::path root = [] {
    const fs::path p =
        fs::temp_directory_path() / ("dhym_cli_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
  }();
  return root;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = work_root() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), "missing file: " << p.string());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

fs::path write_input(const std::string& name, const json& doc) {
  const fs::path p = work_root() / name;
  std::ofstream out(p);
  out << doc.dump(2);
  return p;
}

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

RunResult run_cli(const std::string& args, const std::string& env_prefix = "") {
  static int counter = 0;
  const fs::path out = work_root() / ("stdout_" + std::to_string(counter) + ".txt");
  const fs::path err = work_root() / ("stderr_" + std::to_string(counter) + ".txt");
  ++counter;
  std::string cmd = env_prefix;
  if (!cmd.empty()) cmd += " ";
  cmd += std::string(DHYM_BIN) + " " + args + " > " + out.string() + " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("point prints the closed forms for the balanced spectrum") {
  const auto r = run_cli("point --lambda 1,1,1");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "2.356194490"));  // 3 pi / 4
  CHECK(contains(r.out, "2.828427124"));  // 2 sqrt(2)
  CHECK(contains(r.out, "j_operator"));
  CHECK(contains(r.out, "margins"));

  const auto csv = run_cli("point --lambda 1,2,3 --format csv");
  CHECK(csv.code == 0);
  CHECK(contains(csv.out, "theta,"));
  CHECK(contains(csv.out, "radius,"));
}

TEST_CASE("point rejects malformed eigenvalue lists") {
  CHECK(run_cli("point --lambda \"\"").code == 2);
  CHECK(run_cli("point --lambda 1,x,3").code == 2);
  CHECK(run_cli("point").code == 2);  // no data source at all
}

TEST_CASE("point accepts a pencil input file") {
  const auto input = write_input("point_pencil.json",
                                 json{{"omega", {{2.0}}}, {"alpha", {{1.0}}}});
  const auto r = run_cli("point --input " + input.string());
  CHECK(r.code == 0);
  const json doc = json::parse(r.out);
  CHECK(std::abs(doc.at("theta").get<double>() - std::atan(0.5)) < 1e-13);
  CHECK(std::abs(doc.at("lambda")[0].get<double>() - 0.5) < 1e-13);
}

TEST_CASE("charge handles the balanced cubic end to end") {
  const json doc{{"n", 3},
                 {"A", {6.0, 6.0, 6.0, 6.0}},
                 {"subvarieties",
                  json::array({json{{"label", "divisor"}, {"dim", 2}, {"B", {3.0, 3.0, 3.0}}}})}};
  const auto input = write_input("charge_balanced.json", doc);
  const fs::path dir1 = fresh_dir("charge1");
  const auto r = run_cli("charge --input " + input.string() + " --out " + dir1.string());
  CHECK(r.code == 0);

  const json out = json::parse(slurp(dir1 / "charge.json"));
  CHECK(std::abs(out.at("lifted_angle").get<double>() - 2.356194490192345) < 1e-9);
  CHECK(out.at("chern_inequality").at("holds").get<bool>());
  CHECK(std::abs(out.at("z1")[0].get<double>() - 2.0) < 1e-12);
  CHECK(std::abs(out.at("z1")[1].get<double>() - 2.0) < 1e-12);
  CHECK(out.at("bps").at("positive").get<bool>());
  CHECK(out.at("subvarieties")[0].at("not_obstructed").get<bool>());
  CHECK(out.at("subvarieties")[0].contains("slope"));

  const std::string csv = slurp(dir1 / "path.csv");
  CHECK(csv.rfind("t,re_p,im_p,tracked_arg\n", 0) == 0);
  CHECK(contains(slurp(dir1 / "path.svg"), "<svg"));

  // Byte-identical artifacts on a second run.
  const fs::path dir2 = fresh_dir("charge2");
  CHECK(run_cli("charge --input " + input.string() + " --out " + dir2.string()).code == 0);
  CHECK(slurp(dir1 / "charge.json") == slurp(dir2 / "charge.json"));
  CHECK(slurp(dir1 / "path.csv") == slurp(dir2 / "path.csv"));
  CHECK(slurp(dir1 / "path.svg") == slurp(dir2 / "path.svg"));
}

TEST_CASE("charge reports an origin crossing with its location") {
  const auto input =
      write_input("charge_crossing.json", json{{"n", 3}, {"A", {6.0, 2.0, 6.0, 18.0}}});
  const fs::path dir = fresh_dir("charge_crossing");
  const auto r = run_cli("charge --input " + input.string() + " --out " + dir.string());
  CHECK(r.code == 4);
  CHECK(contains(r.err, "t = 1.73"));  // sqrt(3)
}

TEST_CASE("flow converges and writes all artifacts") {
  const json doc{{"n", 1},
                 {"N", 16},
                 {"omega0", {{1.0}}},
                 {"alpha0", {{1.0}}},
                 {"max_steps", 20000},
                 {"u0", json::array({json{{"amp", 0.01}, {"m", {1, 0}}, {"trig", "cos"}}})}};
  const auto input = write_input("flow_quick.json", doc);
  const fs::path dir = fresh_dir("flow_ok");
  const auto r = run_cli("flow --input " + input.string() + " --out " + dir.string());
  CHECK(r.code == 0);

  const json out = json::parse(slurp(dir / "flow.json"));
  CHECK(out.at("converged").get<bool>());
  CHECK(out.at("status").get<std::string>() == "converged");
  CHECK(out.at("cfl_ok").get<bool>());
  CHECK(out.at("final_residual").get<double>() <= 1e-8);
  CHECK(std::abs(out.at("theta_target").get<double>() - 0.7853981633974483) < 1e-12);

  const std::string trace = slurp(dir / "trace.csv");
  CHECK(trace.rfind("step,sup_theta,inf_theta,residual,volume\n", 0) == 0);
  CHECK(fs::file_size(dir / "final_u.bin") == 256 * 8);
  const json sidecar = json::parse(slurp(dir / "final_u.bin.json"));
  CHECK(sidecar.at("shape").get<std::vector<int>>() == std::vector<int>{16, 16});
}

TEST_CASE("flow that runs out of steps still writes outputs and exits 6") {
  const json doc{{"n", 1},
                 {"N", 16},
                 {"omega0", {{1.0}}},
                 {"alpha0", {{1.0}}},
                 {"max_steps", 0},
                 {"u0", json::array({json{{"amp", 0.01}, {"m", {1, 0}}, {"trig", "cos"}}})}};
  const auto input = write_input("flow_stuck.json", doc);
  const fs::path dir = fresh_dir("flow_stuck");
  const auto r = run_cli("flow --input " + input.string() + " --out " + dir.string());
  CHECK(r.code == 6);
  const json out = json::parse(slurp(dir / "flow.json"));
  CHECK(!out.at("converged").get<bool>());
  CHECK(out.at("status").get<std::string>() == "not_converged");
}

TEST_CASE("flow with a wild step reports divergence") {
  const json doc{{"n", 1},
                 {"N", 16},
                 {"omega0", {{1.0}}},
                 {"alpha0", {{1.0}}},
                 {"dt", 1e7},
                 {"max_steps", 50},
                 {"u0", json::array({json{{"amp", 0.1}, {"m", {1, 0}}, {"trig", "cos"}}})}};
  const auto input = write_input("flow_wild.json", doc);
  const fs::path dir = fresh_dir("flow_wild");
  const auto r = run_cli("flow --input " + input.string() + " --out " + dir.string());
  CHECK(r.code == 5);
  CHECK(contains(r.out, "warning: dt exceeds the parabolic stability bound"));
  const json out = json::parse(slurp(dir / "flow.json"));
  CHECK(out.at("status").get<std::string>() == "diverged");
  CHECK(!out.at("cfl_ok").get<bool>());
}

TEST_CASE("flow output does not depend on the worker count") {
  const json doc{{"n", 1},
                 {"N", 16},
                 {"omega0", {{1.0}}},
                 {"alpha0", {{1.0}}},
                 {"max_steps", 20000},
                 {"u0", json::array({json{{"amp", 0.01}, {"m", {1, 0}}, {"trig", "cos"}}})}};
  const auto input = write_input("flow_threads.json", doc);
  const fs::path d1 = fresh_dir("flow_t1");
  const fs::path d3 = fresh_dir("flow_t3");
  CHECK(run_cli("flow --input " + input.string() + " --out " + d1.string(),
                "DHYM_THREADS=1").code == 0);
  CHECK(run_cli("flow --input " + input.string() + " --out " + d3.string(),
                "DHYM_THREADS=3").code == 0);
  CHECK(slurp(d1 / "flow.json") == slurp(d3 / "flow.json"));
  CHECK(slurp(d1 / "trace.csv") == slurp(d3 / "trace.csv"));
  CHECK(slurp(d1 / "final_u.bin") == slurp(d3 / "final_u.bin"));
}

TEST_CASE("syz verifies the phase identity on a line") {
  const json doc{{"n", 1},
                 {"phi", json{{"a", {1.0}}}},
                 {"f",
                  json{{"waves", json::array({json{{"amp", 0.3},
                                                   {"w_two_pi", {1.0}},
                                                   {"phase", 0.0},
                                                   {"trig", "sin"}}})}}},
                 {"grid", 64},
                 {"theta_hat", 0.0}};
  const auto input = write_input("syz_line.json", doc);
  const fs::path dir = fresh_dir("syz_line");
  const auto r = run_cli("syz --input " + input.string() + " --out " + dir.string());
  CHECK(r.code == 0);
  const json out = json::parse(slurp(dir / "syz.json"));
  CHECK(out.at("max_mismatch").get<double>() < 1e-10);
  CHECK(out.at("points").get<int>() == 64);
  CHECK(!out.at("ma_warning").get<bool>());
  const std::string csv = slurp(dir / "points.csv");
  CHECK(csv.rfind("x1,slag_phase,mirror_theta,mismatch,ma_residual\n", 0) == 0);

  // A zero threshold can never be met, so the same sweep exits 1.
  CHECK(run_cli("syz --input " + input.string() + " --out " + dir.string() + " --tol 0").code ==
        1);
}

TEST_CASE("syz flags a curved base but keeps the identity") {
  const json doc{{"n", 2},
                 {"phi", json{{"a", {3.0, 0.5}}}},
                 {"f",
                  json{{"waves", json::array({json{{"amp", 0.05},
                                                   {"w_two_pi", {1.0, 1.0}},
                                                   {"phase", 0.0},
                                                   {"trig", "cos"}}})}}},
                 {"grid", 12},
                 {"theta_hat", 0.4}};
  const auto input = write_input("syz_curved.json", doc);
  const fs::path dir = fresh_dir("syz_curved");
  const auto r = run_cli("syz --input " + input.string() + " --out " + dir.string());
  CHECK(r.code == 0);
  CHECK(contains(r.out, "warning: Hessian determinant deviates from 1"));
  const json out = json::parse(slurp(dir / "syz.json"));
  CHECK(out.at("ma_warning").get<bool>());
  CHECK(out.at("ma_residual").get<double>() == 0.5);  // |3 * 0.5 - 1|
  CHECK(out.at("max_mismatch").get<double>() < 1e-10);
  CHECK(contains(slurp(dir / "mismatch.svg"), "<svg"));
}

TEST_CASE("syz rejects a non-convex base with a domain error") {
  const json doc{{"n", 1}, {"phi", json{{"a", {-1.0}}}}, {"grid", 4}};
  const auto input = write_input("syz_concave.json", doc);
  const fs::path dir = fresh_dir("syz_concave");
  const auto r = run_cli("syz --input " + input.string() + " --out " + dir.string());
  CHECK(r.code == 3);
  CHECK(contains(r.err, "error:"));
}

TEST_CASE("selftest is deterministic and green") {
  const auto a = run_cli("selftest");
  const auto b = run_cli("selftest");
  CHECK(a.code == 0);
  CHECK(b.code == 0);
  CHECK(a.out == b.out);
  CHECK(contains(a.out, "checks passed"));
  CHECK(!contains(a.out, "FAIL"));
  CHECK(run_cli("selftest --seed 7").code == 0);
}

TEST_CASE("bad invocations exit with the parse code") {
  CHECK(run_cli("frobnicate").code == 2);
  CHECK(run_cli("charge").code == 2);  // --input is required
  CHECK(run_cli("charge --input /nonexistent/input.json").code == 2);

  const fs::path broken = work_root() / "broken.json";
  std::ofstream(broken) << "{ not json";
  CHECK(run_cli("charge --input " + broken.string()).code == 2);

  const auto bad_dim = write_input("charge_baddim.json", json{{"n", 9}, {"A", json::array()}});
  CHECK(run_cli("charge --input " + bad_dim.string()).code == 3);  // domain validation
}
