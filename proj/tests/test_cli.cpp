#include "doctest.h"
#include "cli.hpp"
#include "pbpp/mc_cover.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace pbpp;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string write(const std::string &name, const std::string &text) {
  fs::path dir = fs::temp_directory_path() / "pbpp_cli_test";
  fs::create_directories(dir);
  fs::path p = dir / name;
  std::ofstream(p) << text;
  return p.string();
}

const char *kGrowth = "types X Y\nrule X -> X X : 1\nrule Y -> Y Y : 1\n";

json strip_time(json j) {
  j["stats"].erase("wall_ms");
  return j;
}

} // namespace

TEST_CASE("check-cover exit codes and answers") {
  std::string yes = write("yes.pbpp", std::string(kGrowth) + "init X Y\ntarget X X\n");
  std::string no = write("no.pbpp", std::string(kGrowth) + "init Y\ntarget X X\n");
  Run a = invoke({"check-cover", yes});
  CHECK(a.code == cli::kOk);
  CHECK(a.out.find("answer: true") != std::string::npos);
  Run b = invoke({"check-cover", no, "--format", "json"});
  CHECK(b.code == cli::kOk);
  json j = json::parse(b.out);
  CHECK(j["result"]["answer"] == false);
  CHECK(j["result"]["witness"]["steps"].empty());
  CHECK(j["result"]["witness_replays"] == true);
  CHECK(j["command"] == "check-cover");
  CHECK(j.contains("input_digest"));
}

TEST_CASE("json output is deterministic") {
  std::string f = write("det.pbpp", "types X Y\nrule X -> X Y : 1/2\nrule X -> : 1/2\nrule Y -> Y : 1\n"
                                    "init X X\ntarget Y Y\n");
  for (const char *cmd : {"check-cover", "check-exist", "validate", "simulate"}) {
    CAPTURE(cmd);
    Run a = invoke({cmd, f, "--format", "json"});
    Run b = invoke({cmd, f, "--format", "json"});
    REQUIRE(a.code == cli::kOk);
    CHECK(strip_time(json::parse(a.out)) == strip_time(json::parse(b.out)));
  }
  Run c = invoke({"check-fair", f, "--k", "3", "--format", "json"});
  Run d = invoke({"check-fair", f, "--k", "3", "--format", "json"});
  CHECK(strip_time(json::parse(c.out)) == strip_time(json::parse(d.out)));
}

TEST_CASE("input errors exit 2 with a position") {
  std::string bad = write("bad.pbpp", "types X\nrule X -> X : 1\nrule X -> Q : 1\n");
  Run r = invoke({"check-cover", bad});
  CHECK(r.code == cli::kInputError);
  CHECK(r.err.find("line 3, column 11") != std::string::npos);
  CHECK(invoke({"check-cover", write("nt.pbpp", std::string(kGrowth) + "init X\n")}).code == cli::kInputError);
  CHECK(invoke({"check-cover", "/nonexistent/file"}).code == cli::kInputError);
  CHECK(invoke({"frobnicate"}).code == cli::kInputError);
  CHECK(invoke({"check-fair", bad}).code == cli::kInputError);
}

TEST_CASE("qstates rejects non-unit targets") {
  std::string f = write("q.pbpp", std::string(kGrowth) + "init X\ntarget X X\n");
  Run r = invoke({"qstates", f});
  CHECK(r.code == cli::kInputError);
  CHECK(r.err.find("check-cover") != std::string::npos);
  std::string g = write("q2.pbpp", std::string(kGrowth) + "init X\ntarget X | Y\n");
  Run ok = invoke({"qstates", g, "--format", "json"});
  CHECK(ok.code == cli::kOk);
  CHECK(json::parse(ok.out)["result"]["answer"] == true);
}

TEST_CASE("budget exhaustion exits 3 with unknown") {
  std::string f = write("budget.pbpp", "types X Y Z\nrule X -> X Y : 1/2\nrule X -> Z : 1/2\nrule Y -> : 1\n"
                                       "rule Z -> Z : 1\ninit X\ntarget Y Y Y Y\n");
  Run r = invoke({"check-cover", f, "--nodes", "2", "--format", "json"});
  CHECK(r.code == cli::kUnknown);
  CHECK(json::parse(r.out)["result"]["answer"] == "unknown");
  Run t = invoke({"check-fair", f, "--k", "4", "--game-iters", "1"});
  CHECK(t.code == cli::kUnknown);
}

TEST_CASE("gen-bench emits parseable instances") {
  Run p = invoke({"gen-bench", "--family", "producer", "--params", "2", "--verify", "--format", "json"});
  REQUIRE(p.code == cli::kOk);
  json j = json::parse(p.out);
  CHECK(j["result"]["verify"]["ok"] == true);
  Instance inst = parse_instance(j["result"]["instance"].get<std::string>());
  CHECK_NOTHROW(validate(inst.sys));
  CHECK_FALSE(inst.target.empty());

  Run text = invoke({"gen-bench", "--family", "loop", "--params", "2"});
  REQUIRE(text.code == cli::kOk);
  CHECK_NOTHROW(parse_instance(text.out));

  std::string m = write("m.cm", "controls 3\ncounters 1\nbound 2\nstart 0\nfinal 2\n"
                                "trans 0 inc 1\ntrans 1 zero 2\n");
  Run cm = invoke({"gen-bench", "--family", "cm", "--machine", m, "--verify", "--format", "json"});
  REQUIRE(cm.code == cli::kOk);
  json k = json::parse(cm.out);
  CHECK(k["result"]["verify"]["halts"] == false);
  CHECK(k["result"]["verify"]["ok"] == true);
  std::string gen = write("cm.pbpp", k["result"]["instance"].get<std::string>());
  Run cover = invoke({"check-cover", gen, "--format", "json"});
  REQUIRE(cover.code == cli::kOk);
  CHECK(json::parse(cover.out)["result"]["answer"] == true);

  std::string badm = write("bad.cm", "controls 2\ncounters 1\ntrans 0 jump 1\n");
  Run e = invoke({"gen-bench", "--family", "cm", "--machine", badm});
  CHECK(e.code == cli::kInputError);
  CHECK(e.err.find("line 3, column 9") != std::string::npos);
  CHECK(invoke({"gen-bench", "--family", "tower", "--params", "2"}).code == cli::kInputError);
  CHECK(invoke({"gen-bench", "--family", "producer"}).code == cli::kInputError);
}
