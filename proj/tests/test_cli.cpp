#include "cohere/commands.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace cohere;
namespace fs = std::filesystem;

namespace {

struct Invocation {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Invocation cli(const std::string& args, const fs::path& scratch) {
  const fs::path out = scratch / "stdout.txt", err = scratch / "stderr.txt";
  const std::string cmd = std::string(COHERE_CLI) + ' ' + args + " >" + out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

// A 5-lap stream that exercises the whole protocol in a few seconds.
std::string short_config(const fs::path& bundle, const fs::path& out) {
  return "bundle=" + bundle.string() + "\nout=" + out.string() +
         "\nseed=5\nlayers=2\nhidden=4\nd=4\nkernel=3\nalpha=0.00001\ne=100\n"
         "learn_laps=2\nsupervise_through_lap=4\neval_lap=5\nsupervisions_per_object=1\nmin_spacing=10\n";
}

fs::path short_bundle(const fs::path& dir) {
  const fs::path b = dir / "bundle";
  if (!fs::exists(b / "manifest.txt")) cmd_generate({"empty-2", b, {1, 32, 5, 20}});
  return b;
}

}  // namespace

TEST_CASE("exit codes: 0 on success, 2 on validation, 1 otherwise") {
  const fs::path dir = test::scratch_dir("cli_codes");
  CHECK(cli("generate --preset empty-2 --out " + (dir / "g").string() + " --size 32 --laps 1 --lap-frames 20", dir).code ==
        0);
  CHECK(cli("generate --preset nope --out " + (dir / "x").string(), dir).code == 2);
  CHECK(cli("frobnicate", dir).code == 2);
  CHECK(cli("generate --out " + (dir / "y").string() + " --size 8", dir).code == 2);
  std::ofstream(dir / "bad.cfg") << "out=" << (dir / "o").string() << "\n";
  const Invocation missing = cli("run " + (dir / "bad.cfg").string(), dir);
  CHECK(missing.code == 2);
  CHECK(missing.err.find("bundle") != std::string::npos);
  CHECK(cli("eval " + (dir / "no_such_run").string(), dir).code == 1);
}

TEST_CASE("missing and unknown keys are listed") {
  try {
    parse_run_config("seed=1\nwobble=2\n");
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("\"bundle\"") != std::string::npos);
    CHECK(msg.find("\"out\"") != std::string::npos);
    CHECK(msg.find("wobble") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_run_config("bundle=a\nout=b\nalpha=-1\n"), ValidationError);
  CHECK_THROWS_AS(parse_run_config("bundle=a\nout=b\nkernel=4\n"), ValidationError);
}

TEST_CASE("config values reach the settings") {
  const RunConfig c = parse_run_config("bundle=b\nout=o\nalpha=0.5\nhidden=3,5\nd=7\nxi=tune\nb=1\nnormalize=0\n", "/base");
  CHECK(c.bundle == fs::path("/base/b"));
  CHECK(c.settings.loss.alpha == 0.5);
  CHECK(c.settings.extractor.hidden == std::vector<int>{3, 5});
  CHECK(c.settings.extractor.d == 7);
  CHECK_FALSE(c.settings.xi.has_value());
  CHECK(c.settings.b == 1);
  CHECK_FALSE(c.settings.loss.normalized);
  CHECK_FALSE(c.settings.extractor.normalize);
}

TEST_CASE("generate is deterministic") {
  const fs::path dir = test::scratch_dir("cli_generate");
  for (const char* name : {"a", "b"}) {
    CHECK(cli(std::string("generate --preset clutter-2 --seed 3 --size 32 --laps 1 --lap-frames 20 --out ") +
                  (dir / name).string(),
              dir)
              .code == 0);
  }
  CHECK(read_bundle(dir / "a") == read_bundle(dir / "b"));
}

TEST_CASE("foa matches the trajectory of a run bit for bit") {
  const fs::path dir = test::scratch_dir("cli_foa");
  const fs::path bundle = short_bundle(dir);
  std::ofstream(dir / "run.cfg") << short_config(bundle, dir / "run") << "rho=0.3\nalpha_b=2\n";
  REQUIRE(cli("run " + (dir / "run.cfg").string(), dir).code == 0);
  const Invocation foa = cli("foa --bundle " + bundle.string() + " --config " + (dir / "run.cfg").string() +
                                 " --out " + (dir / "t.foa").string(),
                             dir);
  REQUIRE(foa.code == 0);
  CHECK(foa.out.find("t.foa") != std::string::npos);
  CHECK(slurp(dir / "t.foa") == slurp(dir / "run" / "trajectory.foa"));
}

TEST_CASE("run artifacts, eval and tune-xi") {
  const fs::path dir = test::scratch_dir("cli_run");
  const fs::path bundle = short_bundle(dir);
  std::ofstream(dir / "run.cfg") << short_config(bundle, dir / "run") << "b=1\n";
  const Invocation run = cli("run " + (dir / "run.cfg").string(), dir);
  REQUIRE(run.code == 0);
  CHECK(run.err.find("refresh disabled") != std::string::npos);
  for (const char* f : {"metrics.csv", "loss.csv", "weights.wgt", "templates.tpl", "trajectory.foa", "config.txt"}) {
    CAPTURE(f);
    CHECK(fs::exists(dir / "run" / f));
    CHECK(run.out.find(f) != std::string::npos);
  }
  CHECK(slurp(dir / "run" / "config.txt") == slurp(dir / "run.cfg"));
  CHECK(slurp(dir / "run" / "metrics.csv").rfind("scope,class,precision,recall,f1\n", 0) == 0);

  // eval at the run's own xi reproduces the run's metrics
  REQUIRE(cli("eval " + (dir / "run").string(), dir).code == 0);
  CHECK(slurp(dir / "run" / "eval_metrics.csv") == slurp(dir / "run" / "metrics.csv"));
  REQUIRE(cli("tune-xi " + (dir / "run").string() + " --lo 0.1 --hi 0.5 --step 0.1", dir).code == 0);
  const std::string table = slurp(dir / "run" / "xi_tuning.csv");
  CHECK(std::count(table.begin(), table.end(), '\n') == 6);  // header and five grid points
}

TEST_CASE("bench records one sample per repeat") {
  const fs::path dir = test::scratch_dir("cli_bench");
  BenchOptions o;
  o.dims = {4};
  o.e = 50;
  o.region_sizes = {20};
  o.repeats = 3;
  const auto cells = run_bench(o);
  REQUIRE(cells.size() == 2);
  for (const auto& c : cells) CHECK(c.samples.size() == 3);
  o.repeats = 2;
  CHECK_THROWS_AS(run_bench(o), ValidationError);

  o.repeats = 3;
  o.pair_cap = 10;
  const auto capped = run_bench(o);
  CHECK(std::any_of(capped.begin(), capped.end(), [](const BenchCell& c) { return c.mode == "exhaustive" && c.skipped; }));

  REQUIRE(cli("bench --d 4 --e 50 --sizes 20 --repeats 3 --out " + (dir / "b.csv").string(), dir).code == 0);
  CHECK(slurp(dir / "b.csv").rfind("mode,d,region_size,mean_s,std_s\n", 0) == 0);
}

TEST_CASE("a region the budget covers times about the same either way") {
  BenchOptions o;
  o.dims = {32};
  o.region_sizes = {100};  // 4950 inside pairs, under e
  o.min_sample_s = 0.05;
  const auto cells = run_bench(o);
  REQUIRE(cells.size() == 2);
  const double ratio = cells[1].median_s / cells[0].median_s;
  CHECK(ratio >= 0.5);
  CHECK(ratio <= 2.0);
}
