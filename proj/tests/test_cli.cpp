#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

fs::path scratch_dir() {
  static const fs::path dir = [] {
    fs::path p = fs::temp_directory_path() /
                 ("rdsp_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

CliResult cli(const std::string& args, const std::string& env = "") {
  static int counter = 0;
  const fs::path out = scratch_dir() / ("stdout" + std::to_string(counter));
  const fs::path err = scratch_dir() / ("stderr" + std::to_string(counter));
  ++counter;
  const std::string cmd = env + (env.empty() ? "" : " ") + RDSP_CLI_BIN + " " +
                          args + " >" + out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  CliResult r;
  if (status != -1 && WIFEXITED(status)) r.code = WEXITSTATUS(status);
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

int count_lines(const std::string& text) {
  int n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

}  // namespace

TEST_CASE("usage errors exit with 1") {
  CHECK(cli("").code == 1);
  CHECK(cli("frobnicate").code == 1);

  const CliResult bogus = cli("run --builtin-campus --protocol carrier-pigeon");
  CHECK(bogus.code == 1);
  CHECK(bogus.err.find("--protocol") != std::string::npos);

  CHECK(cli("run --protocol rdsp").code == 1);  // no scenario picked
  CHECK(cli("run --builtin-campus --builtin-twobranch").code == 1);
  CHECK(cli("compare --builtin-campus --seeds 5..2").code == 1);
  CHECK(cli("compare --builtin-campus --seeds x..y").code == 1);
  CHECK(cli("--help").code == 0);
  CHECK(cli("run --help").code == 0);
}

TEST_CASE("a missing scenario file is a validation failure") {
  const CliResult r = cli("run /no/such/place.scn --protocol rdsp");
  CHECK(r.code == 2);
  CHECK(r.err.find("file not found") != std::string::npos);
  CHECK(r.err.find("/no/such/place.scn") != std::string::npos);
}

TEST_CASE("run writes a trace and a metrics csv") {
  const fs::path dir = scratch_dir() / "run1";
  const std::string flags =
      " --duration-s 120 --press-window-s 100 --request-count 20";
  const CliResult r = cli("run --builtin-chain 3 --protocol rdsp --seed 1 --out " +
                          dir.string() + flags);
  REQUIRE(r.code == 0);
  CHECK(r.out.find("20 presses") != std::string::npos);

  const std::string trace = slurp(dir / "trace.log");
  REQUIRE(!trace.empty());
  // time<TAB>node<TAB>action<TAB>detail with six decimals on the time
  const std::string first = trace.substr(0, trace.find('\n'));
  REQUIRE(first.find('\t') != std::string::npos);
  CHECK(first.find('.') + 7 == first.find('\t'));  // "%.6f" time field
  CHECK(std::count(first.begin(), first.end(), '\t') == 3);
  CHECK(trace.find("\tpress\t") != std::string::npos);
  CHECK(trace.find("\talarm\t") != std::string::npos);

  const std::string csv = slurp(dir / "run.csv");
  CHECK(csv.rfind("protocol,path,metric,mean,stddev,repeats\n", 0) == 0);
  CHECK(csv.find("rdsp,chain,delivery_ratio,") != std::string::npos);
  CHECK(count_lines(csv) == 8);  // header plus one row per metric

  SECTION("byte-identical on repeat invocations") {
    const fs::path dir2 = scratch_dir() / "run2";
    const CliResult again = cli(
        "run --builtin-chain 3 --protocol rdsp --seed 1 --out " + dir2.string() +
        flags);
    REQUIRE(again.code == 0);
    CHECK(slurp(dir2 / "trace.log") == trace);
    CHECK(slurp(dir2 / "run.csv") == csv);
  }

  SECTION("another seed diverges") {
    const fs::path dir3 = scratch_dir() / "run3";
    const CliResult other = cli(
        "run --builtin-chain 3 --protocol rdsp --seed 2 --out " + dir3.string() +
        flags);
    REQUIRE(other.code == 0);
    CHECK(slurp(dir3 / "trace.log") != trace);
  }
}

TEST_CASE("output directory honors RDSP_OUT_DIR") {
  const fs::path dir = scratch_dir() / "envout";
  const CliResult r =
      cli("run --builtin-chain 1 --duration-s 30 --press-window-s 20 "
          "--request-count 2",
          "RDSP_OUT_DIR=" + dir.string());
  REQUIRE(r.code == 0);
  CHECK(fs::exists(dir / "trace.log"));
  CHECK(fs::exists(dir / "run.csv"));
}

TEST_CASE("unwritable output is a runtime failure") {
  const CliResult r =
      cli("run --builtin-chain 1 --duration-s 30 --press-window-s 20 "
          "--request-count 2 --out /dev/null/holes");
  CHECK(r.code == 3);
  CHECK(!r.err.empty());
}

TEST_CASE("compare produces the aggregated table") {
  const fs::path dir = scratch_dir() / "cmp1";
  const CliResult r = cli("compare --builtin-twobranch --seeds 1..2 --out " +
                          dir.string());
  REQUIRE(r.code == 0);

  const std::string csv = slurp(dir / "comparison.csv");
  CHECK(csv.rfind("protocol,path,metric,mean,stddev,repeats\n", 0) == 0);
  CHECK(count_lines(csv) == 1 + 2 * 2 * 7);  // protocols x paths x metrics
  CHECK(csv.find("rdsp,short,end_to_end_delay_s,") != std::string::npos);
  CHECK(csv.find("uf,long,overhead_bytes,") != std::string::npos);

  const std::string summary = slurp(dir / "summary.txt");
  CHECK(summary.find("end-to-end delay") != std::string::npos);
  CHECK(summary.find("delivery ratio") != std::string::npos);
  CHECK(r.out.find("end-to-end delay") != std::string::npos);

  SECTION("csv is stable across invocations") {
    const fs::path dir2 = scratch_dir() / "cmp2";
    const CliResult again = cli("compare --builtin-twobranch --seeds 1..2 --out " +
                                dir2.string());
    REQUIRE(again.code == 0);
    CHECK(slurp(dir2 / "comparison.csv") == csv);
  }
}

TEST_CASE("single-seed comparisons are flagged") {
  const fs::path dir = scratch_dir() / "cmp_single";
  const CliResult r =
      cli("compare --builtin-twobranch --seeds 3 --out " + dir.string());
  REQUIRE(r.code == 0);
  CHECK(r.out.find("single repeat") != std::string::npos);
  const std::string csv = slurp(dir / "comparison.csv");
  CHECK(csv.find(",1\n") != std::string::npos);  // repeats column
}

TEST_CASE("trace-demo narrates the two-branch walkthrough") {
  const CliResult r = cli("trace-demo");
  REQUIRE(r.code == 0);
  CHECK(r.out.find("a1=3 a2=2 a3=1") != std::string::npos);
  CHECK(r.out.find("b1=8") != std::string::npos);
  CHECK(r.out.find("b8=1") != std::string::npos);
  CHECK(r.out.find("request route: C,a1,a2,a3,S") != std::string::npos);
  CHECK(r.out.find("ack route: S,a3,a2,a1,C") != std::string::npos);
}

TEST_CASE("exported scenarios load back through run") {
  const fs::path file = scratch_dir() / "campus.scn";
  const CliResult exported =
      cli("export-scenario --builtin-campus " + file.string());
  REQUIRE(exported.code == 0);
  const std::string text = slurp(file);
  CHECK(text.find("[radio]") != std::string::npos);
  CHECK(text.find("proc_jitter_s") != std::string::npos);

  const fs::path dir = scratch_dir() / "reload";
  const CliResult r = cli("run " + file.string() +
                          " --protocol uf --path path-3 --seed 2 --out " +
                          dir.string() +
                          " --duration-s 60 --press-window-s 40 "
                          "--request-count 8");
  REQUIRE(r.code == 0);
  CHECK(slurp(dir / "run.csv").find("uf,path-3,") != std::string::npos);
}
