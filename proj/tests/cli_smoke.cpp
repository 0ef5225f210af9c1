// Exercises the installed binary end to end: exit codes, JSON shape, CSV
// output and determinism. argv[1] is the binary, argv[2] a scratch directory.

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <string>

namespace {

int failures = 0;

void expect(bool ok, const std::string& what) {
  std::printf("%s  %s\n", ok ? "ok  " : "FAIL", what.c_str());
  if (!ok) ++failures;
}

int run(const std::string& cmd) {
  const int rc = std::system(cmd.c_str());
  if (rc == -1) return -1;
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  return std::string(std::istreambuf_iterator<char>(in), {});
}

int count_lines(const std::string& text) {
  int n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::fprintf(stderr, "usage: %s <swipt-opt binary> <scratch dir>\n", argv[0]);
    return 2;
  }
  const std::string bin = std::string("\"") + argv[1] + "\"";
  const std::string dir = argv[2];

  const std::string solve_out = dir + "/solve.json";
  expect(run(bin + " solve --n 2 --theta 0.1 --sigma2-dbm -100 --pt 10 --rate 30 --seed 7 > " +
             solve_out + " 2>/dev/null") == 0,
         "solve exits 0 on a feasible instance");
  const std::string solved = slurp(solve_out);
  expect(solved.find("\"mode\"") != std::string::npos &&
             solved.find("\"p_re_watts\"") != std::string::npos &&
             solved.find("\"powers\"") != std::string::npos,
         "solve prints a JSON solution");

  expect(run(bin + " solve --n 2 --theta 0.1 --sigma2-dbm -70 --pt 10 --rate 1e6 --seed 7 " +
             "> /dev/null 2>&1") == 1,
         "solve exits 1 when the rate requirement is unattainable");

  expect(run(bin + " solve --rate -5 > /dev/null 2>&1") == 3,
         "solve exits 3 on a negative rate");
  expect(run(bin + " solve --frobnicate > /dev/null 2>&1") == 3,
         "solve exits 3 on an unknown flag");
  expect(run(bin + " solve --scheme op9 > /dev/null 2>&1") == 3,
         "solve exits 3 on an unknown scheme");
  expect(run(bin + " --help > /dev/null 2>&1") == 0, "--help exits 0");

  const std::string oracle_out = dir + "/oracle.json";
  expect(run(bin + " oracle --n 2 --theta 0.1 --sigma2-dbm -70 --pt 10 --rate 20 --seed 7 " +
             "--grid 101 > " + oracle_out + " 2>/dev/null") == 0,
         "oracle comparison exits 0");
  const std::string compared = slurp(oracle_out);
  expect(compared.find("\"oracle\"") != std::string::npos &&
             compared.find("\"rel_diff\"") != std::string::npos,
         "oracle comparison reports the grid reference and relative difference");

  const std::string cfg_path = dir + "/sweep.json";
  {
    std::ofstream cfg(cfg_path);
    cfg << R"({"n": 2, "theta": 0.1, "sigma2_dbm": -70.0, "p_t_watts": 10.0,
               "rate_grid": {"normalized": [0.3, 0.6]}, "n_channels": 4, "seed": 3,
               "schemes": ["op1", "otcm"], "workers": 2})";
  }
  const std::string rec1 = dir + "/records1.csv";
  const std::string rec2 = dir + "/records2.csv";
  const std::string summary = dir + "/summary.csv";
  expect(run(bin + " sweep --config " + cfg_path + " --out " + rec1 + " --summary " + summary +
             " > /dev/null 2>&1") == 0,
         "sweep exits 0");
  const std::string records = slurp(rec1);
  expect(records.rfind("scheme,channel_index,rate_req,", 0) == 0, "records CSV has the header");
  expect(count_lines(records) == 1 + 4 * 2 * 2, "one record per channel, rate and scheme");
  const std::string summarized = slurp(summary);
  expect(summarized.rfind("scheme,rate_index,", 0) == 0 && count_lines(summarized) == 1 + 2 * 2,
         "summary CSV has one row per scheme and rate");

  expect(run(bin + " sweep --config " + cfg_path + " --out " + rec2 + " > /dev/null 2>&1") == 0,
         "second sweep exits 0");
  expect(slurp(rec2) == records, "sweeps are byte-identical across runs");

  expect(run(bin + " sweep --config /nonexistent.json --out " + dir + "/x.csv " +
             "> /dev/null 2>&1") == 3,
         "sweep exits 3 on a missing config");
  {
    std::ofstream cfg(dir + "/bad.json");
    cfg << R"({"n": 2, "theta": 0.1, "unknown_key": 1})";
  }
  expect(run(bin + " sweep --config " + dir + "/bad.json --out " + dir + "/x.csv " +
             "> /dev/null 2>&1") == 3,
         "sweep exits 3 on a malformed config");

  if (failures > 0) {
    std::printf("%d smoke check(s) failed\n", failures);
    return 1;
  }
  std::printf("all smoke checks passed\n");
  return 0;
}
