// Acceptance run: one PASS/FAIL line per criterion; nonzero exit if any fails.

#include <tsdae/selftest.hpp>

#include <sys/wait.h>

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <string>

namespace {

tsdae::selftest::CriterionResult cli_selftest() {
  tsdae::selftest::CriterionResult r;
  r.id = 10;
  r.name = "command-line selftest exits 0 within 60 s";
  const auto start = std::chrono::steady_clock::now();
  const std::string cmd = std::string("\"") + TSDAE_CLI + "\" selftest > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.passed = code == 0 && r.seconds < 60.0;
  r.detail = "exit code " + std::to_string(code) + ", wall time " + tsdae::selftest::detail::sci(r.seconds) + " s";
  return r;
}

}  // namespace

int main() {
  auto results = tsdae::selftest::run(tsdae::selftest::default_seed);
  results.push_back(cli_selftest());
  bool ok = true;
  for (const auto& r : results) {
    std::cout << tsdae::selftest::format_line(r) << "\n";
    ok = ok && r.passed;
  }
  std::cout << (ok ? "all acceptance criteria passed" : "acceptance FAILED") << std::endl;
  return ok ? 0 : 1;
}
