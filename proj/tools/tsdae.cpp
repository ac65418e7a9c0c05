// tsdae: analyze, decouple and solve linear time-varying index-1 dynamic-algebraic
// equations on discrete time scales.
//
//   tsdae <command> <file> [--out PATH] [--format json|csv|text] [--tol.NAME=V] [--seed N]
//   tsdae selftest [--seed N] [--format json|text]

#include <tsdae/commands.hpp>
#include <tsdae/problem.hpp>
#include <tsdae/selftest.hpp>

#if __has_include(<CLI/CLI.hpp>)
#include <CLI/CLI.hpp>
#else
#include <CLI11.hpp>
#endif

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

namespace {

struct Options {
  std::string file;
  std::string out;
  std::string format = "json";
  std::uint64_t seed = tsdae::selftest::default_seed;
  std::map<std::string, std::optional<double>> tol{
      {"rank", std::nullopt}, {"residual", std::nullopt}, {"invariance", std::nullopt}, {"step", std::nullopt}};
};

int emit(const std::string& text, const Options& opt) {
  if (opt.out.empty()) {
    std::cout << text;
    return 0;
  }
  std::ofstream f(opt.out, std::ios::binary);
  if (!f || !(f << text)) {
    std::cerr << "tsdae: cannot write " << opt.out << "\n";
    return tsdae::InputError;
  }
  return 0;
}

int run_problem_command(const std::string& command, const Options& opt) {
  using namespace tsdae;
  CommandResult res;
  try {
    ProblemSpec spec = load_problem(opt.file);
    for (const auto& [name, value] : opt.tol) {
      if (value) spec.tolerances.set(name, *value);
    }
    if (command == "analyze") res = analyze(spec);
    else if (command == "decouple") res = decouple(spec);
    else if (command == "solve") res = solve_command(spec);
    else res = verify(spec, opt.seed);
  } catch (const Error& e) {
    std::cerr << "tsdae: " << e.what() << "\n";
    res.report = error_json(e);
    res.exit_code = exit_code_for(e.code());
    res.csv.clear();
  }
  std::string text;
  if (opt.format == "csv") {
    if (res.exit_code == Success && res.csv.empty()) {
      std::cerr << "tsdae: --format csv is only available for decouple and solve\n";
      return InputError;
    }
    text = res.csv;
  } else if (opt.format == "text") {
    text = render_text(res.report);
  } else {
    text = wrap_report(res.report, command, opt.file).dump(2) + "\n";
  }
  const int io = emit(text, opt);
  return io != 0 ? io : res.exit_code;
}

int run_selftest(const Options& opt) {
  using namespace tsdae;
  const auto results = selftest::run(opt.seed);
  bool ok = true;
  for (const auto& r : results) ok = ok && r.passed;
  std::string text;
  if (opt.format == "json") {
    Json list = Json::array();
    for (const auto& r : results) {
      list.push_back({{"criterion", r.id}, {"name", r.name}, {"passed", r.passed}, {"detail", r.detail},
                      {"seconds", r.seconds}});
    }
    Json rep{{"command", "selftest"}, {"seed", opt.seed}, {"passed", ok}, {"criteria", std::move(list)}};
    text = wrap_report(std::move(rep), "selftest", "").dump(2) + "\n";
  } else {
    for (const auto& r : results) text += selftest::format_line(r) + "\n";
    text += ok ? "selftest passed\n" : "selftest FAILED\n";
  }
  const int io = emit(text, opt);
  return io != 0 ? io : (ok ? Success : ValidationFailure);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Analysis, decoupling and solution of linear index-1 dynamic-algebraic equations on discrete time scales"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub, bool with_file) {
    if (with_file) sub->add_option("file", opt.file, "problem file (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "write the output to PATH instead of stdout");
    sub->add_option("--seed", opt.seed, "seed for randomized checks");
    sub->add_option("--format", opt.format, "output format")
        ->check(CLI::IsMember({"json", "csv", "text"}));
    if (with_file) {
      for (auto& [name, value] : opt.tol) {
        sub->add_option("--tol." + name, value, "override the " + name + " tolerance")
            ->check(CLI::PositiveNumber);
      }
    }
  };

  const char* commands[][2] = {
      {"analyze", "ranks, index, identity residuals and hypothesis warnings"},
      {"decouple", "per-point coefficients of the decoupled system"},
      {"solve", "solve from the initial data; csv gives the trajectory"},
      {"verify", "full property suite; exits 1 if any check fails"},
  };
  for (const auto& [name, help] : commands) add_common(app.add_subcommand(name, help), true);
  CLI::App* selftest_cmd = app.add_subcommand("selftest", "run the built-in acceptance checks");
  add_common(selftest_cmd, false);
  selftest_cmd->callback([&] { opt.format = opt.format == "csv" ? "text" : opt.format; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : tsdae::InputError;
  }

  CLI::App* chosen = app.get_subcommands().front();
  const std::string command = chosen->get_name();
  if (command == "selftest") {
    if (chosen->count("--format") == 0) opt.format = "text";
    return run_selftest(opt);
  }
  return run_problem_command(command, opt);
}
