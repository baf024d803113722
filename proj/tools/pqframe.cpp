// pqframe run FILE | pqframe sweep FILE
//
// Exit codes: 0 all passed, 1 some check failed, 2 usage or schema error,
// 3 every check was inconclusive.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "pqframe/pqframe.hpp"

namespace {

bool write_atomically(const std::string& path, const std::string& body) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) return false;
    out << body;
    if (!out) return false;
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  return !ec;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frame bounds and theorem checks for measures on finite abelian groups"};
  app.require_subcommand(1);

  std::string file;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string format;
  bool quiet = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("scenario", file, "scenario JSON file")->required();
    cmd->add_option("--out", out, "write the report to FILE instead of stdout");
    cmd->add_option("--seed", seed, "override the scenario seed");
    cmd->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    cmd->add_flag("--quiet", quiet, "suppress the summary line on stderr");
  };
  auto* run = app.add_subcommand("run", "execute the scenario tasks");
  auto* sweep = app.add_subcommand("sweep", "execute a sweep scenario and emit its table");
  add_common(run);
  add_common(sweep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  const bool is_sweep = sweep->parsed();
  if (format.empty()) format = is_sweep ? "csv" : "json";

  try {
    auto sc = pqframe::Scenario::load(file);
    if (seed) sc.override_seed(*seed);
    if (is_sweep) {
      if (!sc.has_sweep()) throw pqframe::ScenarioError("task.type", "sweep command needs a task of type \"sweep\"");
    }
    const auto result = sc.run();
    const std::string body = format == "csv" ? result.csv : result.document.dump(2) + "\n";
    if (out.empty()) {
      std::cout << body;
    } else if (!write_atomically(out, body)) {
      std::cerr << "error: cannot write " << out << "\n";
      return 2;
    }
    if (!quiet) {
      const char* label = result.exit_code == 0 ? "passed" : result.exit_code == 1 ? "failed" : "inconclusive";
      std::cerr << sc.name() << ": " << label << "\n";
    }
    return result.exit_code;
  } catch (const pqframe::ScenarioError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
