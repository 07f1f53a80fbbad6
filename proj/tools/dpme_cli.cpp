#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "dpme/cli.hpp"

namespace {

int fail(dpme::ErrorCode code, const std::string& detail) {
  std::string flat = detail;
  for (char& ch : flat) {
    if (ch == '\n') ch = ' ';
  }
  std::cerr << "error=" << dpme::error_name(code) << " detail=" << flat << "\n";
  return dpme::exit_code(code);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete porous medium equations on reversible Markov chains"};
  app.footer(dpme::usage());
  std::string command;
  std::string config_path;
  std::string out_path;
  std::vector<std::string> overrides;
  app.add_option("command", command, "command to run")->required();
  app.add_option("--config", config_path, "config file with key = value lines");
  app.add_option("--out", out_path, "output CSV path (default: stdout)");
  app.add_option("--set", overrides, "override a config key (key=value)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(dpme::ErrorCode::ConfigError, e.what());
  }

  try {
    std::string text;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) return fail(dpme::ErrorCode::ConfigError, "cannot read config '" + config_path + "'");
      std::ostringstream ss;
      ss << in.rdbuf();
      text = ss.str();
    }
    const dpme::RunConfig cfg = dpme::RunConfig::parse(command, text, overrides);
    if (out_path.empty()) {
      dpme::run_command(cfg, std::cout);
    } else {
      std::ostringstream buf;
      dpme::run_command(cfg, buf);
      std::ofstream out(out_path);
      if (!out) return fail(dpme::ErrorCode::ConfigError, "cannot write '" + out_path + "'");
      out << buf.str();
    }
  } catch (const dpme::Error& e) {
    return fail(e.code(), e.what());
  }
  return 0;
}
