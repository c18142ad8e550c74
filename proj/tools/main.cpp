#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

bool write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  return static_cast<bool>(out);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace tgeom::cli;
  CLI::App app{"Collinearity and parallelism experiments on world-function geometries"};
  app.set_version_flag("--version", std::string(kToolVersion));
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> format;
  app.add_option("command", "subcommand")->required()->check(CLI::IsMember(command_names()));
  app.add_option("-c,--config", config_path, "JSON config file")->required();
  app.add_option("--seed", seed, "override the config seed");
  app.add_option("--out", out, "output path (stdout when omitted)");
  app.add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : config_error;
  }
  const std::string command = app.get_option("command")->as<std::string>();

  tgeom::Json config;
  try {
    config = resolve_config(tgeom::load_config_file(config_path), Overrides{seed, out, format});
  } catch (const tgeom::ConfigError& e) {
    std::cerr << "config error: " << config_path << ": " << e.what() << '\n';
    return config_error;
  }

  const CommandResult result = run_command(command, config);
  if (!result.error.empty()) std::cerr << "error: " << result.error << '\n';
  const auto& output = config.at("output");
  const std::string rendered = render(result.report, output.at("format").get<std::string>());
  if (output.contains("path")) {
    const std::string path = output.at("path").get<std::string>();
    bool ok = write_file(path, rendered);
    for (const auto& [suffix, content] : result.side_files) ok = write_file(path + suffix, content) && ok;
    if (!ok) {
      std::cerr << "error: cannot write output under '" << path << "'\n";
      return evaluation_error;
    }
  } else {
    std::cout << rendered;
  }
  return result.exit_code;
}
