#pragma once

// Minimal subprocess driver for exercising the CLI binary end to end.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#ifndef DOCTAGS_CLI_PATH
#define DOCTAGS_CLI_PATH "doctags"
#endif

namespace doctags::testproc {

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

inline std::string shell_quote(const std::string& arg) {
  std::string quoted = "'";
  for (char c : arg) {
    if (c == '\'') quoted += "'\\''";
    else quoted += c;
  }
  quoted += "'";
  return quoted;
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline std::filesystem::path temp_dir() {
  auto dir = std::filesystem::temp_directory_path() / "doctags-tests";
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::filesystem::path write_temp(const std::string& name, const std::string& content) {
  auto path = temp_dir() / name;
  std::ofstream out(path, std::ios::binary);
  out << content;
  return path;
}

inline RunResult run_cli(const std::vector<std::string>& args) {
  static int counter = 0;
  auto out_path = temp_dir() / ("out" + std::to_string(++counter) + ".txt");
  auto err_path = temp_dir() / ("err" + std::to_string(counter) + ".txt");

  std::string command = shell_quote(DOCTAGS_CLI_PATH);
  for (const std::string& arg : args) {
    command += ' ';
    command += shell_quote(arg);
  }
  command += " > " + shell_quote(out_path.string());
  command += " 2> " + shell_quote(err_path.string());

  int status = std::system(command.c_str());
  RunResult result;
  if (status >= 0) {
    result.exit_code = (status >= 256) ? status / 256 : status;  // WEXITSTATUS
  }
  result.out = slurp(out_path);
  result.err = slurp(err_path);
  std::filesystem::remove(out_path);
  std::filesystem::remove(err_path);
  return result;
}

}  // namespace doctags::testproc
