#pragma once

#include <array>
#include <cstdio>
#include <cstdlib>
#include <string>

namespace ctkkt_test {

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout only
};

// Runs a shell command, capturing stdout; stderr passes through.
inline RunResult run_command(const std::string& command) {
  RunResult result;
  FILE* pipe = popen(command.c_str(), "r");
  if (pipe == nullptr) return result;
  std::array<char, 4096> buffer;
  size_t got = 0;
  while ((got = fread(buffer.data(), 1, buffer.size(), pipe)) > 0) {
    result.output.append(buffer.data(), got);
  }
  const int status = pclose(pipe);
  if (WIFEXITED(status)) {
    result.exit_code = WEXITSTATUS(status);
  }
  return result;
}

}  // namespace ctkkt_test
