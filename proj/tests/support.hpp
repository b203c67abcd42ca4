#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace testing_support {

struct Moments {
  double mean = 0.0, var = 0.0, se = 0.0;  // se of the mean
};

Moments moments(const std::vector<double>& v);

std::vector<double> gaussian(size_t n, std::uint64_t seed);
std::vector<double> uniform(size_t n, std::uint64_t seed, double lo, double hi);

// fresh directory under the build tree
std::string temp_dir(const std::string& name);
std::string write_file(const std::string& dir, const std::string& name, const std::string& text);
std::string read_file(const std::string& path);

struct RunResult {
  int status = 0;
  std::string out, err;
};
// runs a shell command, capturing stdout and stderr
RunResult run(const std::string& cmd);

}  // namespace testing_support
