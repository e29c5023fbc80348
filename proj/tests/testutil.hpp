#pragma once

#include <string>

#include "ctkkt/problem.hpp"

namespace ctkkt_test {

inline std::string problem_path(const std::string& name) {
  return std::string(CTKKT_PROBLEM_DIR) + "/" + name;
}

inline ctkkt::LoadResult load_fixture(const std::string& name) {
  return ctkkt::load_problem_file(problem_path(name));
}

}  // namespace ctkkt_test
