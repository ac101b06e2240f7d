// pudsim entry point; all logic lives in the library (see pudsim/cli.hpp).
#include <string>
#include <vector>

#include "pudsim/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return pudsim::cli::run(args);
}
