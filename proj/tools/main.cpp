#include <string>
#include <vector>

#include "claimmatch/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return claimmatch::run_cli(args);
}
