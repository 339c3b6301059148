#include <iostream>
#include <string>
#include <vector>

#include "s2r/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return s2r::run_cli(args, std::cout, std::cerr);
}
