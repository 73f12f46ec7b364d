#include <iostream>

#include "spat/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return spat::run_cli(args, std::cout, std::cerr);
}
