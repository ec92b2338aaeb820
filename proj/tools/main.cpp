#include <iostream>
#include <string>
#include <vector>

#include "goalnet/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return goalnet::run_cli(args, std::cout, std::cerr);
}
