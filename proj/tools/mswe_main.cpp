#include <iostream>
#include <string>
#include <vector>

#include "mswe/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return mswe::run_cli(args, std::cout, std::cerr);
}
