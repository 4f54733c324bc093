#include <iostream>
#include <string>
#include <vector>

#include "charembed/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return charembed::run_cli(args, std::cout, std::cerr);
}
