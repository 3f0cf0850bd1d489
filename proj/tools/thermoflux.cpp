#include <iostream>
#include <string>
#include <vector>

#include "thermoflux/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return thermoflux::run(args, std::cout, std::cerr);
}
