#include <iostream>

#include "locrom/cli.hpp"

int main(int argc, char** argv) {
  return locrom::run_cli(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
