#include <iostream>

#include "labornet_cli/cli.hpp"

int main(int argc, char** argv) {
  return labornet::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
