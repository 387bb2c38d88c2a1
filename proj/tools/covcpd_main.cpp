#include <iostream>
#include <string>
#include <vector>

#include "covcpd/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv, argv + argc);
  return covcpd::cli::run(args, std::cout, std::cerr);
}
