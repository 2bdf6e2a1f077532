#include <iostream>
#include <string>
#include <vector>

#include "kpcaig/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv, argv + argc);
  return kpcaig::cli::run(args, std::cout, std::cerr);
}
