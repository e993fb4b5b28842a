#include <iostream>
#include <string>
#include <vector>

#include "textpix_cli/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return textpix::cli::run(args, std::cout, std::cerr);
}
