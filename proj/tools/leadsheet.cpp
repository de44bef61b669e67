#include <iostream>
#include <string>
#include <vector>

#include "leadsheet/cli/cli.h"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return leadsheet::cli::run(args, std::cout, std::cerr);
}
