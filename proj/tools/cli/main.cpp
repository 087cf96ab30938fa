#include <cstdlib>
#include <iostream>

#include "commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return hubspoke::cli::run(args, std::cout, std::cerr,
                            [](const char* name) { return std::getenv(name); });
}
