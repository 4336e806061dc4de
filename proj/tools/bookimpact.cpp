#include "bookimpact/service.hpp"

#include <iostream>

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return bookimpact::run_cli(args, std::cout, std::cerr);
}
