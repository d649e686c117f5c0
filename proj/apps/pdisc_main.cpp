// Binary entry point; all the work (and the exit-code contract) lives in
// run_cli so tests can exercise it in-process.

#include <iostream>
#include <string>
#include <vector>

#include "pdisc/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return pdisc::run_cli(args, std::cout, std::cerr);
}
