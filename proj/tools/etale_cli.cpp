#include <iostream>
#include <string>
#include <vector>

#include "etale/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  etale::CommandResult r = etale::run_command(args);
  std::cout << r.output;
  if (!r.error.empty()) std::cerr << "etale: " << r.error << (r.error.back() == '\n' ? "" : "\n");
  return r.exit_code;
}
