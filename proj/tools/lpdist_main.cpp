#include <iostream>
#include <string>
#include <vector>

#include "lpdist/cli.hpp"
#include "lpdist/errors.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    const lpdist::RunConfig cfg = lpdist::parse_config(args);
    return lpdist::run_command(cfg);
  } catch (const lpdist::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
