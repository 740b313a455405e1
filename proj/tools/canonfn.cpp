#include <chrono>
#include <iostream>

#include "canonfn/cli.hpp"
#include "canonfn/errors.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  auto start = std::chrono::steady_clock::now();
  canonfn::RunOutput out;
  try {
    out = canonfn::run(canonfn::parse_command(args));
  } catch (const canonfn::UsageError& e) {
    out = {1, std::string("error: UsageError: ") + e.what() + "\n"};
  }
  std::cout << out.report;
  std::cout.flush();
  std::cerr << canonfn::record_str(canonfn::make_record(args, out.report, std::chrono::steady_clock::now() - start));
  return out.exit_code;
}
