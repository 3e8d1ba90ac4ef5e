#include <cstdio>
#include <exception>

#include "checks.hpp"

int main(int argc, char** argv) {
  try {
    int failed = 0;
    for (const auto& r : hartree::checks::run_suite(argc > 1 ? argv[1] : "all")) {
      std::printf("criterion %2d %-28s %s  %s\n", r.criterion, r.name.c_str(), r.pass ? "PASS" : "FAIL",
                  r.detail.c_str());
      std::fflush(stdout);
      failed += !r.pass;
    }
    std::printf("%d criteria failed\n", failed);
    return failed ? 1 : 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "acceptance aborted: %s\n", e.what());
    return 2;
  }
}
