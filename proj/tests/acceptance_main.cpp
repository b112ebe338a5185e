#include <chrono>
#include <cstdio>
#include <iostream>
#include <string>

#include "cbwk/acceptance.hpp"

#ifndef CBWK_SOURCE_DIR
#define CBWK_SOURCE_DIR "."
#endif

int main(int argc, char** argv) {
  std::string config = std::string(CBWK_SOURCE_DIR) + "/configs/acceptance.json";
  int jobs = 1;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--config" && i + 1 < argc) config = argv[++i];
    else if (a == "--jobs" && i + 1 < argc) jobs = std::stoi(argv[++i]);
  }
  const auto start = std::chrono::steady_clock::now();
  try {
    cbwk::AcceptanceOptions opts = cbwk::load_acceptance_options(config);
    opts.jobs = jobs;
    const cbwk::AcceptanceReport rep = cbwk::check_acceptance(cbwk::collect_acceptance_data(opts));
    std::cout << rep.to_text();
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%zu criteria, %s, %.1f s\n", rep.criteria.size(),
                rep.all_passed() ? "all passed" : "some failed", secs);
    return rep.all_passed() ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "acceptance aborted: " << e.what() << '\n';
    return 2;
  }
}
