// Reference acceptance run: one line per criterion, nonzero exit on any
// failure.  The seed is pinned to 42 unless overridden on the command line.
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <exception>

#include "twistlab/twistlab.hpp"

int main(int argc, char** argv) {
  std::uint64_t seed = 42;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--seed") == 0 && i + 1 < argc) {
      seed = std::strtoull(argv[++i], nullptr, 10);
    } else if (std::strcmp(argv[i], "--help") == 0) {
      std::printf("usage: twistlab_acceptance [--seed N]\n");
      return 0;
    } else {
      std::fprintf(stderr, "unknown argument '%s'\n", argv[i]);
      return 2;
    }
  }

  try {
    const auto criteria = twistlab::run_acceptance(seed);
    int failed = 0;
    for (const auto& cr : criteria) {
      const bool ok = cr.pass();
      if (!ok) ++failed;
      std::printf("criterion %2d: %-58s %s\n", cr.index, cr.title.c_str(),
                  ok ? "PASS" : "FAIL");
      for (const auto& line : cr.detail) std::printf("    %s\n", line.c_str());
      if (!ok) {
        for (const auto& c : cr.checks) {
          if (c.pass) continue;
          std::printf("    failed: %s  (value %.6g, threshold %.6g)\n", c.name.c_str(), c.value,
                      c.threshold);
        }
      }
    }
    std::printf("%zu/%zu criteria pass (seed %llu)\n", criteria.size() - failed, criteria.size(),
                static_cast<unsigned long long>(seed));
    return failed == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "acceptance run aborted: %s\n", e.what());
    return 2;
  }
}
