// The acceptance suite: every verification criterion runs once at its stated
// tolerance and prints one pass/fail line. The heavy intermediates (strip
// solves, dispersion sweeps at eps = 1/4, 1/8, 1/16) are shared, so the whole
// suite runs as a single case.

#include <iostream>

#include "doctest.h"
#include "stripgap/acceptance.hpp"

TEST_CASE("acceptance criteria") {
  stripgap::AcceptanceOptions opts;
  opts.threads = 0;  // hardware
  auto results = stripgap::run_acceptance(opts, std::cout);
  REQUIRE(results.size() == 10);
  for (const auto& r : results) {
    CAPTURE(r.id);
    CAPTURE(r.name);
    CAPTURE(r.detail);
    CHECK(r.pass);
  }
}
