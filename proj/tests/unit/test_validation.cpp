#include "doctest.h"
#include "mnl/validation.hpp"

using namespace mnl;

namespace {

void require_pass(const CheckResult& r) {
  INFO(format_check(r));
  CHECK(r.passed);
}

}  // namespace

TEST_CASE("property checks pass at reduced sizes") {
  require_pass(check_normalization(2000, 1));
  require_pass(check_gradient(200, 2));
  require_pass(check_hessian(100, 500, 3));
  require_pass(check_self_concordance(200, 4));
  require_pass(check_optimizer_exactness(100, 5));
  require_pass(check_projection_kkt(200, 6));
  require_pass(check_adversarial_constructions());
}

TEST_CASE("coverage at reduced size") {
  CoverageSettings s;
  s.runs = 20;
  s.t_rounds = 200;
  require_pass(check_coverage(s));
}

TEST_CASE("report format") {
  const CheckResult r{"name", true, "detail", 1.234};
  CHECK(format_check(r) == "[PASS] name: detail (1.23 s)");
  CHECK(format_check(CheckResult{"x", false, "bad", 0.0}) == "[FAIL] x: bad (0.00 s)");
}
