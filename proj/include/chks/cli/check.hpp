#pragma once

// Property and invariant battery behind `chks check`.

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace chks::cli {

struct CheckResult {
  bool passed = false;
  std::string detail;
};

struct NamedCheck {
  std::string name;
  std::function<CheckResult()> run;
};

const std::vector<NamedCheck>& check_battery();

// Runs every check, printing one "[PASS] name: detail" or "[FAIL] ..." line.
// `inject` is empty or "beta-sign-flip". Returns 0 when all pass, 2 when any
// check fails and 1 for an unknown injection.
int cmd_check(const std::string& inject, std::ostream& out, std::ostream& err);

}  // namespace chks::cli
