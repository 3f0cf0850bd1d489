// Command-line front end.
//
//   thermoflux curve    --spec FILE [--format csv|json|svg]
//   thermoflux entropy  --spec FILE [--epsilon E] [--mode fractional|integral|both]
//   thermoflux bound    --spec FILE [--epsilon E]
//   thermoflux ratio    --spec FILE --w W [--epsilon E] [--delta D]
//   thermoflux simulate --spec FILE [--epsilon E] [--w W] [--degeneracy G] [--format json|csv]
//   thermoflux verify   [--instances N] [--seed S] [--mode exact|float]
//
// Every subcommand also takes --out FILE and --mode exact|float.
// Exit codes: 0 ok, 1 verify found a violation, 2 malformed input,
// 3 infeasible instance.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace thermoflux {

inline constexpr int kExitViolation = 1;
inline constexpr int kExitMalformed = 2;
inline constexpr int kExitInfeasible = 3;

/// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace thermoflux
