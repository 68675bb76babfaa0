#pragma once
// Named verification checks over the full library, one report per run, plus
// the batch command-line driver: configuration with flag > config-file >
// default precedence, fixed output order, JSON or human-readable reports,
// and contracted exit codes (0 pass, 2 any fail, 3 inconclusive without
// fail, 64 usage error).

#include <iosfwd>
#include <string>
#include <vector>

#include "locrel/intrep.hpp"
#include "locrel/normrel.hpp"

namespace locrel {

// Alternating-sum concentration on the congruence locus: for every k in a
// transversal of K_H modulo the level-2 congruence subgroup and every
// exponent tuple |a_i| <= 2, birch_sum(pi^a k) equals
// (-1)^n ell^{n(n+1)(n+2)/6} exactly when a = 0 and k lies on the locus,
// and vanishes otherwise.
CheckReport birch_check(int ell, int n);

// Transform suite: algebra homomorphism on `pairs` seeded random pairs,
// involution compatibility on seeded samples, and the inverse transform
// round trip on all basis labels with entries bounded by `bound`.
CheckReport satake_check(int ell, int n, unsigned long seed, long pairs, long bound);

// The distinguished element's transform equals prod (1 - A_i B_j T r^{-1}).
CheckReport ell_op_check(int ell, int n);

// The inverted distinguished element's transform, rewritten in the inverse
// T-variable, equals prod (1 - A_i^{-1} B_j^{-1} X r^{-1}) with X the
// T-slot; also asserts the rewrite is total (no positive T-degrees before
// substitution).
CheckReport euler_factor_check(int ell, int n);

// Run configuration for the command-line driver.
struct RunConfig {
  int n = 1;
  int ell = 2;
  long prec = -1;       // -1: derived from (n, t)
  int t_lo = 0;
  int t_hi = 1;
  long cutoff = 6;      // truncation degree for the zeta-functional check
  long budget_m = -1;   // solve-cell budget; -1: engine default
  long budget_card = -1;  // transversal-candidate budget; -1: engine default
  unsigned long seed = 2024;
  bool json = false;
  bool timings = true;  // false pins "seconds": 0 in JSON output
};

// The fixed check-name order used for output regardless of selection.
const std::vector<std::string>& check_names();

// Run one named check (or "all") under the configuration; reports are
// appended in the fixed order.  Throws std::invalid_argument for an unknown
// name.
std::vector<CheckReport> run_checks(const std::string& name, const RunConfig& cfg);

// Command-line driver (testable entry point).  Returns the contracted exit
// code and streams reports as they are produced.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace locrel
