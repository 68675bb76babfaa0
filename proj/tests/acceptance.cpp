// Acceptance harness: runs the thirteen gate criteria and prints one
// PASS/FAIL line for each.  Exit code 0 only if every line is PASS.
//
// Criterion 2 is expected to FAIL: the depth-raising trace identity it
// asks to verify is false at depth zero (a reproducible counterexample is
// printed, and the unit suite pins the same witness).  The depth >= 1
// portion of its grid passes completely.  See README for the analysis.

#include <chrono>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "locrel/checks.hpp"
#include "locrel/cosetfun.hpp"
#include "locrel/normrel.hpp"

using namespace locrel;

namespace {

constexpr unsigned long kSeed = 20260815;

using Clock = std::chrono::steady_clock;

double secs_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt_secs(double s) {
  std::ostringstream os;
  os.precision(1);
  os << std::fixed << s << "s";
  return os.str();
}

struct Outcome {
  bool pass = true;
  std::string detail;

  void note(const std::string& s) {
    if (!detail.empty()) detail += "; ";
    detail += s;
  }
  void fail(const std::string& s) {
    pass = false;
    note(s);
  }
};

using Transcript = std::vector<CheckReport>;

// Records the report, folds its status into the outcome, and enforces an
// optional per-cell wall-clock cap (cap <= 0 means uncapped).
void absorb(Outcome& o, Transcript& tr, const CheckReport& r, double cap = 0,
            bool budget_ok = false) {
  tr.push_back(r);
  std::string cell = r.check;
  for (const auto& [k, v] : r.params) cell += " " + k + "=" + v;
  if (r.status == "pass") {
    // fine
  } else if (r.status == "inconclusive-budget" && budget_ok) {
    o.note("INCONCLUSIVE on budget (acceptable, reported): " + cell + " [" + r.witness +
           "]");
  } else {
    o.fail(cell + ": " + r.status + " [" + r.witness + "]");
  }
  if (cap > 0 && r.seconds > cap) {
    o.fail(cell + " took " + fmt_secs(r.seconds) + " > cap " + fmt_secs(cap));
  }
}

Outcome criterion1(Transcript& tr) {
  Outcome o;
  absorb(o, tr, coset_trace_check(kSeed, 100), 120.0);
  if (o.pass) o.note("100 randomized nested-level instances, exact trace equality");
  return o;
}

Outcome criterion2(Transcript& tr) {
  Outcome o;
  int depth0_fails = 0, deeper_passes = 0;
  for (int n : {1, 2}) {
    for (int ell : {2, 3}) {
      CosetEngine eng(ell, n);
      for (int t = 0; t <= 2; ++t) {
        CheckReport r = wild_check(ell, n, t, eng);
        tr.push_back(r);
        double cap = n == 1 ? 5.0 : 600.0;
        if (r.seconds > cap) {
          o.fail("wild n=" + std::to_string(n) + " ell=" + std::to_string(ell) +
                 " t=" + std::to_string(t) + " took " + fmt_secs(r.seconds));
        }
        if (t == 0) {
          if (r.status == "fail") {
            ++depth0_fails;
          } else {
            o.fail("depth-0 cell unexpectedly " + r.status);
          }
        } else {
          if (r.status == "pass") {
            ++deeper_passes;
          } else {
            o.fail("n=" + std::to_string(n) + " ell=" + std::to_string(ell) +
                   " t=" + std::to_string(t) + ": " + r.status + " [" + r.witness + "]");
          }
        }
      }
    }
  }
  // The criterion demands a pass at every grid point including depth 0,
  // where the identity is genuinely false; report that honestly.
  if (depth0_fails > 0) {
    o.pass = false;
    o.note(std::to_string(depth0_fails) +
           " depth-0 cells fail as the identity itself is false at depth 0 "
           "(e.g. n=1: one side 0, other side 1 at the point [w | w,0;0,1 | w]); " +
           std::to_string(deeper_passes) +
           "/8 depth>=1 cells pass with full orbit coverage; see README");
  }
  return o;
}

Outcome criterion3(Transcript& tr) {
  Outcome o;
  for (int n : {1, 2}) {
    for (int ell : {2, 3}) {
      CosetEngine eng(ell, n);
      for (int t = 0; t <= 2; ++t) absorb(o, tr, stab_factor_check(ell, n, t, eng));
    }
  }
  if (o.pass) o.note("both stabilizer factors equal 1 on the full (n, ell, t) grid");
  return o;
}

Outcome criterion4(Transcript& tr) {
  Outcome o;
  absorb(o, tr, birch_check(2, 1), 10.0);
  absorb(o, tr, birch_check(3, 1), 10.0);
  absorb(o, tr, birch_check(2, 2), 900.0);
  absorb(o, tr, birch_check(3, 2));
  if (o.pass) o.note("signed ell-power exactly on the locus, 0 elsewhere, all grids");
  return o;
}

Outcome criterion5(Transcript& tr) {
  Outcome o;
  auto t0 = Clock::now();
  absorb(o, tr, satake_check(2, 1, kSeed, 20, 3));
  absorb(o, tr, satake_check(3, 1, kSeed, 20, 3));
  absorb(o, tr, satake_check(2, 2, kSeed, 20, 3));
  double total = secs_since(t0);
  if (total > 300.0) o.fail("suite took " + fmt_secs(total) + " > 5 min");
  if (o.pass)
    o.note("homomorphism, involution compatibility, and full bounded round trip");
  return o;
}

Outcome criterion6(Transcript& tr) {
  Outcome o;
  for (int n : {1, 2}) {
    for (int ell : {2, 3}) absorb(o, tr, ell_op_check(ell, n));
  }
  if (o.pass) o.note("transform equals the displayed product exactly, n in {1,2}");
  return o;
}

Outcome criterion7(Transcript& tr) {
  Outcome o;
  for (int n : {1, 2}) {
    CosetEngine eng(2, n);
    absorb(o, tr, zeta_functional_check(2, n, eng));
  }
  if (o.pass)
    o.note("symbolic functional identity plus degree-6 truncation cross-check");
  return o;
}

Outcome criterion8(Transcript& tr) {
  Outcome o;
  for (int n : {1, 2}) {
    for (int ell : {2, 3}) {
      CosetEngine eng(ell, n);
      absorb(o, tr, tame_integrality_check(ell, n, eng));
    }
  }
  if (o.pass) o.note("all coefficients integral and trace identity holds, full grid");
  return o;
}

Outcome criterion9(Transcript& tr) {
  Outcome o;
  {
    CosetEngine eng2(2, 1);
    absorb(o, tr, tame_main_check(2, 1, eng2), 120.0);
    CosetEngine eng3(3, 1);
    absorb(o, tr, tame_main_check(3, 1, eng3), 120.0);
  }
  {
    CosetEngine eng(2, 2);
    absorb(o, tr, tame_main_check(2, 2, eng), 3600.0, /*budget_ok=*/true);
  }
  if (o.pass && o.detail.empty()) o.note("quotient functions agree at every cover point");
  return o;
}

Outcome criterion10(Transcript& tr) {
  Outcome o;
  for (int n : {1, 2}) {
    for (int ell : {2, 3}) absorb(o, tr, euler_factor_check(ell, n));
  }
  if (o.pass) o.note("reciprocal-parameter product matches the rewritten transform");
  return o;
}

Outcome criterion11(Transcript& tr) {
  Outcome o;
  for (int n : {1, 2, 3}) absorb(o, tr, branching_check(2, n, 4, kSeed));
  if (o.pass)
    o.note("multiplicity 1 iff interlacing, on every pair with entries in [0,4], "
           "three independent routes");
  return o;
}

Outcome criterion12(Transcript& tr) {
  Outcome o;
  absorb(o, tr, lattice_grid_check(2, 3));
  absorb(o, tr, lattice_grid_check(3, 3));
  if (o.pass)
    o.note("integrality on all antidominant cells and the documented negative "
           "control shows valuation -1");
  return o;
}

std::vector<Outcome> run_batch(Transcript& tr) {
  std::vector<Outcome> out;
  out.push_back(criterion1(tr));
  out.push_back(criterion2(tr));
  out.push_back(criterion3(tr));
  out.push_back(criterion4(tr));
  out.push_back(criterion5(tr));
  out.push_back(criterion6(tr));
  out.push_back(criterion7(tr));
  out.push_back(criterion8(tr));
  out.push_back(criterion9(tr));
  out.push_back(criterion10(tr));
  out.push_back(criterion11(tr));
  out.push_back(criterion12(tr));
  return out;
}

std::string transcript_json(const Transcript& tr) {
  std::string s;
  for (const auto& r : tr) s += report_json_line(r, /*with_timing=*/false) + "\n";
  return s;
}

}  // namespace

int main() {
  Transcript first;
  std::vector<Outcome> results = run_batch(first);

  // Criterion 13: the whole batch re-run with the same seeds must serialize
  // to byte-identical JSON (timings pinned to zero in both transcripts).
  Outcome determinism;
  {
    Transcript second;
    run_batch(second);
    std::string a = transcript_json(first);
    std::string b = transcript_json(second);
    if (a != b) {
      determinism.fail("repeat run differs: " + std::to_string(a.size()) + " vs " +
                       std::to_string(b.size()) + " bytes of JSON");
    } else {
      determinism.note(std::to_string(first.size()) +
                       " reports serialize byte-identically across two full runs");
    }
  }
  results.push_back(determinism);

  static const char* kLabels[] = {
      "coset trace formula",
      "depth-raising relation grid",
      "stabilizer factors",
      "period sum at congruence points",
      "transform suite (hom/involution/round trip)",
      "distinguished element product form",
      "zeta functional identity",
      "integrality and trace identity",
      "end-to-end quotient identity",
      "reciprocal-parameter factor",
      "interlacing branching multiplicities",
      "lattice integrality grid",
      "determinism of seeded JSON",
  };

  bool all_pass = true;
  for (size_t i = 0; i < results.size(); ++i) {
    const Outcome& o = results[i];
    all_pass = all_pass && o.pass;
    std::cout << "criterion " << (i + 1) << " (" << kLabels[i]
              << "): " << (o.pass ? "PASS" : "FAIL")
              << (o.detail.empty() ? "" : " — " + o.detail) << "\n";
  }
  std::cout << (all_pass ? "acceptance: all criteria pass"
                         : "acceptance: documented failure present (see lines above)")
            << "\n";
  return all_pass ? 0 : 1;
}
