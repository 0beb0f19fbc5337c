#pragma once

#include "disint/measure.hpp"

namespace disint {

// Prokhorov distance between finitely supported measures on the same space.
// Each precision is produced by bisection over eps; the pivot test is a
// Strassen-style feasibility check: a bipartite max-flow between the atom
// sets (edges where d < eps) must move at least 1 - eps of the mass.  All
// arithmetic is exact, so the enclosure is sound at every precision.
LocatedReal prokhorov(const FiniteAtoms& mu, const FiniteAtoms& nu);

// the pivot test on its own (used by the brute-force oracle in tests)
bool prokhorov_feasible(const FiniteAtoms& mu, const FiniteAtoms& nu, const Rational& eps);

} // namespace disint
