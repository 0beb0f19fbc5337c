#pragma once

#include "disint/continuity.hpp"

namespace disint {

// mu conditioned on a positive-measure continuity set H: the valuation
// A |-> mu(A n H) / mu(H), with the numerator a lower real and the
// denominator a two-sided enclosure from the witness pair.  Positivity must
// be certified first: the first valuation stage n whose lower bound on
// mu(H.u) exceeds 2^-n unlocks the division; if no stage up to `fuel` does,
// the set is treated as null.
Measure condition(const Measure& mu, const ContinuitySet& h, std::size_t fuel = 48);

// mu on S x T conditioned on {second coordinate in U}: conditions on the
// product continuity set S x U, whose witness is the cylinder over U's
// witness.  The result remembers U, so its second marginal is the base
// second marginal conditioned on U.
Measure condition_fiber(const Measure& mu, const ContinuitySet& u_t, std::size_t fuel = 48);

} // namespace disint
