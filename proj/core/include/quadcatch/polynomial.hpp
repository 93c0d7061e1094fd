#pragma once

#include <array>

namespace quadcatch {

// Real roots of c3 s^3 + c2 s^2 + c1 s + c0 = 0, ascending, written to
// `roots`. Returns how many there are (0..3). Degenerate leading
// coefficients fall back to the quadratic/linear case. Closed-form
// (trigonometric/Cardano) evaluation; conjugate pairs within ~1e-9 of the
// real axis are treated as a real double root.
int real_cubic_roots(double c3, double c2, double c1, double c0,
                     std::array<double, 3>& roots);

}  // namespace quadcatch
