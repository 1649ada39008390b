#pragma once

namespace lfgnn {

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
// Accurate to ~1e-12 for moderate a, b; used for F-test p-values.
double betainc(double a, double b, double x);

// Survival function of the F distribution with (d1, d2) degrees of freedom.
double f_sf(double f, double d1, double d2);

// Survival function of the standard normal.
double normal_sf(double z);

} // namespace lfgnn
