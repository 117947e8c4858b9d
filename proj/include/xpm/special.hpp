#pragma once

namespace xpm {

// Scaled complementary error function exp(x^2) erfc(x), finite for all x that
// do not overflow exp(x^2) on the negative side.
double erfcx(double x);

}  // namespace xpm
