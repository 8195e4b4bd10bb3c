/* Out-of-line cos/sin wrappers.
 *
 * Keeping these in their own translation unit stops the optimizer from
 * combining adjacent cos/sin calls into glibc's sincos, whose rounding can
 * differ from the separate calls by one ulp; the pure-Python backend uses
 * the separate libm entry points, and the two backends must emit identical
 * Gaussian streams.
 */
#include <math.h>

double robcov_cos(double x) { return cos(x); }

double robcov_sin(double x) { return sin(x); }
