#ifndef ROBCOV_LIBM_SHIM_H
#define ROBCOV_LIBM_SHIM_H

/* Out-of-line cos/sin (see _libm_shim.c). */
double robcov_cos(double x);
double robcov_sin(double x);

#endif
