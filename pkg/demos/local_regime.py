"""A bump of width 1/n at the centre of the GUE spectrum sees only the sine kernel."""
import math

from linstat import Potential, kernel_for
from linstat.fluctuations import (b_identity_check_q1, fredholm_sine_det, gaussian_bump, intermediate_variance,
                                  laplace_exact, scaled, sine_kernel_variance, variance_exact)

rho0 = 1 / math.pi
phi = gaussian_bump(1.0, 0.0, 1.0)
print("  n    Var        log Z")
for n in (50, 100, 200):
    K = kernel_for(Potential.gaussian(1.0), n)
    phin = scaled(phi, 0.0, 1.0, n)
    print(f"{n:4d}  {variance_exact(K, phin):.6f}   {laplace_exact(K, phin):.6f}")
print(f"limit {sine_kernel_variance(phi, rho0):.6f}   {fredholm_sine_det(phi, rho0):.6f}")
print(f"Gaussian guess for log Z would be {sine_kernel_variance(phi, rho0) / 2:.6f}")

# intermediate scales average the oscillation away
d = intermediate_variance(phi, details=True)
print(f"\nintermediate variance: direct {d['direct']:.10f}, Fourier {d['fourier']:.10f}")
print(f"B identity, worst deviation on (-1.9, 1.9): {b_identity_check_q1(1.0, [-1.9, -0.5, 0.0, 1.2, 1.9]):.1e}")
