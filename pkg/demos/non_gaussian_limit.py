"""Where the CLT fails: log E exp(-t Tr M) for the two-band model is not quadratic in t."""
import math

from linstat import Potential, kernel_for
from linstat.fluctuations import (clt_defect, gaussian_bump, laplace_exact, limit_law_q2, linear,
                                  variance_exact)

V = Potential.quartic(3.0, 1.0)
law = limit_law_q2(1.0, math.sqrt(5))
print(f"c0 = {law.c0:.10f}, omega = {law.omega:.10f}")

for n in (60, 61):
    K = kernel_for(V, n)
    x = 0.0 if n % 2 == 0 else 0.5
    phi = linear(2.0)
    d = clt_defect(laplace_exact(K, phi), variance_exact(K, phi) / 2)
    print(f"n = {n}: defect for 2 lambda {d:+.6f}, limit law predicts {law.clt_defect(2.0, x):+.6f}")

# an even field does not see the gap, and the Gaussian law holds
K = kernel_for(V, 60)
phi = gaussian_bump(1.0, 0.0, 0.8)
print(f"even bump: defect {clt_defect(laplace_exact(K, phi), variance_exact(K, phi) / 2):+.2e}")

print("\n  t    F(t)        F(t) - t^2 F(1)")
for t in (0.5, 1.0, 2.0, 3.0):
    print(f"{t:4.1f}  {float(law.F(t)):.6f}   {float(law.F(t)) - t * t * float(law.F(1.0)):+.6f}")
