"""Two-band quartic model: recurrence coefficients and the variance of Tr M never settle."""
import math

from linstat import Potential, kernel_for, stieltjes_recurrence
from linstat.fluctuations import linear, variance_exact

# V = (l^2 - 3)^2 / 4 puts the eigenvalues on [-sqrt5, -1] and [1, sqrt5]
V = Potential.quartic(3.0, 1.0)
a, b = 1.0, math.sqrt(5)

t = stieltjes_recurrence(V, 60, 64)
print("r_{n+k-1} at n = 60")
for k in range(-2, 3):
    print(f"  k = {k:+d}   r = {t.r[59 + k]:.6f}")
print(f"  alternating limits {(b - a) / 2:.6f} and {(b + a) / 2:.6f}")

# Var(Tr M) follows the parity of n
print("\n n     Var(Tr M)")
for n in range(40, 49):
    v = variance_exact(kernel_for(V, n), linear(1.0))
    print(f"{n:3d}   {v:.6f}")
print(f"even-n limit {((b - a) / 2) ** 2:.6f}, odd-n limit {((b + a) / 2) ** 2:.6f}")
