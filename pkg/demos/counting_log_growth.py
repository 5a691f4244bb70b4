"""GUE: the number of eigenvalues in (-1, 1) has variance growing like log(n) / pi^2."""
import math

import numpy as np

from linstat import Potential, kernel_for
from linstat.fluctuations import counting_covariance, gue_counting_variance

V = Potential.gaussian(1.0)
ns = [64, 128, 256, 512]
var, touch = [], []
for n in ns:
    K = kernel_for(V, n)
    var.append(gue_counting_variance(K, (-1.0, 1.0)).finite_n_value)
    touch.append(counting_covariance(K, (-1.0, 0.0), (0.0, 1.0)).finite_n_value)
    print(f"n = {n:3d}   Var = {var[-1]:.6f}   Cov touching = {touch[-1]:+.6f}")

s = np.polyfit(np.log(ns), var, 1)[0]
print(f"\nslope of Var vs log n        {s:.5f}   (1/pi^2 = {1 / math.pi ** 2:.5f})")
s = np.polyfit(np.log(ns), touch, 1)[0]
print(f"slope of touching covariance {s:+.5f}  (-1/(2 pi^2) = {-0.5 / math.pi ** 2:+.5f})")

# well separated intervals keep an O(1) negative covariance
rep = counting_covariance(kernel_for(V, 256), (-1.5, -0.5), (0.5, 1.5))
print(f"\ndisjoint at n = 256: {rep.finite_n_value:+.6f}, limit {rep.applicable_limit:+.6f}")
