# %% [markdown]
# # Vacuum correlations near criticality
#
# Correlators of the quasiparticle vacuum follow from a Brillouin-zone
# integral of the momentum-space covariance.  Gapped chains decay
# exponentially; at an exceptional point the decay becomes algebraic.

# %%
import numpy as np

from kreinqbh import (
    DoubleChain,
    HarmonicChain,
    Interpolation,
    build_model,
    composite_correlator,
    correlation_length,
    dynamic_exponent,
    real_space_cm,
)

# %% [markdown]
# ## Algebraic decay at the exceptional point
#
# At s = s2 the combination x_j + p_{j+1} has a finite correlator whose
# closed form vanishes for odd r and decays as 1/r^2 for even r.

# %%
spec = build_model(Interpolation(1.0, 2.0, 1.0, 0.5))
r = np.arange(2, 13)
res = composite_correlator(spec, "x@0+p@1", r)
ref = -(np.cos(np.pi * r) + 1) / (np.pi * (r * r - 1))
for ri, v, c in zip(r, res.values, ref):
    print(f"r={ri:2d}  numeric={v: .12f}  closed form={c: .12f}")
print("quadrature:", res.method)

# %% [markdown]
# ## Correlation length
#
# Away from the critical point the decay rate is arccosh(1/alpha), set by the
# complex zero of the dispersion closest to the real axis.

# %%
for a in (0.9, 0.99, 0.999):
    cm = real_space_cm(build_model(HarmonicChain(1.0, a / 2)), 160)
    xi = max(correlation_length(cm, b, (20, 160), prefactor="power").xi for b in ("xx", "pp"))
    print(f"alpha={a}: fitted xi={xi:8.3f}  1/arccosh(1/alpha)={1 / np.arccosh(1 / a):8.3f}")

# %% [markdown]
# ## Krein collision
#
# At the origin of the double chain the vacuum is a product state with the
# on-site squeezing fixed by K1/K2.

# %%
cm = real_space_cm(build_model(DoubleChain(0.0, 0.0, 1.0, 4.0)), 3)
for r_ in range(4):
    print(f"r={r_}  <xx>={cm.correlator('xx', r_): .3e}  <pp>={cm.correlator('pp', r_): .3e}")

# %% [markdown]
# ## Dynamic exponent
#
# Along Omega1 = Omega2^n the gap closes as t^((n+1)/2) while the correlation
# length grows as t^(-n/2), so z = (n+1)/n.

# %%
for n, ts in ((2, [0.2, 0.1, 0.05, 0.025]), (3, [0.4, 0.3, 0.2, 0.15])):
    de = dynamic_exponent(lambda t: build_model(DoubleChain(t**n, t, 1.0, 2.0)), ts, fit_window=(10, 150))
    print(f"n={n}: z={de.z:.3f} (expected {(n + 1) / n:.3f}), xi={np.round(de.xis, 2)}")
