# %% [markdown]
# # Entanglement and parameter-space geometry
#
# Finite periodic rings give explicit covariance matrices.  From them we get
# the bisection entropy and the logarithmic negativity, and from the
# eigenvectors the pseudo-Hermitian quantum metric.

# %%
import numpy as np

from kreinqbh import (
    HarmonicChain,
    Interpolation,
    bisection,
    build_model,
    double_chain_family,
    entanglement,
    finite_cm,
    krein_gap,
    qmt,
    qmt_divergence_scan,
)

# %% [markdown]
# ## Entropy grows as the Krein gap closes
#
# With Omega = Delta = 1 the interpolation gap is 2 sqrt(1 - 2s).

# %%
for gap in (1.0, 0.6, 0.4, 0.2, 0.1):
    spec = build_model(Interpolation(1.0, 2.0, 1.0, (1 - (gap / 2) ** 2) / 2))
    assert abs(krein_gap(spec).direct - gap) < 1e-9
    row = [entanglement(finite_cm(spec, N), bisection(N)) for N in (64, 128)]
    print(f"gap={gap:4}: S(64)={row[0].entropy:.5f} S(128)={row[1].entropy:.5f} "
          f"E_N(128)={row[1].log_negativity:.5f}")

# %% [markdown]
# ## Negativity of the bisected harmonic ring
#
# It equals a quarter of the log condition number of the x stiffness and does
# not depend on N.

# %%
for N in (8, 32, 128):
    cm = finite_cm(build_model(HarmonicChain(1.0, 0.2)), N)
    print(f"N={N:3d}: E_N={entanglement(cm, bisection(N)).log_negativity:.10f}")
print(f"closed form: {0.25 * np.log(1.4 / 0.6):.10f}")

# %% [markdown]
# ## Quantum metric of the double chain
#
# At k = 0 the metric is rank one with entries -1/(16 Omega1^2),
# -1/(16 Omega2^2) and 1/(16 Omega1 Omega2).  It diverges on the exceptional
# lines.

# %%
res = qmt(double_chain_family(1.0, 2.0), {"Omega1": 0.3, "Omega2": 0.5}, 0.0)
print(res.g_LR)
print(np.array([[-1 / (16 * 0.09), 1 / (16 * 0.15)], [1 / (16 * 0.15), -1 / (16 * 0.25)]]))
rows = qmt_divergence_scan(double_chain_family(1.0, 2.0), {"Omega1": [0.0, 1e-3, 1e-2, 0.1], "Omega2": [0.5]},
                           0.0, pair=("Omega1", "Omega1"), h_fd=1e-7)
for r in rows:
    print(f"Omega1={r['Omega1']:<6} |g|={r['g']:.4e} divergent={r['divergent']}")
