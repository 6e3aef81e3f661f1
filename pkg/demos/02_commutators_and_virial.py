"""
Exact commutator identities and the virial check
=================================================
"""

# %%
import numpy as np

from weakconj.graph_core import ball
from weakconj.operators import (
    FinVector,
    apply_K,
    k_op,
    truncate,
    verify_B_equals_K2,
    verify_HK_commute,
    virial_check,
)

from _corpus import graph, vfun

# %% [markdown]
# With the position function on Z, H and K commute and i[H, A] equals K^2.
# Both are checked exactly on delta vectors at the cell representatives.

# %%
z, phi = graph("z_lattice"), vfun("z_position")
print(verify_HK_commute(z, phi).verdict, verify_B_equals_K2(z, phi).verdict)

# %%
origin = ("o", (0,))
print("K^2 delta_0 =", apply_K(z, phi, apply_K(z, phi, FinVector.delta(origin))))

# %% [markdown]
# The same vector from a dense truncation of K to the radius-4 ball.

# %%
verts = ball(z, origin, 4)
K = truncate(k_op(z, phi), verts)
e0 = np.zeros(len(verts))
e0[verts.index(origin)] = 1
print(dict(zip([v[1][0] for v in verts], (K @ K @ e0).real)))

# %% [markdown]
# A vertex function that is not semi-adapted breaks [H, K] = 0.

# %%
k3 = graph("k3")
print(verify_HK_commute(k3, vfun("k3_bad")).witness)

# %% [markdown]
# Virial: eigenvectors of H on a finite graph lie in ker(K).

# %%
print(virial_check(k3, vfun("k3_constant")).data["max_ratio"])
