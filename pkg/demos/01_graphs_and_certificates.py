"""
Orientations, position functions and (semi-)adapted vertex functions
=====================================================================

Walk through the certify layer on the bundled corpus graphs.
"""

# %%
from weakconj.certify import (
    check_admissible,
    check_adapted,
    check_semi_adapted,
    find_position_function,
    solve_semi_adapted,
)

from _corpus import graph, vfun

# %% [markdown]
# The directed Z lattice and the BC2 chain admit a position function:
# every father sits exactly one level below its sons.

# %%
for name in ("z_lattice", "bc2_chain", "z2_lattice"):
    cert = check_admissible(graph(name))
    print(name, cert.verdict, cert.data.get("phi"))

# %% [markdown]
# An odd directed cycle cannot be levelled. The witness is a closed walk
# whose signed step count (sons +1, fathers -1) is nonzero.

# %%
bad = find_position_function(graph("odd_cycle_directed"))
print(bad.verdict, bad.witness)

# %% [markdown]
# The position function of an admissible graph is adapted.

# %%
g = graph("bc2_chain")
phi = check_admissible(g).data["phi"]
print("semi-adapted:", bool(check_semi_adapted(g, phi)), " adapted:", bool(check_adapted(g, phi)))

# %% [markdown]
# On a finite graph the semi-adapted functions are exactly the functions
# that are constant on connected components, so the solver returns one
# basis vector per component.

# %%
for name in ("k3", "p3"):
    basis = solve_semi_adapted(graph(name))
    print(name, len(basis), [dict(b.offsets) for b in basis])

# %%
k3_bad = check_semi_adapted(graph("k3"), vfun("k3_bad"))
print("k3_bad:", k3_bad.verdict, k3_bad.witness)
