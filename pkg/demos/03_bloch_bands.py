"""
Bloch fibers, flat bands and band ranges
=========================================
"""

# %%
import numpy as np

from weakconj.bloch import band_samples, classify_spectrum, fiber_matrix, flat_band_polynomial

from _corpus import graph, vfun

# %% [markdown]
# BC2 has a two-vertex cell. Its fiber has the constant eigenvalue 0 and one
# dispersive band covering [-4, 4].

# %%
g = graph("bc2_chain")
M = fiber_matrix(g)
print(M)
ev = band_samples(M, 9)
print(np.round(ev, 4))

# %% [markdown]
# The flat-band polynomial is the gcd over torus monomials of the
# coefficients of det(lambda - M(z)). Its roots are the flat bands.

# %%
print(flat_band_polynomial(M))

# %%
rep = classify_spectrum(g, None, vfun("bc2_position"), grid=257)
for fb in rep.flat_bands:
    print(fb["eigenvalue"], fb["multiplicity"], [p["vector"] for p in fb["patterns"]])
print("dispersive:", rep.band_ranges, " a.c. present:", rep.ac_present)

# %% [markdown]
# The square lattice: no flat bands, one band filling [-4, 4].

# %%
rep2 = classify_spectrum(graph("z2_lattice"), grid=65)
print(rep2.flat_bands, rep2.band_ranges)
