"""
Convolution operators on F x Z^d
=================================

Example: S3 x Z with the measure supported on the non-identity elements
of S3 times the two unit steps.
"""

# %%
import numpy as np

from weakconj.bloch import band_samples
from weakconj.groupconv import (
    Character,
    DiscreteGroup,
    Measure,
    band_families,
    centreaza_check,
    conv_fiber,
    corollary_precis_check,
    eval_family,
    symmetric_group_s3,
)

from _corpus import measure

# %%
G = symmetric_group_s3(1)
mu = measure("s3z_example1")
cert, rep = centreaza_check(G, mu, Measure(G), grid=257)
print(cert.verdict, rep.statement)

# %% [markdown]
# The fiber coefficients commute, so the bands split into explicit
# trigonometric families: 10 cos(theta) and -2 cos(theta) once each,
# and -2 cos(theta) four more times.

# %%
thetas = np.linspace(0, 2 * np.pi, 5)
for fam in band_families(G, mu):
    print(fam["multiplicity"], np.round(eval_family(fam["symbol"], thetas[:, None]), 6))

# %%
print(np.round(band_samples(conv_fiber(G, mu), 4), 6))

# %% [markdown]
# On Z with mu = delta_1 + delta_{-1} and the unit character, Phi^2 = 1 on
# the support and neither H_mu nor H_{Phi mu} has a kernel.

# %%
Z = DiscreteGroup.zd(1)
hop = Measure(Z, {(0, (1,)): 1, (0, (-1,)): 1})
cert, rep = corollary_precis_check(Z, hop, Character((1,)), grid=257)
print(cert.verdict, rep.statement, "->", rep.conclusion)
