"""
Equilibria and the range condition
==================================

The generator has a one-dimensional kernel: a uniform temperature paired with
the matching static stretch of the bar.  A state evolves to rest exactly when
its kernel component vanishes, which is a single scalar condition on the
initial data.
"""

from thermobar import (ConstantTheta, InitialDataSpec, check_equivalence, discrete_kernel,
                       make_initial_state, project, range_condition, reference_config)
from thermobar import assemble_generator, build_discretization

cfg = reference_config("cattaneo")
disc = build_discretization(cfg, 16, 16, 16)
sys = assemble_generator(cfg, disc)

###############################################################################
# The kernel vector and how well ``A`` annihilates it.

Z = discrete_kernel(sys)
print("|A Z| / |Z| =", abs(sys.A @ Z).max() / abs(Z).max())

###############################################################################
# A constant temperature is not an equilibrium by itself: it splits into a
# kernel part ``W0`` and a part ``V0`` in the range, which decays.

U0 = make_initial_state(cfg, disc, InitialDataSpec(ConstantTheta(1.0)))
dec = project(U0, sys)
print("kernel coefficient:", dec.coeff)
print("range condition:   ", range_condition(U0, sys))

###############################################################################
# The kernel coefficient is a fixed multiple of the range condition.

print(check_equivalence(U0, sys).as_dict())

###############################################################################
# Asking for well-prepared data removes the kernel part up front.

V0 = make_initial_state(cfg, disc, InitialDataSpec(ConstantTheta(1.0), well_prepared=True), sys)
print("range condition after projection:", range_condition(V0, sys))
