"""Soft radial confinement vs the hard spherical constraint.

The radius multiplier K(s) of the soft-confined dynamics stays within c/ell
of one, and the whole solution approaches the hard-constraint limit as the
stiffness grows.  The table shows the 1/ell scaling directly.
"""

from glassdyn import Mixture, gibbs_init
from glassdyn.dynamics import ell_limit_check

m = Mixture({2: 1.0, 3: 1.0})
# a non-stationary start (data from a colder temperature) keeps the radial
# forcing order one, which is what the 1/ell bound is about
ic = gibbs_init(m, 0.45, 0.5, GS_at_qstar=-1.0)
beta = 0.25

records = ell_limit_check(m, ic, beta, T=2.0, h=0.005,
                          ell_list=[10.0, 20.0, 40.0, 80.0, 160.0])
print("ell      sup|K-1|     ell*sup|K-1|   dist to hard constraint")
for r in records:
    print(f"{r.ell:6.0f}   {r.sup_K_minus_1:.6f}     {r.ell * r.sup_K_minus_1:.6f}"
          f"       {r.dist_to_spherical:.6f}")
print("\nell*sup|K-1| is flat (the 1/ell law); the distance column is the")
print("sup-norm gap over (C, R, q, H) and shrinks monotonically.")
