"""From constants to a certified ball, then checking it against real runs."""
import numpy as np

from gncert import certify, problems
from gncert.majorant import lipschitz_majorant, smale_majorant
from gncert.solver import solve

sq = problems.build("scalar_quadratic")

# %% Two majorants for the same problem
# K = 2 bounds how fast J changes; gamma = 1 comes from the second derivative at x*.
for maj in (lipschitz_majorant(2.0), smale_majorant(1.0)):
    cert = certify.build_certificate(sq, maj)
    rd = cert.radii
    print(f"{maj.kind:>9}: nu={rd.nu:.6f} rho={rd.rho:.6f} sigma={rd.sigma:.6f} r={rd.r:.6f}")

# %% The certificate predicts a per-step error bound e+ <= quad e^2 + lin e
cert = certify.build_certificate(sq, lipschitz_majorant(2.0))
tr = solve(sq, [1.3])
check = certify.verify_q2(tr, cert)
quad, lin = cert.q2(0.3)
print("q2 coefficients at t0=0.3:", quad, lin)
print("margins per step:", np.round(check.margins, 6))

# %% Empirically the method converges from much farther away
emp = certify.empirical_radius(sq, t_max=10.0, rng=0)
print("certified r =", cert.r, " observed radius >=", emp.minimum)

# %% A noisy exponential fit: K is estimated by sampling, then verified
fit = problems.build("exp_fit", noise=1e-3)
cert = certify.build_certificate(fit, rng=42)
chk = certify.verify_majorant_condition(fit, cert.majorant, kappa=cert.constants.kappa, rng=1)
print(f"exp_fit: c={cert.constants.c:.3e} K~{cert.majorant.params['K']:.1f} ({cert.constant_source}) "
      f"r={cert.r:.4e} majorant check passed={chk.passed}")
print(certify.dumps(cert.to_dict())[:400], "...")
