import numpy as np

from thaqkd import attack, fock, gaussian

# Eve's probe is a displaced two-mode squeezed state; Alice's phase theta
# rotates the signal mode. Everything in the Gaussian picture is a mean vector
# and a covariance matrix with vacuum covariance equal to the identity.
cfg = attack.AttackConfig(N=100.0, p=0.0, eta=1e-3, mu_T=0.5)
pair = attack.build_returned_pair(cfg)
print("returned photons per pulse:", gaussian.mean_photons(pair.state_0, 0))
print("fidelity between the two bases:", pair.fidelity())
print("same thing from the one-line formula:", attack.simplified_fidelity(cfg.mu_D, cfg.mu_T))

# The same circuit written out in a truncated Fock space, as a sanity check
# on the Gaussian fidelity formula.
states = []
for theta in (0.0, np.pi / 2):
    r = fock.coherent_fock(np.sqrt(cfg.N * cfg.eta), 30)
    r = fock.apply_unitary_generator(r, "phase", theta)
    states.append(fock.additive_noise_fock(r, cfg.mu_T))
print("Fock-space fidelity:", fock.uhlmann_fidelity(*states))

# Spending part of the budget on squeezing does not help Eve (on a 64-point grid).
res = attack.optimal_p(N=1e4, eta=1e-5, mu_T=1.0)
print("best squeezing fraction on the grid:", res.grid_argmin)

# The squeezing parameterisation does not spend exactly p N photons on squeezing.
print(attack.budget_audit(attack.AttackConfig(N=10.0, p=0.3)))
