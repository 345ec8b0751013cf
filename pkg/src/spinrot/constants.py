"""Physical constants for the SI/eV boundary.

The engine itself runs in natural units (hbar = 1, angular frequencies in
rad/s or dimensionless); these constants enter only when converting phases
and frequencies to spectroscopic energies, or in molecular-scale estimates.
"""

HBAR_EV_S = 6.582119569e-16     # reduced Planck constant, eV*s (CODATA 2018)
K_BOLTZMANN_J_PER_K = 1.380649e-23   # Boltzmann constant, J/K (exact, SI 2019)
EV_IN_JOULES = 1.602176634e-19  # eV -> J (exact, SI 2019)
CARBON12_ATOM_MASS_KG = 1.99264688e-26  # mass of one 12C atom, kg
