"""Physical constants and unit conversions.

Working units are meV for energy, ps for time, tesla for field and kelvin for
temperature.  SI quantities are used only inside the spin-phonon rate.
"""

HBAR = 0.6582119569  # meV * ps
KB = 0.08617333  # meV / K

MEV_TO_J = 1.602176634e-22
PS_TO_S = 1e-12
HBAR_SI = HBAR * MEV_TO_J * PS_TO_S  # J * s
