"""Weak measurement simulator: weak values, Gaussian-pointer meters and Monte Carlo readout."""
