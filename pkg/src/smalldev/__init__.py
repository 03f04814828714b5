"""Small deviation probabilities, entropy bounds, and spectral simulation
for smooth stationary Gaussian processes."""

__version__ = "0.1.0"
