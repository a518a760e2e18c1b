"""Face verification with Fourier-Bessel descriptors and a pseudo-Fisher discriminant in dissimilarity space."""

__version__ = "0.1.0"
