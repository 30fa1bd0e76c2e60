"""Spectral solver and late-time asymptotics toolkit for damped linear wave
systems on the torus, with an application to electromagnetic fields near a
Kasner big-bang singularity.

The package is organised in layers:

``coeffexpr``
    A small expression language for time-dependent coefficients, so systems
    can be defined in config files.
``spectral``
    Dense linear algebra for the limiting coefficient matrix: graded
    generalized-eigenspace decompositions, projections, matrix exponentials.
``fourier``
    Torus Fourier transforms, mode-coefficient containers, Sobolev norms.
``modeode``
    Per-mode first-order systems, integration, asymptotic-data extraction of
    all orders, recursive approximants, and the data-to-initial-data map.
``silentpde``
    PDE-level assembly: condition checks, mode-by-mode solving, field-level
    asymptotic data and the global data/initial-data isomorphism.
``kasner``
    Maxwell potentials on Kasner backgrounds: constraints, Faraday and
    stress-energy tensors, timelike geodesics, energy blow-up measurement.
``cli``
    Config-driven experiment harness with reproducible CSV outputs.
"""

from wavetails.errors import (
    ConfigError,
    NumericalError,
    WavetailsError,
)

__all__ = ["WavetailsError", "ConfigError", "NumericalError"]

__version__ = "0.1.0"
