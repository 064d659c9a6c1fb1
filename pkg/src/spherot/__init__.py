"""
Exact discrete optimal transport on spheres with the chord metric.

The distribution package consists of three parts:

1. Core (`spherot.core`):
   - Discrete measures on S^n and in the ambient space, an exact transportation simplex solver.
   - Wasserstein potentials, Fourier deconvolution on the circle, projected displacement interpolation.
   - Batteries certifying the identities behind isometric rigidity of W2(S^n, chord).

2. Common (`spherot.common`):
   - Document formats (measure JSON, potential CSV, report JSON lines) and property reports.

3. Command line (`spherot`):
   - Every computation as a subcommand, plus the `verify` driver.

"""

__version__ = "0.1.0"
