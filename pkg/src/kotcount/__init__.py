"""Exact point-count bookkeeping for modular curves and their stabilized mass formulas.

The package is organized in layers:

* :mod:`kotcount.abelian` -- exact integer matrix algebra (Smith normal form)
  and finitely generated abelian groups given by presentations.
* :mod:`kotcount.galois` -- finite group actions on presented modules,
  place systems, and the obstruction group ``E`` with its dual.
* :mod:`kotcount.rootdata` -- root data, fundamental groups, Tamagawa
  numbers, and a preset enumeration of elliptic endoscopic data.
* :mod:`kotcount.padic` -- truncated unramified p-adic arithmetic, Newton
  and valuation-of-determinant invariants of Frobenius matrices.
* :mod:`kotcount.kparam` -- global parameter packages, their local
  compatibility checks, the obstruction class alpha, and Fourier sums.
* :mod:`kotcount.adlv` -- lattice enumeration, affine Deligne-Lusztig
  point counts, and twisted orbital integrals for GL(2).
* :mod:`kotcount.quaternion` -- mass of the definite quaternion algebra
  ramified at one finite prime, via ideal class enumeration.
* :mod:`kotcount.modcurve` -- curve-side point counts over small finite
  fields and the arithmetic side that must match them.
* :mod:`kotcount.cli` -- command line front end.
"""

from .abelian import (
    IntMatrix,
    FgAbGroup,
    AbHom,
    smith_normal_form,
    cokernel,
    kernel,
    torsion_subgroup,
    dual_and_pairing,
)

__version__ = "0.1.0"

__all__ = [
    "IntMatrix",
    "FgAbGroup",
    "AbHom",
    "smith_normal_form",
    "cokernel",
    "kernel",
    "torsion_subgroup",
    "dual_and_pairing",
    "__version__",
]
