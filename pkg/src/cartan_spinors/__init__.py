"""Spinor bundles of Cartan type over spheres and real projective spaces.

Exact and floating-point tools for the complex Clifford algebra and its
Dirac, Pauli and Cartan representations, polynomial spinor fields on S^n,
the antipodal quotient bundles over RP^n, the spinor connection with its
curvature, Killing spinors and Dirac spectra.
"""

__version__ = "0.1.0"

from .bundle import BundleContext, BundleSelector, context  # noqa: E402
from .clifford import build_algebra, build_rep, involution_alpha, multiply, represent, volume_element  # noqa: E402
from .dirac import dirac_apply, killing_field, killing_verify, laplace_apply, spectrum  # noqa: E402
from .polyspinor import PolySpinorField, SpherePoint, TangentField, basis_fields  # noqa: E402

__all__ = [
    "BundleContext",
    "BundleSelector",
    "PolySpinorField",
    "SpherePoint",
    "TangentField",
    "basis_fields",
    "build_algebra",
    "build_rep",
    "context",
    "dirac_apply",
    "involution_alpha",
    "killing_field",
    "killing_verify",
    "laplace_apply",
    "multiply",
    "represent",
    "spectrum",
    "volume_element",
    "__version__",
]
