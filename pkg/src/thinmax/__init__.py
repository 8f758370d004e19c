"""Maxwell eigenvalues of thin tubes around surfaces.

Two independent routes to the same spectra: exact product-manifold
assembly from surface Laplace-Beltrami eigenvalues, and direct edge-element
discretisation of the 3D curl-curl problem on the extruded tube.
"""

from .mesh import MeshError, SurfaceMesh, TopologyInfo, generate_builtin, topology
from .tube import TetMesh, TubeParams, box_mesh, extrude, volume
from .eigen import EigenError, EigenResult, SolveOptions, solve_lowest
from .surface import SurfaceSpectrum, solve as solve_surface
from .maxwell import MaxwellResult, assemble_nedelec, solve_maxwell
from .spectrum import Spectrum, SpectrumEntry, SpectrumError, assemble_coclosed, assemble_full_hodge
from .oracles import OracleSpectrum

__version__ = "0.1.0"

__all__ = [
    "MeshError", "SurfaceMesh", "TopologyInfo", "generate_builtin", "topology",
    "TetMesh", "TubeParams", "box_mesh", "extrude", "volume",
    "EigenError", "EigenResult", "SolveOptions", "solve_lowest",
    "SurfaceSpectrum", "solve_surface",
    "MaxwellResult", "assemble_nedelec", "solve_maxwell",
    "Spectrum", "SpectrumEntry", "SpectrumError", "assemble_coclosed", "assemble_full_hodge",
    "OracleSpectrum",
]
