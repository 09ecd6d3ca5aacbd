"""Exact simplicial complexes, equivariant triangulation and explicit smoothing maps."""
__version__ = "0.1.0"

from .complex import (CellComplex, SimplicialComplex, barycentric_subdivision, check_subdivision, link, star,
                      star_subdivide, support, total_volume, validate_complex)
from .group import (GroupAction, PLHomeoSpec, automorphism_group, equivariant_triangulate, normalize_pointwise_fixed,
                    orbits, verify_simplicial_action)
from .approx import (PDFunction, c1_distance_estimate, edgewise_subdivision, quality, refine_until_close, secant_map,
                     thickness)
from .manifold import HomologyProfile, ManifoldReport, check_pl_manifold, homology, smith_normal_form
from .smoothing import (ConeExtension, CutoffSpec, SmoothingParams, SymmetricProductCover, build_phi0,
                        check_embedding, cutoff, eval_F, eval_h, eval_H)
from .io import ComplexFile, export_off, parse_complex, serialize_complex

__all__ = [name for name in dir() if not name.startswith("_")]
