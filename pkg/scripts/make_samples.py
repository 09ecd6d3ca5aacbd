"""Regenerate the sample ComplexFiles in samples/ from the built-in corpus."""
import itertools
import pathlib

from eqsmooth import corpus
from eqsmooth.complex import SimplicialComplex
from eqsmooth.group import automorphism_group
from eqsmooth.io import ComplexFile, plmap_block, serialize_complex

OUT = pathlib.Path(__file__).resolve().parent.parent / "samples"


def boundary_4simplex():
    return SimplicialComplex([[int(i == j) for j in range(5)] for i in range(5)],
                             itertools.combinations(range(5), 4))


def main():
    OUT.mkdir(exist_ok=True)
    files = {}
    K = SimplicialComplex([(0, 0), (1, 0), (0, 1)], [(0, 1, 2)])
    files["triangle.json"] = ComplexFile.from_complex(K)
    files["triangle_s3.json"] = ComplexFile.from_complex(K, [(1, 0, 2), (1, 2, 0)])
    sq = corpus.square_boundary()
    files["square_dihedral.json"] = ComplexFile.from_complex(sq, [(1, 2, 3, 0), (0, 3, 2, 1)])
    B = corpus.centered_tetrahedron_boundary()
    files["tetra_boundary.json"] = ComplexFile.from_complex(B, [(1, 0, 2, 3), (1, 2, 3, 0)])
    files["torus7.json"] = ComplexFile.from_complex(corpus.seven_vertex_torus())
    files["rp2_6.json"] = ComplexFile.from_complex(corpus.six_vertex_rp2())
    files["boundary_4simplex.json"] = ComplexFile.from_complex(boundary_4simplex())
    files["two_tetrahedra.json"] = ComplexFile.from_complex(corpus.two_tetrahedra_at_vertex())
    T = corpus.product_torus()
    files["torus_swap.json"] = ComplexFile.from_complex(T, [corpus.factor_swap()])
    Ks, g = corpus.segment_involution()
    files["segment_involution.json"] = ComplexFile.from_complex(Ks, None, [plmap_block(g)])
    Kr, h = corpus.rectangle_involution()
    files["rectangle_involution.json"] = ComplexFile.from_complex(Kr, None, [plmap_block(h)])
    files["unit_interval.json"] = ComplexFile.from_complex(corpus.interval([0, 1]))
    for name, cf in files.items():
        (OUT / name).write_bytes(serialize_complex(cf))
    assert automorphism_group(sq).order == 8
    print(f"wrote {len(files)} files to {OUT}")


if __name__ == "__main__":
    main()
