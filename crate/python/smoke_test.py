"""Smoke test for the polyface extension module.

Run after `pip install -e crates/python --no-build-isolation`.
"""

from fractions import Fraction

import polyface


def main() -> None:
    cube = polyface.Polytope.generate("cube", 3)
    assert cube.dim == 3 and cube.vertex_count == 8
    assert cube.f_vector() == [8, 12, 6]
    assert cube.is_simple() and not cube.is_simplicial()

    tri = polyface.Polytope.from_points([[0, 0], [1, 0], [0, 1], [Fraction(1, 4), Fraction(1, 4)]])
    assert tri.f_vector() == [3, 3]
    assert sorted(map(tuple, tri.vertices())) == [(0, 0), (0, 1), (1, 0)]
    again = polyface.Polytope.from_json(tri.to_json())
    assert again.f_vector() == tri.f_vector()

    assert polyface.rho(5, 1) == Fraction(5, 2)
    report = polyface.verify_bounds(polyface.Polytope.generate("cross", 3))
    assert [r["equal_facets"] for r in report["bounds"]["rows"]] == [False, True, True]
    assert report["barany"]["holds"]

    corner = cube.faces(0)[0]
    mean, stderr = polyface.solid_angle(cube, corner, samples=200_000, seed=1)
    assert abs(mean - 0.125) <= 4 * stderr, (mean, stderr)
    edge = polyface.curvature_check(cube, cube.faces(1)[0], samples=1000)
    assert edge["exact"] and edge["sum"] == 1.0

    dirs = polyface.sample_directions(cube, 3, seed=5)
    assert len(dirs) == 3 and all(len(d) == 3 for d in dirs)
    proj = polyface.project(cube, [1, 3, 7])
    assert proj["shadow_f_vector"] == [6, 6]
    assert proj["interior_count"] >= 1 and all(g["holds"] for g in proj["gaps"])

    csv = polyface.run_corpus(["simplex", "cube"], 2, 3, directions=2)
    assert csv.splitlines()[0].startswith("family,dim,n,k,f_k")
    assert "=fail" not in csv

    try:
        polyface.project(cube, [1, 2, 3])
    except ValueError:
        pass
    else:
        raise AssertionError("direction in a vertex hyperplane was accepted")

    print("polyface smoke test ok")


if __name__ == "__main__":
    main()
