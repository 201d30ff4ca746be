import numpy as np

from unitdist.norms import EuclideanNorm, PolytopeNorm, sample_boundary, sphere_directions


def support(norm, U):
    """Support function of the unit ball at each row of ``U``.

    Polytopes use the vertices of the ball; other norms a dense boundary
    sample, which only ever underestimates.
    """
    if isinstance(norm, EuclideanNorm):
        return np.linalg.norm(U, axis=1)
    if isinstance(norm, PolytopeNorm):
        from unitdist.norms import unit_ball_vertices

        V = unit_ball_vertices(norm)
    else:
        V = sample_boundary(norm, 20000 if norm.d == 2 else 40000).points
    return np.max(U @ V.T, axis=1)


def support_hausdorff(A, B, count=20000):
    """Hausdorff distance of two convex bodies as the sup-norm gap of
    their support functions over unit directions."""
    U = sphere_directions(A.d, count)
    return float(np.max(np.abs(support(A, U) - support(B, U))))


# criterion number -> (verdict, title, seconds, detail); filled by test_acceptance
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for n in sorted(ACCEPTANCE):
        verdict, title, seconds, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d} {verdict}  {title}  [{seconds:.1f}s]  {detail}")
