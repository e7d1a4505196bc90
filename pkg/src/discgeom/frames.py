"""Construction of orthonormal normal frames along an immersed surface.

Three recipes are supported: explicit graph normals (exact, with analytic
derivatives, for graph-type surfaces whose two normals happen to be
orthogonal), projection of fixed anchor vectors onto the normal space, and
the thresholded two-vector orthonormalization that turns raw projections
into an orthonormal frame or fails loudly when the anchors get too close to
the tangent plane.

Frame continuity over a parameter region comes from fixing the anchors
globally, never from propagating frames point to point.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import (
    AngleThreshold,
    DegenerateMetric,
    FrameMismatch,
    NormBelowThreshold,
    NotConformal,
)
from .expressions import ScalarJet2
from .geometry import (
    EPS_CONF,
    NormalFrame,
    SurfaceJet,
    conformality_defect_scalar,
    first_fundamental_form,
)


def default_anchors(n: int) -> np.ndarray:
    """Standard basis vectors e3..en as rows of an (n-2, n) array."""
    return np.eye(n)[2:]


@dataclass(frozen=True)
class FrameRecipe:
    """How to build a normal frame at a point.

    kind 'projection' orthonormalizes without threshold policing (failing
    only on genuine degeneracy); 'projection_orthonormalized' enforces the
    norm and angle thresholds; 'graph_normals' starts from the explicit
    graph-normal pair instead of anchor projections.
    """

    kind: str = "projection_orthonormalized"
    anchors: Optional[np.ndarray] = None
    tnorm: float = 0.5
    tangle: float = 0.5

    def __post_init__(self):
        if self.kind not in ("graph_normals", "projection", "projection_orthonormalized"):
            raise ValueError(f"unknown frame recipe kind {self.kind!r}")
        if not (0.0 < self.tnorm < 1.0 and 0.0 < self.tangle < 1.0):
            raise ValueError("thresholds must lie in (0, 1)")
        if self.anchors is not None:
            a = np.asarray(self.anchors, dtype=float)
            if a.ndim != 2:
                raise ValueError("anchors must be a (m, n) array")
            if np.linalg.matrix_rank(a) < a.shape[0]:
                raise ValueError("anchors must be linearly independent")
            object.__setattr__(self, "anchors", a)

    def anchors_for(self, n: int) -> np.ndarray:
        if self.anchors is None:
            return default_anchors(n)
        if self.anchors.shape != (n - 2, n):
            raise ValueError(
                f"anchors shape {self.anchors.shape} incompatible with ambient dimension {n}"
            )
        return self.anchors


def graph_normals(
    phi_jet: ScalarJet2, psi_jet: ScalarJet2
) -> tuple[np.ndarray, np.ndarray]:
    """Unit normals of a graph (x, y, phi, psi) in R^4.

    Each is orthogonal to both tangents; the two are generally NOT mutually
    orthogonal (they are exactly when the gradients of phi and psi are).
    """
    n1 = np.array([-phi_jet.dx, -phi_jet.dy, 1.0, 0.0])
    n2 = np.array([-psi_jet.dx, -psi_jet.dy, 0.0, 1.0])
    return n1 / np.linalg.norm(n1), n2 / np.linalg.norm(n2)


def graph_normal_frame(phi_jet: ScalarJet2, psi_jet: ScalarJet2,
                       tol: float = 1e-10) -> NormalFrame:
    """Graph-normal pair with exact analytic derivatives.

    Only valid when the pair is orthonormal as it stands (gradients of phi
    and psi orthogonal, as for conjugate harmonic pairs); raises
    FrameMismatch otherwise.
    """
    vecs = []
    ders = []
    for j in (phi_jet, psi_jet):
        slot = 2 if j is phi_jet else 3
        p = np.zeros(4)
        p[0], p[1], p[slot] = -j.dx, -j.dy, 1.0
        px = np.array([-j.dxx, -j.dxy, 0.0, 0.0])
        py = np.array([-j.dxy, -j.dyy, 0.0, 0.0])
        s = np.sqrt(1.0 + j.dx ** 2 + j.dy ** 2)
        sx = (j.dx * j.dxx + j.dy * j.dxy) / s
        sy = (j.dx * j.dxy + j.dy * j.dyy) / s
        vecs.append(p / s)
        ders.append([px / s - p * (sx / s ** 2), py / s - p * (sy / s ** 2)])
    frame = NormalFrame(vectors=np.array(vecs), derivs=np.array(ders))
    if frame.orthonormality_defect() > tol:
        raise FrameMismatch(
            "graph normals are not orthonormal here "
            f"(defect {frame.orthonormality_defect():.3e}); use a projection recipe"
        )
    return frame


def projection_frame(
    jet: SurfaceJet,
    anchors: Optional[np.ndarray] = None,
    strict: bool = False,
    eps_conf: float = EPS_CONF,
) -> np.ndarray:
    """Raw normal vectors: anchors minus their tangential parts.

    With strict=True the classical per-direction formula (dividing by |xu|^2
    and |xv|^2 separately) is used, which presumes orthogonal tangents, and
    NotConformal is raised at non-conformal points.  The default solves the
    2x2 Gram system instead, which projects exactly for any immersion.

    The result is orthogonal to the tangents but neither normalized nor
    mutually orthogonal.
    """
    form = first_fundamental_form(jet)
    a = np.asarray(anchors, dtype=float) if anchors is not None else default_anchors(jet.n)
    if strict:
        defect = conformality_defect_scalar(form)
        if defect > eps_conf:
            raise NotConformal(
                f"conformality defect {defect:.3e} exceeds {eps_conf:.1e}; "
                "strict projection requires conformal parameters"
            )
        cu = (a @ jet.xu) / form.h11
        cv = (a @ jet.xv) / form.h22
    else:
        b1 = a @ jet.xu
        b2 = a @ jet.xv
        det = form.det
        cu = (form.h22 * b1 - form.h12 * b2) / det
        cv = (form.h11 * b2 - form.h12 * b1) / det
    return a - np.outer(cu, jet.xu) - np.outer(cv, jet.xv)


def orthonormalize(
    raw: np.ndarray,
    recipe: Optional[FrameRecipe] = None,
    enforce_thresholds: bool = True,
) -> NormalFrame:
    """Thresholded orthonormalization of raw normal vectors.

    Raises NormBelowThreshold when a raw squared norm falls below tnorm
    (anchor axis too close to the tangent plane) and AngleThreshold when the
    normalized vectors are too far from orthogonal; with
    enforce_thresholds=False only genuine numerical degeneracy raises.
    """
    recipe = recipe or FrameRecipe()
    tnorm = recipe.tnorm if enforce_thresholds else 1e-28
    tangle = recipe.tangle if enforce_thresholds else 1.0 - 1e-12
    r = np.atleast_2d(np.asarray(raw, dtype=float))
    norms_sq = np.einsum("ij,ij->i", r, r)
    below = np.nonzero(norms_sq < tnorm)[0]
    if below.size:
        k = int(below[0])
        raise NormBelowThreshold(
            f"raw normal {k} has squared norm {norms_sq[k]:.6g} < {tnorm:.6g}"
        )
    tilde = r / np.sqrt(norms_sq)[:, None]
    out = [tilde[0]]
    for k in range(1, tilde.shape[0]):
        coeffs = np.array([v @ tilde[k] for v in out])
        c = float(np.sqrt(np.sum(coeffs ** 2)))
        if c > tangle:
            raise AngleThreshold(
                f"normalized normals {k} and predecessors too far from orthogonal: "
                f"|cos| = {c:.6g} > {tangle:.6g}"
            )
        vec = tilde[k] - coeffs @ np.asarray(out)
        out.append(vec / np.sqrt(1.0 - c ** 2))
    return NormalFrame(vectors=np.array(out))


def build_frame(jet: SurfaceJet, recipe: Optional[FrameRecipe] = None) -> NormalFrame:
    """Construct the frame a recipe prescribes at one point (no derivatives)."""
    recipe = recipe or FrameRecipe()
    if recipe.kind == "graph_normals":
        if jet.n != 4:
            raise ValueError("graph normals require ambient dimension 4")
        phi = ScalarJet2(jet.x[2], jet.xu[2], jet.xv[2], jet.xuu[2], jet.xuv[2], jet.xvv[2])
        psi = ScalarJet2(jet.x[3], jet.xu[3], jet.xv[3], jet.xuu[3], jet.xuv[3], jet.xvv[3])
        raw = np.array(graph_normals(phi, psi))
        return orthonormalize(raw, recipe, enforce_thresholds=True)
    raw = projection_frame(jet, recipe.anchors_for(jet.n))
    enforce = recipe.kind == "projection_orthonormalized"
    return orthonormalize(raw, recipe, enforce_thresholds=enforce)


def frame_field_derivatives(
    jet_at: Callable[[float, float], SurfaceJet],
    u: float,
    v: float,
    recipe: Optional[FrameRecipe] = None,
    step: float = 1e-4,
) -> NormalFrame:
    """Frame at (u, v) with central-difference derivatives of the frame field.

    The recipe (with its global anchors) is applied at the four stencil
    neighbors; any frame error there propagates.  Derivatives carry the
    O(step^2) central-difference error.
    """
    recipe = recipe or FrameRecipe()
    center = build_frame(jet_at(u, v), recipe)
    east = build_frame(jet_at(u + step, v), recipe)
    west = build_frame(jet_at(u - step, v), recipe)
    north = build_frame(jet_at(u, v + step), recipe)
    south = build_frame(jet_at(u, v - step), recipe)
    du = (east.vectors - west.vectors) / (2.0 * step)
    dv = (north.vectors - south.vectors) / (2.0 * step)
    derivs = np.stack([du, dv], axis=1)
    return NormalFrame(vectors=center.vectors, derivs=derivs)


# ---------------------------------------------------------------------------
# Vectorized pair construction (ambient dimension 4), shared with the solver.


def projection_pairs_bulk(
    xu: np.ndarray,
    xv: np.ndarray,
    anchors: np.ndarray,
    eps_rank: float = 1e-12,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gram-projection of two anchors against tangent fields xu, xv (N, 4).

    Returns (raw1, raw2, W) where W is the area element per point.  Raises
    DegenerateMetric naming the first offending point index.
    """
    h11 = np.einsum("ij,ij->i", xu, xu)
    h12 = np.einsum("ij,ij->i", xu, xv)
    h22 = np.einsum("ij,ij->i", xv, xv)
    det = h11 * h22 - h12 ** 2
    bad = np.nonzero((det <= eps_rank ** 2) | (h11 <= 0.0))[0]
    if bad.size:
        k = int(bad[0])
        raise DegenerateMetric(
            f"rank-2 condition violated at point index {k}: det={det[k]:.3e}"
        )
    raws = []
    for a in anchors:
        b1 = xu @ a
        b2 = xv @ a
        cu = (h22 * b1 - h12 * b2) / det
        cv = (h11 * b2 - h12 * b1) / det
        raws.append(a - cu[:, None] * xu - cv[:, None] * xv)
    return raws[0], raws[1], np.sqrt(det)


def orthonormalize_pairs_bulk(
    raw1: np.ndarray,
    raw2: np.ndarray,
    tnorm: float = 0.5,
    tangle: float = 0.5,
) -> tuple[np.ndarray, np.ndarray]:
    """Two-vector orthonormalization applied per point; same thresholds as
    orthonormalize(), errors name the first offending point index."""
    for k, raw in enumerate((raw1, raw2)):
        nsq = np.einsum("ij,ij->i", raw, raw)
        bad = np.nonzero(nsq < tnorm)[0]
        if bad.size:
            i = int(bad[0])
            raise NormBelowThreshold(
                f"raw normal {k} at point index {i} has squared norm "
                f"{nsq[i]:.6g} < {tnorm:.6g}"
            )
    t1 = raw1 / np.linalg.norm(raw1, axis=1)[:, None]
    t2 = raw2 / np.linalg.norm(raw2, axis=1)[:, None]
    dot = np.einsum("ij,ij->i", t1, t2)
    bad = np.nonzero(np.abs(dot) > tangle)[0]
    if bad.size:
        i = int(bad[0])
        raise AngleThreshold(
            f"normals at point index {i} too far from orthogonal: "
            f"|cos| = {abs(dot[i]):.6g} > {tangle:.6g}"
        )
    n2 = (t2 - dot[:, None] * t1) / np.sqrt(1.0 - dot ** 2)[:, None]
    return t1, n2
