"""Pointwise differential geometry of two-dimensional immersions in R^n.

Everything here operates on a single parameter point: the second-order jet of
the immersion, the fundamental forms, curvatures per normal direction, the
connection coefficients, and the residuals of the structural equations
(Gauss, Weingarten, and the conformal mean curvature system).

All functions are pure; inputs are treated as immutable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import (
    DegenerateMetric,
    FrameMismatch,
    MissingDerivatives,
    NotConformal,
)

EPS_RANK = 1e-12       # absolute threshold on the area element W
EPS_CONF = 1e-6        # default conformality-defect threshold


def _vec(v, n=None):
    a = np.asarray(v, dtype=float)
    if a.ndim != 1:
        raise ValueError("expected a 1-d vector")
    if n is not None and a.shape[0] != n:
        raise ValueError(f"expected length {n}, got {a.shape[0]}")
    return a


@dataclass(frozen=True)
class SurfaceJet:
    """Position and first/second parameter derivatives of an immersion at one point."""

    x: np.ndarray
    xu: np.ndarray
    xv: np.ndarray
    xuu: np.ndarray
    xuv: np.ndarray
    xvv: np.ndarray

    def __post_init__(self):
        x = _vec(self.x)
        n = x.shape[0]
        if n < 3:
            raise ValueError("ambient dimension must be at least 3")
        object.__setattr__(self, "x", x)
        for name in ("xu", "xv", "xuu", "xuv", "xvv"):
            object.__setattr__(self, name, _vec(getattr(self, name), n))

    @property
    def n(self) -> int:
        """Ambient dimension."""
        return self.x.shape[0]


@dataclass(frozen=True)
class FirstForm:
    """Metric coefficients, area element, and inverse metric at a point."""

    h11: float
    h12: float
    h22: float
    W: float
    hinv11: float
    hinv12: float
    hinv22: float

    @property
    def det(self) -> float:
        return self.h11 * self.h22 - self.h12 ** 2

    def matrix(self) -> np.ndarray:
        return np.array([[self.h11, self.h12], [self.h12, self.h22]])

    def inverse_matrix(self) -> np.ndarray:
        return np.array([[self.hinv11, self.hinv12], [self.hinv12, self.hinv22]])


@dataclass(frozen=True)
class NormalFrame:
    """Orthonormal basis of the normal space, optionally with parameter derivatives.

    vectors has shape (m, n) where m = n - 2; derivs, when present, has shape
    (m, 2, n): derivs[s, 0] and derivs[s, 1] are the u- and v-derivatives of
    vectors[s].
    """

    vectors: np.ndarray
    derivs: Optional[np.ndarray] = None

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=float)
        if v.ndim != 2:
            raise ValueError("vectors must be a (m, n) array")
        object.__setattr__(self, "vectors", v)
        if self.derivs is not None:
            d = np.asarray(self.derivs, dtype=float)
            if d.shape != (v.shape[0], 2, v.shape[1]):
                raise ValueError("derivs must have shape (m, 2, n)")
            object.__setattr__(self, "derivs", d)

    @property
    def count(self) -> int:
        return self.vectors.shape[0]

    def orthonormality_defect(self) -> float:
        g = self.vectors @ self.vectors.T
        return float(np.max(np.abs(g - np.eye(self.count))))

    def normality_defect(self, jet: SurfaceJet) -> float:
        """Largest tangential component, relative to sqrt(W)."""
        form = first_fundamental_form(jet)
        dots = np.concatenate([self.vectors @ jet.xu, self.vectors @ jet.xv])
        return float(np.max(np.abs(dots)) / np.sqrt(form.W))

    def validate(self, jet: Optional[SurfaceJet] = None, tol: float = 1e-10) -> None:
        if self.orthonormality_defect() > tol:
            raise FrameMismatch(
                f"frame not orthonormal: defect {self.orthonormality_defect():.3e}"
            )
        if jet is not None and self.normality_defect(jet) > tol:
            raise FrameMismatch(
                f"frame not normal to the jet: defect {self.normality_defect(jet):.3e}"
            )


@dataclass(frozen=True)
class SecondForm:
    """Second fundamental form coefficients per normal direction (arrays over sigma)."""

    l11: np.ndarray
    l12: np.ndarray
    l22: np.ndarray

    def __post_init__(self):
        for name in ("l11", "l12", "l22"):
            object.__setattr__(self, name, np.atleast_1d(np.asarray(getattr(self, name), dtype=float)))

    @property
    def count(self) -> int:
        return self.l11.shape[0]

    def matrix(self, sigma: int) -> np.ndarray:
        return np.array(
            [[self.l11[sigma], self.l12[sigma]], [self.l12[sigma], self.l22[sigma]]]
        )


@dataclass(frozen=True)
class CurvatureData:
    """Mean, Gauss, and principal curvatures per normal direction."""

    H: np.ndarray
    K: np.ndarray
    kappa1: np.ndarray
    kappa2: np.ndarray


@dataclass(frozen=True)
class ChristoffelSymbols:
    """gamma[k, i, j] with symmetric lower indices, k the contravariant index."""

    gamma: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.gamma, dtype=float)
        if g.shape != (2, 2, 2):
            raise ValueError("gamma must have shape (2, 2, 2)")
        object.__setattr__(self, "gamma", g)


@dataclass(frozen=True)
class TorsionCoefficients:
    """sigma[s, t, i] = derivative of normal s along direction i, dotted with normal t."""

    sigma: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.sigma, dtype=float)
        if s.ndim != 3 or s.shape[0] != s.shape[1] or s.shape[2] != 2:
            raise ValueError("sigma must have shape (m, m, 2)")
        object.__setattr__(self, "sigma", s)


@dataclass(frozen=True)
class CurvatureReport:
    """Everything the toolkit knows about one surface point.

    res_weingarten is None when the frame carries no derivatives; res_mcs is
    None at non-conformal points (the system only holds in conformal
    parameters).
    """

    first_form: FirstForm
    second_form: SecondForm
    curvatures: CurvatureData
    conf_defect: float
    res_gauss: float
    res_weingarten: Optional[float]
    res_mcs: Optional[float]


def first_fundamental_form(jet: SurfaceJet, eps_rank: float = EPS_RANK) -> FirstForm:
    """Metric coefficients h_ij = xu_i . xu_j, the area element, and the inverse metric.

    Raises DegenerateMetric when the determinant h11*h22 - h12^2 falls at or
    below eps_rank**2, i.e. when the parametrization is not an immersion at
    this point.
    """
    h11 = float(jet.xu @ jet.xu)
    h12 = float(jet.xu @ jet.xv)
    h22 = float(jet.xv @ jet.xv)
    det = h11 * h22 - h12 ** 2
    if h11 <= 0.0 or det <= eps_rank ** 2:
        raise DegenerateMetric(
            f"rank-2 condition violated: h11={h11:.3e}, det={det:.3e}"
        )
    w = float(np.sqrt(det))
    return FirstForm(
        h11=h11,
        h12=h12,
        h22=h22,
        W=w,
        hinv11=h22 / det,
        hinv12=-h12 / det,
        hinv22=h11 / det,
    )


def conformality_defect(form: FirstForm) -> tuple[float, float]:
    """(|h11 - h22|/W, |h12|/W); both vanish exactly at conformal points."""
    return abs(form.h11 - form.h22) / form.W, abs(form.h12) / form.W


def conformality_defect_scalar(form: FirstForm) -> float:
    a, b = conformality_defect(form)
    return max(a, b)


def second_fundamental_form(
    jet: SurfaceJet, frame: NormalFrame, tol: float = 1e-8
) -> SecondForm:
    """L_{s,ij} = second derivative dotted with normal s.

    Raises FrameMismatch when any frame vector has a tangential component
    exceeding tol * sqrt(W).
    """
    form = first_fundamental_form(jet)
    sqw = np.sqrt(form.W)
    tang = np.abs(np.concatenate([frame.vectors @ jet.xu, frame.vectors @ jet.xv]))
    if np.max(tang) > tol * sqw:
        raise FrameMismatch(
            f"frame has tangential component {np.max(tang):.3e} > {tol:.1e}*sqrt(W)"
        )
    return SecondForm(
        l11=frame.vectors @ jet.xuu,
        l12=frame.vectors @ jet.xuv,
        l22=frame.vectors @ jet.xvv,
    )


def mean_curvature(L: SecondForm, I: FirstForm) -> np.ndarray:
    """Half-trace of the shape operator per normal direction."""
    det = I.det
    if det <= 0.0:
        raise DegenerateMetric(f"metric determinant {det:.3e} not positive")
    return (L.l11 * I.h22 - 2.0 * L.l12 * I.h12 + L.l22 * I.h11) / (2.0 * det)


def gauss_curvature(L: SecondForm, I: FirstForm) -> np.ndarray:
    """Determinant of the shape operator per normal direction."""
    det = I.det
    if det <= 0.0:
        raise DegenerateMetric(f"metric determinant {det:.3e} not positive")
    return (L.l11 * L.l22 - L.l12 ** 2) / det


def principal_curvatures(L: SecondForm, I: FirstForm) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues of the shape operator, descending, per normal direction.

    Computed through the symmetric congruence I^(-1/2) L I^(-1/2), which has
    the same eigenvalues as L I^(-1) but stays symmetric in floating point,
    so the output is guaranteed real.
    """
    evals, evecs = np.linalg.eigh(I.matrix())
    if np.min(evals) <= 0.0:
        raise DegenerateMetric(f"metric not positive definite: eigenvalues {evals}")
    inv_sqrt = (evecs / np.sqrt(evals)) @ evecs.T
    k1 = np.empty(L.count)
    k2 = np.empty(L.count)
    for s in range(L.count):
        sym = inv_sqrt @ L.matrix(s) @ inv_sqrt
        lo, hi = np.linalg.eigvalsh(0.5 * (sym + sym.T))
        k1[s], k2[s] = hi, lo
    return k1, k2


def curvature_data(L: SecondForm, I: FirstForm) -> CurvatureData:
    """Bundle mean, Gauss, and principal curvatures for all normal directions."""
    k1, k2 = principal_curvatures(L, I)
    return CurvatureData(
        H=mean_curvature(L, I), K=gauss_curvature(L, I), kappa1=k1, kappa2=k2
    )


def christoffel(jet: SurfaceJet) -> ChristoffelSymbols:
    """Connection coefficients from the exact metric derivatives of the jet.

    The metric derivatives are assembled as h_{ij,k} = x_{u_i u_k} . x_{u_j}
    + x_{u_i} . x_{u_j u_k}, which is exact given a second-order jet.
    """
    form = first_fundamental_form(jet)
    du = (jet.xu, jet.xv)
    dduu = ((jet.xuu, jet.xuv), (jet.xuv, jet.xvv))
    # dh[i][j][k] = h_{ij,k}
    dh = np.empty((2, 2, 2))
    for i in range(2):
        for j in range(2):
            for k in range(2):
                dh[i, j, k] = dduu[i][k] @ du[j] + du[i] @ dduu[j][k]
    hinv = form.inverse_matrix()
    gamma = np.empty((2, 2, 2))
    for k in range(2):
        for i in range(2):
            for j in range(2):
                gamma[k, i, j] = 0.5 * sum(
                    hinv[k, l] * (dh[j, l, i] + dh[l, i, j] - dh[i, j, l])
                    for l in range(2)
                )
    return ChristoffelSymbols(gamma=gamma)


def torsion_coefficients(frame: NormalFrame) -> TorsionCoefficients:
    """Normal-bundle connection coefficients from frame derivatives.

    The diagonal is zero by definition; off-diagonal entries are the raw dot
    products, so for finite-difference derivatives the antisymmetry holds
    only to the differencing error.
    """
    if frame.derivs is None:
        raise MissingDerivatives("torsion coefficients need frame derivatives")
    m = frame.count
    sigma = np.empty((m, m, 2))
    for s in range(m):
        for i in range(2):
            sigma[s, :, i] = frame.vectors @ frame.derivs[s, i]
    for s in range(m):
        sigma[s, s, :] = 0.0
    return TorsionCoefficients(sigma=sigma)


def weingarten_residual(
    jet: SurfaceJet,
    frame: NormalFrame,
    L: SecondForm,
    sigma: TorsionCoefficients,
) -> float:
    """Worst defect of the normal-derivative equation, relative to sqrt(W).

    The equation expresses each derivative of a frame vector through the
    shape operator acting on the tangents plus the torsion part; the residual
    vanishes for exact data.
    """
    if frame.derivs is None:
        raise MissingDerivatives("weingarten residual needs frame derivatives")
    form = first_fundamental_form(jet)
    hinv = form.inverse_matrix()
    du = (jet.xu, jet.xv)
    worst = 0.0
    for s in range(frame.count):
        lmat = L.matrix(s)
        for i in range(2):
            shape_part = sum(
                lmat[i, j] * hinv[j, k] * du[k] for j in range(2) for k in range(2)
            )
            torsion_part = sigma.sigma[s, :, i] @ frame.vectors
            res = frame.derivs[s, i] + shape_part - torsion_part
            worst = max(worst, float(np.linalg.norm(res)))
    return worst / np.sqrt(form.W)


def gauss_equation_residual(
    jet: SurfaceJet,
    frame: NormalFrame,
    L: SecondForm,
    gamma: ChristoffelSymbols,
) -> float:
    """Worst defect of the second-derivative decomposition, relative to sqrt(W)."""
    form = first_fundamental_form(jet)
    du = (jet.xu, jet.xv)
    dduu = ((jet.xuu, jet.xuv), (jet.xuv, jet.xvv))
    lmats = [L.matrix(s) for s in range(L.count)]
    worst = 0.0
    for i in range(2):
        for j in range(2):
            tangent = sum(gamma.gamma[k, i, j] * du[k] for k in range(2))
            normal = sum(
                lmats[s][i, j] * frame.vectors[s] for s in range(frame.count)
            )
            res = dduu[i][j] - tangent - normal
            worst = max(worst, float(np.linalg.norm(res)))
    return worst / np.sqrt(form.W)


def mean_curvature_system_residual(
    jet: SurfaceJet,
    frame: NormalFrame,
    H: Sequence[float],
    eps_conf: float = EPS_CONF,
) -> float:
    """|laplacian of X - 2 sum_s H_s W N_s| / W at a conformal point.

    Raises NotConformal when the conformality defect exceeds eps_conf; the
    system only holds in conformal parameters.
    """
    form = first_fundamental_form(jet)
    defect = conformality_defect_scalar(form)
    if defect > eps_conf:
        raise NotConformal(
            f"conformality defect {defect:.3e} exceeds {eps_conf:.1e}"
        )
    h = np.atleast_1d(np.asarray(H, dtype=float))
    lap = jet.xuu + jet.xvv
    rhs = 2.0 * form.W * (h @ frame.vectors)
    return float(np.linalg.norm(lap - rhs)) / form.W


def structure_condition_ratio(
    jet: SurfaceJet,
    H: Optional[Sequence[float]] = None,
    eps_conf: float = EPS_CONF,
) -> float:
    """|laplacian of X| / |grad X|^2 at a conformal point.

    The quadratic-growth structure of the system bounds this ratio by
    h0 = sum_s |H_s|; H is accepted so callers can form that bound alongside
    the ratio, but the ratio itself does not depend on it.
    """
    form = first_fundamental_form(jet)
    defect = conformality_defect_scalar(form)
    if defect > eps_conf:
        raise NotConformal(
            f"conformality defect {defect:.3e} exceeds {eps_conf:.1e}"
        )
    lap = jet.xuu + jet.xvv
    grad2 = form.h11 + form.h22
    return float(np.linalg.norm(lap)) / grad2


def laplace_quotient_mean_curvature(jet: SurfaceJet, frame: NormalFrame,
                                    eps_conf: float = EPS_CONF) -> np.ndarray:
    """Mean curvature per normal direction as (laplacian of X . N_s) / (2 W).

    Valid in conformal parameters only; serves as an independent cross-check
    of the trace formula.
    """
    form = first_fundamental_form(jet)
    defect = conformality_defect_scalar(form)
    if defect > eps_conf:
        raise NotConformal(
            f"conformality defect {defect:.3e} exceeds {eps_conf:.1e}"
        )
    lap = jet.xuu + jet.xvv
    return (frame.vectors @ lap) / (2.0 * form.W)


def curvature_report(
    jet: SurfaceJet,
    frame: NormalFrame,
    eps_conf: float = EPS_CONF,
) -> CurvatureReport:
    """Full pointwise report: forms, curvatures, and structural residuals."""
    form = first_fundamental_form(jet)
    L = second_fundamental_form(jet, frame)
    data = curvature_data(L, form)
    defect = conformality_defect_scalar(form)
    gamma = christoffel(jet)
    res_gauss = gauss_equation_residual(jet, frame, L, gamma)
    res_wein = None
    if frame.derivs is not None:
        sig = torsion_coefficients(frame)
        res_wein = weingarten_residual(jet, frame, L, sig)
    res_mcs = None
    if defect <= eps_conf:
        res_mcs = mean_curvature_system_residual(jet, frame, data.H, eps_conf)
    return CurvatureReport(
        first_form=form,
        second_form=L,
        curvatures=data,
        conf_defect=defect,
        res_gauss=res_gauss,
        res_weingarten=res_wein,
        res_mcs=res_mcs,
    )
