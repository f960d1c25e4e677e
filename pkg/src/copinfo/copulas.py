"""Copula families: CDF evaluation, sampling, tau calibration, combinators.

A copula is represented by an immutable :class:`CopulaSpec` (family tag,
dimension, parameter dict).  Specs are cheap value objects safe to share
across workers; samplers take an explicit seed and own their RNG state.

Families with a closed-form CDF are evaluated exactly.  The Gaussian and
Student-t families exist only as samplers for the rank-based power study;
asking for their CDF raises :class:`UnsupportedCopulaOperation`.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
from scipy import integrate, optimize
from scipy.stats import norm as _norm, t as _t

from .empirical import RankMatrix, ecop_eval

__all__ = [
    "CopulaSpec",
    "UnsupportedCopulaOperation",
    "product",
    "frechet_upper",
    "frechet_lower",
    "clayton",
    "gumbel_hougaard",
    "frank",
    "fgm",
    "marshall_olkin",
    "cuadras_auge",
    "gumbel_barnett",
    "gaussian",
    "student_t",
    "counterexample",
    "empirical_copula",
    "wam",
    "wgm",
    "eval_cdf",
    "sample",
    "from_kendall_tau",
    "plod_compare",
    "spec_to_dict",
    "spec_from_dict",
    "spec_to_json",
    "spec_from_json",
]


class UnsupportedCopulaOperation(RuntimeError):
    """Raised when a family lacks the requested operation (CDF or sampler)."""


@dataclass(frozen=True, eq=False)
class CopulaSpec:
    """Immutable copula description: family tag, dimension, parameters."""

    family: str
    d: int
    params: dict = field(default_factory=dict)

    def __repr__(self):  # params kept short; children print recursively
        if self.params:
            inner = ", ".join(f"{k}={v!r}" for k, v in self.params.items())
            return f"CopulaSpec({self.family}, d={self.d}, {inner})"
        return f"CopulaSpec({self.family}, d={self.d})"


# ---------------------------------------------------------------------------
# constructors (each validates its parameter domain)
# ---------------------------------------------------------------------------


def _need(cond: bool, msg: str) -> None:
    if not cond:
        raise ValueError(msg)


def product(d: int = 2) -> CopulaSpec:
    _need(d >= 2, "dimension must be >= 2")
    return CopulaSpec("product", d)


def frechet_upper(d: int = 2) -> CopulaSpec:
    _need(d >= 2, "dimension must be >= 2")
    return CopulaSpec("frechet-upper", d)


def frechet_lower() -> CopulaSpec:
    """Countermonotone bound; a copula only in dimension 2."""
    return CopulaSpec("frechet-lower", 2)


def clayton(theta: float, d: int = 2) -> CopulaSpec:
    _need(d >= 2, "dimension must be >= 2")
    _need(theta != 0.0, "theta=0 is the independence limit; use product()")
    if d == 2:
        _need(theta >= -1.0, f"bivariate Clayton needs theta >= -1, got {theta}")
    else:
        _need(theta > 0.0, f"Clayton with d={d} needs theta > 0, got {theta}")
    return CopulaSpec("clayton", d, {"theta": float(theta)})


def gumbel_hougaard(theta: float, d: int = 2) -> CopulaSpec:
    _need(d >= 2, "dimension must be >= 2")
    _need(theta >= 1.0, f"Gumbel-Hougaard needs theta >= 1, got {theta}")
    return CopulaSpec("gumbel-hougaard", d, {"theta": float(theta)})


def frank(theta: float, d: int = 2) -> CopulaSpec:
    _need(d >= 2, "dimension must be >= 2")
    _need(theta != 0.0, "theta=0 is the independence limit; use product()")
    if d > 2:
        _need(theta > 0.0, f"Frank with d={d} needs theta > 0, got {theta}")
    return CopulaSpec("frank", d, {"theta": float(theta)})


def fgm(theta: float) -> CopulaSpec:
    _need(-1.0 <= theta <= 1.0, f"FGM needs theta in [-1, 1], got {theta}")
    return CopulaSpec("fgm", 2, {"theta": float(theta)})


def marshall_olkin(p: float, q: float) -> CopulaSpec:
    _need(0.0 <= p <= 1.0 and 0.0 <= q <= 1.0, "Marshall-Olkin needs p, q in [0, 1]")
    return CopulaSpec("marshall-olkin", 2, {"p": float(p), "q": float(q)})


def cuadras_auge(gammas: Sequence[float]) -> CopulaSpec:
    """Ordered-power copula ``prod_i u_[i]^gamma_i`` (coordinates ascending).

    Uniform margins force the first exponent (on the smallest coordinate)
    to be 1; the remaining exponents live in [0, 1].  The classic bivariate
    family with weight g corresponds to exponents (1, 1-g).
    """
    g = tuple(float(x) for x in gammas)
    _need(len(g) >= 2, "need at least two exponents")
    _need(g[0] == 1.0, f"first exponent must be 1 for uniform margins, got {g[0]}")
    _need(all(0.0 <= x <= 1.0 for x in g[1:]), "exponents must lie in [0, 1]")
    return CopulaSpec("cuadras-auge", len(g), {"gammas": g})


def gumbel_barnett(phi: float) -> CopulaSpec:
    _need(0.0 <= phi <= 1.0, f"Gumbel-Barnett needs phi in [0, 1], got {phi}")
    return CopulaSpec("gumbel-barnett", 2, {"phi": float(phi)})


def gaussian(rho: float) -> CopulaSpec:
    _need(-1.0 < rho < 1.0, f"Gaussian copula needs rho in (-1, 1), got {rho}")
    return CopulaSpec("gaussian", 2, {"rho": float(rho)})


def student_t(rho: float, nu: float = 4.0) -> CopulaSpec:
    _need(-1.0 < rho < 1.0, f"t copula needs rho in (-1, 1), got {rho}")
    _need(nu > 0.0, f"t copula needs nu > 0, got {nu}")
    return CopulaSpec("student-t", 2, {"rho": float(rho), "nu": float(nu)})


def counterexample() -> CopulaSpec:
    """Archimedean copula 1/(1 + sqrt((1/u-1)^2 + (1/v-1)^2)), 0 on the boundary.

    Sits strictly below the upper Frechet bound, yet its cumulative entropy
    crosses that of the bound as the order parameter moves through 1 -- the
    standard counterexample showing orthant ordering does not order entropy.
    """
    return CopulaSpec("counterexample", 2)


def empirical_copula(ranks: RankMatrix) -> CopulaSpec:
    return CopulaSpec("empirical", ranks.d, {"ranks": ranks})


def _check_children(children: Sequence[CopulaSpec], weights: Sequence[float]):
    ch = tuple(children)
    w = tuple(float(x) for x in weights)
    _need(len(ch) >= 1 and len(ch) == len(w), "children/weights length mismatch")
    _need(all(x >= 0.0 for x in w), "weights must be nonnegative")
    _need(abs(sum(w) - 1.0) <= 1e-12, f"weights must sum to 1, got {sum(w)}")
    d = ch[0].d
    _need(all(c.d == d for c in ch), "children must share one dimension")
    return ch, w, d


def wam(children: Sequence[CopulaSpec], weights: Sequence[float]) -> CopulaSpec:
    """Weighted arithmetic mean of copulas (always a copula)."""
    ch, w, d = _check_children(children, weights)
    return CopulaSpec("wam", d, {"children": ch, "weights": w})


def wgm(children: Sequence[CopulaSpec], exponents: Sequence[float]) -> CopulaSpec:
    """Weighted geometric mean of copulas.

    Not guaranteed to be a copula for every combination; construction is
    allowed but flagged with a warning.
    """
    ch, q, d = _check_children(children, exponents)
    warnings.warn(
        "weighted geometric mean of copulas is not always a valid copula",
        UserWarning,
        stacklevel=2,
    )
    return CopulaSpec("wgm", d, {"children": ch, "weights": q})


# ---------------------------------------------------------------------------
# CDF evaluation
# ---------------------------------------------------------------------------


def eval_cdf(spec: CopulaSpec, u) -> np.ndarray | float:
    """Evaluate C(u) for points in the closed unit hypercube.

    ``u`` is a single point of length d or an (m, d) array; returns a scalar
    or a length-m array accordingly.
    """
    pts = np.asarray(u, dtype=float)
    scalar = pts.ndim == 1
    if scalar:
        pts = pts[None, :]
    if pts.ndim != 2 or pts.shape[1] != spec.d:
        raise ValueError(f"points have shape {np.shape(u)}, expected (*, {spec.d})")
    if np.any((pts < 0) | (pts > 1)):
        raise ValueError("points must lie in the unit hypercube")
    out = _cdf_dispatch(spec, pts)
    return float(out[0]) if scalar else out


def _cdf_dispatch(spec: CopulaSpec, u: np.ndarray) -> np.ndarray:
    fam, p = spec.family, spec.params
    if fam == "product":
        return np.prod(u, axis=1)
    if fam == "frechet-upper":
        return np.min(u, axis=1)
    if fam == "frechet-lower":
        return np.maximum(u[:, 0] + u[:, 1] - 1.0, 0.0)
    if fam == "clayton":
        th = p["theta"]
        with np.errstate(divide="ignore", over="ignore"):
            s = np.sum(u ** (-th), axis=1) - spec.d + 1.0
            if th > 0:
                return np.where(np.isinf(s), 0.0, s ** (-1.0 / th))
            return np.maximum(s, 0.0) ** (-1.0 / th)
    if fam == "gumbel-hougaard":
        th = p["theta"]
        with np.errstate(divide="ignore", over="ignore"):
            t = np.sum((-np.log(u)) ** th, axis=1)
            return np.exp(-(t ** (1.0 / th)))
    if fam == "frank":
        th = p["theta"]
        num = np.prod(np.expm1(-th * u), axis=1)
        den = np.expm1(-th) ** (spec.d - 1)
        return -np.log1p(num / den) / th
    if fam == "fgm":
        th = p["theta"]
        a, b = u[:, 0], u[:, 1]
        return a * b * (1.0 + th * (1.0 - a) * (1.0 - b))
    if fam == "marshall-olkin":
        pp, qq = p["p"], p["q"]
        a, b = u[:, 0], u[:, 1]
        return np.minimum(a * b ** (1.0 - qq), a ** (1.0 - pp) * b)
    if fam == "cuadras-auge":
        g = np.asarray(p["gammas"])
        srt = np.sort(u, axis=1)
        return np.prod(srt**g, axis=1)
    if fam == "gumbel-barnett":
        phi = p["phi"]
        a, b = u[:, 0], u[:, 1]
        grounded = (a == 0.0) | (b == 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = a * b * np.exp(-phi * np.log(a) * np.log(b))
        return np.where(grounded, 0.0, val)
    if fam == "counterexample":
        a, b = u[:, 0], u[:, 1]
        grounded = (a == 0.0) | (b == 0.0)
        with np.errstate(divide="ignore"):
            r = np.sqrt((1.0 / a - 1.0) ** 2 + (1.0 / b - 1.0) ** 2)
            val = 1.0 / (1.0 + r)
        return np.where(grounded, 0.0, val)
    if fam == "empirical":
        return ecop_eval(p["ranks"], u)
    if fam == "wam":
        acc = np.zeros(len(u))
        for w, child in zip(p["weights"], p["children"]):
            acc += w * _cdf_dispatch(child, u)
        return acc
    if fam == "wgm":
        acc = np.ones(len(u))
        for q, child in zip(p["weights"], p["children"]):
            acc *= _cdf_dispatch(child, u) ** q
        return acc
    if fam in ("gaussian", "student-t"):
        raise UnsupportedCopulaOperation(
            f"{fam} copula CDF is not implemented (sampling only)"
        )
    raise ValueError(f"unknown copula family {spec.family!r}")


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------


def sample(spec: CopulaSpec, n: int, seed) -> np.ndarray:
    """Draw n i.i.d. rows from the copula; deterministic given the seed."""
    if n < 1:
        raise ValueError("need n >= 1")
    rng = np.random.default_rng(seed)
    fam, p, d = spec.family, spec.params, spec.d

    if fam == "product":
        return rng.uniform(size=(n, d))
    if fam == "frechet-upper":
        u = rng.uniform(size=n)
        return np.tile(u[:, None], (1, d))
    if fam == "frechet-lower":
        u = rng.uniform(size=n)
        return np.column_stack([u, 1.0 - u])
    if fam == "clayton":
        th = p["theta"]
        if d == 2:
            # conditional inversion, valid for the whole theta range
            u = rng.uniform(size=n)
            pr = rng.uniform(size=n)
            v = (u ** (-th) * (pr ** (-th / (1.0 + th)) - 1.0) + 1.0) ** (-1.0 / th)
            return np.column_stack([u, v])
        v_frail = rng.gamma(shape=1.0 / th, scale=1.0, size=n)
        e = rng.standard_exponential((n, d))
        return (1.0 + e / v_frail[:, None]) ** (-1.0 / th)
    if fam == "gumbel-hougaard":
        th = p["theta"]
        if th == 1.0:
            return rng.uniform(size=(n, d))
        a = 1.0 / th
        w = rng.uniform(0.0, np.pi, size=n)
        e0 = rng.standard_exponential(n)
        # positive stable frailty with Laplace transform exp(-s**a)
        amp = (
            np.sin(a * w) ** a * np.sin((1.0 - a) * w) ** (1.0 - a) / np.sin(w)
        ) ** (1.0 / (1.0 - a))
        v_frail = (amp / e0) ** ((1.0 - a) / a)
        e = rng.standard_exponential((n, d))
        return np.exp(-((e / v_frail[:, None]) ** a))
    if fam == "frank":
        th = p["theta"]
        if d == 2:
            u = rng.uniform(size=n)
            pr = rng.uniform(size=n)
            a = np.exp(-th * u)
            dn = np.expm1(-th)
            v = -np.log1p(-pr * dn / (pr * (a - 1.0) - a)) / th
            return np.column_stack([u, v])
        v_frail = rng.logseries(-np.expm1(-th), size=n).astype(float)
        e = rng.standard_exponential((n, d))
        t = np.exp(-e / v_frail[:, None])
        return -np.log1p(t * np.expm1(-th)) / th
    if fam == "fgm":
        th = p["theta"]
        u = rng.uniform(size=n)
        pr = rng.uniform(size=n)
        a = th * (1.0 - 2.0 * u)
        v = 2.0 * pr / (np.sqrt((1.0 + a) ** 2 - 4.0 * a * pr) + 1.0 + a)
        return np.column_stack([u, v])
    if fam == "gaussian":
        rho = p["rho"]
        z1 = rng.standard_normal(n)
        z2 = rho * z1 + math.sqrt(1.0 - rho * rho) * rng.standard_normal(n)
        return np.column_stack([_norm.cdf(z1), _norm.cdf(z2)])
    if fam == "student-t":
        rho, nu = p["rho"], p["nu"]
        z1 = rng.standard_normal(n)
        z2 = rho * z1 + math.sqrt(1.0 - rho * rho) * rng.standard_normal(n)
        scale = np.sqrt(rng.chisquare(nu, size=n) / nu)
        return np.column_stack([_t.cdf(z1 / scale, nu), _t.cdf(z2 / scale, nu)])
    raise UnsupportedCopulaOperation(f"no sampler for family {fam!r}")


# ---------------------------------------------------------------------------
# Kendall tau calibration
# ---------------------------------------------------------------------------

_FGM_TAU_MAX = 2.0 / 9.0
_FRANK_THETA_MAX = 50.0


def _debye1(x: float) -> float:
    """First Debye function D1(x) = (1/x) * int_0^x t/(e^t - 1) dt, x > 0."""
    val, _ = integrate.quad(lambda t: t / math.expm1(t) if t > 0 else 1.0, 0.0, x)
    return val / x


def _frank_tau(theta: float) -> float:
    if theta == 0.0:
        return 0.0
    s = 1.0 if theta > 0 else -1.0
    x = abs(theta)
    return s * (1.0 - 4.0 / x * (1.0 - _debye1(x)))


def from_kendall_tau(
    family: str, tau: float, d: int = 2, nu: float = 4.0
) -> CopulaSpec:
    """Build the family member with the requested Kendall tau.

    tau = 0 returns the product copula (the shared independence limit).
    Infeasible targets raise ValueError, except FGM where |tau| > 2/9 is
    clamped to the attainable boundary with a warning.
    """
    _need(-1.0 < tau < 1.0, f"tau must be in (-1, 1), got {tau}")
    if tau == 0.0:
        return product(d)
    if family == "clayton":
        return clayton(2.0 * tau / (1.0 - tau), d)
    if family == "gumbel-hougaard":
        _need(tau > 0.0, f"Gumbel-Hougaard cannot reach tau={tau} < 0")
        return gumbel_hougaard(1.0 / (1.0 - tau), d)
    if family == "gaussian":
        return gaussian(math.sin(math.pi * tau / 2.0))
    if family == "student-t":
        return student_t(math.sin(math.pi * tau / 2.0), nu)
    if family == "fgm":
        theta = 4.5 * tau
        if abs(tau) > _FGM_TAU_MAX:
            warnings.warn(
                f"FGM tau range is [-2/9, 2/9]; clamping tau={tau} to the boundary",
                UserWarning,
                stacklevel=2,
            )
            theta = math.copysign(1.0, tau)
        return fgm(theta)
    if family == "frank":
        _need(
            abs(_frank_tau(_FRANK_THETA_MAX)) >= abs(tau),
            f"Frank tau={tau} outside the solvable range at |theta| <= 50",
        )
        theta = optimize.brentq(
            lambda th: _frank_tau(th) - tau,
            -_FRANK_THETA_MAX,
            _FRANK_THETA_MAX,
            xtol=1e-10,
        )
        return frank(theta, d)
    raise ValueError(f"no Kendall-tau inversion for family {family!r}")


# ---------------------------------------------------------------------------
# pointwise comparison (lower orthant dependence order)
# ---------------------------------------------------------------------------


def plod_compare(
    c1: CopulaSpec, c2: CopulaSpec, grid_resolution: int = 20, tol: float = 1e-12
) -> str:
    """Classify the sign of C1 - C2 on the open lattice {i/(m+1)}^d.

    Returns "c1_below", "c1_above", or "incomparable" (both signs occur).
    Equal-on-lattice pairs come back "c1_below" (the ordering is non-strict).
    """
    if c1.d != c2.d:
        raise ValueError(f"dimension mismatch: {c1.d} vs {c2.d}")
    if grid_resolution < 2:
        raise ValueError("grid_resolution must be >= 2")
    m = grid_resolution
    axis = np.arange(1, m + 1) / (m + 1.0)
    mesh = np.meshgrid(*([axis] * c1.d), indexing="ij")
    pts = np.stack([g.ravel() for g in mesh], axis=1)
    diff = eval_cdf(c1, pts) - eval_cdf(c2, pts)
    has_pos = bool(np.any(diff > tol))
    has_neg = bool(np.any(diff < -tol))
    if has_pos and has_neg:
        return "incomparable"
    if has_pos:
        return "c1_above"
    return "c1_below"


# ---------------------------------------------------------------------------
# JSON serialization {family, d, params}
# ---------------------------------------------------------------------------


def spec_to_dict(spec: CopulaSpec) -> dict:
    params: dict[str, Any] = {}
    for k, v in spec.params.items():
        if k == "children":
            params[k] = [spec_to_dict(c) for c in v]
        elif isinstance(v, RankMatrix):
            params[k] = v.ranks.tolist()
        elif isinstance(v, tuple):
            params[k] = list(v)
        else:
            params[k] = v
    return {"family": spec.family, "d": spec.d, "params": params}


_CONSTRUCTORS = {
    "product": lambda d, p: product(d),
    "frechet-upper": lambda d, p: frechet_upper(d),
    "frechet-lower": lambda d, p: frechet_lower(),
    "clayton": lambda d, p: clayton(p["theta"], d),
    "gumbel-hougaard": lambda d, p: gumbel_hougaard(p["theta"], d),
    "frank": lambda d, p: frank(p["theta"], d),
    "fgm": lambda d, p: fgm(p["theta"]),
    "marshall-olkin": lambda d, p: marshall_olkin(p["p"], p["q"]),
    "cuadras-auge": lambda d, p: cuadras_auge(p["gammas"]),
    "gumbel-barnett": lambda d, p: gumbel_barnett(p["phi"]),
    "gaussian": lambda d, p: gaussian(p["rho"]),
    "student-t": lambda d, p: student_t(p["rho"], p.get("nu", 4.0)),
    "counterexample": lambda d, p: counterexample(),
}


def spec_from_dict(obj: dict) -> CopulaSpec:
    fam = obj["family"]
    d = int(obj.get("d", 2))
    p = obj.get("params", {}) or {}
    if fam == "empirical":
        return empirical_copula(RankMatrix(np.asarray(p["ranks"], dtype=np.int64)))
    if fam in ("wam", "wgm"):
        children = [spec_from_dict(c) for c in p["children"]]
        maker = wam if fam == "wam" else wgm
        return maker(children, p["weights"])
    if fam not in _CONSTRUCTORS:
        raise ValueError(f"unknown copula family {fam!r}")
    return _CONSTRUCTORS[fam](d, p)


def spec_to_json(spec: CopulaSpec) -> str:
    return json.dumps(spec_to_dict(spec), sort_keys=True)


def spec_from_json(text: str) -> CopulaSpec:
    return spec_from_dict(json.loads(text))
