"""Polyanalytic Bergman kernels by Gram orthonormalization of monomials.

The basis is conj(z)^r z^j (r < q, j < n). For a radial weight the Gram
matrix splits into blocks of equal angular index j - r, each of size at
most q, so conditioning stays mild even for several hundred holomorphic
degrees. Moments are kept in log form: at large m they underflow double
precision long before the kernel itself does.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import warnings
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np
from scipy.linalg import lapack

from .errors import (
    NotPositiveDefiniteError,
    OutOfDomainError,
    QuadratureUnconvergedError,
    ValidationError,
)
from .potential import DomainSpec, HermitianPotential, eval_potential

log = logging.getLogger(__name__)

__all__ = [
    "BasisSpec",
    "QuadratureSpec",
    "GramKernel",
    "IllConditionedWarning",
    "inner_products_disk_constant",
    "inner_products_radial",
    "radial_log_moments",
    "gram_kernel_build",
    "correlation_kernel",
]

FORMAT_VERSION = 1
_DROP = 80.0  # integrand windows stop where exp(log-integrand) falls by e^-80 < 1e-34


class IllConditionedWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class BasisSpec:
    q: int
    n: int
    radial_blocking: bool = True

    def __post_init__(self):
        if self.q < 1 or self.n < 1:
            raise ValidationError("basis needs q >= 1 and n >= 1")

    @property
    def size(self) -> int:
        return self.q * self.n


@dataclass(frozen=True)
class QuadratureSpec:
    radial_nodes: int = 256
    max_doublings: int = 4
    rtol: float = 1e-10
    grid_radial: int = 128
    grid_angular: int = 256
    tail: float = 1e-30


def inner_products_disk_constant(q: int, n: int) -> list[list[Fraction]]:
    """Exact Gram matrix on the unit disk with weight 1/pi.

    Basis order is (r, j) lexicographic. <conj(z)^r z^j, conj(z)^s z^k> equals
    1/(j+s+1) when j - r = k - s and 0 otherwise.
    """
    idx = [(r, j) for r in range(q) for j in range(n)]
    return [
        [Fraction(1, j + s + 1) if j - r == k - s else Fraction(0) for (s, k) in idx]
        for (r, j) in idx
    ]


# ---------------------------------------------------------------- radial moments


def _profile_eval(profile: np.ndarray, rho: np.ndarray) -> np.ndarray:
    t = rho * rho
    out = np.zeros_like(rho)
    for c in profile[::-1]:
        out = out * t + c
    return out


def _rho_dq(profile: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """rho * Q'(rho) = sum 2k p_k rho^(2k)."""
    t = rho * rho
    out = np.zeros_like(rho)
    for k in range(len(profile) - 1, 0, -1):
        out = out * t + 2 * k * profile[k]
    return out * t


def _bisect(fun, lo, hi, iters=200):
    """Vectorized bisection for an increasing fun with fun(lo) <= 0 <= fun(hi)."""
    lo = lo.copy()
    hi = hi.copy()
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        pos = fun(mid) > 0
        hi = np.where(pos, mid, hi)
        lo = np.where(pos, lo, mid)
        if np.all(hi - lo <= 1e-15 * np.maximum(hi, 1e-300)):
            break
    return 0.5 * (lo + hi)


def _moment_windows(profile, m, powers, radius):
    """Peak location and integration window [a, b] of rho^(2p+1) exp(-2mQ(rho)) for each p."""
    expo = 2.0 * powers + 1.0

    def logf(rho, e):
        with np.errstate(divide="ignore"):
            return e * np.log(rho) - 2 * m * _profile_eval(profile, rho)

    # peak solves 2m rho Q'(rho) = 2p + 1; rho Q' is increasing when Delta Q > 0
    hi = np.ones_like(expo)
    for _ in range(200):
        low = 2 * m * _rho_dq(profile, hi) < expo
        if not np.any(low):
            break
        hi = np.where(low, hi * 2, hi)
    if np.any(2 * m * _rho_dq(profile, hi) < expo):
        raise QuadratureUnconvergedError("could not bracket moment peaks; is the potential subharmonic with growth?")
    peak = _bisect(lambda r: 2 * m * _rho_dq(profile, r) - expo, np.zeros_like(expo), hi)
    if radius is not None:
        peak = np.minimum(peak, radius)
    top = logf(peak, expo)
    # left edge: logf increases on (0, peak]
    a = _bisect(lambda r: logf(r, expo) - (top - _DROP), np.zeros_like(expo), peak)
    # right edge: logf decreases beyond the peak
    b_hi = np.maximum(peak * 2, 1e-3)
    for _ in range(200):
        still = logf(b_hi, expo) > top - _DROP
        if radius is not None:
            still &= b_hi < radius
        if not np.any(still):
            break
        b_hi = np.where(still, b_hi * 2, b_hi)
    if radius is not None:
        b_hi = np.minimum(b_hi, radius)
    b = _bisect(lambda r: -(logf(r, expo) - (top - _DROP)), peak, b_hi)
    if radius is not None:
        b = np.where(logf(np.full_like(expo, radius), expo) > top - _DROP, radius, b)
    return a, b, top


def radial_log_moments(
    profile: np.ndarray,
    m: float,
    pmax: int,
    radius: float | None = None,
    quad: QuadratureSpec = QuadratureSpec(),
) -> tuple[np.ndarray, dict]:
    """log of M_p = 2 pi int_0^R rho^(2p+1) exp(-2 m Q(rho)) d rho for p = 0..pmax.

    Each moment is integrated by Gauss-Legendre on its own window around the
    peak of the integrand; the node count doubles until two successive
    results agree to ``quad.rtol``.

    Raises
    ------
    QuadratureUnconvergedError
        If the doubling budget is exhausted.
    """
    profile = np.asarray(profile, dtype=float)
    powers = np.arange(pmax + 1, dtype=float)
    a, b, top = _moment_windows(profile, m, powers, radius)
    expo = 2.0 * powers + 1.0

    def integrate(nodes):
        x, w = np.polynomial.legendre.leggauss(nodes)
        half = 0.5 * (b - a)
        rho = 0.5 * (b + a)[:, None] + half[:, None] * x[None, :]
        lf = expo[:, None] * np.log(rho) - 2 * m * _profile_eval(profile, rho)
        s = np.sum(w[None, :] * np.exp(lf - top[:, None]), axis=1) * half
        return np.log(2 * np.pi) + top + np.log(s)

    nodes = quad.radial_nodes
    prev = integrate(nodes)
    for _ in range(quad.max_doublings):
        nodes *= 2
        cur = integrate(nodes)
        change = np.max(np.abs(np.expm1(cur - prev)))
        if change <= quad.rtol:
            meta = {"nodes": nodes, "max_rel_change": float(change), "truncation_radius": float(np.max(b))}
            return cur, meta
        prev = cur
    raise QuadratureUnconvergedError(
        f"radial moments changed by {change:.2e} > {quad.rtol:.0e} after {quad.max_doublings} doublings"
    )


def inner_products_radial(
    P: HermitianPotential,
    m: float,
    q: int,
    n: int,
    radius: float | None = None,
    quad: QuadratureSpec = QuadratureSpec(),
) -> np.ndarray:
    """Full (q n) x (q n) Gram matrix for a radial weight exp(-2mQ), basis order (r, j)."""
    if not P.is_radial:
        raise ValidationError("inner_products_radial needs a radial potential")
    logm, _ = radial_log_moments(P.radial_profile(), m, n + q - 2, radius, quad)
    idx = [(r, j) for r in range(q) for j in range(n)]
    G = np.zeros((len(idx), len(idx)))
    for a, (r, j) in enumerate(idx):
        for c, (s, k) in enumerate(idx):
            if j - r == k - s:
                G[a, c] = math.exp(logm[j + s])
    return G


# ---------------------------------------------------------------- factorization


def _ldl_exact(G: list[list[Fraction]]):
    """G = L D L^T over the rationals (L unit lower triangular)."""
    size = len(G)
    L = [[Fraction(int(i == j)) for j in range(size)] for i in range(size)]
    D = [Fraction(0)] * size
    for j in range(size):
        D[j] = G[j][j] - sum(L[j][k] ** 2 * D[k] for k in range(j))
        if D[j] <= 0:
            raise NotPositiveDefiniteError(f"exact Gram block not positive definite at pivot {j}", pivot=j)
        for i in range(j + 1, size):
            L[i][j] = (G[i][j] - sum(L[i][k] * L[j][k] * D[k] for k in range(j))) / D[j]
    return L, D


def _inv_unit_lower_exact(L):
    size = len(L)
    inv = [[Fraction(int(i == j)) for j in range(size)] for i in range(size)]
    for i in range(size):
        for j in range(i):
            inv[i][j] = -sum(L[i][k] * inv[k][j] for k in range(j, i))
    return inv


def _orthonormalizer(Gs: np.ndarray, offset: int) -> tuple[np.ndarray, float]:
    """Matrix W with W Gs W^* = I, preferring the inverse Cholesky factor.

    Gs is the unit-diagonal scaled Gram block. Falls back to an eigenvalue
    route when Cholesky stalls but the block is still numerically positive.
    """
    evals = np.linalg.eigvalsh(Gs)
    cond = float(evals[-1] / evals[0]) if evals[0] > 0 else math.inf
    potrf = lapack.zpotrf if np.iscomplexobj(Gs) else lapack.dpotrf
    L, info = potrf(Gs, lower=1)
    if info == 0:
        L = np.tril(L)
        W = np.linalg.solve(L, np.eye(len(Gs)))
        return np.tril(W), cond
    evals, U = np.linalg.eigh(Gs)
    if evals[0] <= 1e-14 * evals[-1]:
        raise NotPositiveDefiniteError(
            f"Gram matrix not positive definite (pivot {offset + info - 1})", pivot=offset + info - 1
        )
    log.warning("cholesky failed at pivot %d; using eigenvalue orthonormalization", offset + info - 1)
    return (U / np.sqrt(evals)).conj().T, cond


# ---------------------------------------------------------------- kernel object


@dataclass
class GramKernel:
    """Orthonormalized finite-basis kernel.

    Basis functions are grouped into blocks (padded to a common width).
    For block b and slot i, ``r[b, i]``, ``j[b, i]`` give the exponents of
    conj(z)^r z^j, ``lognorm`` is half the log of its Gram diagonal and
    ``W[b]`` orthonormalizes the unit-norm block.
    """

    basis: BasisSpec
    domain: DomainSpec
    potential: HermitianPotential | None
    r: np.ndarray
    j: np.ndarray
    mask: np.ndarray
    lognorm: np.ndarray
    W: np.ndarray
    condition_estimate: float
    quadrature: dict = field(default_factory=dict)

    @property
    def m(self):
        return self.domain.m

    # weights ---------------------------------------------------------------
    def log_weight(self, z) -> np.ndarray:
        """log of the weight omega(z)."""
        z = np.asarray(z, dtype=complex)
        if self.potential is None:
            return np.full(z.shape, -math.log(math.pi))
        return -2.0 * self.m * eval_potential(self.potential, z)

    def weight(self, z):
        return np.exp(self.log_weight(z))

    # evaluation ------------------------------------------------------------
    def _check(self, *pts):
        if self.domain.kind == "disk":
            for p in pts:
                if not np.all(self.domain.contains(p)):
                    raise OutOfDomainError("evaluation point outside the disk domain")

    def _phi(self, z, zp, shift=None):
        """Orthonormal functions E[phi](z, z') as an array (blocks, width, *pts)."""
        z = np.asarray(z, dtype=complex)
        zp = np.asarray(zp, dtype=complex)
        az, azp = np.abs(z), np.abs(zp)
        ext = (Ellipsis,) + (None,) * z.ndim
        r = self.r[ext]
        j = self.j[ext]
        with np.errstate(divide="ignore", invalid="ignore"):
            lz = np.where(j == 0, 0.0, j * np.log(az))
            lzp = np.where(r == 0, 0.0, r * np.log(azp))
        logmag = lz + lzp - self.lognorm[ext]
        if shift is not None:
            logmag = logmag + shift
        phase = j * np.angle(z) - r * np.angle(zp)
        v = np.where(self.mask[ext], np.exp(logmag + 1j * phase), 0.0)
        return np.einsum("bik,bk...->bi...", self.W, v)

    def _pair(self, z, zp, w, wp, shift_z=None, shift_w=None):
        self._check(z, zp, w, wp)
        z, zp, w, wp = np.broadcast_arrays(*(np.asarray(v, dtype=complex) for v in (z, zp, w, wp)))
        if shift_z is not None:
            shift_z, shift_w = np.broadcast_to(shift_z, z.shape), np.broadcast_to(shift_w, z.shape)
        fz = self._phi(z, zp, shift_z)
        fw = self._phi(w, wp, shift_w)
        out = np.sum(fz * np.conj(fw), axis=(0, 1))
        return out if np.ndim(out) else complex(out)

    def lift(self, z, zprime, w, wprime):
        """E(x)2[K](z, z'; w, w'): basis extended by conj(z) -> conj(z'), conj(w) -> conj(w')."""
        return self._pair(z, zprime, w, wprime)

    def kernel(self, z, w):
        return self._pair(z, z, w, w)

    __call__ = kernel

    def lift_normalized(self, z, zprime, w, wprime):
        """Lift times sqrt(omega(z) omega(w)), computed with the weight folded into the logs."""
        return self._pair(z, zprime, w, wprime, 0.5 * self.log_weight(z), 0.5 * self.log_weight(w))

    def normalized(self, z, w):
        return self.lift_normalized(z, z, w, w)

    correlation = normalized

    def diag(self, z):
        return np.real(self.kernel(z, z))

    # persistence -------------------------------------------------------------
    def arrays(self) -> dict[str, np.ndarray]:
        return {"r": self.r, "j": self.j, "mask": self.mask, "lognorm": self.lognorm, "W": self.W}


def _radial_blocks(q: int, n: int):
    blocks = []
    for ell in range(-(q - 1), n):
        members = [(r, r + ell) for r in range(q) if 0 <= r + ell < n]
        blocks.append(members)
    return blocks


def _pack(blocks, lognorms, Ws, width):
    B = len(blocks)
    r = np.zeros((B, width), dtype=np.int64)
    j = np.zeros((B, width), dtype=np.int64)
    mask = np.zeros((B, width), dtype=bool)
    ln = np.zeros((B, width))
    dtype = np.result_type(*[w.dtype for w in Ws])
    W = np.zeros((B, width, width), dtype=dtype)
    for b, members in enumerate(blocks):
        k = len(members)
        r[b, :k] = [mm[0] for mm in members]
        j[b, :k] = [mm[1] for mm in members]
        mask[b, :k] = True
        ln[b, :k] = lognorms[b]
        W[b, :k, :k] = Ws[b]
    return r, j, mask, ln, W


def _build_disk_constant(spec: BasisSpec):
    """Exact rational factorization of the unit-disk Gram blocks (weight 1/pi)."""
    blocks = _radial_blocks(spec.q, spec.n) if spec.radial_blocking else [
        [(r, j) for r in range(spec.q) for j in range(spec.n)]
    ]
    lognorms, Ws, conds = [], [], []
    offset = 0
    for members in blocks:
        G = [
            [Fraction(1, j + s + 1) if j - r == k - s else Fraction(0) for (s, k) in members]
            for (r, j) in members
        ]
        try:
            L, D = _ldl_exact(G)
        except NotPositiveDefiniteError as exc:
            raise NotPositiveDefiniteError(str(exc), pivot=offset + exc.pivot) from None
        Linv = _inv_unit_lower_exact(L)
        k = len(members)
        ln = np.array([0.5 * math.log(G[i][i]) for i in range(k)])
        # W = D^(-1/2) L^(-1) diag(norms): rows orthonormalize the unit-norm basis
        W = np.array(
            [[float(Linv[i][c]) / math.sqrt(D[i]) * math.exp(ln[c]) for c in range(k)] for i in range(k)]
        )
        Gf = np.array([[float(x) for x in row] for row in G])
        sc = np.exp(-ln)
        ev = np.linalg.eigvalsh(Gf * sc[:, None] * sc[None, :])
        conds.append(float(ev[-1] / ev[0]))
        lognorms.append(ln)
        Ws.append(W)
        offset += k
    width = max(len(b) for b in blocks)
    return _pack(blocks, lognorms, Ws, width), max(conds), {"kind": "exact-rational"}


def _build_radial(P: HermitianPotential, m: float, spec: BasisSpec, radius, quad: QuadratureSpec):
    pmax = spec.n + spec.q - 2
    logm, meta = radial_log_moments(P.radial_profile(), m, pmax, radius, quad)
    blocks = _radial_blocks(spec.q, spec.n)
    lognorms, Ws, conds = [], [], []
    offset = 0
    for members in blocks:
        # diagonal entry of (r, j) is M_{j+r}; entry ((r,j),(s,k)) is M_{j+s}
        ln = np.array([0.5 * logm[j + r] for (r, j) in members])
        Gs = np.array(
            [[math.exp(logm[j + s] - ln[a] - ln[c]) for c, (s, k) in enumerate(members)]
             for a, (r, j) in enumerate(members)]
        )
        W, cond = _orthonormalizer(Gs, offset)
        lognorms.append(ln)
        Ws.append(W)
        conds.append(cond)
        offset += len(members)
    width = max(len(b) for b in blocks)
    meta = dict(meta, kind="radial-gauss-legendre")
    return _pack(blocks, lognorms, Ws, width), max(conds), meta


def _plane_radius_2d(P, m, spec, center):
    """Truncation radius for the 2D path: integrand tail below ``tail`` of its peak."""
    t = 2 * np.pi * np.arange(64) / 64
    expo = 2 * (spec.n + spec.q) + 1

    def env(R):
        vals = -2 * m * eval_potential(P, center + R * np.exp(1j * t))
        return expo * math.log(R) + float(np.max(vals))

    R = 1.0
    while True:
        grid = np.linspace(1e-3, R, 400)
        peak = max(env(g) for g in grid)
        if env(R) < peak - _DROP:
            return R
        R *= 1.5
        if R > 1e6:
            raise QuadratureUnconvergedError("weight does not decay; cannot truncate the plane")


def _build_2d(P, m, spec: BasisSpec, domain: DomainSpec, quad: QuadratureSpec):
    """General path: polar tensor quadrature, one full block."""
    center = domain.center
    R = domain.radius if domain.kind == "disk" else _plane_radius_2d(P, m, spec, center)
    x, wr = np.polynomial.legendre.leggauss(quad.grid_radial)
    rho = 0.5 * R * (x + 1)
    wr = 0.5 * R * wr * rho
    t = 2 * np.pi * np.arange(quad.grid_angular) / quad.grid_angular
    pts = (center + rho[:, None] * np.exp(1j * t)[None, :]).ravel()
    wts = np.repeat(wr, quad.grid_angular) * (2 * np.pi / quad.grid_angular)
    lw = np.log(wts) + (-2 * m * eval_potential(P, pts) if P is not None else -math.log(math.pi))
    members = [(r, j) for r in range(spec.q) for j in range(spec.n)]
    rr = np.array([a for a, _ in members])[:, None]
    jj = np.array([b for _, b in members])[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        lmag = np.where(jj == 0, 0, jj * np.log(np.abs(pts))) + np.where(rr == 0, 0, rr * np.log(np.abs(pts)))
    lmag = lmag + 0.5 * lw[None, :]
    s = np.max(lmag, axis=1)
    F = np.exp(lmag - s[:, None] + 1j * (jj - rr) * np.angle(pts)[None, :])
    G = F @ F.conj().T
    d = np.sqrt(np.real(np.diag(G)))
    ln = s + np.log(d)
    Gs = G / d[:, None] / d[None, :]
    W, cond = _orthonormalizer(Gs, 0)
    packed = _pack([members], [ln], [W], len(members))
    return packed, cond, {"kind": "polar-tensor", "truncation_radius": float(R),
                          "grid": [quad.grid_radial, quad.grid_angular]}


def cache_key(domain: DomainSpec, P: HermitianPotential | None, spec: BasisSpec, quad: QuadratureSpec) -> str:
    payload = {
        "version": FORMAT_VERSION,
        "potential": P.fingerprint() if P is not None else None,
        "domain": [domain.kind, repr(complex(domain.center)), repr(domain.radius), repr(domain.m)],
        "basis": asdict(spec),
        "quad": asdict(quad),
    }
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()


def gram_kernel_build(
    domain: DomainSpec,
    P: HermitianPotential | None,
    spec: BasisSpec,
    quad: QuadratureSpec = QuadratureSpec(),
    cache=None,
) -> GramKernel:
    """Assemble, scale and factor the Gram matrix.

    ``P = None`` (with ``domain.m = None``) selects the unit disk with the
    constant weight 1/pi and exact rational inner products. A radial ``P``
    centered at the origin uses 1D moments and angular blocking; anything
    else falls back to a polar tensor grid with a single dense block.

    Raises
    ------
    NotPositiveDefiniteError
        With the global index of the failing pivot.
    """
    key = cache_key(domain, P, spec, quad)
    if cache is not None:
        hit = cache.load(key)
        if hit is not None:
            arrays, header = hit
            return GramKernel(spec, domain, P, condition_estimate=header["condition"],
                              quadrature=header["quadrature"], **arrays)

    if P is None:
        if domain.kind != "disk" or domain.radius != 1.0 or domain.center != 0 or domain.m is not None:
            raise ValidationError("constant weight is only supported on the unit disk")
        packed, cond, meta = _build_disk_constant(spec)
    else:
        if domain.m is None:
            raise ValidationError("weighted kernels need domain.m")
        radial = P.is_radial and domain.center == 0 and spec.radial_blocking
        if radial:
            radius = domain.radius if domain.kind == "disk" else None
            packed, cond, meta = _build_radial(P, domain.m, spec, radius, quad)
        else:
            packed, cond, meta = _build_2d(P, domain.m, spec, domain, quad)
    if cond > 1e12:
        warnings.warn(f"scaled Gram matrix condition estimate {cond:.2e}", IllConditionedWarning, stacklevel=2)
        log.warning("ill-conditioned Gram matrix: cond=%.3e", cond)
    r, j, mask, ln, W = packed
    gk = GramKernel(spec, domain, P, r, j, mask, ln, W, cond, meta)
    if cache is not None:
        cache.store(key, gk.arrays(), {"condition": cond, "quadrature": meta})
    return gk


def correlation_kernel(source, P: HermitianPotential, m: float, z, w):
    """K(z, w) exp(-m (Q(z) + Q(w))) for any source exposing ``kernel``.

    Sources that know how to fold the weight into their own arithmetic
    (``normalized``) are preferred; the plain product overflows for large m.
    """
    if hasattr(source, "normalized") and getattr(source, "potential", P) is P:
        return source.normalized(z, w)
    k = source.kernel(z, w)
    return k * np.exp(-m * (eval_potential(P, z) + eval_potential(P, w)))
