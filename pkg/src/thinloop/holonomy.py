"""Parallel transport in matrix Lie groups, word maps and path signatures.

Transport solves ``dU/dt = A_mu(gamma(t)) gamma'^mu(t) U`` with ``U(0) = I``,
so later pieces of the path multiply on the left and
``U(g1 . g2) = U(g2) U(g1)``.  Each sample interval of the curve is split
into equal substeps; a substep is one fourth-order Magnus step (two Gauss
nodes on the cubic Hermite interpolant of the samples).  All step
propagators are formed at once and multiplied by pairwise reduction, and
several connections over the same group are transported together.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np
from scipy.linalg import expm, logm
from scipy.spatial import cKDTree

from .curvekit.curves import CurveError, SampledCurve
from .curvekit.decompose import ArcDecomposition
from .reparam import bump
from .wordcore import as_word

# ---------------------------------------------------------------------------
# groups


def _pauli():
    s1 = np.array([[0, 1], [1, 0]], dtype=complex)
    s2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
    s3 = np.array([[1, 0], [0, -1]], dtype=complex)
    return s1, s2, s3


@dataclass(frozen=True)
class LieGroupSpec:
    """A matrix group with an algebra basis, an exponential and a projection."""

    name: str
    dim: int
    basis: tuple
    dtype: type

    @property
    def n_basis(self) -> int:
        return len(self.basis)

    @property
    def basis_array(self) -> np.ndarray:
        return np.stack(self.basis).astype(self.dtype)

    def identity(self, batch: tuple = ()) -> np.ndarray:
        return np.broadcast_to(np.eye(self.dim, dtype=self.dtype), batch + (self.dim, self.dim)).copy()

    def in_algebra(self, X: np.ndarray, tol: float = 1e-12) -> bool:
        X = np.asarray(X)
        if self.name in ("SU2", "U1"):
            ok = np.abs(X + np.conj(np.swapaxes(X, -1, -2))).max() <= tol
            if self.name == "SU2":
                ok &= np.abs(np.trace(X, axis1=-2, axis2=-1)).max() <= tol
            return bool(ok)
        if self.name == "SO3":
            return bool(np.abs(X + np.swapaxes(X, -1, -2)).max() <= tol and np.abs(X.imag).max(initial=0) <= tol)
        return bool(np.abs(np.trace(X, axis1=-2, axis2=-1)).max() <= tol)

    def exp(self, X: np.ndarray) -> np.ndarray:
        """Batched exponential of algebra elements (closed forms where cheap)."""
        X = np.asarray(X)
        if self.name == "U1":
            return np.exp(X)
        if self.dim == 2:
            # traceless 2x2: X^2 = -det(X) I
            det = X[..., 0, 0] * X[..., 1, 1] - X[..., 0, 1] * X[..., 1, 0]
            w = np.sqrt((-det).astype(complex))
            c = np.cosh(w)
            small = np.abs(w) < 1e-6
            sinhc = np.where(small, 1 + w * w / 6, np.sinh(w) / np.where(small, 1.0, w))
            out = c[..., None, None] * np.eye(2) + sinhc[..., None, None] * X
            return out if self.dtype is complex else out.real
        if self.name == "SO3":
            # Rodrigues
            X = X.real
            w = np.stack([X[..., 2, 1], X[..., 0, 2], X[..., 1, 0]], axis=-1)
            th = np.linalg.norm(w, axis=-1)[..., None, None]
            small = th < 1e-6
            safe = np.where(small, 1.0, th)
            a = np.where(small, 1 - th ** 2 / 6, np.sin(safe) / safe)
            b = np.where(small, 0.5 - th ** 2 / 24, (1 - np.cos(safe)) / safe ** 2)
            return np.eye(3) + a * X + b * (X @ X)
        return expm(X)

    def log(self, g: np.ndarray) -> np.ndarray:
        """Algebra element with exp(log(g)) = g (principal branch, projected to the algebra)."""
        L = logm(np.asarray(g, dtype=complex)) if self.dim > 1 else np.log(np.asarray(g, dtype=complex))
        return self.project_algebra(L)

    def project_algebra(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X)
        if self.name in ("SU2", "U1"):
            Y = 0.5 * (X - np.conj(np.swapaxes(X, -1, -2)))
            if self.name == "SU2":
                Y = Y - np.trace(Y, axis1=-2, axis2=-1)[..., None, None] * np.eye(2) / 2
            return Y.astype(complex)
        if self.name == "SO3":
            X = X.real
            return 0.5 * (X - np.swapaxes(X, -1, -2))
        X = X.real
        return X - np.trace(X, axis1=-2, axis2=-1)[..., None, None] * np.eye(self.dim) / self.dim

    def project(self, U: np.ndarray) -> np.ndarray:
        """Nearest group element (polar factor with the determinant fixed)."""
        U = np.asarray(U)
        if self.name == "U1":
            return U / np.abs(U)
        if self.name == "SL2R":
            det = np.linalg.det(U)
            return U / np.sqrt(np.abs(det))[..., None, None]
        W, _, Vh = np.linalg.svd(U)
        P = W @ Vh
        if self.name == "SU2":
            det = np.linalg.det(P)
            return P / np.sqrt(det)[..., None, None]
        det = np.linalg.det(P)
        fix = np.where(det < 0, -1.0, 1.0)
        W = W.copy()
        W[..., :, -1] *= fix[..., None]
        return W @ Vh

    def defect(self, U: np.ndarray) -> float:
        """Membership defect of a (batch of) matrices."""
        U = np.asarray(U)
        if self.name == "U1":
            return float(np.max(np.abs(np.abs(U) - 1.0)))
        det = np.linalg.det(U)
        if self.name == "SL2R":
            return float(np.max(np.abs(det - 1.0)))
        I = np.eye(self.dim)
        gram = np.conj(np.swapaxes(U, -1, -2)) @ U - I
        return float(max(np.max(np.linalg.norm(gram, axis=(-2, -1))), np.max(np.abs(det - 1.0))))

    def random_element(self, rng: np.random.Generator) -> np.ndarray:
        """Haar sample for the compact groups; exp of a random algebra element for SL2R."""
        if self.name == "SU2":
            q = rng.normal(size=4)
            a, b, c, d = q / np.linalg.norm(q)
            return np.array([[a + 1j * b, c + 1j * d], [-c + 1j * d, a - 1j * b]])
        if self.name == "SO3":
            q = rng.normal(size=4)
            w, x, y, z = q / np.linalg.norm(q)
            return np.array([
                [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
                [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
                [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)]])
        if self.name == "U1":
            return np.array([[np.exp(1j * rng.uniform(-np.pi, np.pi))]])
        coef = rng.uniform(-1, 1, size=self.n_basis)
        return self.exp(np.einsum("b,bij->ij", coef, self.basis_array))


def _make_groups() -> dict:
    s1, s2, s3 = _pauli()
    so3 = []
    for i, j in ((1, 2), (2, 0), (0, 1)):
        m = np.zeros((3, 3))
        m[i, j], m[j, i] = -1.0, 1.0
        so3.append(m)
    sl2 = [np.array([[1.0, 0], [0, -1.0]]), np.array([[0, 1.0], [0, 0]]), np.array([[0, 0], [1.0, 0]])]
    return {
        "SU2": LieGroupSpec("SU2", 2, tuple(0.5j * s for s in (s1, s2, s3)), complex),
        "SO3": LieGroupSpec("SO3", 3, tuple(so3), float),
        "SL2R": LieGroupSpec("SL2R", 2, tuple(sl2), float),
        "U1": LieGroupSpec("U1", 1, (np.array([[1j]]),), complex),
    }


GROUPS = _make_groups()


def get_group(group) -> LieGroupSpec:
    if isinstance(group, LieGroupSpec):
        return group
    try:
        return GROUPS[str(group).upper()]
    except KeyError:
        raise ValueError(f"unknown group {group!r}; choose from {sorted(GROUPS)}") from None


def deviation(U: np.ndarray) -> np.ndarray:
    """Frobenius distance ||U - I|| (batched)."""
    U = np.asarray(U)
    return np.linalg.norm(U - np.eye(U.shape[-1]), axis=(-2, -1))


# ---------------------------------------------------------------------------
# connections and forms


@dataclass(frozen=True)
class FeatureBasis:
    """Monomials of degree <= ``degree`` and ``sin(W x + c)`` features."""

    dim: int
    degree: int = 2
    freqs: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))
    phases: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def exponents(self) -> list:
        out = []

        def rec(prefix, left, k):
            if k == self.dim:
                out.append(tuple(prefix))
                return
            for e in range(left + 1):
                rec(prefix + [e], left - e, k + 1)

        rec([], self.degree, 0)
        return sorted(out, key=lambda e: (sum(e), [-x for x in e]))

    @property
    def size(self) -> int:
        return len(self.exponents) + len(self.phases)

    def __call__(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        cols = [np.prod(X ** np.asarray(e), axis=1) for e in self.exponents]
        if len(self.phases):
            cols += list(np.sin(X @ np.asarray(self.freqs).T + self.phases).T)
        return np.stack(cols, axis=1)

    @classmethod
    def random(cls, dim: int, rng: np.random.Generator, degree: int = 2) -> "FeatureBasis":
        return cls(dim, degree, rng.uniform(-2, 2, size=(dim, dim)), rng.uniform(-np.pi, np.pi, size=dim))


@dataclass(frozen=True)
class ConnectionField:
    """``A_mu(x) = sum_{k,b} coeffs[mu, k, b] phi_k(x) E_b`` (algebra-valued by construction)."""

    group: LieGroupSpec
    basis: FeatureBasis
    coeffs: np.ndarray  # (dim, n_features, n_basis)
    seed: Optional[int] = None

    def matrices(self, X) -> np.ndarray:
        """A_mu at points X: shape (n, dim, m, m)."""
        phi = self.basis(X)
        coef = np.einsum("nk,dkb->ndb", phi, self.coeffs)
        return np.einsum("ndb,bij->ndij", coef, self.group.basis_array)

    def along(self, X, V) -> np.ndarray:
        """A_mu(x) v^mu: shape (n, m, m)."""
        phi = self.basis(X)
        coef = np.einsum("nk,dkb,nd->nb", phi, self.coeffs, np.asarray(V, dtype=float))
        return np.einsum("nb,bij->nij", coef, self.group.basis_array)


def zero_connection(group, dim: int = 2) -> ConnectionField:
    g = get_group(group)
    basis = FeatureBasis(dim, 0)
    return ConnectionField(g, basis, np.zeros((dim, basis.size, g.n_basis)))


def random_connection(group, seed: int, dim: int = 2, degree: int = 2) -> ConnectionField:
    """Seeded connection: coefficients uniform in [-1, 1]."""
    g = get_group(group)
    rng = np.random.default_rng(seed)
    basis = FeatureBasis.random(dim, rng, degree)
    coeffs = rng.uniform(-1, 1, size=(dim, basis.size, g.n_basis))
    return ConnectionField(g, basis, coeffs, seed)


@dataclass(frozen=True)
class OneForm:
    """Scalar 1-form ``w_mu(x) = sum_k coeffs[mu, k] phi_k(x)``."""

    basis: FeatureBasis
    coeffs: np.ndarray  # (dim, n_features)

    def along(self, X, V) -> np.ndarray:
        return np.einsum("nk,dk,nd->n", self.basis(X), self.coeffs, np.asarray(V, dtype=float))


def random_form(seed: int, dim: int = 2, degree: int = 2) -> OneForm:
    rng = np.random.default_rng(seed)
    basis = FeatureBasis.random(dim, rng, degree)
    return OneForm(basis, rng.uniform(-1, 1, size=(dim, basis.size)))


@dataclass(frozen=True)
class TubeConnection:
    """Connection supported in tubes around arc cores: ``xi_i b_i(x) T_i(x)``.

    ``b_i`` is a bump across the tube times a bump along the arc that
    vanishes near both ends; ``T_i`` is the arc's unit tangent at the
    projection of x.  ``xi_i`` is divided by the arc's along-profile
    integral, so one traversal of arc i transports by ``exp(xi_i)``.
    """

    group: LieGroupSpec
    arcs: tuple       # polylines
    xis: tuple        # algebra elements (already normalized)
    radius: float
    margin: float     # fraction of each arc length left bare at either end

    def _profile_along(self, s, L):
        m = self.margin * L
        w = m  # ramp width
        a = np.clip((s - m) / w, 0.0, 1.0)
        b = np.clip((L - m - s) / w, 0.0, 1.0)
        return bump(a) * bump(b)

    def along(self, X, V) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        V = np.atleast_2d(np.asarray(V, dtype=float))
        out = np.zeros((len(X), self.group.dim, self.group.dim), dtype=self.group.dtype)
        for poly, xi in zip(self.arcs, self.xis):
            s_tab = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(poly, axis=0), axis=1))])
            L = s_tab[-1]
            d, s, tang = _project_polyline(poly, s_tab, X)
            near = d < self.radius
            if not np.any(near):
                continue
            across = 1.0 - bump(np.clip(d[near] / self.radius, 0.0, 1.0))
            weight = across * self._profile_along(s[near], L) * np.einsum("nd,nd->n", tang[near], V[near])
            out[near] += weight[:, None, None] * xi
        return out


def _project_polyline(poly, s_tab, X):
    """Distance, arclength and unit tangent of the nearest point on a polyline."""
    tree = cKDTree(poly)
    _, j = tree.query(X)
    best_d = np.full(len(X), np.inf)
    best_s = np.zeros(len(X))
    best_t = np.zeros_like(X)
    for k in (j - 1, j):
        k = np.clip(k, 0, len(poly) - 2)
        a, b = poly[k], poly[k + 1]
        seg = b - a
        ln = np.linalg.norm(seg, axis=1)
        u = np.clip(np.einsum("nd,nd->n", X - a, seg) / ln ** 2, 0.0, 1.0)
        foot = a + u[:, None] * seg
        dist = np.linalg.norm(X - foot, axis=1)
        better = dist < best_d
        best_d = np.where(better, dist, best_d)
        best_s = np.where(better, s_tab[k] + u * ln, best_s)
        best_t[better] = (seg / ln[:, None])[better]
    return best_d, best_s, best_t


# ---------------------------------------------------------------------------
# transport

_GAUSS = (0.5 - np.sqrt(3) / 6, 0.5 + np.sqrt(3) / 6)


@dataclass(frozen=True)
class HolonomyResult:
    U: np.ndarray
    steps: int
    defect: float
    error_estimate: float = float("nan")

    @property
    def deviation(self) -> float:
        return float(deviation(self.U))


def _substeps(curve: SampledCurve, steps: int) -> int:
    return max(1, int(np.ceil(steps / curve.n)))


def _nodes(curve: SampledCurve, m: int):
    """Step edges and the two Gauss nodes of every substep."""
    t = curve.params
    frac = np.arange(m + 1) / m
    edges = (t[:-1, None] + np.diff(t)[:, None] * frac[None, :-1]).ravel()
    edges = np.concatenate([edges, [1.0]])
    # keep substeps inside one Hermite piece
    h = np.diff(edges)
    g = np.stack([edges[:-1] + c * h for c in _GAUSS], axis=1)
    return h, g


def _product(E: np.ndarray) -> np.ndarray:
    """E[n-1] ... E[1] E[0] for a stack (..., n, m, m) by pairwise reduction."""
    while E.shape[-3] > 1:
        if E.shape[-3] % 2:
            I = np.broadcast_to(np.eye(E.shape[-1], dtype=E.dtype), E.shape[:-3] + (1,) + E.shape[-2:])
            E = np.concatenate([E, I], axis=-3)
        E = E[..., 1::2, :, :] @ E[..., 0::2, :, :]
    return E[..., 0, :, :]


def _magnus_steps(M1: np.ndarray, M2: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Fourth-order Magnus exponent from the generator at the two Gauss nodes."""
    hh = h.reshape((1,) * (M1.ndim - 3) + (-1, 1, 1))
    comm = M2 @ M1 - M1 @ M2
    return 0.5 * hh * (M1 + M2) + (np.sqrt(3) / 12) * hh * hh * comm


def _transport_generators(curve: SampledCurve, generator, m: int, exp, project=None):
    h, g = _nodes(curve, m)
    X, V = curve.evaluate(g.ravel())
    M = generator(X, V)  # (..., 2 n_steps, k, k)
    M = M.reshape(M.shape[:-3] + (len(h), 2) + M.shape[-2:])
    Om = _magnus_steps(M[..., 0, :, :], M[..., 1, :, :], h)
    E = exp(Om)
    if project is not None:
        E = project(E)
    return _product(E), len(h)


def transport_many(curve: SampledCurve, conns: Sequence, steps: int = 0, richardson: bool = False) -> list:
    """Transport along ``curve`` for several connections of one group at once."""
    conns = list(conns)
    if not conns:
        return []
    group = conns[0].group
    if any(c.group.name != group.name for c in conns):
        raise ValueError("all connections must share one group")

    def gen(X, V):
        return np.stack([c.along(X, V) for c in conns])

    def run(m):
        U, n = _transport_generators(curve, gen, m, group.exp, group.project)
        if not np.all(np.isfinite(U)):
            raise FloatingPointError("transport produced non-finite values")
        return group.project(U), n

    m = _substeps(curve, max(steps, 64))
    U, n = run(m)
    err = np.full(len(conns), np.nan)
    if richardson:
        U2, _ = run(2 * m)
        err = np.linalg.norm(U2 - U, axis=(-2, -1)) / 15.0
    return [HolonomyResult(U[i], n, group.defect(U[i]), float(err[i])) for i in range(len(conns))]


def transport(curve: SampledCurve, conn, steps: int = 0, richardson: bool = True) -> HolonomyResult:
    """Holonomy of ``conn`` along ``curve`` (at least 64 steps, one or more per sample interval)."""
    if steps and steps < 64:
        raise ValueError("steps must be at least 64")
    return transport_many(curve, [conn], steps, richardson)[0]


def richardson_order(curve: SampledCurve, conn, steps: int = 64) -> float:
    """Observed convergence order from substep counts k, 2k, 4k."""
    group = conn.group
    m = _substeps(curve, steps)
    Us = [_transport_generators(curve, lambda X, V: conn.along(X, V), k, group.exp)[0] for k in (m, 2 * m, 4 * m)]
    e1 = np.linalg.norm(Us[0] - Us[1])
    e2 = np.linalg.norm(Us[1] - Us[2])
    return float(np.log2(e1 / e2))


@dataclass(frozen=True)
class TrivialityVerdict:
    trivial: bool
    worst: float
    deviations: np.ndarray
    group: str
    tol: float

    @property
    def note(self) -> str:
        if self.trivial:
            return "trivial for every sampled connection (evidence, not proof)"
        return "nontrivial holonomy found"


def holonomy_trivial(curve: SampledCurve, group="SU2", n_conn: int = 20, seed: int = 0,
                     tol: float = 1e-5, steps: int = 0, loop_tol: float = 1e-9) -> TrivialityVerdict:
    """Transport against ``n_conn`` seeded random connections; trivial iff all stay within ``tol`` of I."""
    if not curve.is_loop(loop_tol):
        raise CurveError("holonomy_trivial needs a loop")
    g = get_group(group)
    conns = [random_connection(g, seed + k, curve.dim) for k in range(n_conn)]
    res = transport_many(curve, conns, steps)
    devs = np.array([r.deviation for r in res])
    return TrivialityVerdict(bool(devs.max() <= tol), float(devs.max()), devs, g.name, tol)


# ---------------------------------------------------------------------------
# word maps and the tube construction


def word_map_eval(word, assignment: Mapping, group=None) -> np.ndarray:
    """Image of a word under the word map, with later letters on the left.

    This matches transport: a loop reading ``x1 x2 ... xn`` has holonomy
    ``g(xn) ... g(x1)`` when arc x carries ``g(x)`` (inverses for reversed
    letters).
    """
    w = as_word(word)
    dim = None
    if group is not None:
        dim = get_group(group).dim
    elif assignment:
        dim = np.asarray(next(iter(assignment.values()))).shape[-1]
    out = np.eye(dim or 1, dtype=complex)
    for x in w:
        if x.name not in assignment:
            raise KeyError(f"letter {x.name!r} has no assigned group element")
        g = np.asarray(assignment[x.name])
        out = (g if x.sign > 0 else np.linalg.inv(g)) @ out
    if group is not None and get_group(group).dtype is float:
        return out.real
    return out


def _arc_distances(polys: list, margin: float) -> float:
    best = np.inf
    for i, a in enumerate(polys):
        s = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(a, axis=0), axis=1))])
        core = a[(s >= margin * s[-1]) & (s <= (1 - margin) * s[-1])]
        for j, b in enumerate(polys):
            if i != j and len(core):
                d, _ = cKDTree(b).query(core)
                best = min(best, float(d.min()))
    return best


def distinguishing_connection(curve: SampledCurve, decomp: ArcDecomposition, group, target: Mapping,
                              margin: float = 0.2, min_radius: float = 1e-4) -> TubeConnection:
    """Tube connection whose transport along the loop is the word map of ``target``.

    Tube radius is a third of the smallest distance from one arc's core to
    any other arc.
    """
    g = get_group(group)
    names = list(decomp.arcs)
    polys = [decomp.arcs[a].points for a in names]
    xis = []
    for a in names:
        el = target.get(a)
        if el is None:
            xis.append(np.zeros((g.dim, g.dim), dtype=g.dtype))
            continue
        xi = g.log(el)
        xis.append(xi if g.dtype is complex else xi.real)
    if all(np.abs(x).max() == 0 for x in xis):
        return TubeConnection(g, (), (), 0.0, margin)
    radius = _arc_distances(polys, margin) / 3.0 if len(polys) > 1 else np.inf
    if radius < min_radius:
        raise ValueError(f"arcs too close for disjoint tubes (radius {radius:.3g})")
    if not np.isfinite(radius):
        radius = 0.1 * max(decomp.arcs[a].length for a in names)
    conn = TubeConnection(g, tuple(polys), tuple(xis), radius, margin)
    # normalize each arc by its own along-profile integral
    scaled = []
    for poly, xi in zip(polys, xis):
        s = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(poly, axis=0), axis=1))])
        ss = np.linspace(0, s[-1], 20001)
        c = np.trapezoid(conn._profile_along(ss, s[-1]), ss)
        scaled.append(xi / c if c > 0 else xi)
    return TubeConnection(g, tuple(polys), tuple(scaled), radius, margin)


def tube_transport(curve: SampledCurve, conn: TubeConnection, steps: int = 0) -> HolonomyResult:
    return transport_many(curve, [conn], steps)[0]


# ---------------------------------------------------------------------------
# signatures and iterated integrals


@dataclass(frozen=True)
class SignatureTensor:
    """Levels 1..L of the signature; ``levels[k-1]`` has shape (d,)*k."""

    levels: tuple

    @property
    def depth(self) -> int:
        return len(self.levels)

    def level(self, k: int) -> np.ndarray:
        return self.levels[k - 1]

    def max_abs(self) -> float:
        return max((float(np.abs(x).max()) for x in self.levels), default=0.0)

    def antisymmetric_area(self, i: int = 0, j: int = 1) -> float:
        """Levy area: (S^{ij} - S^{ji}) / 2."""
        S2 = self.levels[1]
        return float(0.5 * (S2[i, j] - S2[j, i]))


def _segment_exp(v: np.ndarray, L: int) -> list:
    """Truncated tensor exponential of displacements v (n, d)."""
    out = [v]
    for k in range(2, L + 1):
        prev = out[-1]
        out.append(np.einsum("n...,nj->n...j", prev, v) / k)
    return out


def _chen(a: list, b: list) -> list:
    """Truncated tensor product of group-like elements (levels without the scalar 1), batched."""
    L = len(a)
    out = []
    for k in range(1, L + 1):
        acc = a[k - 1] + b[k - 1]
        for i in range(1, k):
            x, y = a[i - 1], b[k - i - 1]
            n = x.shape[0]
            acc = acc + (x.reshape(n, -1, 1) * y.reshape(n, 1, -1)).reshape(acc.shape)
        out.append(acc)
    return out


def signature(curve, level: int = 4) -> SignatureTensor:
    """Exact signature of the sample polyline up to ``level`` (at most 5)."""
    if level < 1 or level > 5:
        raise ValueError("level must be between 1 and 5")
    pts = curve.points if isinstance(curve, SampledCurve) else np.asarray(curve, dtype=float)
    v = np.diff(pts, axis=0)
    d = pts.shape[1]
    if len(v) == 0:
        return SignatureTensor(tuple(np.zeros((d,) * k) for k in range(1, level + 1)))
    S = _segment_exp(v, level)
    while S[0].shape[0] > 1:
        n = S[0].shape[0]
        if n % 2:
            S = [np.concatenate([x, np.zeros((1,) + x.shape[1:])]) for x in S]
        S = _chen([x[0::2] for x in S], [x[1::2] for x in S])
    levels = [x[0] for x in S]
    levels[0] = pts[-1] - pts[0]
    return SignatureTensor(tuple(levels))


def iterated_integrals_with_forms(curve: SampledCurve, forms: Sequence[OneForm], steps: int = 0) -> float:
    """``int_{t1 < ... < tk} w1(dgamma(t1)) ... wk(dgamma(tk))`` for k <= 3.

    The running integrals ``J_j' = w_j(gamma') J_{j-1}`` form a nilpotent
    linear system, integrated with the same Magnus scheme as transport
    (exact exponentials, so the result is time-symmetric).
    """
    k = len(forms)
    if not 1 <= k <= 3:
        raise ValueError("between one and three forms")

    def gen(X, V):
        M = np.zeros((len(X), k + 1, k + 1))
        for j, w in enumerate(forms):
            M[:, j + 1, j] = w.along(X, V)
        return M

    def nil_exp(Om):
        out = np.broadcast_to(np.eye(k + 1), Om.shape).copy()
        P = np.broadcast_to(np.eye(k + 1), Om.shape).copy()
        for n in range(1, k + 1):
            P = P @ Om / n
            out = out + P
        return out

    U, _ = _transport_generators(curve, gen, _substeps(curve, max(steps, 64)), nil_exp)
    return float(U[k, 0])


def line_integral(curve: SampledCurve, form: OneForm, n: int = 20001) -> float:
    """Independent k = 1 reference: trapezoid rule on a fine parameter grid."""
    t = np.linspace(0, 1, n)
    X, V = curve.evaluate(t)
    return float(np.trapezoid(form.along(X, V), t))


__all__ = [
    "ConnectionField", "FeatureBasis", "GROUPS", "HolonomyResult", "LieGroupSpec", "OneForm",
    "SignatureTensor", "TrivialityVerdict", "TubeConnection", "deviation", "distinguishing_connection",
    "get_group", "holonomy_trivial", "iterated_integrals_with_forms", "line_integral", "random_connection",
    "random_form", "richardson_order", "signature", "transport", "transport_many", "tube_transport",
    "word_map_eval", "zero_connection",
]
