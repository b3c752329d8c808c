"""The interpolating operator H_b = -X/n + b g_eta(H/|E*|) and its spectrum.

H_b is held implicitly: a precomputed 2^n diagonal plus the transverse-field
action, applied in O(n 2^n) per matvec (numba kernel when available, strided
numpy otherwise). Ground states come from dense diagonalization (the oracle,
n <= 14) or an ARPACK Lanczos run on the implicit operator (n <= 26).
"""

from __future__ import annotations

import math
import os
import struct
from dataclasses import dataclass

import numpy as np
import scipy.sparse.linalg as sla

# the default TBB layer on this image is too old and numba warns loudly
os.environ.setdefault("NUMBA_THREADING_LAYER", "omp")

from .cost import CostFunction, DegenerateInstanceError, SpectrumTable, enumerate_spectrum, value_table
from .transform import g_eta

DENSE_CAP = 14
LANCZOS_CAP = 26
DENSE_TOL = 1e-10
LANCZOS_TOL = 1e-8

try:
    import numba

    @numba.njit(parallel=True, cache=True)
    def _matvec_kernel(diag, v, out, n):  # pragma: no cover - exercised via matvec
        inv = 1.0 / n
        for a in numba.prange(v.size):
            acc = diag[a] * v[a]
            for i in range(n):
                acc -= inv * v[a ^ (1 << i)]
            out[a] = acc

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False


class EigensolverError(RuntimeError):
    """Lanczos failed to converge; carries the best residual norm seen."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


@dataclass
class HbOperator:
    """Implicit symmetric 2^n operator: diag(b g_eta(H/|E*|)) - X/n.

    Stoquastic: every off-diagonal entry is -1/n on Hamming-adjacent pairs.
    Immutable after construction; matvec is safe to share across threads.
    """

    n: int
    eta: float
    b: float
    e_star: float
    diag: np.ndarray
    optimal_assignments: tuple[int, ...] = ()

    @property
    def dim(self) -> int:
        return 1 << self.n

    def matvec(self, v: np.ndarray) -> np.ndarray:
        v = np.ascontiguousarray(v, dtype=np.float64)
        if v.shape != (self.dim,):
            raise ValueError(f"vector has shape {v.shape}, expected ({self.dim},)")
        out = np.empty_like(v)
        if HAVE_NUMBA:
            _matvec_kernel(self.diag, v, out, self.n)
            return out
        np.multiply(self.diag, v, out=out)
        w = v * (1.0 / self.n)
        for i in range(self.n):
            r = w.reshape(-1, 2, 1 << i)
            o = out.reshape(-1, 2, 1 << i)
            o[:, 0, :] -= r[:, 1, :]
            o[:, 1, :] -= r[:, 0, :]
        return out

    def aslinearoperator(self) -> sla.LinearOperator:
        return sla.LinearOperator((self.dim, self.dim), matvec=self.matvec, dtype=np.float64)

    def dense_matrix(self) -> np.ndarray:
        if self.n > DENSE_CAP:
            raise ValueError(f"dense assembly limited to n <= {DENSE_CAP}")
        m = np.diag(self.diag)
        rows = np.arange(self.dim)
        off = -1.0 / self.n
        for i in range(self.n):
            m[rows, rows ^ (1 << i)] = off
        return m


def build_hb(values: np.ndarray, e_star: float, eta: float, b: float,
             optimal_assignments: tuple[int, ...] = ()) -> HbOperator:
    """Assemble H_b from a precomputed cost table (reusable across b values)."""
    if e_star >= 0:
        raise DegenerateInstanceError("E* must be negative to build H_b")
    if b < 0:
        raise ValueError("b must be non-negative")
    size = values.size
    n = size.bit_length() - 1
    if 1 << n != size:
        raise ValueError("table length must be a power of two")
    diag = b * g_eta(eta, values / abs(e_star)) if b > 0 else np.zeros(size)
    return HbOperator(n=n, eta=eta, b=b, e_star=float(e_star), diag=diag,
                      optimal_assignments=tuple(optimal_assignments))


def hb_from_cost(cost: CostFunction, eta: float, b: float, cap: int = LANCZOS_CAP,
                 table: SpectrumTable | None = None) -> tuple[HbOperator, SpectrumTable]:
    """Convenience builder: enumerate the spectrum, then assemble H_b."""
    values = value_table(cost, cap=cap)
    if table is None:
        table = enumerate_spectrum(cost, cap=cap)
    op = build_hb(values, table.e_star, eta, b, table.optimal_assignments)
    return op, table


def plus_state(n: int) -> np.ndarray:
    return np.full(1 << n, 2.0 ** (-n / 2.0))


@dataclass
class SpectralSummary:
    """Eigendata of one H_b solve plus the overlaps that set the algorithm's runtime."""

    n: int
    eta: float
    b: float
    e_ground: float
    e_excited: float
    psi: np.ndarray
    overlap_plus: float
    overlap_opt: float
    overlap_zstar: tuple[float, ...]
    optimal_assignments: tuple[int, ...]
    degenerate: bool
    method: str
    tol: float
    e_max: float | None = None
    matvecs: int | None = None
    excited_energies: tuple[float, ...] = ()

    @property
    def gap(self) -> float:
        return self.e_excited - self.e_ground


def _fix_sign(psi: np.ndarray) -> np.ndarray:
    if psi[np.argmax(np.abs(psi))] < 0:
        psi = -psi
    return psi


def _overlaps(psi: np.ndarray, n: int, optima: tuple[int, ...]):
    clipped = psi if psi.min() >= 0 else np.where((psi < 0) & (psi > -1e-8), 0.0, psi)
    overlap_plus = float(clipped.sum() * 2.0 ** (-n / 2.0))
    zstar = tuple(float(clipped[a]) for a in optima)
    overlap_opt = float(math.sqrt(sum(v * v for v in zstar)))
    return overlap_plus, overlap_opt, zstar


def _start_vector(op: HbOperator, seed: int) -> np.ndarray:
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy=seed, spawn_key=(op.n,))))
    v0 = plus_state(op.n) + 0.1 * rng.standard_normal(op.dim) / math.sqrt(op.dim)
    return v0 / np.linalg.norm(v0)


def ground_state(
    op: HbOperator,
    method: str = "auto",
    tol: float | None = None,
    n_excited: int = 1,
    compute_max: bool = False,
    seed: int = 0,
    ncv: int | None = None,
    maxiter: int | None = None,
) -> SpectralSummary:
    """Two (or more) lowest eigenpairs of H_b with the non-negative sign convention.

    method "dense" assembles the full matrix (n <= 14, the oracle path);
    "lanczos" runs ARPACK on the implicit matvec with a seeded start vector
    mixed with the uniform state; "auto" picks dense for n <= 12.
    Ground-state degeneracy is flagged when the two lowest Ritz values differ
    by less than 10x the solver tolerance.
    """
    if method == "auto":
        method = "dense" if op.n <= 12 else "lanczos"
    if method == "dense":
        if op.n > DENSE_CAP:
            raise ValueError(f"dense diagonalization limited to n <= {DENSE_CAP}")
        tol = DENSE_TOL if tol is None else tol
        evals, evecs = np.linalg.eigh(op.dense_matrix())
        e0, e1 = float(evals[0]), float(evals[1])
        psi = _fix_sign(evecs[:, 0].copy())
        e_max = float(evals[-1])
        excited = [float(x) for x in evals[1 : 1 + n_excited]]
        matvecs = None
    elif method == "lanczos":
        if op.n > LANCZOS_CAP:
            raise ValueError(f"Lanczos path limited to n <= {LANCZOS_CAP}")
        tol = LANCZOS_TOL if tol is None else tol
        k = 1 + n_excited
        counter = {"mv": 0}

        def counted(v):
            counter["mv"] += 1
            return op.matvec(v)

        linop = sla.LinearOperator((op.dim, op.dim), matvec=counted, dtype=np.float64)
        v0 = _start_vector(op, seed)
        try:
            evals, evecs = sla.eigsh(linop, k=k, which="SA", v0=v0, tol=tol, ncv=ncv, maxiter=maxiter)
        except sla.ArpackNoConvergence as exc:
            residual = None
            if len(exc.eigenvalues):
                v = exc.eigenvectors[:, 0]
                residual = float(np.linalg.norm(op.matvec(v) - exc.eigenvalues[0] * v))
            raise EigensolverError(
                f"ARPACK did not converge after {maxiter or 'default'} iterations "
                f"({len(exc.eigenvalues)}/{k} pairs converged)",
                residual=residual,
            ) from exc
        order = np.argsort(evals)
        evals = evals[order]
        evecs = evecs[:, order]
        e0, e1 = float(evals[0]), float(evals[1])
        psi = _fix_sign(evecs[:, 0].copy())
        excited = [float(x) for x in evals[1:]]
        e_max = None
        if compute_max:
            top = sla.eigsh(linop, k=1, which="LA", v0=v0, tol=tol, return_eigenvectors=False)
            e_max = float(top[0])
        matvecs = counter["mv"]
    else:
        raise ValueError(f"unknown method {method!r}")

    overlap_plus, overlap_opt, zstar = _overlaps(psi, op.n, op.optimal_assignments)
    return SpectralSummary(
        n=op.n,
        eta=op.eta,
        b=op.b,
        e_ground=e0,
        e_excited=e1,
        psi=psi,
        overlap_plus=overlap_plus,
        overlap_opt=overlap_opt,
        overlap_zstar=zstar,
        optimal_assignments=op.optimal_assignments,
        degenerate=bool(e1 - e0 < 10.0 * tol),
        method=method,
        tol=tol,
        e_max=e_max,
        matvecs=matvecs,
        excited_energies=tuple(excited),
    )


def deflated_ground_energy(op: HbOperator, method: str = "auto", tol: float | None = None,
                           seed: int = 0, ncv: int | None = None) -> float:
    """Lowest eigenvalue of Pbar H_b Pbar on the complement of the uniform state.

    Pbar v = v - <+|v>|+>; with the uniform vector this is just mean removal.
    The deflated operator has one artificial 0 eigenvalue along |+>, which sits
    above the physical ground energy (always < 0 here), so 'SA' finds the
    right value.
    """
    if method == "auto":
        method = "dense" if op.n <= 12 else "lanczos"
    if method == "dense":
        if op.n > DENSE_CAP:
            raise ValueError(f"dense diagonalization limited to n <= {DENSE_CAP}")
        m = op.dense_matrix()
        plus = plus_state(op.n)
        pbar = np.eye(op.dim) - np.outer(plus, plus)
        evals = np.linalg.eigvalsh(pbar @ m @ pbar)
        e = float(evals[0])
    else:
        tol = LANCZOS_TOL if tol is None else tol

        def projected(v):
            w = v - v.mean()
            y = op.matvec(w)
            return y - y.mean()

        linop = sla.LinearOperator((op.dim, op.dim), matvec=projected, dtype=np.float64)
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy=seed, spawn_key=(op.n, 1))))
        v0 = rng.standard_normal(op.dim)
        v0 -= v0.mean()
        v0 /= np.linalg.norm(v0)
        try:
            evals = sla.eigsh(linop, k=1, which="SA", v0=v0, tol=tol, ncv=ncv, return_eigenvectors=False)
        except sla.ArpackNoConvergence as exc:
            raise EigensolverError("ARPACK did not converge on the deflated operator") from exc
        e = float(evals[0])
    if e >= 0:
        raise EigensolverError(f"deflated ground energy {e} is non-negative; solver landed on the |+> null direction")
    return e


@dataclass
class PEllResult:
    """(H_b/E_b)^ell v, kept unit-normalized with the true log-magnitude tracked."""

    vector: np.ndarray
    log_norm: float
    ell: int

    def overlap_with(self, other: np.ndarray) -> float:
        return float(np.dot(other, self.vector) * math.exp(self.log_norm))


def apply_P_ell(op: HbOperator, e_ground: float, ell: int, v: np.ndarray) -> PEllResult:
    """Apply the approximate ground-state projector P_ell = (H_b/E_b)^ell.

    Renormalizes after each matvec and tracks log ||P_ell v|| to dodge under-
    and overflow for large ell.
    """
    if e_ground == 0:
        raise ValueError("E_b must be nonzero")
    if ell < 0:
        raise ValueError("ell must be non-negative")
    vec = np.asarray(v, dtype=np.float64).copy()
    norm = np.linalg.norm(vec)
    if norm == 0:
        raise ValueError("zero start vector")
    vec /= norm
    log_norm = math.log(norm)
    for _ in range(ell):
        vec = op.matvec(vec) / e_ground
        step = np.linalg.norm(vec)
        if step == 0:
            return PEllResult(vector=vec, log_norm=-math.inf, ell=ell)
        vec /= step
        log_norm += math.log(step)
    return PEllResult(vector=vec, log_norm=log_norm, ell=ell)


def plus_overlaps_P_ell(op: HbOperator, e_ground: float, ells: list[int], z_index: int) -> dict[int, float]:
    """<+|P_ell|z> for several ell in one sweep (ells must be sorted ascending)."""
    if sorted(ells) != list(ells):
        raise ValueError("ells must be ascending")
    start = np.zeros(op.dim)
    start[z_index] = 1.0
    plus = plus_state(op.n)
    out: dict[int, float] = {}
    current = PEllResult(vector=start, log_norm=0.0, ell=0)
    done = 0
    for ell in ells:
        if ell > done:
            nxt = apply_P_ell(op, e_ground, ell - done, current.vector)
            current = PEllResult(vector=nxt.vector, log_norm=current.log_norm + nxt.log_norm, ell=ell)
            done = ell
        out[ell] = current.overlap_with(plus)
    return out


# -- binary state dump --------------------------------------------------------

_MAGIC = b"SPLB"
_HEADER = struct.Struct("<4sBxxxIddq")  # magic, version, n, b, eta, seed


def save_state(path, psi: np.ndarray, n: int, b: float, eta: float, seed: int = 0) -> None:
    """Dump a ground vector: fixed header then 2^n little-endian binary64 amplitudes."""
    if psi.shape != (1 << n,):
        raise ValueError("psi length must be 2^n")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, 1, n, b, eta, seed))
        fh.write(np.ascontiguousarray(psi, dtype="<f8").tobytes())


def load_state(path) -> tuple[dict, np.ndarray]:
    with open(path, "rb") as fh:
        magic, version, n, b, eta, seed = _HEADER.unpack(fh.read(_HEADER.size))
        if magic != _MAGIC or version != 1:
            raise ValueError("not a state dump (bad magic/version)")
        psi = np.frombuffer(fh.read((1 << n) * 8), dtype="<f8").astype(np.float64)
    return {"n": n, "b": b, "eta": eta, "seed": seed}, psi
