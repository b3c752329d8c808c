"""Classical cost functions over {+1,-1}^n: representation, sampling, exhaustive analysis.

Two families are supported. ``PolyCost`` holds a multilinear polynomial with no
constant term (so the cost averages to zero over all assignments). ``CspCost``
holds k-local constraints that take value -1 on their satisfying local
assignments and s/(2^k - s) on the rest, again mean-zero clause by clause;
clause values are exact rationals so optimal values compare exactly.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Sequence, Union

import numpy as np

from .hypercube import fwht, local_patterns, neighbor_mean, spins_from_index

ENUMERATION_CAP = 26
# Below this size poly tables are accumulated term by term in a fixed order so
# they agree bit for bit with evaluate(); above it the Walsh-Hadamard transform
# is used (same values up to ~1e-13 relative, O(n 2^n) instead of O(terms 2^n)).
_TERMWISE_LIMIT = 16


class MalformedInstanceError(ValueError):
    pass


class DegenerateInstanceError(ValueError):
    """Cost function with E* >= 0 (e.g. H identically zero); H_b needs E* < 0."""


class EnumerationCapError(ValueError):
    pass


class UnsupportedReductionError(ValueError):
    pass


@dataclass(frozen=True)
class PolyCost:
    """Multilinear polynomial cost: sum of coeff * prod_{i in vars} z_i."""

    n: int
    terms: tuple[tuple[tuple[int, ...], float], ...]

    def __post_init__(self):
        if self.n < 1:
            raise MalformedInstanceError("need at least one variable")
        norm = []
        for variables, coeff in self.terms:
            variables = tuple(int(v) for v in variables)
            if len(variables) == 0:
                raise MalformedInstanceError("constant terms are not allowed (mean-zero convention)")
            if len(set(variables)) != len(variables):
                raise MalformedInstanceError(f"repeated variable in term {variables}")
            if min(variables) < 0 or max(variables) >= self.n:
                raise MalformedInstanceError(f"variable index out of range in term {variables}")
            if not math.isfinite(coeff):
                raise MalformedInstanceError("non-finite coefficient")
            norm.append((tuple(sorted(variables)), float(coeff)))
        object.__setattr__(self, "terms", tuple(norm))

    @property
    def degree(self) -> int:
        return max((len(v) for v, _ in self.terms), default=0)

    def evaluate(self, z: Sequence[int]) -> float:
        """Exact H(z) for a +-1 assignment; fixed accumulation order."""
        if len(z) != self.n:
            raise MalformedInstanceError(f"assignment has {len(z)} entries, expected {self.n}")
        if any(zi not in (1, -1) for zi in z):
            raise MalformedInstanceError("assignment entries must be +1 or -1")
        acc = 0.0
        for variables, coeff in self.terms:
            v = coeff
            for i in variables:
                v *= z[i]
            acc += v
        return acc


@dataclass(frozen=True)
class Clause:
    """k-local constraint: value -1 on `satisfying` local patterns, s/(2^k-s) otherwise.

    Local pattern indices pack the constrained variables' bits: bit j of the
    pattern is the bit of variables[j] in the global basis index.
    """

    variables: tuple[int, ...]
    satisfying: frozenset[int]

    def __post_init__(self):
        variables = tuple(int(v) for v in self.variables)
        if len(set(variables)) != len(variables) or len(variables) == 0:
            raise MalformedInstanceError(f"clause variables must be distinct and nonempty: {variables}")
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "satisfying", frozenset(int(p) for p in self.satisfying))
        size = 1 << len(variables)
        s = len(self.satisfying)
        if not 1 <= s <= size - 1:
            raise MalformedInstanceError(f"clause must have between 1 and 2^k-1 satisfying patterns, got {s}")
        if any(p < 0 or p >= size for p in self.satisfying):
            raise MalformedInstanceError("satisfying pattern out of range")

    @property
    def k(self) -> int:
        return len(self.variables)

    @property
    def unsat_value(self) -> Fraction:
        s = len(self.satisfying)
        return Fraction(s, (1 << self.k) - s)

    def value(self, pattern: int) -> Fraction:
        return Fraction(-1) if pattern in self.satisfying else self.unsat_value


@dataclass(frozen=True)
class CspCost:
    n: int
    clauses: tuple[Clause, ...]

    def __post_init__(self):
        for c in self.clauses:
            if max(c.variables) >= self.n or min(c.variables) < 0:
                raise MalformedInstanceError(f"clause variables out of range: {c.variables}")

    @property
    def m(self) -> int:
        return len(self.clauses)

    @property
    def k(self) -> int:
        return max((c.k for c in self.clauses), default=0)

    def evaluate(self, z: Sequence[int]) -> Fraction:
        """Exact rational H(z) for a +-1 assignment."""
        if len(z) != self.n:
            raise MalformedInstanceError(f"assignment has {len(z)} entries, expected {self.n}")
        for zi in z:
            if zi not in (1, -1):
                raise MalformedInstanceError("assignment entries must be +1 or -1")
        total = Fraction(0)
        for c in self.clauses:
            pattern = 0
            for j, v in enumerate(c.variables):
                if z[v] == -1:
                    pattern |= 1 << j
            total += c.value(pattern)
        return total


CostFunction = Union[PolyCost, CspCost]


@dataclass(frozen=True)
class SpectrumTable:
    """Full exhaustive spectrum: distinct energies ascending with multiplicities."""

    n: int
    energies: np.ndarray
    multiplicities: np.ndarray
    e_star: float
    optimal_assignments: tuple[int, ...]
    e_star_exact: Fraction | None = None

    @property
    def total_states(self) -> int:
        return 1 << self.n

    def cumulative_states(self, e: float) -> int:
        """|{z : H(z) <= e}|, inclusive at e."""
        idx = np.searchsorted(self.energies, e, side="right")
        return int(self.multiplicities[:idx].sum())

    @property
    def e_max(self) -> float:
        return float(self.energies[-1])


def cumulative_states(table: SpectrumTable, e: float) -> int:
    return table.cumulative_states(e)


def evaluate(cost: CostFunction, z: Sequence[int]):
    """H(z); exact rational for CSP instances, float for polynomials."""
    return cost.evaluate(z)


def evaluate_index(cost: CostFunction, a: int):
    return cost.evaluate(spins_from_index(a, cost.n).tolist())


def _poly_table_termwise(cost: PolyCost) -> np.ndarray:
    """Term-by-term table; accumulation order matches evaluate() bit for bit."""
    size = 1 << cost.n
    idx = np.arange(size, dtype=np.int64)
    signs = [1.0 - 2.0 * ((idx >> i) & 1) for i in range(cost.n)]
    table = np.zeros(size)
    for variables, coeff in cost.terms:
        v = np.full(size, coeff)
        for i in variables:
            v *= signs[i]
        table += v
    return table


def _poly_table_fwht(cost: PolyCost) -> np.ndarray:
    w = np.zeros(1 << cost.n)
    for variables, coeff in cost.terms:
        mask = 0
        for i in variables:
            mask |= 1 << i
        w[mask] += coeff
    return fwht(w)


def value_table(cost: CostFunction, cap: int = ENUMERATION_CAP) -> np.ndarray:
    """Float table of H over all 2^n assignments, indexed by basis index."""
    if cost.n > cap:
        raise EnumerationCapError(
            f"refusing to enumerate 2^{cost.n} assignments (cap n <= {cap}); raise cap explicitly if you have the memory"
        )
    if isinstance(cost, PolyCost):
        if cost.n <= _TERMWISE_LIMIT:
            return _poly_table_termwise(cost)
        return _poly_table_fwht(cost)
    ints, denom = csp_integer_table(cost, cap=cap)
    return ints / float(denom)


def csp_integer_table(cost: CspCost, cap: int = ENUMERATION_CAP) -> tuple[np.ndarray, int]:
    """Exact CSP table as (int64 numerators, common denominator)."""
    if cost.n > cap:
        raise EnumerationCapError(f"refusing to enumerate 2^{cost.n} assignments (cap n <= {cap})")
    denom = 1
    for c in cost.clauses:
        denom = math.lcm(denom, c.unsat_value.denominator)
    size = 1 << cost.n
    idx = np.arange(size, dtype=np.int64)
    table = np.zeros(size, dtype=np.int64)
    for c in cost.clauses:
        lut = np.empty(1 << c.k, dtype=np.int64)
        unsat = c.unsat_value
        for p in range(1 << c.k):
            val = Fraction(-1) if p in c.satisfying else unsat
            lut[p] = int(val * denom)
        table += lut[local_patterns(idx, c.variables)]
    return table, denom


def enumerate_spectrum(cost: CostFunction, cap: int = ENUMERATION_CAP) -> SpectrumTable:
    """Exhaustive spectrum; the brute-force oracle behind C(E), E* and the optimum set."""
    exact = None
    if isinstance(cost, CspCost):
        ints, denom = csp_integer_table(cost, cap=cap)
        values, counts = np.unique(ints, return_counts=True)
        energies = values / float(denom)
        e_star = float(energies[0])
        exact = Fraction(int(values[0]), denom)
        optima = np.nonzero(ints == values[0])[0]
    else:
        table = value_table(cost, cap=cap)
        energies, counts = np.unique(table, return_counts=True)
        e_star = float(energies[0])
        optima = np.nonzero(table == energies[0])[0]
    if e_star >= 0:
        raise DegenerateInstanceError(f"optimal value E* = {e_star} is not negative; instance is degenerate")
    return SpectrumTable(
        n=cost.n,
        energies=np.asarray(energies, dtype=np.float64),
        multiplicities=counts.astype(np.int64),
        e_star=e_star,
        optimal_assignments=tuple(int(a) for a in optima),
        e_star_exact=exact,
    )


def _rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def derive_seed(master_seed: int, *key: int) -> int:
    """Counter-based child seed: (master, key...) fully determines the stream."""
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def sample_k_spin(n: int, k: int, seed: int) -> PolyCost:
    """Random k-local Gaussian polynomial: all C(n,k) monomials, i.i.d. weights.

    Coefficients are standard normal scaled by sqrt(k!/n^(k-1)), so the cost of
    a fixed assignment has variance n!/((n-k)! n^(k-1)) over instances. k=2 is
    the Sherrington-Kirkpatrick ensemble.
    """
    if not 1 <= k <= n:
        raise MalformedInstanceError(f"need 1 <= k <= n, got k={k}, n={n}")
    rng = _rng(seed)
    scale = math.sqrt(math.factorial(k) / n ** (k - 1))
    subsets = list(combinations(range(n), k))
    coeffs = scale * rng.standard_normal(len(subsets))
    return PolyCost(n=n, terms=tuple((s, float(c)) for s, c in zip(subsets, coeffs)))


def sample_random_kcnf(n: int, k: int, m: int, seed: int) -> CspCost:
    """Random k-CNF: m clauses on k distinct variables, one forbidden pattern each.

    Each clause has s = 2^k - 1 satisfying local assignments, so its values are
    -1 (satisfied) and 2^k - 1 (violated).
    """
    return sample_random_csp(n, k, m, seed, satisfying_count=(1 << k) - 1)


def sample_random_csp(n: int, k: int, m: int, seed: int, satisfying_count: int | None = None) -> CspCost:
    """Random k-CSP with a uniformly chosen satisfying-pattern set per clause.

    satisfying_count=None draws s uniformly from {1, ..., 2^k - 1}; a fixed
    value pins s for every clause (2^k - 1 reproduces k-CNF).
    """
    if k > n:
        raise MalformedInstanceError(f"clause width k={k} exceeds n={n}")
    if m < 1:
        raise DegenerateInstanceError("m = 0 gives H identically zero (E* = 0)")
    rng = _rng(seed)
    size = 1 << k
    clauses = []
    for _ in range(m):
        variables = tuple(sorted(int(v) for v in rng.choice(n, size=k, replace=False)))
        s = int(satisfying_count) if satisfying_count is not None else int(rng.integers(1, size))
        patterns = frozenset(int(p) for p in rng.choice(size, size=s, replace=False))
        clauses.append(Clause(variables=variables, satisfying=patterns))
    return CspCost(n=n, clauses=tuple(clauses))


def qubo_to_e2lin2(cost: PolyCost) -> PolyCost:
    """Homogenize degrees {1,2} to pure degree 2 with one extra variable.

    Every degree-1 term is multiplied by the new variable z_n. The resulting
    polynomial is invariant under a global spin flip, so its spectrum is the
    input spectrum with every multiplicity doubled.
    """
    if cost.degree > 2 or any(len(v) not in (1, 2) for v, _ in cost.terms):
        raise UnsupportedReductionError("reduction needs all terms of degree 1 or 2")
    z0 = cost.n
    terms = tuple(((v[0], z0), c) if len(v) == 1 else (v, c) for v, c in cost.terms)
    return PolyCost(n=cost.n + 1, terms=terms)


def check_depolarizing(cost: CostFunction, alpha: float, cap: int = ENUMERATION_CAP, tol: float = 1e-12):
    """Exhaustively test E_{y~x} H(y) = (1-alpha) H(x) for every assignment x.

    Returns (holds, max_violation). Holds exactly (to rounding) for homogeneous
    degree-k polynomials with alpha = 2k/n; generic CSPs fail.
    """
    table = value_table(cost, cap=cap)
    flipped = neighbor_mean(table, cost.n)
    violation = float(np.max(np.abs(flipped - (1.0 - alpha) * table)))
    return violation <= tol, violation


def check_subdepolarizing(
    cost: CostFunction,
    eta: float,
    alpha: float,
    trials: int = 200,
    seed: int = 0,
    max_factors: int = 6,
    tol: float = 1e-12,
    cap: int = ENUMERATION_CAP,
):
    """Randomized exhaustive-in-x test of the subdepolarizing inequality.

    For random constant vectors 0 < c_t < 1 (uniform plus boundary-biased
    batches) and every assignment x, checks

        E_{y~x} prod_t f(c_t H(y)/E*)  >=  prod_t f(c_t (1-alpha) H(x)/E*)

    with f(x) = -g_eta(-x). Returns (holds, worst_margin); statistical
    evidence only, since the property quantifies over all real c-sequences.
    """
    from .transform import f_eta

    if not 0 < eta < 1:
        raise ValueError("eta must be in (0,1)")
    table = value_table(cost, cap=cap)
    e_star = float(table.min())
    if e_star >= 0:
        raise DegenerateInstanceError("E* must be negative")
    x = table / e_star  # in (-inf, 1], equals 1 at the optimum
    rng = _rng(seed)
    worst = math.inf
    for _ in range(trials):
        t_count = int(rng.integers(0, max_factors + 1))
        u = rng.random(t_count)
        kind = rng.integers(0, 3, size=t_count)
        c = np.where(kind == 0, u, np.where(kind == 1, u**4, 1.0 - u**4))
        c = np.clip(c, 1e-12, 1.0 - 1e-12)
        lhs_factors = np.ones_like(table)
        rhs_factors = np.ones_like(table)
        for ct in c:
            lhs_factors *= f_eta(eta, ct * x)
            rhs_factors *= f_eta(eta, ct * (1.0 - alpha) * x)
        margin = float(np.min(neighbor_mean(lhs_factors, cost.n) - rhs_factors))
        worst = min(worst, margin)
    if worst is math.inf:
        worst = 0.0
    return worst >= -tol, worst


# -- JSON serialization -------------------------------------------------------

def _float_to_hex(x: float) -> str:
    return struct.pack("<d", x).hex()


def _float_from_hex(h: str) -> float:
    return struct.unpack("<d", bytes.fromhex(h))[0]


def to_json(cost: CostFunction, seed: int | None = None, ensemble: str | None = None) -> str:
    """Serialize an instance; Gaussian weights as hex binary64 for bit-exact round trips."""
    meta = {}
    if seed is not None:
        meta["seed"] = seed
    if ensemble is not None:
        meta["ensemble"] = ensemble
    if isinstance(cost, PolyCost):
        doc = {
            "kind": "poly",
            "n": cost.n,
            "k": cost.degree,
            "terms": [[list(v), _float_to_hex(c)] for v, c in cost.terms],
            **meta,
        }
    else:
        doc = {
            "kind": "csp",
            "n": cost.n,
            "k": cost.k,
            "clauses": [[list(c.variables), sorted(c.satisfying)] for c in cost.clauses],
            **meta,
        }
    return json.dumps(doc, sort_keys=True)


def from_json(text: str) -> CostFunction:
    doc = json.loads(text)
    kind = doc.get("kind")
    if kind == "poly":
        terms = tuple((tuple(v), _float_from_hex(h)) for v, h in doc["terms"])
        return PolyCost(n=int(doc["n"]), terms=terms)
    if kind == "csp":
        clauses = tuple(Clause(variables=tuple(v), satisfying=frozenset(p)) for v, p in doc["clauses"])
        return CspCost(n=int(doc["n"]), clauses=clauses)
    raise MalformedInstanceError(f"unknown instance kind {kind!r}")
