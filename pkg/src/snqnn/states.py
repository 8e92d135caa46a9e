"""Input-state families: graph states, Haar states, HEA states, symmetric states."""
from __future__ import annotations

import dataclasses
import itertools
import math
import struct
from pathlib import Path
from typing import Callable

import networkx as nx
import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.stats import unitary_group

from .errors import CapacityError, ValidationError
from .hea import apply_cnot, apply_ry
from .ops import hamming_weights

GLOBAL_HAAR_MAX_QUBITS = 12
MAX_REJECTIONS = 100_000


@dataclasses.dataclass(frozen=True)
class Graph:
    """Simple undirected graph on nodes ``0..n-1``."""

    n: int
    edges: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError("graph needs at least one node")
        clean = set()
        for a, b in self.edges:
            a, b = int(a), int(b)
            if a == b:
                raise ValidationError(f"self-loop at node {a}")
            if not (0 <= a < self.n and 0 <= b < self.n):
                raise ValidationError(f"edge ({a}, {b}) out of range")
            e = (min(a, b), max(a, b))
            if e in clean:
                raise ValidationError(f"duplicate edge {e}")
            clean.add(e)
        object.__setattr__(self, "edges", tuple(sorted(clean)))

    @property
    def is_connected(self) -> bool:
        if self.n == 1:
            return True
        a = np.array([e[0] for e in self.edges], dtype=int)
        b = np.array([e[1] for e in self.edges], dtype=int)
        adj = coo_matrix((np.ones(len(a)), (a, b)), shape=(self.n, self.n))
        k, _ = connected_components(adj, directed=False)
        return k == 1

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=int)
        for a, b in self.edges:
            deg[a] += 1
            deg[b] += 1
        return deg

    def relabel(self, perm) -> "Graph":
        """Node ``j`` becomes node ``perm[j]``."""
        perm = list(perm)
        if sorted(perm) != list(range(self.n)):
            raise ValidationError("not a permutation of the nodes")
        return Graph(self.n, tuple((perm[a], perm[b]) for a, b in self.edges))

    def to_text(self) -> str:
        return "\n".join([str(self.n)] + [f"{a} {b}" for a, b in self.edges]) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Graph":
        lines = [(i + 1, ln.strip()) for i, ln in enumerate(text.splitlines())]
        lines = [(i, ln) for i, ln in lines if ln and not ln.startswith("#")]
        if not lines:
            raise ValidationError("empty graph file")
        try:
            n = int(lines[0][1])
        except ValueError:
            raise ValidationError(f"line {lines[0][0]}: expected node count") from None
        edges = []
        for i, ln in lines[1:]:
            parts = ln.split()
            if len(parts) != 2:
                raise ValidationError(f"line {i}: expected 'a b'")
            try:
                edges.append((int(parts[0]), int(parts[1])))
            except ValueError:
                raise ValidationError(f"line {i}: node labels must be integers") from None
        return cls(n, tuple(edges))


def read_graph(path) -> Graph:
    return Graph.from_text(Path(path).read_text())


def write_graph(path, g: Graph) -> None:
    Path(path).write_text(g.to_text())


def erdos_renyi(n: int, p: float, rng: np.random.Generator) -> Graph:
    """Each of the ``C(n, 2)`` pairs is an edge independently with probability ``p``."""
    if not 0 <= p <= 1:
        raise ValidationError("p must lie in [0, 1]")
    pairs = list(itertools.combinations(range(n), 2))
    keep = rng.random(len(pairs)) < p
    return Graph(n, tuple(e for e, k in zip(pairs, keep) if k))


def k_regular(n: int, k: int, rng: np.random.Generator, max_tries: int = 1000) -> Graph:
    """Random ``k``-regular graph.

    Uses the pairing model with rejection of loops and multi-edges, which is
    exactly uniform.  Its acceptance rate falls like ``exp(-(k^2 - 1) / 4)``,
    so after ``max_tries`` rejections the Steger-Wormald sampler from
    networkx takes over.
    """
    if not 0 <= k < n or (n * k) % 2:
        raise ValidationError(f"no {k}-regular graph on {n} nodes")
    stubs = np.repeat(np.arange(n), k)
    for _ in range(max_tries):
        pairs = rng.permutation(stubs).reshape(-1, 2)
        if np.any(pairs[:, 0] == pairs[:, 1]):
            continue
        edges = {(min(a, b), max(a, b)) for a, b in pairs}
        if len(edges) == len(pairs):
            return Graph(n, tuple(edges))
    g = nx.random_regular_graph(k, n, seed=int(rng.integers(2 ** 32)))
    return Graph(n, tuple(g.edges()))


def graph_state(g: Graph, phi: float = math.pi) -> np.ndarray:
    """``prod_edges CP(phi) |+>^n``: amplitude ``2^{-n/2} prod exp(i phi z_a z_b)``."""
    n = g.n
    idx = np.arange(2 ** n)
    count = np.zeros(2 ** n, dtype=np.int64)
    for a, b in g.edges:
        count += ((idx >> (n - 1 - a)) & 1) & ((idx >> (n - 1 - b)) & 1)
    if phi == math.pi:
        amp = np.where(count % 2, -1.0, 1.0).astype(complex)
    else:
        amp = np.exp(1j * phi * count)
    return amp / 2 ** (n / 2)


def _random_qubit(rng) -> np.ndarray:
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    return v / np.linalg.norm(v)


def local_haar(n: int, rng: np.random.Generator) -> np.ndarray:
    """Product of independent Haar-random single-qubit states."""
    psi = np.ones(1, dtype=complex)
    for _ in range(n):
        psi = np.kron(psi, _random_qubit(rng))
    return psi


def global_haar(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random state as a normalized complex Gaussian vector."""
    if n > GLOBAL_HAAR_MAX_QUBITS:
        raise CapacityError(f"global Haar states limited to n <= {GLOBAL_HAAR_MAX_QUBITS}")
    v = rng.normal(size=2 ** n) + 1j * rng.normal(size=2 ** n)
    return v / np.linalg.norm(v)


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary (QR of a Ginibre matrix with phase correction)."""
    if dim > 2 ** GLOBAL_HAAR_MAX_QUBITS:
        raise CapacityError("unitary dimension too large")
    return unitary_group.rvs(dim, random_state=rng)


def hea_state(n: int, depth: int, rng: np.random.Generator, thetas=None) -> np.ndarray:
    """``depth`` layers of random RY on every qubit then a CNOT line, on ``|0...0>``.

    Angles are drawn uniformly from ``[0, 2 pi)`` unless given as ``(depth, n)``.
    """
    if depth < 0:
        raise ValidationError("depth must be nonnegative")
    if thetas is None:
        thetas = rng.uniform(0, 2 * np.pi, size=(depth, n))
    thetas = np.asarray(thetas, dtype=float).reshape(depth, n)
    psi = np.zeros(2 ** n, dtype=complex)
    psi[0] = 1
    for layer in thetas:
        for q in range(n):
            psi = apply_ry(psi, q, layer[q], n)
        for q in range(n - 1):
            psi = apply_cnot(psi, q, q + 1, n)
    return psi


def weight_k_indices(n: int, k: int) -> np.ndarray:
    """Basis indices of weight-``k`` strings in colexicographic order of their 1-positions."""
    if not 0 <= k <= n:
        raise ValidationError("need 0 <= k <= n")
    combos = sorted(itertools.combinations(range(n), k), key=lambda c: c[::-1])
    return np.array(
        [sum(1 << (n - 1 - q) for q in c) for c in combos], dtype=np.int64
    )


def hamming_encode(x, k: int, n: int) -> np.ndarray:
    """Amplitude encoding of ``x`` on the weight-``k`` strings."""
    x = np.asarray(x, dtype=complex).reshape(-1)
    idx = weight_k_indices(n, k)
    if len(x) != len(idx):
        raise ValidationError(f"expected {len(idx)} entries, got {len(x)}")
    if abs(np.linalg.norm(x) - 1) > 1e-10:
        raise ValidationError("x must have unit norm")
    psi = np.zeros(2 ** n, dtype=complex)
    psi[idx] = x
    return psi


def random_hamming_state(n: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """Hamming encoding of a random nonnegative unit vector."""
    x = np.abs(rng.normal(size=math.comb(n, k)))
    return hamming_encode(x / np.linalg.norm(x), k, n)


def dicke_state(n: int, k: int) -> np.ndarray:
    """Equal superposition of all weight-``k`` strings."""
    psi = (hamming_weights(n) == k).astype(complex)
    return psi / np.linalg.norm(psi)


def symmetric_state(n: int, rng: np.random.Generator) -> np.ndarray:
    """Random superposition of Dicke states (a random permutation-invariant state)."""
    c = rng.normal(size=n + 1) + 1j * rng.normal(size=n + 1)
    c /= np.linalg.norm(c)
    w = hamming_weights(n)
    norms = np.array([math.sqrt(math.comb(n, k)) for k in range(n + 1)])
    return (c / norms)[w].astype(complex)


def classification_dataset(
    n: int, M: int, rng: np.random.Generator, p: float = 0.4, phi: float = math.pi,
    return_graphs: bool = False,
):
    """Balanced connected (+1) / disconnected (-1) Erdos-Renyi graph-state dataset.

    Graphs are drawn until each label bin holds ``M/2`` entries; the result
    is ordered connected first.  Raises after ``MAX_REJECTIONS`` overflow
    draws.
    """
    from .qsim import LabeledDataset

    if M < 0 or M % 2:
        raise ValidationError("M must be a nonnegative even number")
    half = M // 2
    if half and (n == 1 or p in (0.0, 1.0)):
        raise ValidationError(f"n={n}, p={p} cannot produce both connected and disconnected graphs")
    bins: dict[bool, list[Graph]] = {True: [], False: []}
    rejected = 0
    while len(bins[True]) < half or len(bins[False]) < half:
        g = erdos_renyi(n, p, rng)
        b = bins[g.is_connected]
        if len(b) < half:
            b.append(g)
        else:
            rejected += 1
            if rejected > MAX_REJECTIONS:
                raise ValidationError(
                    f"could not fill both label bins for n={n}, p={p}"
                )
    graphs = bins[True] + bins[False]
    labels = np.array([1] * half + [-1] * half)
    states = np.array([graph_state(g, phi) for g in graphs]).reshape(M, 2 ** n)
    data = LabeledDataset.hinge(states, labels, n)
    return (data, graphs) if return_graphs else data


def conditional_er(n: int, p: float, connected: bool, rng: np.random.Generator) -> Graph:
    """Erdos-Renyi graph conditioned on its connectivity by rejection."""
    for _ in range(MAX_REJECTIONS):
        g = erdos_renyi(n, p, rng)
        if g.is_connected == connected:
            return g
    raise ValidationError(f"conditioning failed for n={n}, p={p}")


def write_state(path, psi) -> None:
    """Little-endian binary: int64 ``n`` then interleaved real/imag float64."""
    psi = np.asarray(psi, dtype=np.complex128).reshape(-1)
    n = int(round(math.log2(len(psi))))
    if 2 ** n != len(psi):
        raise ValidationError("state length is not a power of two")
    buf = np.empty(2 * len(psi), dtype="<f8")
    buf[0::2], buf[1::2] = psi.real, psi.imag
    Path(path).write_bytes(struct.pack("<q", n) + buf.tobytes())


def read_state(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if len(raw) < 8:
        raise ValidationError("state file too short")
    (n,) = struct.unpack("<q", raw[:8])
    if not 0 < n <= 30:
        raise ValidationError(f"implausible qubit count {n}")
    buf = np.frombuffer(raw[8:], dtype="<f8")
    if len(buf) != 2 ** (n + 1):
        raise ValidationError("state file length does not match header")
    return buf[0::2] + 1j * buf[1::2]


@dataclasses.dataclass(frozen=True)
class StateFamilySpec:
    """A named input-state family plus its parameter and seed.

    Tags: ``symmetric``, ``hamming`` (param k), ``local-haar``,
    ``global-haar``, ``hea-fixed`` (param L), ``hea-linear`` (param c, depth
    ``c n``), ``er`` (param p), ``er-disconnected`` (param p), ``regular``
    (param k, or ``n/2``), ``generalized`` (param p of the ER source, with
    ``phi``).
    """

    tag: str
    param: float | str | None = None
    phi: float = math.pi
    seed: int = 0

    TAGS = (
        "symmetric", "hamming", "local-haar", "global-haar", "hea-fixed",
        "hea-linear", "er", "er-disconnected", "regular", "generalized",
    )

    def __post_init__(self):
        if self.tag not in self.TAGS:
            raise ValidationError(f"unknown state family {self.tag!r}")
        if self.tag in ("hamming", "hea-fixed", "hea-linear", "er",
                        "er-disconnected", "regular", "generalized") and self.param is None:
            object.__setattr__(self, "param", _DEFAULT_PARAM[self.tag])

    @classmethod
    def parse(cls, text: str, phi: float = math.pi, seed: int = 0) -> "StateFamilySpec":
        """``tag`` or ``tag:param``, e.g. ``regular:3``, ``er:0.4``, ``regular:n/2``."""
        tag, _, param = text.strip().partition(":")
        value: float | str | None = None
        if param:
            if param == "n/2":
                value = param
            else:
                try:
                    value = float(param)
                except ValueError:
                    raise ValidationError(f"bad family parameter {param!r}") from None
        return cls(tag, value, phi, seed)

    @property
    def label(self) -> str:
        return self.tag if self.param is None else f"{self.tag}:{_fmt(self.param)}"

    def supports(self, n: int) -> bool:
        """Whether the family is defined at ``n`` qubits."""
        if self.tag == "regular":
            k = self._degree(n)
            return 0 <= k < n and (n * k) % 2 == 0
        if self.tag == "hamming":
            return 0 <= int(self.param) <= n
        if self.tag == "global-haar":
            return n <= GLOBAL_HAAR_MAX_QUBITS
        return n >= 1

    def _degree(self, n: int) -> int:
        if self.param == "n/2":
            return n // 2 if n % 2 == 0 else -1
        return int(self.param)

    def sampler(self) -> Callable[[int, np.random.Generator], np.ndarray]:
        """``(n, rng) -> state``."""
        tag, prm, phi = self.tag, self.param, self.phi
        if tag == "symmetric":
            return symmetric_state
        if tag == "hamming":
            return lambda n, rng: random_hamming_state(n, int(prm), rng)
        if tag == "local-haar":
            return local_haar
        if tag == "global-haar":
            return global_haar
        if tag == "hea-fixed":
            return lambda n, rng: hea_state(n, int(prm), rng)
        if tag == "hea-linear":
            return lambda n, rng: hea_state(n, int(round(float(prm) * n)), rng)
        if tag == "er":
            return lambda n, rng: graph_state(erdos_renyi(n, float(prm), rng), phi)
        if tag == "er-disconnected":
            return lambda n, rng: graph_state(conditional_er(n, float(prm), False, rng), phi)
        if tag == "regular":
            return lambda n, rng: graph_state(k_regular(n, self._degree(n), rng), phi)
        return lambda n, rng: graph_state(erdos_renyi(n, float(prm), rng), phi)

    def sample(self, n: int, rng: np.random.Generator | None = None) -> np.ndarray:
        if not self.supports(n):
            raise ValidationError(f"family {self.label} undefined at n={n}")
        rng = np.random.default_rng(self.seed) if rng is None else rng
        return self.sampler()(n, rng)


_DEFAULT_PARAM = {
    "hamming": 1.0, "hea-fixed": 15.0, "hea-linear": 3.0, "er": 0.4,
    "er-disconnected": 0.4, "regular": 3.0, "generalized": 0.4,
}


def _fmt(v) -> str:
    if isinstance(v, float) and v.is_integer():
        return str(int(v))
    return str(v)


# Families of the trainability table with the expected verdict.
TABLE_FAMILIES: tuple[tuple[str, bool], ...] = (
    ("symmetric", True),
    ("hamming:1", True),
    ("local-haar", True),
    ("global-haar", False),
    ("hea-fixed:15", True),
    ("hea-linear:3", False),
    ("er-disconnected:0.4", True),
    ("er:0.4", False),
    ("regular:3", True),
    ("regular:n/2", True),
)
