"""Generators for the layered DAG families and seeded random DAGs.

Ids are assigned layer-major. Each generated Dag keeps enough metadata
(layer of every vertex, diamond coordinates, diagonal) for the diamond
block machinery to work without re-deriving the geometry.
"""

from dataclasses import dataclass, field

import numpy as np

from .dag import Dag, GraphError, reverse


@dataclass(frozen=True)
class Pyramid:
    q: int
    b: int


@dataclass(frozen=True)
class ReversePyramid:
    q: int
    b: int


@dataclass(frozen=True)
class Tree:
    q: int
    i: int


@dataclass(frozen=True)
class Diamond:
    q: int
    b: int


@dataclass(frozen=True)
class ChainArborescence:
    h: int


@dataclass(frozen=True)
class Explicit:
    n: int
    edges: tuple = field(default=())


@dataclass(frozen=True)
class Random:
    n: int
    seed: int = 0
    din: int = 3
    dout: int = 5
    width: int = 0


def _need(cond, msg):
    if not cond:
        raise GraphError(msg)


def pyramid(q, b):
    _need(q >= 2 and b >= 1, f"pyramid needs q >= 2 and b >= 1, got q={q}, b={b}")
    sizes = [(q - 1) * (b - i) + 1 for i in range(1, b + 1)]
    start = np.concatenate(([0], np.cumsum(sizes)))
    n = int(start[-1])
    assert n == b + (q - 1) * b * (b - 1) // 2
    edges, layer = [], []
    for i, size in enumerate(sizes):
        layer += [i] * size
        if i == 0:
            continue
        for j in range(size):
            v = int(start[i]) + j
            for k in range(j, j + q):
                edges.append((int(start[i - 1]) + k, v))
    meta = {"family": "pyramid", "q": q, "b": b, "layer": layer}
    return Dag(n, edges, meta)


def reverse_pyramid(q, b):
    d = reverse(pyramid(q, b))
    meta = dict(d.meta, family="reverse_pyramid")
    meta.pop("reversed", None)
    return Dag(d.n, d.edges(), meta)


def tree(q, i):
    """Complete q-ary in-tree with q**i leaves; leaves get the smallest ids."""
    _need(q >= 2 and i >= 0, f"tree needs q >= 2 and i >= 0, got q={q}, i={i}")
    level_sizes = [q ** (i - lvl) for lvl in range(i + 1)]
    n = sum(level_sizes)
    assert n == (q ** (i + 1) - 1) // (q - 1)
    edges, layer, base = [], [], 0
    for lvl, size in enumerate(level_sizes):
        layer += [lvl] * size
        if lvl < i:
            nxt = base + size
            edges += [(base + k, nxt + k // q) for k in range(size)]
        base += size
    return Dag(n, edges, {"family": "tree", "q": q, "i": i, "layer": layer})


def diamond_coordinates(q, b):
    """Vertex coordinates (u, w) in layer-major order.

    A q-diamond of side b is the lattice of points with
    0 <= u, w <= (q-1)(b-1) and u + w divisible by q-1; the edges step
    from (u, w) to (u+k, w+q-1-k) for k = 0..q-1. Layer t holds the
    points with u + w = (q-1) t.
    """
    top = (q - 1) * (b - 1)
    coords = []
    for t in range(2 * b - 1):
        s = (q - 1) * t
        for u in range(max(0, s - top), min(s, top) + 1):
            coords.append((u, s - u))
    return coords


def diamond(q, b):
    _need(q >= 2 and b >= 2, f"diamond needs q >= 2 and b >= 2, got q={q}, b={b}")
    coords = diamond_coordinates(q, b)
    n = len(coords)
    assert n == (b - 1) * (2 + (q - 1) * (b - 1)) + 1
    index = {c: v for v, c in enumerate(coords)}
    edges = []
    for v, (u, w) in enumerate(coords):
        for k in range(q):
            t = index.get((u + k, w + q - 1 - k))
            if t is not None:
                edges.append((v, t))
    layer = [(u + w) // (q - 1) for u, w in coords]
    diagonal = [v for v in range(n) if layer[v] == b - 1]
    meta = {"family": "diamond", "q": q, "b": b, "coords": coords,
            "layer": layer, "diagonal": diagonal}
    return Dag(n, edges, meta)


def chain_arborescence(h):
    """A chain whose vertices each feed one vertex of a binary out-tree.

    The tree has height h; the chain visits the tree vertices in
    post-order, so children are fed before their parent. Vertices
    0..N-1 form the chain (0 is the unique input) and N..2N-1 the
    tree in breadth-first order, N = 2**(h+1) - 1.
    """
    _need(h >= 1, f"chain-arborescence needs h >= 1, got {h}")
    size = 2 ** (h + 1) - 1
    edges = [(c, c + 1) for c in range(size - 1)]
    for k in range(size):
        for child in (2 * k + 1, 2 * k + 2):
            if child < size:
                edges.append((size + k, size + child))
    post = []

    def walk(k):
        for child in (2 * k + 1, 2 * k + 2):
            if child < size:
                walk(child)
        post.append(k)

    walk(0)
    edges += [(c, size + k) for c, k in enumerate(post)]
    meta = {"family": "chain_arborescence", "h": h,
            "chain": list(range(size)), "tree_root": size}
    return Dag(2 * size, edges, meta)


def random_dag(n, seed=0, din=3, dout=5, width=0):
    """Seeded layered random DAG.

    Layers hold ``width`` vertices (drawn from the seed when 0). Every
    vertex past the first layer draws 1..din predecessors uniformly
    from the previous three layers, skipping vertices whose out-degree
    already reached ``dout``.
    """
    _need(n >= 0 and din >= 0 and dout >= 0, "random DAG parameters must be nonnegative")
    rng = np.random.default_rng(seed)
    if width <= 0:
        width = int(rng.integers(1, max(2, int(np.sqrt(n)) + 2)))
    layer = [v // width for v in range(n)]
    outdeg = [0] * n
    edges = []
    for v in range(n):
        if layer[v] == 0 or din == 0 or dout == 0:
            continue
        lo = max(0, (layer[v] - 3) * width)
        pool = [u for u in range(lo, layer[v] * width) if outdeg[u] < dout]
        if not pool:
            continue
        k = min(int(rng.integers(1, din + 1)), len(pool))
        for u in sorted(rng.choice(pool, size=k, replace=False).tolist()):
            edges.append((u, v))
            outdeg[u] += 1
    meta = {"family": "random", "seed": seed, "din": din, "dout": dout,
            "width": width, "layer": layer}
    return Dag(n, edges, meta)


def explicit(n, edges):
    return Dag(n, [tuple(e) for e in edges], {"family": "explicit"})


def generate(spec):
    """Build the Dag described by a family spec object."""
    if isinstance(spec, Pyramid):
        return pyramid(spec.q, spec.b)
    if isinstance(spec, ReversePyramid):
        return reverse_pyramid(spec.q, spec.b)
    if isinstance(spec, Tree):
        return tree(spec.q, spec.i)
    if isinstance(spec, Diamond):
        return diamond(spec.q, spec.b)
    if isinstance(spec, ChainArborescence):
        return chain_arborescence(spec.h)
    if isinstance(spec, Explicit):
        return explicit(spec.n, spec.edges)
    if isinstance(spec, Random):
        return random_dag(spec.n, spec.seed, spec.din, spec.dout, spec.width)
    raise GraphError(f"unknown family spec {spec!r}")


_NAMES = {
    "pyramid": Pyramid,
    "reverse_pyramid": ReversePyramid,
    "rpyramid": ReversePyramid,
    "tree": Tree,
    "diamond": Diamond,
    "chain_arborescence": ChainArborescence,
    "chainarb": ChainArborescence,
    "random": Random,
}


def parse_family(text):
    """Parse ``name:key=value,...`` such as ``diamond:q=2,b=32``."""
    name, _, rest = text.strip().partition(":")
    cls = _NAMES.get(name.strip().lower().replace("-", "_"))
    if cls is None:
        raise GraphError(f"unknown family {name!r}; known: {sorted(_NAMES)}")
    kwargs = {}
    for item in filter(None, (p.strip() for p in rest.split(","))):
        key, eq, value = item.partition("=")
        if not eq:
            raise GraphError(f"bad parameter {item!r} in {text!r}")
        try:
            kwargs[key.strip()] = int(value)
        except ValueError:
            raise GraphError(f"parameter {key} must be an integer") from None
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise GraphError(f"bad parameters for {name}: {exc}") from None
