"""R-vine matrices: decoding, validation, max-matrix and dependence tracing.

Indices follow the usual matrix notation and are 1-based: row ``k`` and
column ``i`` with ``k > i`` hold the edge whose conditioned pair is
``{m[i, i], m[k, i]}`` given ``{m[k+1, i], ..., m[d, i]}``. That edge lives in
tree ``d - k + 1``.

Internally matrices are padded to ``(d + 2, d + 2)`` so that row/column 0
and row ``d + 1`` exist and read as zero.
"""
# Standard library imports
from dataclasses import dataclass, field
from typing import FrozenSet, List, Tuple

# Third-party imports
import numpy as np

# Local imports
from src.errors import StructureError


def padded(d, dtype=float):
    return np.zeros((d + 2, d + 2), dtype=dtype)


@dataclass(frozen=True)
class Edge:
    tree: int
    position: Tuple[int, int]
    conditioned: Tuple[int, int]
    conditioning: FrozenSet[int] = field(default_factory=frozenset)

    @property
    def complete_set(self):
        return frozenset(self.conditioned) | self.conditioning

    def label(self, names=None):
        def name(v):
            return str(v) if names is None else str(names[v - 1])

        left = ",".join(name(v) for v in self.conditioned)
        if not self.conditioning:
            return left
        return left + "|" + ",".join(name(v) for v in sorted(self.conditioning))


class RVineMatrix:
    """Lower-triangular R-vine structure matrix.

    ``values`` is the plain ``d x d`` integer matrix (0-based storage, entries
    above the diagonal ignored). Construction does not validate; call
    :func:`validate` for that.
    """

    def __init__(self, values):
        values = np.asarray(values, dtype=int)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise StructureError(f"structure matrix must be square, got shape {values.shape}")
        self.d = values.shape[0]
        if self.d < 2:
            raise StructureError("structure matrix needs dimension >= 2")
        self.values = np.tril(values)
        self.m = padded(self.d, dtype=int)
        self.m[1:self.d + 1, 1:self.d + 1] = self.values

    def __repr__(self):
        return f"{self.__class__.__name__}(d={self.d})"

    def __eq__(self, other):
        return isinstance(other, RVineMatrix) and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash(self.values.tobytes())

    def is_normalized(self):
        return all(self.m[i, i] == self.d - i + 1 for i in range(1, self.d + 1))

    def tree_of(self, k):
        return self.d - k + 1

    def positions(self):
        """Edge positions in column-major order from lower right to upper left."""
        return [(k, i) for i in range(self.d - 1, 0, -1) for k in range(self.d, i, -1)]

    def edge(self, k, i):
        m = self.m
        return Edge(
            tree=self.tree_of(k),
            position=(k, i),
            conditioned=(int(m[i, i]), int(m[k, i])),
            conditioning=frozenset(int(m[r, i]) for r in range(k + 1, self.d + 1)),
        )

    def relabel(self, mapping):
        """Apply ``mapping[old] = new`` to every entry."""
        lookup = np.zeros(self.d + 1, dtype=int)
        for old, new in mapping.items():
            lookup[old] = new
        return RVineMatrix(np.tril(lookup[self.values]))


def _check_entries(rvm: RVineMatrix):
    d, m = rvm.d, rvm.m
    diagonal = [int(m[i, i]) for i in range(1, d + 1)]
    if sorted(diagonal) != list(range(1, d + 1)):
        raise StructureError(f"diagonal {diagonal} is not a permutation of 1..{d}")
    for i in range(1, d + 1):
        column = [int(m[k, i]) for k in range(i, d + 1)]
        for k, value in zip(range(i, d + 1), column):
            if not 1 <= value <= d:
                raise StructureError(f"entry {value} outside 1..{d}", position=(k, i))
        seen = set()
        for k, value in zip(range(i, d + 1), column):
            if value in seen:
                raise StructureError(f"duplicate entry {value} in column {i}", position=(k, i))
            seen.add(value)
        # entries below the diagonal must be diagonal entries of columns to the right
        allowed = set(diagonal[i - 1:])
        for k in range(i + 1, d + 1):
            if int(m[k, i]) not in allowed:
                raise StructureError(
                    f"entry {int(m[k, i])} in column {i} is not a diagonal entry of columns {i}..{d}",
                    position=(k, i),
                )


def _find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


def validate(rvm: RVineMatrix) -> List[List[Edge]]:
    """Decode the tree sequence and check the R-vine conditions.

    Returns ``trees`` with ``trees[t - 1]`` the edges of tree ``t``. Raises
    StructureError naming the first violated condition.
    """
    _check_entries(rvm)
    d = rvm.d
    trees = []
    # nodes of tree 1 are the variables; a node is identified by its complete set
    previous = {frozenset([v]): None for v in range(1, d + 1)}
    for t in range(1, d):
        k = d - t + 1
        edges = [rvm.edge(k, i) for i in range(1, k)]
        current = {}
        parent = {node: node for node in previous}
        for e in edges:
            a, b = e.conditioned
            node_a = frozenset([a]) | e.conditioning
            node_b = frozenset([b]) | e.conditioning
            for node in (node_a, node_b):
                if node not in previous:
                    raise StructureError(
                        f"edge {e.label()} of tree {t} joins a node absent from tree {t - 1}",
                        position=e.position,
                    )
            if e.complete_set in current:
                raise StructureError(f"edge {e.label()} appears twice in tree {t}", position=e.position)
            if t > 1:
                ends_a = previous[node_a]
                ends_b = previous[node_b]
                if not ends_a & ends_b:
                    raise StructureError(
                        f"proximity condition violated by edge {e.label()} of tree {t}",
                        position=e.position,
                    )
            root_a, root_b = _find(parent, node_a), _find(parent, node_b)
            if root_a == root_b:
                raise StructureError(f"tree {t} contains a cycle through edge {e.label()}", position=e.position)
            parent[root_a] = root_b
            current[e.complete_set] = frozenset([node_a, node_b])
        if len(edges) != len(previous) - 1:
            raise StructureError(f"tree {t} has {len(edges)} edges for {len(previous)} nodes")
        trees.append(edges)
        previous = current
    return trees


def random_structure(d, rng, attempts=200):
    """Random normalized R-vine matrix, grown one column at a time from the right.

    Column ``i`` adds variable ``d - i + 1`` to the vine on the block to its
    right. A random ordering of the earlier variables is kept when the block
    stays valid; otherwise the new variable copies the path of its neighbour
    ``d - i`` (always valid).
    """
    if d < 2:
        raise StructureError("structure matrix needs dimension >= 2")
    values = np.zeros((d, d), dtype=int)
    for c in range(d):
        values[c, c] = d - c
    values[d - 1, d - 2] = 1
    for c in range(d - 3, -1, -1):
        size = d - c
        for _ in range(attempts):
            values[c + 1:, c] = rng.permutation(size - 1) + 1
            try:
                validate(RVineMatrix(values[c:, c:]))
                break
            except StructureError:
                continue
        else:
            # tree 1 partner is the neighbour, then the neighbour's own partners
            values[d - 1, c] = d - c - 1
            values[c + 1:d - 1, c] = values[c + 2:, c + 1]
    return RVineMatrix(values)


def normalizing_permutation(rvm: RVineMatrix):
    """``mapping[old label] = new label`` so that the diagonal reads d, ..., 1."""
    return {int(rvm.m[i, i]): rvm.d - i + 1 for i in range(1, rvm.d + 1)}


def max_matrix(rvm: RVineMatrix):
    """Column-suffix maxima ``mtil[k, i] = max(m[k, i], ..., m[d, i])`` (padded)."""
    d = rvm.d
    mtil = padded(d, dtype=int)
    for i in range(1, d + 1):
        running = 0
        for k in range(d, i - 1, -1):
            running = max(running, int(rvm.m[k, i]))
            mtil[k, i] = running
    return mtil


def second_argument(rvm: RVineMatrix, mtil, k, i):
    """Column and source of the second copula argument at ``(k, i)``.

    Returns ``(j, direct)``: the argument is ``vdirect[k, j]`` when ``direct``
    is true, ``vindirect[k, j]`` otherwise.
    """
    j = rvm.d - int(mtil[k, i]) + 1
    return j, bool(mtil[k, i] == rvm.m[k, i])


def dependence_matrix(rvm: RVineMatrix, k_par, i_par):
    """Flag the copula terms that depend on the parameter stored at ``(k_par, i_par)``.

    Returns a padded 0/1 integer matrix. A term depends on the parameter when
    its full index set contains the parameter's edge set.
    """
    d, m = rvm.d, rvm.m
    if not (1 <= i_par < k_par <= d):
        raise IndexError(f"({k_par}, {i_par}) is not a parameter position of a {d}-dim vine")
    target = {int(m[i_par, i_par])} | {int(m[r, i_par]) for r in range(k_par, d + 1)}
    flags = padded(d, dtype=int)
    for a in range(i_par, 0, -1):
        for b in range(k_par, a, -1):
            term = {int(m[a, a])} | {int(m[r, a]) for r in range(b, d + 1)}
            if target <= term:
                flags[b, a] = 1
    return flags
