"""Dependency-graph utilities: shortest paths, root paths, and renderings.

Paths are computed over the undirected view of the dependency edges, with
the traversal direction of every step recorded (down = governor to
dependent, up = the reverse). Ties between equally short paths are broken
by the lexicographically smallest (direction, relation, landing) step
sequence so features are reproducible across runs.
"""
from __future__ import annotations

from dataclasses import dataclass

from bioprecedence.corpus import CorpusError, DependencyGraph, Sentence

DOWN = "down"
UP = "up"

#: Rendering modes understood by :func:`render_path`.
RENDER_MODES = ("unlexicalized", "lemmas", "endpoints_roles", "endpoints_labels")

_MARKER = {DOWN: ">", UP: "<"}


@dataclass(frozen=True)
class PathStep:
    direction: str           # DOWN or UP
    relation: str
    landing: int             # token index the step arrives at

    def key(self) -> tuple[str, str, int]:
        return (self.direction, self.relation, self.landing)

    def flipped(self, new_landing: int) -> "PathStep":
        return PathStep(
            direction=DOWN if self.direction == UP else UP,
            relation=self.relation,
            landing=new_landing,
        )


@dataclass(frozen=True)
class SynPath:
    start: int
    steps: tuple[PathStep, ...]

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def end(self) -> int:
        return self.steps[-1].landing if self.steps else self.start

    def tokens(self) -> list[int]:
        """Every token index on the path, endpoints included."""
        return [self.start] + [s.landing for s in self.steps]

    def reversed(self) -> "SynPath":
        """The same walk taken end-to-start; step directions invert."""
        nodes = self.tokens()
        steps = []
        for i in range(len(self.steps) - 1, -1, -1):
            steps.append(self.steps[i].flipped(nodes[i]))
        return SynPath(start=self.end, steps=tuple(steps))


def _adjacency(graph: DependencyGraph) -> dict[int, list[PathStep]]:
    adj: dict[int, list[PathStep]] = {}
    for gov, dep, rel in graph.edges:
        adj.setdefault(gov, []).append(PathStep(DOWN, rel, dep))
        adj.setdefault(dep, []).append(PathStep(UP, rel, gov))
    for steps in adj.values():
        steps.sort(key=PathStep.key)
    return adj


def shortest_path(graph: DependencyGraph, start: int, end: int,
                  n_tokens: int | None = None) -> SynPath | None:
    """Minimal-length undirected path from ``start`` to ``end``.

    Returns None when the two tokens are disconnected. Among equally short
    paths, the greedy walk over distance-decreasing steps sorted by
    (direction, relation, landing) yields the lexicographically smallest
    step sequence.
    """
    for idx in (start, end):
        if idx < 0 or (n_tokens is not None and idx >= n_tokens):
            raise CorpusError(f"token index {idx} out of bounds")
    if start == end:
        return SynPath(start=start, steps=())
    adj = _adjacency(graph)
    dist = _bfs_distances(adj, end)
    if start not in dist:
        return None
    steps = []
    current = start
    while current != end:
        options = [s for s in adj[current] if dist.get(s.landing, -1) == dist[current] - 1]
        step = min(options, key=PathStep.key)
        steps.append(step)
        current = step.landing
    return SynPath(start=start, steps=tuple(steps))


def _bfs_distances(adj: dict[int, list[PathStep]], source: int) -> dict[int, int]:
    dist = {source: 0}
    frontier = [source]
    while frontier:
        nxt = []
        for node in frontier:
            for step in adj.get(node, ()):
                if step.landing not in dist:
                    dist[step.landing] = dist[node] + 1
                    nxt.append(step.landing)
        frontier = nxt
    return dist


def path_to_root(graph: DependencyGraph, index: int) -> SynPath:
    """Shortest path from the nearest root down to ``index``.

    On a well-formed tree this uses downward steps only; on non-tree graphs
    it falls back to the undirected shortest path. Roots are tried in order
    of path length, then by the path's step-sequence key, so the result is
    deterministic even with multiple roots.
    """
    best = None
    for root in sorted(graph.roots):
        path = shortest_path(graph, root, index)
        if path is None:
            continue
        key = (len(path), tuple(s.key() for s in path.steps))
        if best is None or key < best[0]:
            best = (key, path)
    if best is None:
        raise CorpusError(f"token {index} is unreachable from any root")
    return best[1]


def render_path(path: SynPath, mode: str, sentence: Sentence | None = None,
                endpoint: str | None = None) -> str:
    """Deterministic string form of a path.

    * unlexicalized:      ``>nsubj`` / ``<dobj`` per step, space-joined
    * lemmas:             each step suffixed with the landing token's lemma,
                          ``>prep_to:site``
    * endpoints_roles /
      endpoints_labels:   unlexicalized steps with the provided endpoint
                          decoration on the final step, ``>nsubj:THEME``
    """
    if mode not in RENDER_MODES:
        raise ValueError(f"unknown render mode {mode!r}")
    if not path.steps:
        return ""
    parts = []
    last = len(path.steps) - 1
    for i, step in enumerate(path.steps):
        piece = f"{_MARKER[step.direction]}{step.relation}"
        if mode == "lemmas":
            if sentence is None:
                raise ValueError("lemmas mode needs the sentence")
            piece += f":{sentence.tokens[step.landing].lemma}"
        elif mode in ("endpoints_roles", "endpoints_labels") and i == last:
            if endpoint is None:
                raise ValueError(f"{mode} mode needs an endpoint decoration")
            piece += f":{endpoint}"
        parts.append(piece)
    return " ".join(parts)
