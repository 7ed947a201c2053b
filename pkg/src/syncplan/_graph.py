"""Graph plumbing shared by the automaton and planning code."""
from __future__ import annotations

from collections import deque
from typing import Callable, Hashable, Iterable, Mapping, Sequence

Node = Hashable
Succ = Callable[[Node], Iterable[Node]]


def _as_succ(succ: Succ | Mapping[Node, Sequence[Node]]) -> Succ:
    if callable(succ):
        return succ
    return lambda n: succ.get(n, ())


def reachable(sources: Iterable[Node], succ) -> list[Node]:
    """Nodes reachable from `sources`, in BFS discovery order."""
    succ = _as_succ(succ)
    seen = dict.fromkeys(sources)
    queue = deque(seen)
    while queue:
        n = queue.popleft()
        for m in succ(n):
            if m not in seen:
                seen[m] = None
                queue.append(m)
    return list(seen)


def sccs(nodes: Iterable[Node], succ) -> list[list[Node]]:
    """Strongly connected components (iterative Tarjan), in discovery order."""
    succ = _as_succ(succ)
    index: dict = {}
    low: dict = {}
    on_stack: set = set()
    stack: list = []
    out: list = []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(succ(root)))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(succ(w))))
                    advanced = True
                    break
                if w in on_stack and index[w] < low[v]:
                    low[v] = index[w]
            if advanced:
                continue
            work.pop()
            if work:
                u = work[-1][0]
                if low[v] < low[u]:
                    low[u] = low[v]
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                out.append(comp)
    return out


def cyclic_components(nodes: Iterable[Node], succ) -> list[set[Node]]:
    """SCCs that contain at least one cycle (size > 1 or a self-loop)."""
    succ = _as_succ(succ)
    out = []
    for comp in sccs(nodes, succ):
        if len(comp) > 1:
            out.append(set(comp))
        elif comp[0] in set(succ(comp[0])):
            out.append(set(comp))
    return out


def bfs_path(sources: Iterable[Node], succ, targets: Callable[[Node], bool],
             allowed: Callable[[Node], bool] | None = None) -> list[Node] | None:
    """Shortest (hop count) path from some source to a node satisfying `targets`."""
    succ = _as_succ(succ)
    parent: dict = {}
    queue = deque()
    for s in sources:
        if s not in parent and (allowed is None or allowed(s)):
            parent[s] = None
            queue.append(s)
    while queue:
        n = queue.popleft()
        if targets(n):
            path = [n]
            while parent[path[-1]] is not None:
                path.append(parent[path[-1]])
            return path[::-1]
        for m in succ(n):
            if m not in parent and (allowed is None or allowed(m)):
                parent[m] = n
                queue.append(m)
    return None


def find_lasso(sources: Iterable[Node], succ, accepting: Callable[[Node], bool]):
    """Return ``(prefix, cycle)`` of an accepting lasso, or None.

    ``prefix`` runs from a source up to (excluding) the cycle's first node;
    ``cycle`` starts at an accepting node and its last node has an edge back
    to ``cycle[0]``.
    """
    succ = _as_succ(succ)
    sources = list(sources)
    nodes = reachable(sources, succ)
    order = {n: i for i, n in enumerate(nodes)}
    best = None
    for comp in cyclic_components(nodes, succ):
        acc = [n for n in comp if accepting(n)]
        if acc:
            a = min(acc, key=order.__getitem__)
            if best is None or order[a] < order[best[0]]:
                best = (a, comp)
    if best is None:
        return None
    a, comp = best
    stem = bfs_path(sources, succ, lambda n: n == a)
    back = bfs_path([m for m in succ(a) if m in comp], succ,
                    lambda n: n == a, allowed=comp.__contains__)
    cycle = [a] + back[:-1]
    return stem[:-1], cycle


def live_nodes(nodes: Iterable[Node], succ, accepting: Callable[[Node], bool]) -> set[Node]:
    """Nodes from which some accepting cycle is reachable."""
    succ = _as_succ(succ)
    nodes = list(nodes)
    seeds = set()
    for comp in cyclic_components(nodes, succ):
        if any(accepting(n) for n in comp):
            seeds |= comp
    pred: dict = {}
    for n in nodes:
        for m in succ(n):
            pred.setdefault(m, []).append(n)
    return set(reachable(seeds, pred))
