"""Integer min-cost flow and maximum bipartite matching."""

from __future__ import annotations

import heapq
from collections import deque

INF = float("inf")


class MinCostFlow:
    """Successive shortest augmenting paths with Dijkstra on reduced costs.

    Arc costs must be non-negative integers; there is no negative-cycle handling.
    """

    def __init__(self, n: int):
        self.n = n
        # edge: [to, residual capacity, cost, index of reverse edge]
        self.graph: list[list[list[int]]] = [[] for _ in range(n)]

    def add_edge(self, u: int, v: int, cap: int, cost: int) -> tuple[int, int]:
        if cost < 0:
            raise ValueError("negative arc cost")
        self.graph[u].append([v, cap, cost, len(self.graph[v])])
        self.graph[v].append([u, 0, -cost, len(self.graph[u]) - 1])
        return u, len(self.graph[u]) - 1

    def flow_on(self, ref: tuple[int, int]) -> int:
        u, k = ref
        v, _, _, rev = self.graph[u][k]
        return self.graph[v][rev][1]

    def solve(self, s: int, t: int, limit: int | None = None) -> tuple[int, int]:
        """Send up to ``limit`` units from s to t at minimum cost; returns (flow, cost)."""
        n = self.n
        potential = [0] * n
        flow = cost = 0
        while limit is None or flow < limit:
            dist = [INF] * n
            prev = [None] * n
            dist[s] = 0
            heap = [(0, s)]
            while heap:
                d, u = heapq.heappop(heap)
                if d > dist[u]:
                    continue
                pu = potential[u]
                for k, (v, cap, c, _) in enumerate(self.graph[u]):
                    if cap > 0:
                        nd = d + c + pu - potential[v]
                        if nd < dist[v]:
                            dist[v] = nd
                            prev[v] = (u, k)
                            heapq.heappush(heap, (nd, v))
            if dist[t] == INF:
                break
            for v in range(n):
                if dist[v] < INF:
                    potential[v] += dist[v]
            push = INF if limit is None else limit - flow
            v = t
            while v != s:
                u, k = prev[v]
                push = min(push, self.graph[u][k][1])
                v = u
            v = t
            while v != s:
                u, k = prev[v]
                e = self.graph[u][k]
                e[1] -= push
                self.graph[v][e[3]][1] += push
                cost += push * e[2]
                v = u
            flow += push
        return flow, cost


def hopcroft_karp(adj: list[list[int]], n_right: int) -> list[int | None]:
    """Maximum matching of a bipartite graph given left-vertex adjacency lists.

    Returns ``match[left] -> right`` (None when unmatched).
    """
    n_left = len(adj)
    match_l: list[int | None] = [None] * n_left
    match_r: list[int | None] = [None] * n_right

    def bfs() -> tuple[bool, list[int | float]]:
        layer: list[int | float] = [INF] * n_left
        queue = deque()
        for u in range(n_left):
            if match_l[u] is None:
                layer[u] = 0
                queue.append(u)
        found = False
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                w = match_r[v]
                if w is None:
                    found = True
                elif layer[w] == INF:
                    layer[w] = layer[u] + 1
                    queue.append(w)
        return found, layer

    def dfs(u: int, layer) -> bool:
        for v in adj[u]:
            w = match_r[v]
            if w is None or (layer[w] == layer[u] + 1 and dfs(w, layer)):
                match_l[u] = v
                match_r[v] = u
                return True
        layer[u] = INF
        return False

    while True:
        found, layer = bfs()
        if not found:
            break
        for u in range(n_left):
            if match_l[u] is None:
                dfs(u, layer)
    return match_l
