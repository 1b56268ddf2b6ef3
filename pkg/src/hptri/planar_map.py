"""Half-edge combinatorial map kernel for half-planar and polygonal triangulations.

Representation: parallel arrays twin / next / origin / face over dense
half-edge ids.  `next` walks counterclockwise around the face on the left of
each half-edge; faces are the orbits of `next`.  The unique external face has
id EXTERNAL = -1.  A half-plane map is stored as the finite revealed disc:
its external orbit consists of the exposed frontier (top) and the underside
of the revealed floor window (bottom).

Key conventions used throughout:
- the root edge of a half-plane map joins floor offsets 0 and 1; the stored
  `root` handle is the underside half-edge of that edge (it is never deleted,
  while the top side gets retwinned as faces are attached and holes filled);
- hole filling glues a polygon patch anti-parallel onto the hole cycle, patch
  root against the first cycle element (the chord of the peeled triangle);
- the degenerate 2-gon patch (boundary 2, no faces) identifies the two hole
  edges into one, redirecting twins; detection afterwards is `twin of one
  outer side == the other outer side`.

Region build/readback engine: every triangulated region is decomposed by its
root face (internal apex, or boundary apex at distance d), which yields a
canonical token code per map.  The engine is shared by the samplers (random
choices), event-log replay (coded choices), and canonical serialization
(readback).
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, StructuralError
from .peeling_law import PeelEvent

EXTERNAL = -1


class Store:
    """Low-level half-edge store with alive flags and creation-order ids."""

    def __init__(self, mode="simple"):
        self.mode = mode
        self.twin = []
        self.nxt = []
        self.prv = []
        self.origin = []
        self.face = []
        self.he_alive = []
        self.v_alive = []
        self.f_alive = []
        self.f_kind = []  # 'peel' | 'patch' | 'hole' | 'face'

    # -- creation ---------------------------------------------------------
    def new_vertex(self):
        self.v_alive.append(True)
        return len(self.v_alive) - 1

    def new_face(self, kind="face"):
        self.f_alive.append(True)
        self.f_kind.append(kind)
        return len(self.f_alive) - 1

    def _new_he(self, origin, face):
        self.twin.append(-1)
        self.nxt.append(-1)
        self.prv.append(-1)
        self.origin.append(origin)
        self.face.append(face)
        self.he_alive.append(True)
        return len(self.twin) - 1

    def new_edge(self, u, v, f1=EXTERNAL, f2=EXTERNAL):
        """Create the half-edge pair (u->v with face f1, v->u with face f2)."""
        h = self._new_he(u, f1)
        t = self._new_he(v, f2)
        self.twin[h] = t
        self.twin[t] = h
        return h, t

    # -- mutation ---------------------------------------------------------
    def set_next(self, a, b):
        self.nxt[a] = b
        self.prv[b] = a

    def kill_he(self, h):
        self.he_alive[h] = False

    def kill_face(self, f):
        self.f_alive[f] = False

    def kill_vertex(self, v):
        self.v_alive[v] = False

    # -- queries ----------------------------------------------------------
    def head(self, h):
        return self.origin[self.twin[h]]

    def face_orbit(self, h):
        out = [h]
        cur = self.nxt[h]
        while cur != h:
            out.append(cur)
            cur = self.nxt[cur]
            if len(out) > len(self.twin):
                raise StructuralError("next is not a permutation")
        return out

    def alive_half_edges(self):
        return [h for h in range(len(self.twin)) if self.he_alive[h]]

    def counts(self):
        """(V, E, F_internal) over alive elements, holes excluded from F."""
        he = self.alive_half_edges()
        v = len({self.origin[h] for h in he})
        e = len(he) // 2
        f = len(
            {
                self.face[h]
                for h in he
                if self.face[h] != EXTERNAL
                and self.f_kind[self.face[h]] != "hole"
            }
        )
        return v, e, f


# ---------------------------------------------------------------------------
# Region build / readback engine
# ---------------------------------------------------------------------------
#
# A pending region is a boundary cycle of length M with the region on the
# left, rooted at its first edge.  It is represented by the list of *outer*
# sides of its boundary edges (the half-edge on the far side of edge t, which
# points backwards: from vertex t+1 to vertex t).  Outer sides are stable:
# they belong to already-built structure, while the inner sides may later be
# consumed by 2-gon identification.
#
# Decomposition cases for the region root face, as policy tokens:
#   ('E',)    empty 2-gon: identify the two boundary edges (M == 2 only)
#   ('A',)    internal apex: one new vertex, region becomes an (M+1)-gon
#   ('B', d)  apex = boundary vertex d+1 (1 <= d <= M-2): split into a
#             (d+1)-gon and an (M-d)-gon; the first piece is processed first.


def _region_fill(store, outer0, policy, record=None):
    """Fill the region bounded by `outer0` according to `policy`.

    policy.choose(M, state) returns a token as above, paired with successor
    state(s).  Returns the number of internal vertices created.  Tokens are
    appended to `record` when given.
    """
    # Region boundaries are kept as doubly linked chains (nx / pv over
    # half-edge ids) so that a split at position d costs O(min(d, M - d))
    # instead of O(M); long runs of near-end splits then fill in near-linear
    # time.  Each region is the chain from `head` to `tail` of length M.
    n_created = 0
    items = list(outer0)
    nx = {}
    pv = {}
    for a, b in zip(items, items[1:]):
        nx[a] = b
        pv[b] = a
    stack = [(items[0], items[-1], len(items), policy.initial)]
    while stack:
        head, tail, M, st = stack.pop()
        tok_st = policy.choose(M, st)
        tok = tok_st[0]
        if record is not None:
            record.append(tok)
        if tok == ("E",):
            if M != 2:
                raise StructuralError("identification needs a 2-gon")
            a, b = store.twin[head], store.twin[tail]
            store.twin[head] = tail
            store.twin[tail] = head
            store.kill_he(a)
            store.kill_he(b)
            continue
        e0 = store.twin[head]
        u = store.origin[e0]
        v1 = store.head(e0)
        if tok == ("A",):
            w = store.new_vertex()
            n_created += 1
            fc = store.new_face("patch")
            c, c2 = store.new_edge(v1, w, fc, EXTERNAL)
            d, d2 = store.new_edge(w, u, fc, EXTERNAL)
            store.face[e0] = fc
            store.set_next(e0, c)
            store.set_next(c, d)
            store.set_next(d, e0)
            # new region = outer[1:] + [d, c]
            h2 = nx[head]
            nx[tail] = d
            pv[d] = tail
            nx[d] = c
            pv[c] = d
            stack.append((h2, c, M + 1, tok_st[1]))
        elif tok[0] == "B":
            d_split = tok[1]
            if not (1 <= d_split <= M - 2):
                raise StructuralError("split index out of range")
            # locate outer[d_split] from the nearer end
            if d_split <= M - 1 - d_split:
                node = head
                for _ in range(d_split):
                    node = nx[node]
            else:
                node = tail
                for _ in range(M - 1 - d_split):
                    node = pv[node]
            w = store.origin[node]  # outer[d] points v_{d+1} -> v_d
            fc = store.new_face("patch")
            c, c2 = store.new_edge(v1, w, fc, EXTERNAL)
            dd, dd2 = store.new_edge(w, u, fc, EXTERNAL)
            store.face[e0] = fc
            store.set_next(e0, c)
            store.set_next(c, dd)
            store.set_next(dd, e0)
            # piece2 = outer[d_split + 1:] + [dd]
            h2 = nx[node]
            nx[tail] = dd
            pv[dd] = tail
            stack.append((h2, dd, M - d_split, tok_st[2]))
            # piece1 = [c] + outer[1 : d_split + 1]
            h1 = nx[head]
            nx[c] = h1
            pv[h1] = c
            stack.append((c, node, d_split + 1, tok_st[1]))
        else:
            raise StructuralError("unknown region token %r" % (tok,))
    return n_created


def _region_code(store, outer0):
    """Read the canonical decomposition code of a filled region back."""
    # Mirrors the linked-chain representation of _region_fill; the apex is
    # searched from both ends at once so a split at position d costs
    # O(min(d, M - d)), the same as producing it did.
    tokens = []
    items = list(outer0)
    nx = {}
    pv = {}
    for a, b in zip(items, items[1:]):
        nx[a] = b
        pv[b] = a
    stack = [(items[0], items[-1], len(items))]
    while stack:
        head, tail, M = stack.pop()
        if M == 2 and store.twin[head] == tail:
            tokens.append(("E",))
            continue
        e0 = store.twin[head]
        fc = store.face[e0]
        if fc == EXTERNAL:
            raise StructuralError("region root face missing")
        c = store.nxt[e0]
        dd = store.nxt[c]
        if store.nxt[dd] != e0:
            raise StructuralError("region root face is not a triangle")
        apex = store.origin[dd]
        # origin of outer[t] is vertex t+1 of the region cycle; a boundary
        # apex sits at some t in [1, M-2]
        d_split = None
        node = None
        if M >= 3:
            f, tf = nx[head], 1
            bnode, tb = pv[tail], M - 2
            while tf <= tb:
                if store.origin[f] == apex:
                    d_split, node = tf, f
                    break
                if tb != tf and store.origin[bnode] == apex:
                    d_split, node = tb, bnode
                    break
                tf += 1
                f = nx[f]
                tb -= 1
                bnode = pv[bnode]
        if d_split is not None:
            tokens.append(("B", d_split))
            # piece2 = outer[d_split + 1:] + [dd]
            h2 = nx[node]
            nx[tail] = dd
            pv[dd] = tail
            stack.append((h2, dd, M - d_split))
            # piece1 = [c] + outer[1 : d_split + 1]
            h1 = nx[head]
            nx[c] = h1
            pv[h1] = c
            stack.append((c, node, d_split + 1))
        else:
            tokens.append(("A",))
            # new region = outer[1:] + [dd, c]
            h2 = nx[head]
            nx[tail] = dd
            pv[dd] = tail
            nx[dd] = c
            pv[c] = dd
            stack.append((h2, c, M + 1))
    return tuple(tokens)


class CodePolicy:
    """Replays a recorded token code through the region engine."""

    initial = None

    def __init__(self, code):
        self._it = iter(code)

    def choose(self, M, st):
        tok = next(self._it)
        if tok == ("A",):
            return (tok, None)
        if tok[0] == "B":
            return (tok, None, None)
        return (tok,)


# ---------------------------------------------------------------------------
# Finite maps (triangulations of an m-gon)
# ---------------------------------------------------------------------------


class FiniteMap:
    """Rooted triangulation of an m-gon with n internal vertices.

    `root` is the external-side half-edge of the root boundary edge (the
    external face lies on the left of `root`, i.e. on the right of the
    oriented root edge twin(root)).  The degenerate 2-gon (m=2, n=0) is
    flagged: its two boundary edges are identified into a single edge with
    both sides external.
    """

    def __init__(self, store, root, m, n, degenerate=False, code=None):
        self.store = store
        self.root = root
        self.m = m
        self.n = n
        self.degenerate = degenerate
        self.code = code

    def boundary_outer(self):
        """Outer (external-side) boundary half-edges in region-cycle order."""
        orbit = self.store.face_orbit(self.root)
        return [orbit[0]] + orbit[:0:-1]

    def canonical_code(self):
        if self.degenerate:
            return (("E",),)
        return _region_code(self.store, self.boundary_outer())

    def counts(self):
        return self.store.counts()


def _new_polygon_boundary(store, m):
    """Simple m-cycle boundary; returns (outer list in region order, root)."""
    verts = [store.new_vertex() for _ in range(m)]
    inner = []
    outer = []
    for t in range(m):
        h, tw = store.new_edge(verts[t], verts[(t + 1) % m])
        inner.append(h)
        outer.append(tw)
    for t in range(m):
        store.set_next(outer[t], outer[t - 1])
    return outer, outer[0]


def degenerate_two_gon():
    """The identified-edge 2-gon patch (m=2, n=0), flagged degenerate."""
    store = Store()
    u = store.new_vertex()
    v = store.new_vertex()
    h, t = store.new_edge(u, v)
    store.set_next(h, t)
    store.set_next(t, h)
    return FiniteMap(store, h, 2, 0, degenerate=True, code=(("E",),))


def build_polygon(m, policy, record_code=True):
    """Build a triangulation of an m-gon by running `policy` on the engine."""
    if m < 2:
        raise DomainError("m must be >= 2")
    if m == 2:
        tok = policy.choose(2, policy.initial)
        if tok[0] == ("E",):
            return degenerate_two_gon()
        # re-run the whole region including this first decision
        policy = _PrefixPolicy(tok, policy)
    store = Store()
    outer, root = _new_polygon_boundary(store, m)
    record = [] if record_code else None
    n = _region_fill(store, outer, policy, record=record)
    code = tuple(record) if record_code else None
    return FiniteMap(store, root, m, n, code=code)


class _PrefixPolicy:
    """Policy wrapper replaying one pre-drawn decision before delegating."""

    def __init__(self, first, inner):
        self._first = first
        self._inner = inner
        self._used = False
        self.initial = None

    def choose(self, M, st):
        if not self._used:
            self._used = True
            return self._first
        return self._inner.choose(M, st)


def glue_patch(store, hole_cycle, hole_face, patch):
    """Glue `patch` into the hole bounded by `hole_cycle` (anti-parallel,
    patch root against hole_cycle[0]).

    Returns (new_edges, new_internal_vertices, new_faces): vertex-id pairs of
    every edge the host gains, the internal vertices created, and the face
    ids created, for incremental bookkeeping.  Kills the hole cycle sides and
    the hole face.
    """
    L = len(hole_cycle)
    if patch.degenerate:
        if L != 2:
            raise DomainError("degenerate patch needs a perimeter-2 hole")
        a, b = hole_cycle
        ta, tb = store.twin[a], store.twin[b]
        store.twin[ta] = tb
        store.twin[tb] = ta
        store.kill_he(a)
        store.kill_he(b)
        store.kill_face(hole_face)
        return [], [], []
    ps = patch.store
    p_list = ps.face_orbit(patch.root)
    if len(p_list) != L:
        raise DomainError(
            "patch boundary %d != hole perimeter %d" % (len(p_list), L)
        )
    p_index = {p: t for t, p in enumerate(p_list)}
    # vertex correspondence: origin of p_list[t] = head of hole_cycle[(L-t)%L]
    vmap = {}
    for t in range(L):
        vmap[ps.origin[p_list[t]]] = store.head(hole_cycle[(L - t) % L])
    new_vertices = []
    hemap = {}
    copied = [
        ph
        for ph in range(len(ps.twin))
        if ps.he_alive[ph] and ph not in p_index
    ]
    for ph in copied:
        ov = ps.origin[ph]
        if ov not in vmap:
            nv = store.new_vertex()
            vmap[ov] = nv
            new_vertices.append(nv)
        hemap[ph] = store._new_he(vmap[ov], -3)  # face assigned below
    fmap = {}
    for ph in copied:
        h = hemap[ph]
        pf = ps.face[ph]
        if pf not in fmap:
            fmap[pf] = store.new_face("patch")
        store.face[h] = fmap[pf]
        store.set_next(h, hemap[ps.nxt[ph]])
        pt = ps.twin[ph]
        if pt in p_index:
            q_host = store.twin[hole_cycle[(L - p_index[pt]) % L]]
            store.twin[h] = q_host
            store.twin[q_host] = h
        else:
            store.twin[h] = hemap[pt]
    new_edges = []
    seen = set()
    for ph in copied:
        h = hemap[ph]
        t = store.twin[h]
        key = (min(h, t), max(h, t))
        if key not in seen:
            seen.add(key)
            new_edges.append((store.origin[h], store.head(h)))
    for hc in hole_cycle:
        store.kill_he(hc)
    store.kill_face(hole_face)
    return new_edges, new_vertices, list(fmap.values())


# ---------------------------------------------------------------------------
# Half-plane maps
# ---------------------------------------------------------------------------


class Hole:
    """Handle for an unfilled hole left by attach_jump."""

    def __init__(self, cycle, face, side, i):
        self.cycle = cycle  # half-edge ids, chord side first
        self.face = face
        self.side = side
        self.i = i

    @property
    def perimeter(self):
        return len(self.cycle)


class VertexDistances:
    """Dict-like vertex -> distance map over dense integer vertex ids,
    backed by a numpy array so frontier scans can vectorize; -1 = unset."""

    __slots__ = ("arr",)

    def __init__(self):
        self.arr = np.full(64, -1, dtype=np.int64)

    def _grow(self, v):
        n = len(self.arr)
        if v >= n:
            new = np.full(max(2 * n, v + 1), -1, dtype=np.int64)
            new[:n] = self.arr
            self.arr = new

    def __setitem__(self, v, d):
        self._grow(v)
        self.arr[v] = d

    def __getitem__(self, v):
        if 0 <= v < len(self.arr):
            d = self.arr[v]
            if d >= 0:
                return int(d)
        raise KeyError(v)

    def get(self, v, default=None):
        if 0 <= v < len(self.arr):
            d = self.arr[v]
            if d >= 0:
                return int(d)
        return default

    def __contains__(self, v):
        return 0 <= v < len(self.arr) and self.arr[v] >= 0

    def setdefault(self, v, d):
        cur = self.get(v)
        if cur is None:
            self[v] = d
            return d
        return cur

    @classmethod
    def from_dict(cls, mapping):
        out = cls()
        for v, d in mapping.items():
            out[v] = d
        return out


class HalfPlaneMap:
    """The revealed disc of a half-planar triangulation under peeling.

    Floor vertices carry signed integer offsets; the root edge joins offsets
    0 and 1.  Only the revealed window [lo, hi] of the infinite floor is
    materialized; it grows on demand.  `frontier` lists the exposed half-edges
    left to right (each pointing rightward, unexplored region on its left).
    Graph distances to the root edge (min over its two endpoints) are
    maintained incrementally and can only decrease.
    """

    def __init__(self, width):
        if width < 1:
            raise DomainError("width must be >= 1")
        s = Store()
        self.store = s
        self.initial_width = width
        self.offset_of = {}
        self.vertex_at = {}
        self.lo, self.hi = 0, width
        verts = []
        for o in range(width + 1):
            v = s.new_vertex()
            self.offset_of[v] = o
            self.vertex_at[o] = v
            verts.append(v)
        tops, bots = [], []
        for j in range(width):
            h, t = s.new_edge(verts[j], verts[j + 1])
            tops.append(h)
            bots.append(t)
        for j in range(width - 1):
            s.set_next(tops[j], tops[j + 1])
            s.set_next(bots[j + 1], bots[j])
        s.set_next(tops[-1], bots[-1])
        s.set_next(bots[0], tops[0])
        self.root = bots[0]  # underside of the floor edge at offsets (0, 1)
        self.frontier_e = list(tops)
        self.frontier_v = list(verts)
        self.frontier_vset = set(verts)
        self.root_marker = 0
        self.n_internal = 0
        self.hole_faces = set()
        self.dist = VertexDistances()
        for v in verts:
            self.dist[v] = self._floor_dist(self.offset_of[v])
        self.adj = {v: [] for v in verts}
        for j in range(width):
            self.adj[verts[j]].append(verts[j + 1])
            self.adj[verts[j + 1]].append(verts[j])

    # -- basic geometry ----------------------------------------------------
    @staticmethod
    def _floor_dist(o):
        return -o if o <= 0 else o - 1

    def n_frontier_edges(self):
        return len(self.frontier_e)

    def exposed(self, edge):
        return self.store.face[edge] == EXTERNAL and edge in self._frontier_set()

    def _frontier_set(self):
        return set(self.frontier_e)

    # -- distance maintenance ----------------------------------------------
    def _add_edge_dist(self, x, y):
        self.adj.setdefault(x, []).append(y)
        self.adj.setdefault(y, []).append(x)
        dq = deque()
        dx, dy = self.dist.get(x), self.dist.get(y)
        if dx is None:
            self.dist[x] = dx = (dy + 1) if dy is not None else 0
            dq.append(x)
        if dy is None:
            self.dist[y] = dy = dx + 1
            dq.append(y)
        if dx + 1 < dy:
            self.dist[y] = dx + 1
            dq.append(y)
        elif dy + 1 < dx:
            self.dist[x] = dy + 1
            dq.append(x)
        while dq:
            z = dq.popleft()
            dz = self.dist[z]
            for nb in self.adj[z]:
                if self.dist.get(nb, math.inf) > dz + 1:
                    self.dist[nb] = dz + 1
                    dq.append(nb)

    # -- floor window growth -------------------------------------------------
    def extend_right(self):
        s = self.store
        o = self.hi + 1
        v_end = self.vertex_at[self.hi]
        v = s.new_vertex()
        self.offset_of[v] = o
        self.vertex_at[o] = v
        h, t = s.new_edge(v_end, v)
        last = self.frontier_e[-1]
        after = s.nxt[last]
        s.set_next(last, h)
        s.set_next(h, t)
        s.set_next(t, after)
        self.frontier_e.append(h)
        self.frontier_v.append(v)
        self.frontier_vset.add(v)
        self.hi = o
        self.dist[v] = self.dist[v_end] + 1
        self.adj[v] = []
        self._add_edge_dist(v_end, v)

    def extend_left(self):
        s = self.store
        o = self.lo - 1
        v_end = self.vertex_at[self.lo]
        v = s.new_vertex()
        self.offset_of[v] = o
        self.vertex_at[o] = v
        h, t = s.new_edge(v, v_end)  # h points rightward
        first = self.frontier_e[0]
        before = s.prv[first]  # bottom side arriving at the left end
        s.set_next(before, t)
        s.set_next(t, h)
        s.set_next(h, first)
        self.frontier_e.insert(0, h)
        self.frontier_v.insert(0, v)
        self.frontier_vset.add(v)
        self.lo = o
        self.root_marker += 1
        self.dist[v] = self.dist[v_end] + 1
        self.adj[v] = []
        self._add_edge_dist(v_end, v)

    def extend_left_many(self, k):
        """Grow the window k cells to the left in one frontier splice.

        Equivalent to k extend_left calls but O(window + k) instead of
        O(k * window); large left jumps need this.
        """
        if k <= 0:
            return
        s = self.store
        first = self.frontier_e[0]
        prev_bottom = s.prv[first]
        prev_v = self.vertex_at[self.lo]
        top_chain = []
        new_v = []
        for j in range(1, k + 1):
            o = self.lo - j
            v = s.new_vertex()
            self.offset_of[v] = o
            self.vertex_at[o] = v
            h, t = s.new_edge(v, prev_v)  # h points rightward
            s.set_next(prev_bottom, t)
            prev_bottom = t
            top_chain.append(h)
            new_v.append(v)
            self.frontier_vset.add(v)
            self.dist[v] = self.dist[prev_v] + 1
            self.adj[v] = []
            self._add_edge_dist(prev_v, v)
            prev_v = v
        s.set_next(prev_bottom, top_chain[-1])
        for j in range(k - 1, 0, -1):
            s.set_next(top_chain[j], top_chain[j - 1])
        s.set_next(top_chain[0], first)
        self.frontier_e[0:0] = top_chain[::-1]
        self.frontier_v[0:0] = new_v[::-1]
        self.lo -= k
        self.root_marker += k

    # -- peel primitives ----------------------------------------------------
    def _splice_marker(self, p1, p2, new_len):
        if self.root_marker > p2:
            self.root_marker += new_len - (p2 - p1 + 1)
        elif self.root_marker >= p1:
            self.root_marker = p1

    def attach_alpha_at(self, idx):
        s = self.store
        e = self.frontier_e[idx]
        u = self.frontier_v[idx]
        v = self.frontier_v[idx + 1]
        w = s.new_vertex()
        self.n_internal += 1
        fc = s.new_face("peel")
        c, c2 = s.new_edge(v, w, fc, EXTERNAL)
        d, d2 = s.new_edge(w, u, fc, EXTERNAL)
        before = s.prv[e]
        after = s.nxt[e]
        s.face[e] = fc
        s.set_next(e, c)
        s.set_next(c, d)
        s.set_next(d, e)
        s.set_next(before, d2)
        s.set_next(d2, c2)
        s.set_next(c2, after)
        self.frontier_e[idx : idx + 1] = [d2, c2]
        self.frontier_v.insert(idx + 1, w)
        self.frontier_vset.add(w)
        self._splice_marker(idx, idx, 2)
        self.adj[w] = []
        self._add_edge_dist(u, w)
        self._add_edge_dist(v, w)
        return w

    def attach_alpha(self, edge):
        try:
            idx = self.frontier_e.index(edge)
        except ValueError:
            raise DomainError("edge is not exposed") from None
        return self.attach_alpha_at(idx)

    def attach_jump_at(self, idx, side, i):
        if i < 1:
            raise DomainError("i must be >= 1")
        s = self.store
        if side == "right":
            while idx + 1 + i > len(self.frontier_v) - 1:
                self.extend_right()
        elif side == "left":
            if idx - i < 0:
                need = i - idx
                self.extend_left_many(need)
                idx += need
        else:
            raise DomainError("side must be 'left' or 'right'")
        e = self.frontier_e[idx]
        u = self.frontier_v[idx]
        v = self.frontier_v[idx + 1]
        fc = s.new_face("peel")
        hole_f = s.new_face("hole")
        if side == "right":
            w = self.frontier_v[idx + 1 + i]
            c, c2 = s.new_edge(v, w, fc, hole_f)
            d, d2 = s.new_edge(w, u, fc, EXTERNAL)
            enclosed = self.frontier_e[idx + 1 : idx + 1 + i]
            before = s.prv[e]
            after = s.nxt[enclosed[-1]]
            s.face[e] = fc
            s.set_next(e, c)
            s.set_next(c, d)
            s.set_next(d, e)
            # hole orbit: chord underside then the enclosed stretch
            s.set_next(c2, enclosed[0])
            s.set_next(enclosed[-1], c2)
            for f in enclosed:
                s.face[f] = hole_f
            s.set_next(before, d2)
            s.set_next(d2, after)
            gone = self.frontier_v[idx + 1 : idx + 1 + i]
            self.frontier_e[idx : idx + 1 + i] = [d2]
            del self.frontier_v[idx + 1 : idx + 1 + i]
            self._splice_marker(idx, idx + i, 1)
            hole = Hole([c2] + enclosed, hole_f, side, i)
            new_edge = (u, w)
        else:
            w = self.frontier_v[idx - i]
            c, c2 = s.new_edge(v, w, fc, EXTERNAL)
            d, d2 = s.new_edge(w, u, fc, hole_f)
            enclosed = self.frontier_e[idx - i : idx]
            before = s.prv[enclosed[0]]
            after = s.nxt[e]
            s.face[e] = fc
            s.set_next(e, c)
            s.set_next(c, d)
            s.set_next(d, e)
            s.set_next(d2, enclosed[0])
            s.set_next(enclosed[-1], d2)
            for f in enclosed:
                s.face[f] = hole_f
            s.set_next(before, c2)
            s.set_next(c2, after)
            gone = self.frontier_v[idx - i + 1 : idx + 1]
            self.frontier_e[idx - i : idx + 1] = [c2]
            del self.frontier_v[idx - i + 1 : idx + 1]
            self._splice_marker(idx - i, idx, 1)
            hole = Hole([d2] + enclosed, hole_f, side, i)
            new_edge = (w, v)
        for gv in gone:
            self.frontier_vset.discard(gv)
        # both created edge pairs (v,w) and (w,u) are new graph edges
        self._add_edge_dist(v, w)
        self._add_edge_dist(u, w)
        return hole

    def attach_jump(self, edge, side, i):
        try:
            idx = self.frontier_e.index(edge)
        except ValueError:
            raise DomainError("edge is not exposed") from None
        return self.attach_jump_at(idx, side, i)

    def fill_hole(self, hole, patch):
        if patch.degenerate:
            if hole.perimeter != 2:
                raise DomainError("degenerate patch needs a perimeter-2 hole")
        elif patch.m != hole.perimeter:
            raise DomainError(
                "patch boundary %d != hole perimeter %d"
                % (patch.m, hole.perimeter)
            )
        new_edges, new_verts, new_faces = glue_patch(
            self.store, hole.cycle, hole.face, patch
        )
        self.n_internal += patch.n
        # faces from a filled hole need no corner near the root (hull property)
        self.hole_faces.update(new_faces)
        for v in new_verts:
            self.adj[v] = []
        # batched distance relaxation: insert all patch adjacency first, then
        # run one multi-source wave seeded by the already-labelled (boundary)
        # endpoints; same fixpoint as per-edge relaxation, far fewer passes
        dq = deque()
        seeded = set()
        for x, y in new_edges:
            self.adj.setdefault(x, []).append(y)
            self.adj.setdefault(y, []).append(x)
            for z in (x, y):
                if z not in seeded and z in self.dist:
                    seeded.add(z)
                    dq.append(z)
        while dq:
            z = dq.popleft()
            dz = self.dist[z]
            for nb in self.adj[z]:
                if self.dist.get(nb, math.inf) > dz + 1:
                    self.dist[nb] = dz + 1
                    dq.append(nb)

    def apply_event(self, idx, event, patch_for=None):
        """Apply one peeling event at frontier position idx.

        Boundary events need a patch: either event.patch_code is replayed, or
        `patch_for(i, k)` supplies a FiniteMap.
        """
        if event.kind == "alpha":
            self.attach_alpha_at(idx)
            return
        hole = self.attach_jump_at(idx, event.side, event.i)
        if patch_for is not None:
            patch = patch_for(event.i, event.k)
        elif event.patch_code is not None:
            patch = build_polygon(event.i + 1, CodePolicy(event.patch_code))
        else:
            raise DomainError("boundary event without a patch source")
        if patch.n != event.k:
            raise StructuralError(
                "patch has %d internal vertices, event says %d"
                % (patch.n, event.k)
            )
        self.fill_hole(hole, patch)

    # -- readback -----------------------------------------------------------
    def root_top(self):
        return self.store.twin[self.root]

    def classify_root_face(self):
        """Reconstruct the peeling event that revealed the face above the
        root edge, from geometry alone.

        The enclosed-k flood count presumes the boundary stretch consumed by
        that peel was still bare floor (as when the root edge is peeled
        first); the (kind, side, i) readback is geometric and unconditional.
        """
        s = self.store
        e = self.root_top()
        fc = s.face[e]
        if fc == EXTERNAL:
            raise DomainError("root face not yet revealed")
        c = s.nxt[e]
        d = s.nxt[c]
        if s.nxt[d] != e:
            raise StructuralError("root face is not a triangle")
        apex = s.origin[d]
        if apex not in self.offset_of:
            return PeelEvent(kind="alpha")
        o = self.offset_of[apex]
        if o >= 2:
            side, i, chord_outer = "right", o - 1, c
        elif o <= -1:
            side, i, chord_outer = "left", -o, d
        else:
            raise StructuralError("root face apex on its own edge")
        k = self._enclosed_internal_count(chord_outer, fc)
        return PeelEvent(kind="boundary", side=side, i=i, k=k)

    def _enclosed_internal_count(self, chord_outer, tri_face):
        s = self.store
        start = s.face[s.twin[chord_outer]]
        if start == EXTERNAL or start == tri_face:
            return 0
        seen_f = {start}
        verts = set()
        dq = deque([start])
        orbits = {start: s.face_orbit(s.twin[chord_outer])}
        while dq:
            f = dq.popleft()
            for h in orbits[f]:
                verts.add(s.origin[h])
                g = s.face[s.twin[h]]
                if g in (EXTERNAL, tri_face) or g in seen_f:
                    continue
                seen_f.add(g)
                orbits[g] = s.face_orbit(s.twin[h])
                dq.append(g)
        return sum(1 for v in verts if v not in self.offset_of)

    def counts(self):
        return self.store.counts()


def new_floor(width):
    return HalfPlaneMap(width)


# ---------------------------------------------------------------------------
# Distances (full recompute) and validation
# ---------------------------------------------------------------------------


def bfs_distance(mp, vertex=None):
    """Graph distances from `vertex` (default: the root edge, i.e. both of
    its endpoints at distance 0) over the revealed map."""
    s = mp.store if hasattr(mp, "store") else mp
    adj = {}
    for h in s.alive_half_edges():
        adj.setdefault(s.origin[h], set()).add(s.head(h))
    if vertex is None:
        if isinstance(mp, HalfPlaneMap):
            seeds = [s.origin[mp.root], s.head(mp.root)]
        else:
            raise DomainError("vertex required for finite maps")
    else:
        seeds = [vertex]
    dist = {v: 0 for v in seeds}
    dq = deque(seeds)
    while dq:
        x = dq.popleft()
        for y in adj.get(x, ()):
            if y not in dist:
                dist[y] = dist[x] + 1
                dq.append(y)
    return dist


@dataclass
class Report:
    violations: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.violations

    def add(self, msg):
        self.violations.append(msg)


def validate(mp):
    """Structural checks; returns a Report listing violations."""
    rep = Report()
    s = mp.store
    alive = s.alive_half_edges()
    alive_set = set(alive)
    for h in alive:
        t = s.twin[h]
        if t == h:
            rep.add("twin fixed point at %d" % h)
        elif t not in alive_set or s.twin[t] != h:
            rep.add("twin not an involution at %d" % h)
        if s.nxt[h] not in alive_set:
            rep.add("next leaves alive set at %d" % h)
    targets = {}
    for h in alive:
        targets[s.nxt[h]] = targets.get(s.nxt[h], 0) + 1
    if any(c != 1 for c in targets.values()) or set(targets) != alive_set:
        rep.add("next is not a permutation of alive half-edges")
        return rep
    seen = set()
    ext_orbits = 0
    for h in alive:
        if h in seen:
            continue
        orbit = s.face_orbit(h)
        seen.update(orbit)
        f = s.face[h]
        if any(s.face[g] != f for g in orbit):
            rep.add("face orbit of %d has mixed face ids" % h)
        if any(s.head(g) != s.origin[orbit[(j + 1) % len(orbit)]]
               for j, g in enumerate(orbit)):
            rep.add("face orbit of %d is not vertex-chained" % h)
        if f == EXTERNAL:
            ext_orbits += 1
        elif s.f_kind[f] == "hole":
            rep.add("unfilled hole face %d" % f)
        elif s.mode == "simple" and len(orbit) != 3:
            rep.add("internal face %d has degree %d" % (f, len(orbit)))
        if s.mode == "simple" and f != EXTERNAL:
            for g in orbit:
                if s.origin[g] == s.head(g):
                    rep.add("self-loop half-edge %d" % g)
    if ext_orbits != 1:
        rep.add("external face has %d orbits, want 1" % ext_orbits)
    v, e, f = s.counts()
    if v - e + f != 1:
        rep.add("Euler relation fails: V-E+F = %d" % (v - e + f))
    if isinstance(mp, HalfPlaneMap):
        if len(set(mp.frontier_v)) != len(mp.frontier_v):
            rep.add("frontier path is not simple")
        for j, fe in enumerate(mp.frontier_e):
            if s.face[fe] != EXTERNAL:
                rep.add("frontier edge %d is not exposed" % fe)
            if s.origin[fe] != mp.frontier_v[j] or s.head(fe) != mp.frontier_v[j + 1]:
                rep.add("frontier lists out of sync at %d" % j)
        if mp.frontier_v[0] != mp.vertex_at[mp.lo] or mp.frontier_v[-1] != mp.vertex_at[mp.hi]:
            rep.add("frontier endpoints are not the floor window ends")
        full = bfs_distance(mp)
        for vtx, dv in full.items():
            if mp.dist.get(vtx) != dv:
                rep.add("incremental distance wrong at vertex %d" % vtx)
                break
    if isinstance(mp, FiniteMap) and not mp.degenerate:
        orbit = s.face_orbit(mp.root)
        if len(orbit) != mp.m:
            rep.add("boundary length %d != m=%d" % (len(orbit), mp.m))
        if len({s.origin[h] for h in orbit}) != len(orbit):
            rep.add("boundary cycle is not simple")
        if f != 2 * mp.n + mp.m - 2:
            rep.add("face count %d != 2n+m-2 = %d" % (f, 2 * mp.n + mp.m - 2))
    return rep


# ---------------------------------------------------------------------------
# Peel-edge schedules and event logs
# ---------------------------------------------------------------------------

SCHEDULES = ("leftmost_near_root", "root_adjacent", "uniform_random_exposed")
DETERMINISTIC_SCHEDULES = ("leftmost_near_root", "root_adjacent")


def _edge_dist(state, p):
    return min(state.dist[state.frontier_v[p]], state.dist[state.frontier_v[p + 1]])


def _frontier_edge_dists(state):
    """Vector of min-endpoint distances for all frontier edges."""
    fv = np.asarray(state.frontier_v, dtype=np.int64)
    dv = state.dist.arr[fv]
    return np.minimum(dv[:-1], dv[1:])


def select_peel_index(state, schedule, r=None, rng=None):
    """Pick the frontier position to peel, extending the floor window as
    needed so that unrevealed floor stretches can never hide a better edge.

    Returns None when r is given and no exposed vertex is within distance r.
    `state` is a HalfPlaneMap or a replay view with the same frontier fields.
    """
    kind = getattr(schedule, "kind", schedule)
    if kind not in SCHEDULES:
        raise DomainError("unknown schedule %r" % (schedule,))
    if kind == "root_adjacent":
        return state.root_marker
    if kind == "leftmost_near_root":
        edge_d = _frontier_edge_dists(state)
        cur_min = int(edge_d.min())
        if r is not None and cur_min >= r:
            return None
        # a left-tail edge ties at dist(left end) and would be left-most;
        # a right-tail edge only competes if strictly closer
        extended = False
        while state.dist[state.frontier_v[0]] <= cur_min:
            state.extend_left()
            extended = True
        while state.dist[state.frontier_v[-1]] < cur_min:
            state.extend_right()
            extended = True
        if extended:
            edge_d = _frontier_edge_dists(state)
        p = int(np.argmin(edge_d))  # argmin takes the leftmost minimum
        if edge_d[p] != cur_min:
            raise StructuralError("minimum frontier distance vanished")
        return p
    # uniform_random_exposed
    if rng is None:
        raise DomainError("uniform_random_exposed needs an rng")
    if r is None:
        return int(rng.integers(len(state.frontier_e)))
    while state.dist[state.frontier_v[0]] < r:
        state.extend_left()
    while state.dist[state.frontier_v[-1]] < r:
        state.extend_right()
    eligible = np.nonzero(_frontier_edge_dists(state) < r)[0]
    if len(eligible) == 0:
        return None
    return int(eligible[int(rng.integers(len(eligible)))])


@dataclass(frozen=True)
class EventLog:
    """A peeling transcript: replaying it under its schedule rebuilds the map."""

    schedule: str
    initial_width: int
    events: tuple


class _ReplayState:
    """Frontier view used to re-peel a finished map deterministically."""

    def __init__(self, mp):
        self.mp = mp
        s = mp.store
        self.s = s
        # floor undersides by offset: walk the bottom chain from the root
        self.bottoms = {}
        cur, off = mp.root, 0
        while True:
            self.bottoms[off] = cur
            nxt_off = off - 1
            if nxt_off < mp.lo:
                break
            cur = s.nxt[cur]
            off = nxt_off
        cur, off = mp.root, 0
        while off + 1 <= mp.hi - 1:
            cur = s.prv[cur]
            off += 1
            self.bottoms[off] = cur
        self.lo, self.hi = 0, mp.initial_width
        self.frontier_e = [self.bottoms[o] for o in range(self.lo, self.hi)]
        self.frontier_v = [s.head(self.bottoms[0])]
        for o in range(self.lo, self.hi):
            self.frontier_v.append(s.origin[self.bottoms[o]])
        self.root_marker = 0
        self.dist = VertexDistances()
        self.adj = {}
        prev = None
        for j, v in enumerate(self.frontier_v):
            self.dist[v] = HalfPlaneMap._floor_dist(self.lo + j)
            self.adj[v] = []
            if prev is not None:
                self.adj[prev].append(v)
                self.adj[v].append(prev)
            prev = v

    # exposure: the replay frontier stores underside half-edges (stable ids);
    # the currently exposed side of position p is twin(frontier_e[p]).

    def _extend(self, off, left):
        if off < self.mp.lo or off + 1 > self.mp.hi:
            raise StructuralError("replay leaves the stored floor window")
        below = self.bottoms[off]
        v_new = self.s.head(below) if left else self.s.origin[below]
        v_end = self.s.origin[below] if left else self.s.head(below)
        if left:
            self.frontier_e.insert(0, below)
            self.frontier_v.insert(0, v_new)
            self.lo = off
            self.root_marker += 1
        else:
            self.frontier_e.append(below)
            self.frontier_v.append(v_new)
            self.hi = off + 1
        self.dist[v_new] = self.dist[v_end] + 1
        self.adj[v_new] = []
        self._add_edge_dist(v_end, v_new)

    def extend_left(self):
        self._extend(self.lo - 1, True)

    def extend_left_many(self, k):
        """Batched counterpart of extend_left; one frontier splice."""
        if k <= 0:
            return
        if self.lo - k < self.mp.lo:
            raise StructuralError("replay leaves the stored floor window")
        news_e = []
        news_v = []
        for j in range(1, k + 1):
            below = self.bottoms[self.lo - j]
            v_new = self.s.head(below)
            v_end = self.s.origin[below]
            news_e.append(below)
            news_v.append(v_new)
            self.dist[v_new] = self.dist[v_end] + 1
            self.adj[v_new] = []
            self._add_edge_dist(v_end, v_new)
        self.frontier_e[0:0] = news_e[::-1]
        self.frontier_v[0:0] = news_v[::-1]
        self.lo -= k
        self.root_marker += k

    def extend_right(self):
        self._extend(self.hi, False)

    _add_edge_dist = HalfPlaneMap._add_edge_dist

    def _splice_marker(self, p1, p2, new_len):
        HalfPlaneMap._splice_marker(self, p1, p2, new_len)

    def step(self, idx):
        """Read the event revealed at frontier position idx and consume it.

        Returns (event, faces_consumed).
        """
        s = self.s
        below = self.frontier_e[idx]
        e = s.twin[below]
        fc = s.face[e]
        if fc == EXTERNAL:
            return None, 0
        c = s.nxt[e]
        d = s.nxt[c]
        if s.nxt[d] != e:
            raise StructuralError("peeled face is not a triangle")
        u, v, apex = s.origin[e], s.head(e), s.origin[d]
        off = self.mp.offset_of.get(apex)
        if off is not None:
            while off > self.hi:
                self.extend_right()  # right extension does not shift positions
            if off < self.lo:
                k = self.lo - off
                self.extend_left_many(k)
                idx += k
        if apex not in self.dist:
            # fresh internal vertex
            self.frontier_e[idx : idx + 1] = [d, c]
            self.frontier_v.insert(idx + 1, apex)
            self._splice_marker(idx, idx, 2)
            self.adj[apex] = []
            self._add_edge_dist(u, apex)
            self._add_edge_dist(v, apex)
            return PeelEvent(kind="alpha"), 1
        try:
            p = self.frontier_v.index(apex)
        except ValueError:
            raise StructuralError("apex is revealed but not exposed") from None
        if p > idx + 1:
            side, i = "right", p - (idx + 1)
            outer = [c] + self.frontier_e[idx + 1 : idx + 1 + i]
            self.frontier_e[idx : idx + 1 + i] = [d]
            del self.frontier_v[idx + 1 : idx + 1 + i]
            self._splice_marker(idx, idx + i, 1)
        elif p < idx:
            side, i = "left", idx - p
            outer = [d] + self.frontier_e[idx - i : idx]
            self.frontier_e[idx - i : idx + 1] = [c]
            del self.frontier_v[idx - i + 1 : idx + 1]
            self._splice_marker(idx - i, idx, 1)
        else:
            raise StructuralError("apex adjacent to its own peel edge")
        code = _region_code(s, outer)
        k = sum(1 for tok in code if tok == ("A",))
        self._add_edge_dist(u, apex if side == "left" else apex)
        self._add_edge_dist(v, apex)
        faces = 1
        # pocket interior: flood behind the chord, add its edges for distances
        if not (len(outer) == 2 and s.twin[outer[0]] == outer[1]):
            inner0 = s.twin[outer[0]]
            forbidden = set(outer) | {s.twin[o] for o in outer}
            seen_f = {s.face[inner0]}
            dq = deque([inner0])
            while dq:
                h0 = dq.popleft()
                for h in s.face_orbit(h0):
                    x, y = s.origin[h], s.head(h)
                    if y not in self.adj.get(x, ()):
                        self.adj.setdefault(x, [])
                        self.adj.setdefault(y, [])
                        self.dist.setdefault(x, self.dist.get(y, 0) + 1)
                        self._add_edge_dist(x, y)
                    if h in forbidden:
                        continue
                    t = s.twin[h]
                    g = s.face[t]
                    if g != EXTERNAL and g not in seen_f:
                        seen_f.add(g)
                        dq.append(t)
            faces += len(seen_f)
        ev = PeelEvent(kind="boundary", side=side, i=i, k=k, patch_code=code)
        return ev, faces


def to_event_log(mp, schedule):
    """Re-peel a finished half-plane map under a deterministic schedule."""
    kind = getattr(schedule, "kind", schedule)
    if kind not in DETERMINISTIC_SCHEDULES:
        raise DomainError("event logs need a deterministic schedule")
    total_faces = mp.counts()[2]
    rep = _ReplayState(mp)
    events = []
    consumed = 0
    while consumed < total_faces:
        idx = select_peel_index(rep, kind)
        ev, nf = rep.step(idx)
        if ev is None:
            raise StructuralError(
                "schedule stalls with %d faces unvisited" % (total_faces - consumed)
            )
        events.append(ev)
        consumed += nf
    return EventLog(schedule=kind, initial_width=mp.initial_width,
                    events=tuple(events))


def from_event_log(log):
    """Rebuild the half-plane map encoded by `log`."""
    kind = log.schedule
    if kind not in DETERMINISTIC_SCHEDULES:
        raise DomainError("event logs need a deterministic schedule")
    mp = new_floor(log.initial_width)
    for ev in log.events:
        idx = select_peel_index(mp, kind)
        mp.apply_event(idx, ev)
    return mp


# ---------------------------------------------------------------------------
# Serialization: canonical JSON documents and SVG rendering
# ---------------------------------------------------------------------------

FORMAT_VERSION = 1


def _canonical_order(store, root):
    """Half-edges in deterministic traversal order from the root."""
    order = []
    pos = {}
    stack = [root]
    while stack:
        h = stack.pop()
        if h in pos or not store.he_alive[h]:
            continue
        pos[h] = len(order)
        order.append(h)
        stack.append(store.twin[h])
        stack.append(store.nxt[h])
    if len(order) != len(store.alive_half_edges()):
        raise StructuralError("map is not connected from the root")
    return order, pos


def to_json_dict(mp, include_log=None):
    """Canonical JSON document for a finite or half-plane map."""
    s = mp.store
    root = mp.root
    order, pos = _canonical_order(s, root)
    vmap, fmap = {}, {}
    for h in order:
        vmap.setdefault(s.origin[h], len(vmap))
        f = s.face[h]
        if f != EXTERNAL and f not in fmap:
            fmap[f] = len(fmap)
    half_edges = [
        [
            pos[s.twin[h]],
            pos[s.nxt[h]],
            vmap[s.origin[h]],
            -1 if s.face[h] == EXTERNAL else fmap[s.face[h]],
        ]
        for h in order
    ]
    doc = {
        "version": FORMAT_VERSION,
        "mode": s.mode,
        "root": 0,
        "half_edges": half_edges,
    }
    if isinstance(mp, HalfPlaneMap):
        doc["kind"] = "half_plane"
        doc["floor_offsets"] = sorted(
            [o, vmap[v]] for o, v in mp.vertex_at.items() if v in vmap
        )
        doc["frontier"] = [pos[h] for h in mp.frontier_e]
        doc["initial_width"] = mp.initial_width
        doc["root_marker"] = mp.root_marker
        doc["n_internal"] = mp.n_internal
        doc["hole_faces"] = sorted(fmap[f] for f in mp.hole_faces if f in fmap)
        if include_log is not None:
            doc["event_log"] = {
                "schedule": include_log.schedule,
                "initial_width": include_log.initial_width,
                "events": [
                    {
                        "kind": ev.kind,
                        "side": ev.side,
                        "i": ev.i,
                        "k": ev.k,
                        "patch_code": [list(t) for t in ev.patch_code]
                        if ev.patch_code is not None
                        else None,
                    }
                    for ev in include_log.events
                ],
            }
    else:
        doc["kind"] = "finite"
        doc["m"] = mp.m
        doc["n"] = mp.n
        doc["degenerate"] = mp.degenerate
    return doc


def event_log_from_json(obj):
    events = tuple(
        PeelEvent(
            kind=e["kind"],
            side=e["side"],
            i=e["i"],
            k=e["k"],
            patch_code=tuple(tuple(t) for t in e["patch_code"])
            if e.get("patch_code") is not None
            else None,
        )
        for e in obj["events"]
    )
    return EventLog(schedule=obj["schedule"],
                    initial_width=obj["initial_width"], events=events)


def from_json_dict(doc):
    """Rebuild a map object from its canonical JSON document."""
    if doc.get("version") != FORMAT_VERSION:
        raise DomainError("unsupported document version %r" % (doc.get("version"),))
    s = Store(mode=doc.get("mode", "simple"))
    he = doc["half_edges"]
    nv = 1 + max(row[2] for row in he) if he else 0
    nf = 1 + max((row[3] for row in he if row[3] != -1), default=-1)
    for _ in range(nv):
        s.new_vertex()
    for _ in range(nf):
        s.new_face("face")
    for row in he:
        s._new_he(row[2], row[3] if row[3] != -1 else EXTERNAL)
    for h, row in enumerate(he):
        s.twin[h] = row[0]
        s.set_next(h, row[1])
    if doc["kind"] == "finite":
        return FiniteMap(s, doc["root"], doc["m"], doc["n"],
                         degenerate=doc.get("degenerate", False))
    mp = HalfPlaneMap.__new__(HalfPlaneMap)
    mp.store = s
    mp.root = doc["root"]
    mp.initial_width = doc["initial_width"]
    mp.vertex_at = {int(o): v for o, v in doc["floor_offsets"]}
    mp.offset_of = {v: o for o, v in mp.vertex_at.items()}
    mp.lo = min(mp.vertex_at)
    mp.hi = max(mp.vertex_at)
    mp.frontier_e = list(doc["frontier"])
    mp.frontier_v = [s.origin[mp.frontier_e[0]]] + [
        s.head(h) for h in mp.frontier_e
    ]
    mp.frontier_vset = set(mp.frontier_v)
    mp.root_marker = doc["root_marker"]
    mp.n_internal = doc["n_internal"]
    mp.hole_faces = set(doc.get("hole_faces", []))
    mp.adj = {}
    for h in s.alive_half_edges():
        mp.adj.setdefault(s.origin[h], []).append(s.head(h))
    mp.dist = VertexDistances.from_dict(bfs_distance(mp))
    return mp


def dump_json(mp, path, include_log=None):
    with open(path, "w") as fh:
        json.dump(to_json_dict(mp, include_log=include_log), fh, indent=1)


def load_json(path):
    with open(path) as fh:
        return from_json_dict(json.load(fh))


def to_svg(mp, width=800, height=500):
    """Straight-line rendering from BFS layers; presentation only."""
    s = mp.store
    he = s.alive_half_edges()
    if not he:
        return "<svg xmlns='http://www.w3.org/2000/svg'/>"
    coords = {}
    if isinstance(mp, HalfPlaneMap):
        for v, o in mp.offset_of.items():
            coords[v] = [float(o), 0.0]
        layers = bfs_distance(mp)
        for v in {s.origin[h] for h in he}:
            if v not in coords:
                coords[v] = [0.0, -(1.0 + 0.8 * layers.get(v, 1))]
    else:
        boundary = [s.origin[h] for h in s.face_orbit(mp.root)][::-1]
        mth = max(len(boundary), 3)
        for t, v in enumerate(boundary):
            ang = 2 * math.pi * t / mth
            coords[v] = [math.cos(ang), math.sin(ang)]
        for v in {s.origin[h] for h in he}:
            coords.setdefault(v, [0.0, 0.0])
    adj = {}
    for h in he:
        adj.setdefault(s.origin[h], []).append(s.head(h))
    fixed = set(mp.offset_of) if isinstance(mp, HalfPlaneMap) else {
        s.origin[h] for h in s.face_orbit(mp.root)
    }
    for _ in range(60):  # relax free vertices towards neighbor averages
        for v, nbs in adj.items():
            if v in fixed or not nbs:
                continue
            coords[v][0] = sum(coords[n][0] for n in nbs) / len(nbs)
            base_y = sum(coords[n][1] for n in nbs) / len(nbs)
            coords[v][1] = base_y if not isinstance(mp, HalfPlaneMap) else min(
                base_y, coords[v][1]
            )
    xs = [c[0] for c in coords.values()]
    ys = [c[1] for c in coords.values()]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    sx = (width - 40) / max(x1 - x0, 1e-9)
    sy = (height - 40) / max(y1 - y0, 1e-9)
    sc = min(sx, sy)

    def pix(v):
        return (
            20 + (coords[v][0] - x0) * sc,
            20 + (coords[v][1] - y0) * sc,
        )

    lines = []
    seen = set()
    for h in he:
        t = s.twin[h]
        if (min(h, t), max(h, t)) in seen:
            continue
        seen.add((min(h, t), max(h, t)))
        (ax, ay), (bx, by) = pix(s.origin[h]), pix(s.head(h))
        lines.append(
            "<line x1='%.1f' y1='%.1f' x2='%.1f' y2='%.1f' "
            "stroke='black' stroke-width='1'/>" % (ax, ay, bx, by)
        )
    for v in coords:
        px, py = pix(v)
        lines.append("<circle cx='%.1f' cy='%.1f' r='2' fill='crimson'/>" % (px, py))
    return (
        "<svg xmlns='http://www.w3.org/2000/svg' width='%d' height='%d'>%s</svg>"
        % (width, height, "".join(lines))
    )
