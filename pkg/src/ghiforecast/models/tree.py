"""Exact greedy regression trees over gradient/hessian statistics.

Trees are grown level by level. Each open node owns a contiguous, presorted
segment of rows per feature; scanning a segment accumulates prefix sums of
g and h, and after each level the segments are stably partitioned into the
children, so a level costs O(n * p) with no re-sorting. A split is scored with

    gain = 1/2 [G_L^2/(H_L+lam) + G_R^2/(H_R+lam) - G^2/(H+lam)] - gamma

and accepted when gain > 0 and both children carry at least
``min_child_weight`` hessian. Leaves hold -G/(H+lam). Thresholds sit midway
between adjacent distinct values; rows with ``x <= threshold`` go left.
Gain ties resolve to the lower feature index, then the lower threshold.
"""
from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np


@dataclass(frozen=True)
class RegressionTree:
    feature: np.ndarray  # int32, -1 marks a leaf
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    gain: np.ndarray  # split gain before the gamma penalty, 0 at leaves
    cover: np.ndarray  # hessian sum per node

    @property
    def n_nodes(self) -> int:
        return self.feature.shape[0]

    @property
    def n_leaves(self) -> int:
        return int(np.sum(self.feature < 0))

    @property
    def depth(self) -> int:
        depth = np.zeros(self.n_nodes, dtype=np.int64)
        for k in range(self.n_nodes):
            if self.feature[k] >= 0:
                depth[self.left[k]] = depth[self.right[k]] = depth[k] + 1
        return int(depth.max())

    def predict(self, X: np.ndarray) -> np.ndarray:
        return _predict(np.ascontiguousarray(X, dtype=np.float64), self.feature, self.threshold, self.left, self.right, self.value)

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf index reached by each row."""
        return _apply(np.ascontiguousarray(X, dtype=np.float64), self.feature, self.threshold, self.left, self.right)

    def boost_update(self, pred: np.ndarray, X: np.ndarray, eta: float, leaf_of: np.ndarray, in_sample: np.ndarray) -> None:
        """pred += eta * tree(X) in place, taking in-sample leaves from a grow's ``leaf_of``."""
        _boost_update(pred, X, self.feature, self.threshold, self.left, self.right, self.value, leaf_of, in_sample, float(eta))

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
            "gain": self.gain.tolist(),
            "cover": self.cover.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RegressionTree":
        return cls(
            feature=np.array(d["feature"], dtype=np.int32),
            threshold=np.array(d["threshold"], dtype=np.float64),
            left=np.array(d["left"], dtype=np.int32),
            right=np.array(d["right"], dtype=np.int32),
            value=np.array(d["value"], dtype=np.float64),
            gain=np.array(d["gain"], dtype=np.float64),
            cover=np.array(d["cover"], dtype=np.float64),
        )


@dataclass(frozen=True)
class SortedColumns:
    """Per-feature row order and the matching sorted values, both (p, n)."""

    order: np.ndarray
    values: np.ndarray


def presort(X: np.ndarray) -> SortedColumns:
    X = np.asarray(X, dtype=np.float64)
    order = np.argsort(X, axis=0, kind="stable")
    values = np.take_along_axis(X, order, axis=0)
    return SortedColumns(np.ascontiguousarray(order.T.astype(np.int32)), np.ascontiguousarray(values.T))


class Workspace:
    """Scratch buffers for ``grow_tree``, reusable across trees of one fit.

    Allocating them per tree costs more in page faults than the split search
    itself on mid-sized data.
    """

    def __init__(self, n_rows: int, n_features: int):
        self.rows = np.empty((2, n_features, n_rows), dtype=np.int32)
        self.xs = np.empty((2, n_features, n_rows))
        self.tmp_r = np.empty(n_rows + 1, dtype=np.int32)
        self.tmp_x = np.empty(n_rows + 1)
        self.go_left = np.zeros(n_rows, dtype=np.bool_)
        self.leaf_of = np.full(n_rows, -1, dtype=np.int32)  # leaf of each in-sample row after a grow

    def fits(self, n_rows: int, n_features: int) -> bool:
        return self.rows.shape[1] >= n_features and self.rows.shape[2] >= n_rows


def max_nodes_for(n_rows: int, max_depth: int) -> int:
    full = 2 ** (max_depth + 1) - 1 if max_depth < 40 else 1 << 62
    return int(max(1, min(full, 2 * n_rows - 1)))


def grow_tree(
    X: np.ndarray,
    order: SortedColumns,
    g: np.ndarray,
    h: np.ndarray,
    *,
    max_depth: int,
    min_child_weight: float = 0.0,
    reg_lambda: float = 0.0,
    gamma: float = 0.0,
    in_sample: np.ndarray | None = None,
    col_mask: np.ndarray | None = None,
    node_mask: np.ndarray | None = None,
    workspace: Workspace | None = None,
) -> RegressionTree:
    """Fit one tree to gradient statistics.

    ``in_sample`` restricts growth to a row subset, ``col_mask`` disables
    features for the whole tree and ``node_mask`` (nodes x features, indexed by
    breadth-first node id) disables features per node, as random forests need.
    """
    n, p = X.shape
    if in_sample is None:
        in_sample = np.ones(n, dtype=np.bool_)
    if col_mask is None:
        col_mask = np.ones(p, dtype=np.bool_)
    use_node_mask = node_mask is not None
    if node_mask is None:
        node_mask = np.ones((1, p), dtype=np.bool_)
    max_nodes = max_nodes_for(int(np.count_nonzero(in_sample)), max_depth)
    if workspace is None or not workspace.fits(n, p):
        workspace = Workspace(n, p)
    if use_node_mask and node_mask.shape[0] < max_nodes:
        raise ValueError("node_mask has fewer rows than the tree can have nodes")
    arrays = _grow(
        np.ascontiguousarray(X, dtype=np.float64),
        order.order,
        order.values,
        np.ascontiguousarray(g, dtype=np.float64),
        np.ascontiguousarray(h, dtype=np.float64),
        np.ascontiguousarray(in_sample, dtype=np.bool_),
        np.ascontiguousarray(col_mask, dtype=np.bool_),
        np.ascontiguousarray(node_mask, dtype=np.bool_),
        use_node_mask,
        int(max_depth),
        float(min_child_weight),
        float(reg_lambda),
        float(gamma),
        max_nodes,
        workspace.rows,
        workspace.xs,
        workspace.tmp_r,
        workspace.tmp_x,
        workspace.go_left,
        workspace.leaf_of,
        bool(np.all(h == 1.0)),
    )
    return RegressionTree(*arrays)


@numba.njit(cache=True)
def _partition(rf, xf, rf2, xf2, go_left, tmp_r, tmp_x, start, length, dest):
    # branchless: every row is written to both outputs and only the cursor of
    # its side advances; right rows go through a scratch buffer
    a = dest
    b = 0
    for j in range(start, start + length):
        i = rf[j]
        x = xf[j]
        side = np.int64(go_left[i])
        rf2[a] = i
        xf2[a] = x
        tmp_r[b] = i
        tmp_x[b] = x
        a += side
        b += 1 - side
    for c in range(b):
        rf2[a + c] = tmp_r[c]
        xf2[a + c] = tmp_x[c]


# numpy error model: no zero-division checks, which keeps the scan branch-free
@numba.njit(cache=True, error_model="numpy")
def _grow(X, order, sorted_x, g, h, in_sample, col_mask, node_mask, use_node_mask, max_depth, mcw, lam, gamma, max_nodes, ws_rows, ws_xs, tmp_r, tmp_x, go_left, leaf_of, unit_h):
    n, p = X.shape
    feature = np.full(max_nodes, -1, dtype=np.int32)
    threshold = np.zeros(max_nodes)
    left = np.full(max_nodes, -1, dtype=np.int32)
    right = np.full(max_nodes, -1, dtype=np.int32)
    value = np.zeros(max_nodes)
    gain_out = np.zeros(max_nodes)
    G = np.zeros(max_nodes)
    H = np.zeros(max_nodes)
    seg_start = np.zeros(max_nodes, dtype=np.int64)
    seg_len = np.zeros(max_nodes, dtype=np.int64)

    # rows of every open node are kept contiguous (and sorted) per feature
    n_act = 0
    for i in range(n):
        if in_sample[i]:
            n_act += 1
            G[0] += g[i]
            H[0] += h[i]
    rows = ws_rows[0]
    xs = ws_xs[0]
    rows2 = ws_rows[1]
    xs2 = ws_xs[1]
    for f in range(p):
        c = 0
        for j in range(n):
            i = order[f, j]
            if in_sample[i]:
                rows[f, c] = i
                xs[f, c] = sorted_x[f, j]
                c += 1
    seg_len[0] = n_act

    n_nodes = 1
    lo = 0
    hi = 1
    depth = 0
    routed = False
    while hi > lo and depth < max_depth:
        for k in range(lo, hi):
            s0 = seg_start[k]
            s1 = s0 + seg_len[k]
            Gk = G[k]
            Hk = H[k]
            parent = Gk * Gk / (Hk + lam)
            best = 0.0
            bf = -1
            bthr = 0.0
            bgl = 0.0
            bhl = 0.0
            for f in range(p):
                if not col_mask[f]:
                    continue
                if use_node_mask and not node_mask[k, f]:
                    continue
                gl = 0.0
                hl = 0.0
                prev = xs[f, s0]
                for j in range(s0, s1):
                    x = xs[f, j]
                    if x != prev:
                        hr = Hk - hl
                        if hl >= mcw and hr >= mcw:
                            gr = Gk - gl
                            score = gl * gl / (hl + lam) + gr * gr / (hr + lam)
                            gain = 0.5 * (score - parent) - gamma
                            if gain > best:
                                best = gain
                                bf = f
                                thr = prev + (x - prev) * 0.5
                                if thr >= x:
                                    thr = prev
                                bthr = thr
                                bgl = gl
                                bhl = hl
                    i = rows[f, j]
                    gl += g[i]
                    # sums of unit hessians are exact, so counting is identical
                    hl += 1.0 if unit_h else h[i]
                    prev = x
            if bf >= 0 and n_nodes + 2 <= max_nodes:
                feature[k] = bf
                threshold[k] = bthr
                gain_out[k] = best + gamma
                left[k] = n_nodes
                right[k] = n_nodes + 1
                G[n_nodes] = bgl
                H[n_nodes] = bhl
                G[n_nodes + 1] = Gk - bgl
                H[n_nodes + 1] = Hk - bhl
                n_nodes += 2
            else:
                value[k] = -Gk / (Hk + lam)
                for j in range(s0, s1):
                    leaf_of[rows[0, j]] = k
        if n_nodes == hi or depth + 1 == max_depth:
            # children of this level stay unpartitioned; route their rows directly
            for k in range(lo, hi):
                fk = feature[k]
                if fk < 0:
                    continue
                for j in range(seg_start[k], seg_start[k] + seg_len[k]):
                    i = rows[0, j]
                    leaf_of[i] = left[k] if X[i, fk] <= threshold[k] else right[k]
            lo = hi
            hi = n_nodes
            routed = True
            break
        # route rows of split nodes, then partition every feature's segments
        for k in range(lo, hi):
            if feature[k] < 0:
                continue
            nl = 0
            fk = feature[k]
            for j in range(seg_start[k], seg_start[k] + seg_len[k]):
                i = rows[0, j]
                gl_ = X[i, fk] <= threshold[k]
                go_left[i] = gl_
                if gl_:
                    nl += 1
            seg_len[left[k]] = nl
            seg_len[right[k]] = seg_len[k] - nl
        pos = 0
        for k in range(lo, hi):
            if feature[k] < 0:
                continue
            seg_start[left[k]] = pos
            seg_start[right[k]] = pos + seg_len[left[k]]
            pos += seg_len[k]
        for f in range(p):
            for k in range(lo, hi):
                if feature[k] >= 0:
                    _partition(rows[f], xs[f], rows2[f], xs2[f], go_left, tmp_r, tmp_x, seg_start[k], seg_len[k], seg_start[left[k]])
        rows, rows2 = rows2, rows
        xs, xs2 = xs2, xs
        lo = hi
        hi = n_nodes
        depth += 1
    for k in range(lo, hi):
        if feature[k] < 0:
            value[k] = -G[k] / (H[k] + lam)
            if not routed:
                for j in range(seg_start[k], seg_start[k] + seg_len[k]):
                    leaf_of[rows[0, j]] = k
    return (
        feature[:n_nodes].copy(),
        threshold[:n_nodes].copy(),
        left[:n_nodes].copy(),
        right[:n_nodes].copy(),
        value[:n_nodes].copy(),
        gain_out[:n_nodes].copy(),
        H[:n_nodes].copy(),
    )


@numba.njit(cache=True)
def _apply(X, feature, threshold, left, right):
    n = X.shape[0]
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        k = 0
        while feature[k] >= 0:
            if X[i, feature[k]] <= threshold[k]:
                k = left[k]
            else:
                k = right[k]
        out[i] = k
    return out


@numba.njit(cache=True)
def _predict(X, feature, threshold, left, right, value):
    n = X.shape[0]
    out = np.empty(n)
    for i in range(n):
        k = 0
        while feature[k] >= 0:
            if X[i, feature[k]] <= threshold[k]:
                k = left[k]
            else:
                k = right[k]
        out[i] = value[k]
    return out


@numba.njit(cache=True)
def _boost_update(pred, X, feature, threshold, left, right, value, leaf_of, in_sample, eta):
    for i in range(X.shape[0]):
        if in_sample[i]:
            k = leaf_of[i]
        else:
            k = 0
            while feature[k] >= 0:
                if X[i, feature[k]] <= threshold[k]:
                    k = left[k]
                else:
                    k = right[k]
        pred[i] += eta * value[k]
