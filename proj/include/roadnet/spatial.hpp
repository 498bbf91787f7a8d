#pragma once
// Kd-tree over a fixed point set. Supports the two queries the solver needs:
// k nearest neighbors under a caller filter, and additively weighted nearest
// neighbor (min over points of weight_i + |q - p_i|), with subtree pruning on
// bounding box distance plus subtree minimum weight. Queries keep their
// scratch on the stack, so concurrent lookups on a shared tree are safe.

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "roadnet/vec.hpp"

namespace roadnet {

class KdTree {
public:
    KdTree() = default;

    explicit KdTree(std::vector<Vector> points) : pts_(std::move(points)) {
        const int n = static_cast<int>(pts_.size());
        order_.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) order_[static_cast<std::size_t>(i)] = i;
        nodes_.reserve(static_cast<std::size_t>(2 * n / kLeafSize + 2));
        if (n > 0) root_ = build(0, n);
    }

    int size() const { return static_cast<int>(pts_.size()); }
    const Vector& point(int i) const { return pts_[static_cast<std::size_t>(i)]; }

    // indices of the k nearest points accepted by `keep`, nearest first;
    // exact ties resolved toward the smaller point index
    template <typename Filter>
    void knn(const Vector& q, int k, Filter&& keep, std::vector<int>& out) const {
        out.clear();
        if (root_ < 0 || k <= 0) return;
        std::vector<std::pair<double, int>> heap;  // max-heap by (dist, idx)
        heap.reserve(static_cast<std::size_t>(k) + 1);
        knn_walk(root_, q, k, keep, heap);
        std::sort(heap.begin(), heap.end());
        out.reserve(heap.size());
        for (const auto& h : heap) out.push_back(h.second);
    }

    // min over points of weights[i] + |q - p_i|; returns the attaining index
    // (-1 when empty) and writes the value
    int weighted_nearest(const Vector& q, const std::vector<double>& weights,
                         double* value) const {
        double best_val = std::numeric_limits<double>::infinity();
        int best_idx = -1;
        if (root_ >= 0) weighted_walk(root_, q, weights, best_val, best_idx);
        if (value) *value = best_val;
        return best_idx;
    }

    // must be called once, after construction, before weighted_nearest
    void set_weights_hint(const std::vector<double>& weights) {
        for (int i = static_cast<int>(nodes_.size()) - 1; i >= 0; --i) {
            Node& nd = nodes_[static_cast<std::size_t>(i)];
            double w = std::numeric_limits<double>::infinity();
            for (int j = nd.begin; j < nd.end; ++j)
                w = std::min(w, weights[static_cast<std::size_t>(at(j))]);
            if (nd.left >= 0) w = std::min(w, nodes_[static_cast<std::size_t>(nd.left)].min_weight);
            if (nd.right >= 0) w = std::min(w, nodes_[static_cast<std::size_t>(nd.right)].min_weight);
            nd.min_weight = w;
        }
    }

private:
    struct Node {
        double box_lo[kMaxDim];
        double box_hi[kMaxDim];
        int left = -1, right = -1;
        int begin = 0, end = 0;  // leaf payload range in order_
        double min_weight = 0.0;
    };

    static constexpr int kLeafSize = 12;

    std::vector<Vector> pts_;
    std::vector<int> order_;
    std::vector<Node> nodes_;
    int root_ = -1;

    int at(int j) const { return order_[static_cast<std::size_t>(j)]; }
    const Node& node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }

    int build(int lo, int hi) {
        Node nd;
        const int d = pts_[static_cast<std::size_t>(at(lo))].d;
        for (int i = 0; i < d; ++i) {
            nd.box_lo[i] = std::numeric_limits<double>::infinity();
            nd.box_hi[i] = -std::numeric_limits<double>::infinity();
        }
        for (int j = lo; j < hi; ++j) {
            const Vector& p = pts_[static_cast<std::size_t>(at(j))];
            for (int i = 0; i < d; ++i) {
                nd.box_lo[i] = std::min(nd.box_lo[i], p[i]);
                nd.box_hi[i] = std::max(nd.box_hi[i], p[i]);
            }
        }
        const int me = static_cast<int>(nodes_.size());
        nodes_.push_back(nd);
        if (hi - lo <= kLeafSize) {
            nodes_[static_cast<std::size_t>(me)].begin = lo;
            nodes_[static_cast<std::size_t>(me)].end = hi;
            return me;
        }
        int axis = 0;
        double span = -1.0;
        for (int i = 0; i < d; ++i) {
            const double s = nd.box_hi[i] - nd.box_lo[i];
            if (s > span) {
                span = s;
                axis = i;
            }
        }
        const int mid = (lo + hi) / 2;
        std::nth_element(order_.begin() + lo, order_.begin() + mid, order_.begin() + hi,
                         [&](int a, int b) {
                             const double xa = pts_[static_cast<std::size_t>(a)][axis];
                             const double xb = pts_[static_cast<std::size_t>(b)][axis];
                             return xa < xb || (xa == xb && a < b);
                         });
        const int l = build(lo, mid);
        const int r = build(mid, hi);
        nodes_[static_cast<std::size_t>(me)].left = l;
        nodes_[static_cast<std::size_t>(me)].right = r;
        return me;
    }

    double box_dist(const Node& nd, const Vector& q) const {
        double s = 0.0;
        for (int i = 0; i < q.d; ++i) {
            double t = 0.0;
            if (q[i] < nd.box_lo[i]) t = nd.box_lo[i] - q[i];
            else if (q[i] > nd.box_hi[i]) t = q[i] - nd.box_hi[i];
            s += t * t;
        }
        return std::sqrt(s);
    }

    template <typename Filter>
    void knn_walk(int ni, const Vector& q, int k, Filter&& keep,
                  std::vector<std::pair<double, int>>& heap) const {
        const Node& nd = node(ni);
        if (static_cast<int>(heap.size()) == k && box_dist(nd, q) > heap.front().first) return;
        if (nd.left < 0) {
            for (int j = nd.begin; j < nd.end; ++j) {
                const int idx = at(j);
                if (!keep(idx)) continue;
                const double dq = dist(q, pts_[static_cast<std::size_t>(idx)]);
                if (static_cast<int>(heap.size()) < k) {
                    heap.emplace_back(dq, idx);
                    std::push_heap(heap.begin(), heap.end());
                } else if (std::pair<double, int>(dq, idx) < heap.front()) {
                    std::pop_heap(heap.begin(), heap.end());
                    heap.back() = {dq, idx};
                    std::push_heap(heap.begin(), heap.end());
                }
            }
            return;
        }
        const double dl = box_dist(node(nd.left), q);
        const double dr = box_dist(node(nd.right), q);
        if (dl <= dr) {
            knn_walk(nd.left, q, k, keep, heap);
            knn_walk(nd.right, q, k, keep, heap);
        } else {
            knn_walk(nd.right, q, k, keep, heap);
            knn_walk(nd.left, q, k, keep, heap);
        }
    }

    void weighted_walk(int ni, const Vector& q, const std::vector<double>& w,
                       double& best_val, int& best_idx) const {
        const Node& nd = node(ni);
        if (box_dist(nd, q) + nd.min_weight >= best_val) return;
        if (nd.left < 0) {
            for (int j = nd.begin; j < nd.end; ++j) {
                const int idx = at(j);
                const double v = w[static_cast<std::size_t>(idx)] + dist(q, pts_[static_cast<std::size_t>(idx)]);
                if (v < best_val || (v == best_val && idx < best_idx)) {
                    best_val = v;
                    best_idx = idx;
                }
            }
            return;
        }
        const double bl = box_dist(node(nd.left), q) + node(nd.left).min_weight;
        const double br = box_dist(node(nd.right), q) + node(nd.right).min_weight;
        if (bl <= br) {
            weighted_walk(nd.left, q, w, best_val, best_idx);
            weighted_walk(nd.right, q, w, best_val, best_idx);
        } else {
            weighted_walk(nd.right, q, w, best_val, best_idx);
            weighted_walk(nd.left, q, w, best_val, best_idx);
        }
    }
};

}  // namespace roadnet
