#include "rangeface/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace rangeface {

KdTree3::KdTree3(const std::vector<Vec3>& points) {
    if (points.empty()) throw std::invalid_argument("KdTree3: empty point set");
    std::vector<int> order(points.size());
    std::iota(order.begin(), order.end(), 0);
    nodes_.reserve(points.size());
    // nodes copy their point so the tree owns its data
    for (std::size_t i = 0; i < points.size(); ++i)
        nodes_.push_back(Node{points[i], static_cast<int>(i), -1, -1, 0});
    root_ = build(order, 0, static_cast<int>(order.size()), 0);
}

int KdTree3::build(std::vector<int>& order, int begin, int end, int depth) {
    if (begin >= end) return -1;
    const int axis = depth % 3;
    const int mid = begin + (end - begin) / 2;
    std::nth_element(order.begin() + begin, order.begin() + mid, order.begin() + end,
                     [&](int a, int b) {
                         const double ca = nodes_[a].p[axis];
                         const double cb = nodes_[b].p[axis];
                         return ca < cb || (ca == cb && a < b);
                     });
    const int node = order[mid];
    nodes_[node].axis = axis;
    nodes_[node].left = build(order, begin, mid, depth + 1);
    nodes_[node].right = build(order, mid + 1, end, depth + 1);
    return node;
}

KdTree3::Hit KdTree3::nearest(const Vec3& query) const {
    Hit best;
    best.dist_sq = std::numeric_limits<double>::infinity();
    search(root_, query, best);
    return best;
}

void KdTree3::search(int node, const Vec3& q, Hit& best) const {
    if (node < 0) return;
    const Node& n = nodes_[node];
    const double d2 = (n.p - q).squaredNorm();
    if (d2 < best.dist_sq || (d2 == best.dist_sq && n.index < best.index))
        best = Hit{n.index, d2};
    const double delta = q[n.axis] - n.p[n.axis];
    const int first = delta < 0.0 ? n.left : n.right;
    const int second = delta < 0.0 ? n.right : n.left;
    search(first, q, best);
    // <= so an equal-distance point with a lower index on the far side is found
    if (delta * delta <= best.dist_sq) search(second, q, best);
}

}  // namespace rangeface
