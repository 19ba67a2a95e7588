#pragma once

#include <vector>

#include "rangeface/geometry.hpp"

namespace rangeface {

/// Static 3-d tree for nearest-neighbour queries. Distance ties resolve to
/// the lowest point index, so results do not depend on tree layout.
class KdTree3 {
public:
    explicit KdTree3(const std::vector<Vec3>& points);

    struct Hit {
        int index = -1;
        double dist_sq = 0.0;
    };

    Hit nearest(const Vec3& query) const;
    bool empty() const { return nodes_.empty(); }

private:
    struct Node {
        Vec3 p;
        int index;       // position in the input set
        int left = -1;
        int right = -1;
        int axis = 0;
    };

    int build(std::vector<int>& order, int begin, int end, int depth);
    void search(int node, const Vec3& q, Hit& best) const;

    std::vector<Node> nodes_;
    int root_ = -1;
};

}  // namespace rangeface
