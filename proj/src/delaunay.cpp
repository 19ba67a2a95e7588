#include "delaunay.hpp"

#include <algorithm>
#include <cstdint>
#include <unordered_map>
#include <vector>

namespace rangeface::detail {

double orient2d(const Vec2& a, const Vec2& b, const Vec2& c) {
    return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

bool circumcircle_contains(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& p) {
    const double s = orient2d(a, b, c);
    if (s == 0.0) return false;  // degenerate triangle has no circumcircle
    const double adx = a.x() - p.x(), ady = a.y() - p.y();
    const double bdx = b.x() - p.x(), bdy = b.y() - p.y();
    const double cdx = c.x() - p.x(), cdy = c.y() - p.y();
    const double ad = adx * adx + ady * ady;
    const double bd = bdx * bdx + bdy * bdy;
    const double cd = cdx * cdx + cdy * cdy;
    const double det = adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) +
                       ad * (bdx * cdy - bdy * cdx);
    return (s > 0.0) ? det > 0.0 : det < 0.0;
}

namespace {

struct Tri {
    int v[3];
    int n[3];  // neighbour across the edge opposite v[i]; -1 at the hull
    bool alive = true;
};

class Builder {
public:
    explicit Builder(const std::vector<Vec2>& input) : pts_(input) {
        // enclosing triangle; vertices appended after the real points
        Vec2 lo = input[0], hi = input[0];
        for (const Vec2& p : input) {
            lo = lo.cwiseMin(p);
            hi = hi.cwiseMax(p);
        }
        const Vec2 c = 0.5 * (lo + hi);
        double m = std::max(hi.x() - lo.x(), hi.y() - lo.y());
        if (m <= 0.0) m = 1.0;
        m *= 1000.0;
        super_ = static_cast<int>(pts_.size());
        pts_.push_back(Vec2(c.x() - 2.0 * m, c.y() - m));
        pts_.push_back(Vec2(c.x() + 2.0 * m, c.y() - m));
        pts_.push_back(Vec2(c.x(), c.y() + 2.0 * m));
        tris_.push_back(Tri{{super_, super_ + 1, super_ + 2}, {-1, -1, -1}, true});
        hint_ = 0;
    }

    void insert_all() {
        for (int i = 0; i < super_; ++i) insert(i);
    }

    std::vector<Triangle> real_triangles() const {
        std::vector<Triangle> out;
        for (const Tri& t : tris_) {
            if (!t.alive) continue;
            if (t.v[0] >= super_ || t.v[1] >= super_ || t.v[2] >= super_) continue;
            out.push_back(Triangle{{t.v[0], t.v[1], t.v[2]}});
        }
        return out;
    }

private:
    bool tri_contains(const Tri& t, const Vec2& p) const {
        for (int i = 0; i < 3; ++i) {
            const Vec2& e1 = pts_[t.v[(i + 1) % 3]];
            const Vec2& e2 = pts_[t.v[(i + 2) % 3]];
            const double side_v = orient2d(e1, e2, pts_[t.v[i]]);
            const double side_p = orient2d(e1, e2, p);
            if ((side_v > 0.0 && side_p < 0.0) || (side_v < 0.0 && side_p > 0.0))
                return false;
        }
        return true;
    }

    bool bad(int tri, const Vec2& p) const {
        const Tri& t = tris_[tri];
        return circumcircle_contains(pts_[t.v[0]], pts_[t.v[1]], pts_[t.v[2]], p);
    }

    // walk toward p from the hint triangle; -1 when the walk fails
    int locate(const Vec2& p) const {
        int cur = hint_;
        if (cur < 0 || !tris_[cur].alive) {
            cur = -1;
            for (int i = static_cast<int>(tris_.size()) - 1; i >= 0; --i)
                if (tris_[i].alive) {
                    cur = i;
                    break;
                }
            if (cur < 0) return -1;
        }
        const int limit = static_cast<int>(tris_.size()) * 4 + 64;
        int prev = -1;
        for (int step = 0; step < limit; ++step) {
            const Tri& t = tris_[cur];
            int next = -1;
            for (int i = 0; i < 3; ++i) {
                if (t.n[i] == prev && prev != -1) continue;  // no immediate backtrack
                const Vec2& e1 = pts_[t.v[(i + 1) % 3]];
                const Vec2& e2 = pts_[t.v[(i + 2) % 3]];
                const double side_v = orient2d(e1, e2, pts_[t.v[i]]);
                const double side_p = orient2d(e1, e2, p);
                if ((side_v > 0.0 && side_p < 0.0) || (side_v < 0.0 && side_p > 0.0)) {
                    next = t.n[i];
                    break;
                }
            }
            if (next == -1) {
                bool crossed = false;
                for (int i = 0; i < 3 && !crossed; ++i) {
                    const Vec2& e1 = pts_[t.v[(i + 1) % 3]];
                    const Vec2& e2 = pts_[t.v[(i + 2) % 3]];
                    const double side_v = orient2d(e1, e2, pts_[t.v[i]]);
                    const double side_p = orient2d(e1, e2, p);
                    crossed = (side_v > 0.0 && side_p < 0.0) || (side_v < 0.0 && side_p > 0.0);
                }
                if (!crossed) return cur;
                return -1;  // walked off the hull; caller falls back to a scan
            }
            prev = cur;
            cur = next;
        }
        return -1;
    }

    void insert(int ip) {
        const Vec2& p = pts_[ip];
        // any point of a triangle except its vertices lies strictly inside the
        // circumcircle, so a successful walk almost always seeds the cavity
        int seed = locate(p);
        if (seed < 0 || !bad(seed, p)) {
            seed = -1;
            for (int i = 0; i < static_cast<int>(tris_.size()); ++i)
                if (tris_[i].alive && bad(i, p)) {
                    seed = i;
                    break;
                }
            if (seed < 0) return;  // duplicate point; nothing to do
        }

        // cavity: all triangles whose circumcircle contains p (edge-connected)
        std::vector<int> cavity;
        std::vector<int> stack{seed};
        tris_[seed].alive = false;  // reuse the flag as the visited mark
        while (!stack.empty()) {
            const int cur = stack.back();
            stack.pop_back();
            cavity.push_back(cur);
            for (int i = 0; i < 3; ++i) {
                const int nb = tris_[cur].n[i];
                if (nb >= 0 && tris_[nb].alive && bad(nb, p)) {
                    tris_[nb].alive = false;
                    stack.push_back(nb);
                }
            }
        }

        // boundary edges of the cavity, then a fan of new triangles around p
        struct Edge {
            int a, b, outer;
        };
        std::vector<Edge> boundary;
        for (const int ti : cavity) {
            const Tri& t = tris_[ti];
            for (int i = 0; i < 3; ++i) {
                const int nb = t.n[i];
                const bool nb_in_cavity = nb >= 0 && !tris_[nb].alive;
                if (!nb_in_cavity)
                    boundary.push_back(Edge{t.v[(i + 1) % 3], t.v[(i + 2) % 3], nb});
            }
        }

        std::unordered_map<std::uint64_t, std::pair<int, int>> open_edge;  // key -> (tri, slot)
        auto key = [](int a, int b) {
            const std::uint64_t lo = static_cast<std::uint32_t>(std::min(a, b));
            const std::uint64_t hi = static_cast<std::uint32_t>(std::max(a, b));
            return (hi << 32) | lo;
        };
        for (const Edge& e : boundary) {
            const int tn = static_cast<int>(tris_.size());
            tris_.push_back(Tri{{ip, e.a, e.b}, {e.outer, -1, -1}, true});
            if (e.outer >= 0) {
                Tri& o = tris_[e.outer];
                for (int i = 0; i < 3; ++i) {
                    const int oa = o.v[(i + 1) % 3], ob = o.v[(i + 2) % 3];
                    if ((oa == e.a && ob == e.b) || (oa == e.b && ob == e.a)) {
                        o.n[i] = tn;
                        break;
                    }
                }
            }
            // fan edges: slot 1 is (b, ip), slot 2 is (ip, a)
            for (int slot = 1; slot <= 2; ++slot) {
                const int other = slot == 1 ? e.b : e.a;
                auto [it, inserted] = open_edge.try_emplace(key(ip, other), tn, slot);
                if (!inserted) {
                    tris_[tn].n[slot] = it->second.first;
                    tris_[it->second.first].n[it->second.second] = tn;
                    open_edge.erase(it);
                }
            }
            hint_ = tn;
        }
    }

    std::vector<Vec2> pts_;
    std::vector<Tri> tris_;
    int super_ = 0;
    int hint_ = -1;
};

}  // namespace

std::vector<Triangle> delaunay_triangulate(const std::vector<Vec2>& points) {
    if (points.size() < 3) return {};
    Builder b(points);
    b.insert_all();
    return b.real_triangles();
}

}  // namespace rangeface::detail
