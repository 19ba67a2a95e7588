#include "rangeface/range_image.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <unordered_map>

#include "delaunay.hpp"

namespace rangeface {

void GridSpec::validate() const {
    if (width < 16 || height < 16)
        throw std::invalid_argument("GridSpec: width and height must be >= 16");
    if (!(x1 > x0) || !(y1 > y0))
        throw std::invalid_argument("GridSpec: degenerate coordinate range");
    if (!std::isfinite(x0) || !std::isfinite(x1) || !std::isfinite(y0) || !std::isfinite(y1))
        throw std::invalid_argument("GridSpec: non-finite coordinate range");
}

GridSpec GridSpec::fit(const PointCloud& cloud, int width, int height, double margin) {
    if (margin < 0.0) throw std::invalid_argument("GridSpec::fit: negative margin");
    const Bounds3 b = bounding_box(cloud);
    GridSpec spec;
    spec.width = width;
    spec.height = height;
    double pad_x = margin * (b.hi.x() - b.lo.x());
    double pad_y = margin * (b.hi.y() - b.lo.y());
    if (pad_x <= 0.0) pad_x = 0.5;
    if (pad_y <= 0.0) pad_y = 0.5;
    spec.x0 = b.lo.x() - pad_x;
    spec.x1 = b.hi.x() + pad_x;
    spec.y0 = b.lo.y() - pad_y;
    spec.y1 = b.hi.y() + pad_y;
    spec.validate();
    return spec;
}

RangeImage rasterize(const PointCloud& cloud, const GridSpec& spec) {
    spec.validate();
    if (cloud.empty()) throw std::invalid_argument("rasterize: empty cloud");

    const Bounds3 bounds = bounding_box(cloud);
    if (bounds.hi.x() < spec.x0 || bounds.lo.x() > spec.x1 || bounds.hi.y() < spec.y0 ||
        bounds.lo.y() > spec.y1)
        throw std::runtime_error("rasterize: cloud lies entirely outside the grid");

    // collapse near-coincident projections (quarter-pixel buckets), keeping
    // the sample nearest the scanner; enforces a single-valued surface
    const double qx = spec.pixel_width() / 4.0;
    const double qy = spec.pixel_height() / 4.0;
    std::unordered_map<std::uint64_t, int> bucket_best;
    bucket_best.reserve(cloud.size() * 2);
    for (int i = 0; i < static_cast<int>(cloud.size()); ++i) {
        const Vec3& p = cloud.points[i];
        const auto bx = static_cast<std::int64_t>(std::floor((p.x() - spec.x0) / qx));
        const auto by = static_cast<std::int64_t>(std::floor((p.y() - spec.y0) / qy));
        const std::uint64_t key = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(bx)) << 32) |
                                  static_cast<std::uint32_t>(by);
        auto [it, inserted] = bucket_best.try_emplace(key, i);
        if (!inserted && p.z() > cloud.points[it->second].z()) it->second = i;
    }
    std::vector<int> kept;
    kept.reserve(bucket_best.size());
    for (const auto& [key, idx] : bucket_best) kept.push_back(idx);
    std::sort(kept.begin(), kept.end());

    if (kept.size() < 3)
        throw std::runtime_error("rasterize: fewer than 3 distinct projected points");

    std::vector<detail::Vec2> flat;
    flat.reserve(kept.size());
    for (const int idx : kept)
        flat.push_back(detail::Vec2(cloud.points[idx].x(), cloud.points[idx].y()));
    const std::vector<detail::Triangle> tris = detail::delaunay_triangulate(flat);
    if (tris.empty())
        throw std::runtime_error("rasterize: projected points are collinear");

    RangeImage img;
    img.grid = spec;
    img.depth = Image(spec.width, spec.height, 0.0);
    img.valid.assign(static_cast<std::size_t>(spec.width) * spec.height, 0);
    Image raw(spec.width, spec.height, 0.0);

    const double pw = spec.pixel_width();
    const double ph = spec.pixel_height();
    for (const detail::Triangle& t : tris) {
        const detail::Vec2& pa = flat[t.v[0]];
        const detail::Vec2& pb = flat[t.v[1]];
        const detail::Vec2& pc = flat[t.v[2]];
        const double za = cloud.points[kept[t.v[0]]].z();
        const double zb = cloud.points[kept[t.v[1]]].z();
        const double zc = cloud.points[kept[t.v[2]]].z();

        const double minx = std::min({pa.x(), pb.x(), pc.x()});
        const double maxx = std::max({pa.x(), pb.x(), pc.x()});
        const double miny = std::min({pa.y(), pb.y(), pc.y()});
        const double maxy = std::max({pa.y(), pb.y(), pc.y()});
        const int ix0 = std::max(0, static_cast<int>(std::ceil((minx - spec.x0) / pw - 1e-12)));
        const int ix1 = std::min(spec.width - 1,
                                 static_cast<int>(std::floor((maxx - spec.x0) / pw + 1e-12)));
        const int iy0 = std::max(0, static_cast<int>(std::ceil((miny - spec.y0) / ph - 1e-12)));
        const int iy1 = std::min(spec.height - 1,
                                 static_cast<int>(std::floor((maxy - spec.y0) / ph + 1e-12)));

        for (int j = iy0; j <= iy1; ++j) {
            for (int i = ix0; i <= ix1; ++i) {
                const detail::Vec2 p(spec.node_x(i), spec.node_y(j));
                const double wa = detail::orient2d(pb, pc, p);
                const double wb = detail::orient2d(pc, pa, p);
                const double wc = detail::orient2d(pa, pb, p);
                const double sum = wa + wb + wc;
                if (sum == 0.0) continue;
                const double la = wa / sum, lb = wb / sum, lc = wc / sum;
                if (la < -1e-12 || lb < -1e-12 || lc < -1e-12) continue;
                raw.at(i, j) = la * za + lb * zb + lc * zc;
                img.set_valid(i, j, true);
            }
        }
    }

    double zmin = std::numeric_limits<double>::infinity();
    double zmax = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (int j = 0; j < spec.height; ++j)
        for (int i = 0; i < spec.width; ++i)
            if (img.is_valid(i, j)) {
                zmin = std::min(zmin, raw.at(i, j));
                zmax = std::max(zmax, raw.at(i, j));
                any = true;
            }
    if (!any) throw std::runtime_error("rasterize: no grid node falls on the surface");

    // spans at roundoff scale are flat surfaces; normalizing them would
    // amplify interpolation noise into full-range garbage
    const double span = zmax - zmin;
    const double flat_eps = 1e-12 * std::max({std::abs(zmin), std::abs(zmax), 1.0});
    for (int j = 0; j < spec.height; ++j)
        for (int i = 0; i < spec.width; ++i)
            if (img.is_valid(i, j))
                img.depth.at(i, j) =
                    span > flat_eps ? 255.0 * (raw.at(i, j) - zmin) / span : 255.0;
    return img;
}

PixelCoord find_nose_tip(const RangeImage& img, double flat_tol) {
    if (flat_tol < 0.0) throw std::invalid_argument("find_nose_tip: negative tolerance");
    const int w = img.width();
    const int h = img.height();
    double max_depth = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (img.is_valid(x, y)) {
                max_depth = std::max(max_depth, img.depth.at(x, y));
                any = true;
            }
    if (!any) throw std::runtime_error("find_nose_tip: image has no valid pixels");

    const double cut = max_depth - flat_tol;
    auto in_plateau = [&](int x, int y) {
        return img.is_valid(x, y) && img.depth.at(x, y) >= cut;
    };

    // largest 8-connected plateau region; row-major scan order breaks size ties
    std::vector<std::uint8_t> visited(static_cast<std::size_t>(w) * h, 0);
    double best_su = 0.0, best_sv = 0.0;
    long best_n = 0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (visited[static_cast<std::size_t>(y) * w + x] || !in_plateau(x, y)) continue;
            long n = 0;
            double su = 0.0, sv = 0.0;
            std::queue<std::pair<int, int>> q;
            q.push({x, y});
            visited[static_cast<std::size_t>(y) * w + x] = 1;
            while (!q.empty()) {
                auto [cx, cy] = q.front();
                q.pop();
                ++n;
                su += cx;
                sv += cy;
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (dx == 0 && dy == 0) continue;
                        const int nx = cx + dx, ny = cy + dy;
                        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                        auto& mark = visited[static_cast<std::size_t>(ny) * w + nx];
                        if (mark || !in_plateau(nx, ny)) continue;
                        mark = 1;
                        q.push({nx, ny});
                    }
            }
            if (n > best_n) {
                best_n = n;
                best_su = su;
                best_sv = sv;
            }
        }
    }
    return PixelCoord{best_su / best_n, best_sv / best_n};
}

RangeImage crop_ellipse(const RangeImage& img, PixelCoord center, double a, double b) {
    if (!(a > 0.0) || !(b > 0.0))
        throw std::invalid_argument("crop_ellipse: semi-axes must be positive");
    RangeImage out = img;
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            const double du = (x - center.u) / a;
            const double dv = (y - center.v) / b;
            if (du * du + dv * dv > 1.0) {
                out.depth.at(x, y) = 0.0;
                out.set_valid(x, y, false);
            }
        }
    }
    return out;
}

void PreprocessConfig::validate() const {
    if (grid_width < 16 || grid_height < 16)
        throw std::invalid_argument("preprocess: grid dimensions must be >= 16");
    if (grid_margin < 0.0) throw std::invalid_argument("preprocess: negative grid margin");
    if (!(crop_a_frac > 0.0) || !(crop_b_frac > 0.0) || !std::isfinite(crop_a_frac) ||
        !std::isfinite(crop_b_frac))
        throw std::invalid_argument("preprocess: crop fractions must be positive");
}

PreprocessResult preprocess(const PointCloud& cloud, const PointCloud* reference,
                            const PreprocessConfig& cfg) {
    cfg.validate();
    PreprocessResult result;
    const PointCloud* to_raster = &cloud;
    PointCloud registered;
    if (reference != nullptr) {
        const IcpResult r = icp_align(cloud, *reference, cfg.icp);
        registered = apply_transform(cloud, r.transform);
        to_raster = &registered;
        result.registered = true;
        result.icp_iterations = r.iterations;
        result.icp_rms = r.final_rms;
    }
    const GridSpec spec =
        GridSpec::fit(*to_raster, cfg.grid_width, cfg.grid_height, cfg.grid_margin);
    RangeImage img = rasterize(*to_raster, spec);
    result.nose_tip = find_nose_tip(img);
    result.image = crop_ellipse(img, result.nose_tip, cfg.crop_a_frac * cfg.grid_width,
                                cfg.crop_b_frac * cfg.grid_height);
    return result;
}

}  // namespace rangeface
