#include "rangeface/range_image_io.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace rangeface {

namespace {

constexpr int kMaxVal = 65535;
// 255 * 257 == 65535, so the stored sample is depth * 257 rounded
constexpr double kDepthToRaw = 257.0;

int next_pgm_token(std::istream& in) {
    // skips whitespace and '#' comments inside the header
    while (true) {
        const int c = in.peek();
        if (c == '#') {
            std::string line;
            std::getline(in, line);
        } else if (std::isspace(c)) {
            in.get();
        } else {
            break;
        }
    }
    int value = -1;
    in >> value;
    return in ? value : -1;
}

}  // namespace

std::filesystem::path range_image_sidecar_path(const std::filesystem::path& pgm_path) {
    std::filesystem::path p = pgm_path;
    p.replace_extension(".meta");
    return p;
}

void save_range_image(const RangeImage& img, const std::filesystem::path& pgm_path) {
    img.grid.validate();
    if (img.depth.width != img.grid.width || img.depth.height != img.grid.height)
        throw std::invalid_argument("save_range_image: image/grid size mismatch");

    {
        std::ofstream out(pgm_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open " + pgm_path.string() + " for writing");
        out << "P5\n" << img.width() << " " << img.height() << "\n" << kMaxVal << "\n";
        std::vector<unsigned char> row(static_cast<std::size_t>(img.width()) * 2);
        for (int y = 0; y < img.height(); ++y) {
            for (int x = 0; x < img.width(); ++x) {
                double d = img.is_valid(x, y) ? img.depth.at(x, y) : 0.0;
                d = std::clamp(d, 0.0, 255.0);
                const auto v = static_cast<std::uint16_t>(std::lround(d * kDepthToRaw));
                row[static_cast<std::size_t>(x) * 2] = static_cast<unsigned char>(v >> 8);
                row[static_cast<std::size_t>(x) * 2 + 1] = static_cast<unsigned char>(v & 0xff);
            }
            out.write(reinterpret_cast<const char*>(row.data()),
                      static_cast<std::streamsize>(row.size()));
        }
        if (!out) throw std::runtime_error("write error on " + pgm_path.string());
    }

    const std::filesystem::path meta = range_image_sidecar_path(pgm_path);
    std::ofstream out(meta, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + meta.string() + " for writing");
    out.precision(17);
    out << "width " << img.grid.width << "\n";
    out << "height " << img.grid.height << "\n";
    out << "x " << img.grid.x0 << " " << img.grid.x1 << "\n";
    out << "y " << img.grid.y0 << " " << img.grid.y1 << "\n";
    // run lengths of the row-major validity mask, starting with the first
    // pixel's state
    out << "valid-rle " << (img.valid.empty() || img.valid[0] == 0 ? 0 : 1);
    std::uint8_t cur = img.valid.empty() ? 0 : (img.valid[0] ? 1 : 0);
    long run = 0;
    for (const std::uint8_t v : img.valid) {
        const std::uint8_t bit = v ? 1 : 0;
        if (bit == cur) {
            ++run;
        } else {
            out << " " << run;
            cur = bit;
            run = 1;
        }
    }
    if (run > 0) out << " " << run;
    out << "\n";
    if (!out) throw std::runtime_error("write error on " + meta.string());
}

RangeImage load_range_image(const std::filesystem::path& pgm_path) {
    std::ifstream in(pgm_path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + pgm_path.string());
    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (!in || magic[0] != 'P' || magic[1] != '5')
        throw std::runtime_error(pgm_path.string() + ": not a binary PGM");
    const int w = next_pgm_token(in);
    const int h = next_pgm_token(in);
    const int maxval = next_pgm_token(in);
    if (w < 1 || h < 1) throw std::runtime_error(pgm_path.string() + ": bad dimensions");
    if (maxval != kMaxVal)
        throw std::runtime_error(pgm_path.string() + ": expected 16-bit samples");
    in.get();  // single whitespace byte after the header

    RangeImage img;
    img.depth = Image(w, h, 0.0);
    img.valid.assign(static_cast<std::size_t>(w) * h, 0);
    std::vector<unsigned char> row(static_cast<std::size_t>(w) * 2);
    for (int y = 0; y < h; ++y) {
        in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size()));
        if (!in) throw std::runtime_error(pgm_path.string() + ": truncated pixel data");
        for (int x = 0; x < w; ++x) {
            const unsigned hi = row[static_cast<std::size_t>(x) * 2];
            const unsigned lo = row[static_cast<std::size_t>(x) * 2 + 1];
            img.depth.at(x, y) = static_cast<double>((hi << 8) | lo) / kDepthToRaw;
        }
    }

    const std::filesystem::path meta = range_image_sidecar_path(pgm_path);
    std::ifstream min(meta);
    if (!min) throw std::runtime_error("cannot open sidecar " + meta.string());
    GridSpec spec;
    spec.width = 0;
    spec.height = 0;
    bool have_mask = false;
    std::string line;
    while (std::getline(min, line)) {
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "width") {
            ls >> spec.width;
        } else if (key == "height") {
            ls >> spec.height;
        } else if (key == "x") {
            ls >> spec.x0 >> spec.x1;
        } else if (key == "y") {
            ls >> spec.y0 >> spec.y1;
        } else if (key == "valid-rle") {
            int first = 0;
            if (!(ls >> first)) throw std::runtime_error(meta.string() + ": bad mask line");
            std::uint8_t cur = first ? 1 : 0;
            std::size_t pos = 0;
            long run = 0;
            while (ls >> run) {
                if (run < 0 || pos + static_cast<std::size_t>(run) > img.valid.size())
                    throw std::runtime_error(meta.string() + ": mask run overflows image");
                for (long i = 0; i < run; ++i) img.valid[pos++] = cur;
                cur = cur ? 0 : 1;
            }
            if (pos != img.valid.size())
                throw std::runtime_error(meta.string() + ": mask does not cover image");
            have_mask = true;
        } else if (!key.empty() && key[0] != '#') {
            throw std::runtime_error(meta.string() + ": unknown key '" + key + "'");
        }
        if (!ls && !ls.eof()) throw std::runtime_error(meta.string() + ": parse error");
    }
    if (spec.width != w || spec.height != h)
        throw std::runtime_error(meta.string() + ": sidecar/PGM size mismatch");
    if (!have_mask) throw std::runtime_error(meta.string() + ": missing validity mask");
    spec.validate();
    img.grid = spec;
    // background is not data: force invalid pixels to exactly 0
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (!img.is_valid(x, y)) img.depth.at(x, y) = 0.0;
    return img;
}

}  // namespace rangeface
