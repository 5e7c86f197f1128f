#include "acs/data/resample.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "acs/errors.hpp"

namespace acs::data {
namespace {

void check_dims(Shape src, Shape dst) {
    if (src.height < 1 || src.width < 1 || dst.height < 1 || dst.width < 1) {
        throw InvalidArgument("resampling needs dimensions >= 1 (source " + std::to_string(src.height) + "x" +
                              std::to_string(src.width) + ", target " + std::to_string(dst.height) + "x" +
                              std::to_string(dst.width) + ")");
    }
}

double source_coord(std::int64_t i, std::int64_t src, std::int64_t dst) {
    if (dst == 1) return 0.0;
    return static_cast<double>(i) * static_cast<double>(src - 1) / static_cast<double>(dst - 1);
}

}  // namespace

Image resample_bilinear(const Image& image, Shape target) {
    check_dims(image.shape(), target);
    if (image.shape() == target) return image;

    Image out(target.height, target.width);
    for (std::int64_t r = 0; r < target.height; ++r) {
        const double sy = source_coord(r, image.height, target.height);
        const auto y0 = std::min(static_cast<std::int64_t>(std::floor(sy)), image.height - 1);
        const auto y1 = std::min(y0 + 1, image.height - 1);
        const double fy = sy - static_cast<double>(y0);
        for (std::int64_t c = 0; c < target.width; ++c) {
            const double sx = source_coord(c, image.width, target.width);
            const auto x0 = std::min(static_cast<std::int64_t>(std::floor(sx)), image.width - 1);
            const auto x1 = std::min(x0 + 1, image.width - 1);
            const double fx = sx - static_cast<double>(x0);

            const double a = image.at(y0, x0);
            const double b = image.at(y0, x1);
            const double cc = image.at(y1, x0);
            const double d = image.at(y1, x1);
            const double top = a + fx * (b - a);
            const double bottom = cc + fx * (d - cc);
            const double v = top + fy * (bottom - top);
            const auto [lo, hi] = std::minmax({a, b, cc, d});
            out.at(r, c) = static_cast<float>(std::clamp(v, lo, hi));
        }
    }
    return out;
}

Mask resample_nearest(const Mask& mask, Shape target) {
    check_dims(mask.shape(), target);
    if (mask.shape() == target) return mask;

    Mask out(target.height, target.width);
    for (std::int64_t r = 0; r < target.height; ++r) {
        const auto y = static_cast<std::int64_t>(std::lround(source_coord(r, mask.height, target.height)));
        for (std::int64_t c = 0; c < target.width; ++c) {
            const auto x = static_cast<std::int64_t>(std::lround(source_coord(c, mask.width, target.width)));
            out.at(r, c) = mask.at(std::min(y, mask.height - 1), std::min(x, mask.width - 1));
        }
    }
    return out;
}

Dataset conform_dataset(const Dataset& ds, Shape target) {
    Dataset out;
    out.name = ds.name;
    out.domain_id = ds.domain_id;
    out.slices.reserve(ds.size());
    for (const auto& s : ds.slices) {
        LabeledSlice r;
        r.image = resample_bilinear(s.image, target);
        r.mask = resample_nearest(s.mask, target);
        r.domain_id = s.domain_id;
        r.subject_id = s.subject_id;
        out.slices.push_back(std::move(r));
    }
    return out;
}

}  // namespace acs::data
