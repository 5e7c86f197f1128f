#include "acs/data/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "acs/data/rng.hpp"
#include "acs/errors.hpp"

namespace acs::data {
namespace {

constexpr std::uint64_t kContentStream = 0xC0;
constexpr std::uint64_t kDomainStream = 0xD0;

constexpr double kTissue = 0.40;
constexpr double kVentricle = 0.12;
constexpr double kVessel = 0.90;
constexpr double kBlob = 0.70;
constexpr double kDecoy = 0.22;
constexpr double kEdgeSoftness = 0.08;

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Soft inside-ness of a point at normalized radius d (d == 1 on the boundary).
double soft_inside(double d) { return 1.0 / (1.0 + std::exp(-(1.0 - d) / kEdgeSoftness)); }

double ellipse_radius(double x, double y, double cx, double cy, double rx, double ry) {
    const double dx = (x - cx) / rx;
    const double dy = (y - cy) / ry;
    return std::sqrt(dx * dx + dy * dy);
}

}  // namespace

SubjectAnatomy sample_anatomy(std::uint64_t seed, int subject_id) {
    auto rng = keyed_engine({seed, static_cast<std::uint64_t>(subject_id), kContentStream});
    SubjectAnatomy a{};
    a.head_cx = uniform(rng, 0.47, 0.53);
    a.head_cy = uniform(rng, 0.47, 0.53);
    a.head_rx = uniform(rng, 0.37, 0.43);
    a.head_ry = uniform(rng, 0.41, 0.47);
    const double spread = uniform(rng, 0.21, 0.24);
    const double lower_row = uniform(rng, 0.62, 0.68);
    const double upper_row = uniform(rng, 0.32, 0.38);
    const bool target_lower = uniform(rng, 0.0, 1.0) < 0.5;
    for (int b = 0; b < kBlobs; ++b) {
        const bool target = b < kTargetBlobs;
        const double row = target == target_lower ? lower_row : upper_row;
        const double sign = b % 2 == 0 ? -1.0 : 1.0;
        a.blob_cx[b] = a.head_cx + sign * spread + uniform(rng, -0.02, 0.02);
        a.blob_cy[b] = row + uniform(rng, -0.02, 0.02);
        a.blob_rx[b] = target ? uniform(rng, 0.11, 0.14) : uniform(rng, 0.08, 0.10);
        a.blob_ry[b] = target ? uniform(rng, 0.07, 0.10) : uniform(rng, 0.07, 0.09);
        a.blob_angle[b] = sign * uniform(rng, 0.2, 0.5) * (row == lower_row ? 1.0 : -1.0);
        a.blob_wobble[b] = uniform(rng, 0.05, 0.2);
        a.blob_wobble_phase[b] = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    }
    a.ventricle_rx = uniform(rng, 0.05, 0.08);
    a.ventricle_ry = uniform(rng, 0.09, 0.13);
    for (int v = 0; v < 3; ++v) {
        a.vessel_cx[v] = a.head_cx + uniform(rng, -0.25, 0.25);
        a.vessel_cy[v] = a.head_cy + uniform(rng, -0.36, -0.22);
    }
    return a;
}

ContentRendering render_content(const SubjectAnatomy& a, int slice_index, int slices_per_subject, Shape shape) {
    const double t = slices_per_subject > 1 ? 2.0 * slice_index / (slices_per_subject - 1) - 1.0 : 0.0;
    const double blob_scale = std::sqrt(std::max(0.0, 1.0 - 0.5 * t * t));
    const double ventricle_scale = 0.8 + 0.3 * (1.0 - t * t);

    ContentRendering out{Grid<double>(shape.height, shape.width), Mask(shape.height, shape.width)};
    for (std::int64_t r = 0; r < shape.height; ++r) {
        const double y = shape.height > 1 ? static_cast<double>(r) / static_cast<double>(shape.height - 1) : 0.5;
        for (std::int64_t c = 0; c < shape.width; ++c) {
            const double x = shape.width > 1 ? static_cast<double>(c) / static_cast<double>(shape.width - 1) : 0.5;

            double v = kTissue * soft_inside(ellipse_radius(x, y, a.head_cx, a.head_cy, a.head_rx, a.head_ry));
            const double vent = soft_inside(ellipse_radius(x, y, a.head_cx, a.head_cy - 0.08,
                                                           a.ventricle_rx * ventricle_scale,
                                                           a.ventricle_ry * ventricle_scale));
            v += (kVentricle - v) * vent;
            for (int k = 0; k < 3; ++k) {
                const double s = soft_inside(ellipse_radius(x, y, a.vessel_cx[k], a.vessel_cy[k], 0.035, 0.035));
                v += (kVessel - v) * s;
            }

            bool inside = false;
            for (int side = 0; side < kBlobs; ++side) {
                const double dx = x - a.blob_cx[side];
                const double dy = y - a.blob_cy[side];
                const double ca = std::cos(a.blob_angle[side]);
                const double sa = std::sin(a.blob_angle[side]);
                const double u = (ca * dx + sa * dy) / (a.blob_rx[side] * blob_scale);
                const double w = (-sa * dx + ca * dy) / (a.blob_ry[side] * blob_scale);
                const double theta = std::atan2(w, u);
                const double d = std::sqrt(u * u + w * w) /
                                 (1.0 + a.blob_wobble[side] * std::sin(2.0 * theta + a.blob_wobble_phase[side]));
                const bool target = side < kTargetBlobs;
                v += ((target ? kBlob : kDecoy) - v) * soft_inside(d);
                inside = inside || (target && d <= 1.0);
            }
            out.image.at(r, c) = std::clamp(v, 0.0, 1.0);
            out.mask.at(r, c) = inside ? 1 : 0;
        }
    }
    return out;
}

Grid<double> apply_domain_unclipped(const Grid<double>& clean, const DomainSpec& spec, std::uint64_t seed,
                                    int subject_id, int slice_index) {
    auto rng = keyed_engine(
        {seed, static_cast<std::uint64_t>(subject_id), static_cast<std::uint64_t>(slice_index), kDomainStream});

    // The number of draws never depends on the spec, so two specs sharing a
    // seed see identical random fields.
    const double lesion_roll = uniform(rng, 0.0, 1.0);
    const int lesion_count = 1 + static_cast<int>(uniform(rng, 0.0, 3.0));
    double lesion_x[3], lesion_y[3], lesion_s[3];
    for (int k = 0; k < 3; ++k) {
        lesion_x[k] = uniform(rng, 0.3, 0.7);
        lesion_y[k] = uniform(rng, 0.25, 0.75);
        lesion_s[k] = uniform(rng, 0.03, 0.07);
    }
    const double bias_a = uniform(rng, -1.0, 1.0);
    const double bias_b = uniform(rng, -1.0, 1.0);
    const double bias_c = uniform(rng, -1.0, 1.0);
    const double tex_angle = uniform(rng, 0.0, std::numbers::pi);
    const double tex_phase = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    std::normal_distribution<double> white(0.0, 1.0);

    const bool has_lesions = lesion_roll < spec.lesion_probability;
    Grid<double> out(clean.height, clean.width);
    for (std::int64_t r = 0; r < clean.height; ++r) {
        const double y = clean.height > 1 ? static_cast<double>(r) / static_cast<double>(clean.height - 1) : 0.5;
        for (std::int64_t c = 0; c < clean.width; ++c) {
            const double x = clean.width > 1 ? static_cast<double>(c) / static_cast<double>(clean.width - 1) : 0.5;
            const double noise = white(rng);

            double v = clean.at(r, c);
            if (has_lesions && v > 0.05) {
                double lesion = 0.0;
                for (int k = 0; k < lesion_count; ++k) {
                    const double dx = x - lesion_x[k];
                    const double dy = y - lesion_y[k];
                    lesion -= 0.3 * std::exp(-(dx * dx + dy * dy) / (2.0 * lesion_s[k] * lesion_s[k]));
                }
                v += lesion;
            }
            const double px = 2.0 * x - 1.0;
            const double py = 2.0 * y - 1.0;
            const double bias = (bias_a * px + bias_b * py + bias_c * px * py) / 3.0;
            const double ripple = std::sin(2.0 * std::numbers::pi * spec.texture_frequency *
                                               (x * std::cos(tex_angle) + y * std::sin(tex_angle)) +
                                           tex_phase);
            out.at(r, c) = spec.intensity_gain * v + spec.intensity_offset + spec.bias_field_strength * bias +
                           spec.noise_sigma * (noise + ripple);
        }
    }
    return out;
}

void validate_domain_spec(const DomainSpec& spec) {
    const double fields[] = {spec.intensity_gain,      spec.intensity_offset,  spec.noise_sigma,
                             spec.bias_field_strength, spec.texture_frequency, spec.lesion_probability};
    for (double f : fields) {
        if (!std::isfinite(f)) throw InvalidArgument("domain spec fields must be finite");
    }
    if (spec.noise_sigma < 0.0) throw InvalidArgument("noise_sigma must be >= 0");
    if (spec.bias_field_strength < 0.0) throw InvalidArgument("bias_field_strength must be >= 0");
    if (spec.texture_frequency <= 0.0) throw InvalidArgument("texture_frequency must be > 0");
    if (spec.lesion_probability < 0.0 || spec.lesion_probability > 1.0) {
        throw InvalidArgument("lesion_probability must lie in [0,1]");
    }
}

Dataset generate_synthetic_domain(const DomainSpec& spec, int n_subjects, int slices_per_subject, Shape shape,
                                  std::uint64_t seed, std::string name, int domain_id) {
    validate_domain_spec(spec);
    if (n_subjects < 1) throw InvalidArgument("n_subjects must be >= 1");
    if (slices_per_subject < 1) throw InvalidArgument("slices_per_subject must be >= 1");
    if (shape.height < 16 || shape.width < 16) {
        throw InvalidArgument("slice shape must be at least 16x16, got " + std::to_string(shape.height) + "x" +
                              std::to_string(shape.width));
    }

    Dataset ds;
    ds.name = std::move(name);
    ds.domain_id = domain_id;
    ds.slices.reserve(static_cast<std::size_t>(n_subjects) * static_cast<std::size_t>(slices_per_subject));
    for (int subject = 0; subject < n_subjects; ++subject) {
        const SubjectAnatomy anatomy = sample_anatomy(seed, subject);
        for (int k = 0; k < slices_per_subject; ++k) {
            ContentRendering content = render_content(anatomy, k, slices_per_subject, shape);
            const Grid<double> raw = apply_domain_unclipped(content.image, spec, seed, subject, k);

            LabeledSlice slice;
            slice.image = Image(shape.height, shape.width);
            std::transform(raw.values.begin(), raw.values.end(), slice.image.values.begin(),
                           [](double v) { return static_cast<float>(std::clamp(v, 0.0, 1.0)); });
            slice.mask = std::move(content.mask);
            slice.domain_id = domain_id;
            slice.subject_id = subject;
            ds.slices.push_back(std::move(slice));
        }
    }
    return ds;
}

}  // namespace acs::data
