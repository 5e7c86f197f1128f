#pragma once

#include <cstdint>
#include <string>

#include "acs/data/types.hpp"

namespace acs::data {

inline constexpr int kTargetBlobs = 2;
inline constexpr int kBlobs = 4;

/// Content parameters of one synthetic subject; independent of any DomainSpec.
/// Blobs 0-1 are the labelled pair; blobs 2-3 are a darker, rounder decoy pair
/// on the other row.
struct SubjectAnatomy {
    double head_cx, head_cy, head_rx, head_ry;
    double blob_cx[kBlobs], blob_cy[kBlobs], blob_rx[kBlobs], blob_ry[kBlobs], blob_angle[kBlobs];
    double blob_wobble[kBlobs], blob_wobble_phase[kBlobs];
    double ventricle_rx, ventricle_ry;
    double vessel_cx[3], vessel_cy[3];
};

/// Clean rendering of one slice before any domain effect.
struct ContentRendering {
    Grid<double> image;
    Mask mask;
};

SubjectAnatomy sample_anatomy(std::uint64_t seed, int subject_id);

/// Renders slice `slice_index` of `slices_per_subject` for the given anatomy.
ContentRendering render_content(const SubjectAnatomy& anatomy, int slice_index, int slices_per_subject,
                                Shape shape);

/// Applies the domain transform without clipping. Randomness comes from
/// (seed, subject_id, slice_index) only.
Grid<double> apply_domain_unclipped(const Grid<double>& clean, const DomainSpec& spec, std::uint64_t seed,
                                    int subject_id, int slice_index);

/// Throws InvalidArgument on non-finite or out-of-range fields.
void validate_domain_spec(const DomainSpec& spec);

/// n_subjects * slices_per_subject slices. The foreground is a pair of smooth
/// blobs next to a decoy pair; domain effects touch the image only. Pure function of its inputs.
Dataset generate_synthetic_domain(const DomainSpec& spec, int n_subjects, int slices_per_subject, Shape shape,
                                  std::uint64_t seed, std::string name = "synthetic", int domain_id = 0);

}  // namespace acs::data
