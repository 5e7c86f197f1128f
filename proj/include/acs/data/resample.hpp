#pragma once

#include "acs/data/types.hpp"

namespace acs::data {

// Both resamplers use corner-aligned sampling: output index i maps to source
// coordinate i * (src - 1) / (dst - 1).

Image resample_bilinear(const Image& image, Shape target);
Mask resample_nearest(const Mask& mask, Shape target);

/// Brings every slice to `target` (bilinear images, nearest-neighbour masks).
/// This is the entry point for externally converted data of mixed resolution.
Dataset conform_dataset(const Dataset& ds, Shape target);

}  // namespace acs::data
