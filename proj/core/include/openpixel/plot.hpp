#pragma once

#include "openpixel/image.hpp"
#include "openpixel/openset.hpp"

namespace openpixel {

// Minimal raster line plot of a sweep curve (accuracy vs tau), deterministic
// output, no external plotting dependency.
ImageU8 render_sweep_plot(const SweepCurve& curve, int64_t width = 720, int64_t height = 480);

}  // namespace openpixel
