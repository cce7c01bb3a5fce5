#pragma once

#include <span>
#include <vector>

namespace voc {

/// Peak amplitudes of the requested harmonic orders of v(t), by single-bin projection
/// over the largest whole number of fundamental cycles ending at the last sample.
/// Samples need not be uniform. Throws std::invalid_argument for fewer than
/// `min_cycles` cycles.
std::vector<double> fourier_components(std::span<const double> t, std::span<const double> v,
                                       double fundamental_hz, std::span<const int> orders,
                                       int min_cycles = 10);

/// Mean frequency from interpolated upward zero crossings. Throws std::invalid_argument
/// when fewer than two crossings are present.
double estimate_fundamental(std::span<const double> t, std::span<const double> v);

}  // namespace voc
