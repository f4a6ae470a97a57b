#pragma once

#include "handover/core/types.hpp"

namespace handover::dsp {

/// Keeps every `factor`-th sample after a zero-phase anti-alias low-pass at 0.8 of the
/// new Nyquist frequency. T_out = ceil(T_in / factor); factor 1 is the identity.
TimeSeries decimate(const TimeSeries& x, int factor);

/// Replaces NaN samples by linear interpolation between the nearest present
/// neighbours; leading/trailing gaps take the nearest present value.
/// Throws NumericError naming the column when a column has no present sample.
TimeSeries interpolate_gaps(const TimeSeries& x);

/// Linear resampling onto the grid start + k * step, k = 0..count-1. Grid points that
/// coincide with source samples (within 1e-9 step) copy them exactly.
/// Throws CoverageError when the target grid leaves the source coverage.
TimeSeries resample_to_grid(const TimeSeries& x, double start, double step, Eigen::Index count);

}  // namespace handover::dsp
