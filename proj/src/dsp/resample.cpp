#include "handover/dsp/resample.hpp"

#include "handover/core/dataset.hpp"
#include "handover/core/error.hpp"
#include "handover/core/text.hpp"
#include "handover/dsp/filter.hpp"

#include <cmath>

namespace handover::dsp {

TimeSeries decimate(const TimeSeries& x, int factor) {
  if (factor < 1) throw SpecError("decimation factor must be at least 1, got " + std::to_string(factor));
  if (factor == 1) return x;
  const double new_nyquist = x.rate_hz() / factor / 2.0;
  const TimeSeries smooth = apply_filter(x, FilterSpec::low_pass(0.8 * new_nyquist));
  const Eigen::Index n = (x.samples() + factor - 1) / factor;
  Matrix out(n, x.dims());
  for (Eigen::Index i = 0; i < n; ++i) out.row(i) = smooth.values.row(i * factor);
  return TimeSeries(x.start_time_s, x.step_s * factor, std::move(out));
}

TimeSeries interpolate_gaps(const TimeSeries& x) {
  TimeSeries out = x;
  const Eigen::Index n = x.samples();
  for (Eigen::Index c = 0; c < x.dims(); ++c) {
    auto col = out.values.col(c);
    Eigen::Index prev = -1;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::isnan(col(i))) continue;
      if (prev < 0) {
        for (Eigen::Index j = 0; j < i; ++j) col(j) = col(i);
      } else if (i - prev > 1) {
        const double a = col(prev);
        const double b = col(i);
        const double span = static_cast<double>(i - prev);
        for (Eigen::Index j = prev + 1; j < i; ++j) {
          col(j) = a + (b - a) * static_cast<double>(j - prev) / span;
        }
      }
      prev = i;
    }
    if (prev < 0) throw NumericError("column " + std::to_string(c) + " has no present samples to interpolate from");
    for (Eigen::Index j = prev + 1; j < n; ++j) col(j) = col(prev);
  }
  return out;
}

TimeSeries resample_to_grid(const TimeSeries& x, double start, double step, Eigen::Index count) {
  if (count < 1) throw SpecError("resample target needs at least one sample");
  const double last = start + static_cast<double>(count - 1) * step;
  const double tol = kGridTolerance * x.step_s;
  const double src_last = x.time_at(x.samples() - 1);
  if (start < x.start_time_s - tol || last > src_last + tol) {
    throw CoverageError("target grid [" + text::format_double(start) + ", " + text::format_double(last) +
                            "] leaves the source coverage [" + text::format_double(x.start_time_s) +
                            ", " + text::format_double(src_last) + "]",
                        x.start_time_s, x.end_time());
  }
  Matrix out(count, x.dims());
  for (Eigen::Index k = 0; k < count; ++k) {
    const double pos = (start + static_cast<double>(k) * step - x.start_time_s) / x.step_s;
    const double nearest = std::round(pos);
    if (std::abs(pos - nearest) <= kGridTolerance * std::max(1.0, std::abs(pos))) {
      const auto i = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(nearest), 0, x.samples() - 1);
      out.row(k) = x.values.row(i);
      continue;
    }
    const auto i0 = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::floor(pos)), 0, x.samples() - 1);
    const Eigen::Index i1 = std::min<Eigen::Index>(i0 + 1, x.samples() - 1);
    const double w = pos - static_cast<double>(i0);
    out.row(k) = (1.0 - w) * x.values.row(i0) + w * x.values.row(i1);
  }
  return TimeSeries(start, step, std::move(out));
}

}  // namespace handover::dsp
