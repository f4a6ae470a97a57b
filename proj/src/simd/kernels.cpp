#include "handover/simd/kernels.hpp"

#include "handover/core/error.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace handover::simd {

namespace {

struct Table {
  double (*dot)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*dot2)(const double*, const double*, const double*, std::size_t, double*, double*);
  Backend backend;
};

constexpr Table kScalar{&scalar::dot, &scalar::axpy, &scalar::dot2, Backend::Scalar};
#if HANDOVER_HAVE_AVX2
constexpr Table kAvx2{&avx2::dot, &avx2::axpy, &avx2::dot2, Backend::Avx2};
#endif
#if HANDOVER_HAVE_NEON
constexpr Table kNeon{&neon::dot, &neon::axpy, &neon::dot2, Backend::Neon};
#endif

const Table* table_for(Backend b) {
  switch (b) {
    case Backend::Scalar: return &kScalar;
    case Backend::Avx2:
#if HANDOVER_HAVE_AVX2
      return &kAvx2;
#else
      return nullptr;
#endif
    case Backend::Neon:
#if HANDOVER_HAVE_NEON
      return &kNeon;
#else
      return nullptr;
#endif
  }
  return nullptr;
}

const Table* initial_table() {
  Backend b = best_backend();
  if (const char* env = std::getenv("HANDOVER_SIMD")) {
    const std::string v(env);
    if (v == "scalar") b = Backend::Scalar;
    else if (v == "avx2" && supported(Backend::Avx2)) b = Backend::Avx2;
    else if (v == "neon" && supported(Backend::Neon)) b = Backend::Neon;
  }
  return table_for(b);
}

std::atomic<const Table*>& current() {
  static std::atomic<const Table*> t{initial_table()};
  return t;
}

void check_sizes(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw DimensionError(std::string(what) + ": length mismatch");
}

}  // namespace

std::string_view name(Backend b) {
  switch (b) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
    case Backend::Neon: return "neon";
  }
  return "?";
}

bool supported(Backend b) {
  switch (b) {
    case Backend::Scalar: return true;
    case Backend::Avx2:
#if HANDOVER_HAVE_AVX2 && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Backend::Neon:
#if HANDOVER_HAVE_NEON
      return true;
#else
      return false;
#endif
  }
  return false;
}

Backend best_backend() {
  if (supported(Backend::Avx2)) return Backend::Avx2;
  if (supported(Backend::Neon)) return Backend::Neon;
  return Backend::Scalar;
}

Backend active_backend() { return current().load(std::memory_order_acquire)->backend; }

void set_backend(Backend b) {
  if (!supported(b)) throw SpecError("SIMD backend '" + std::string(name(b)) + "' is not available");
  current().store(table_for(b), std::memory_order_release);
}

double dot(std::span<const double> a, std::span<const double> b) {
  check_sizes(a.size(), b.size(), "dot");
  return current().load(std::memory_order_acquire)->dot(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  check_sizes(x.size(), y.size(), "axpy");
  current().load(std::memory_order_acquire)->axpy(alpha, x.data(), y.data(), x.size());
}

std::pair<double, double> dot2(std::span<const double> x, std::span<const double> re,
                               std::span<const double> im) {
  check_sizes(x.size(), re.size(), "dot2");
  check_sizes(x.size(), im.size(), "dot2");
  double r = 0.0;
  double i = 0.0;
  current().load(std::memory_order_acquire)->dot2(x.data(), re.data(), im.data(), x.size(), &r, &i);
  return {r, i};
}

void gemv(std::span<const double> w, std::size_t rows, std::size_t cols,
          std::span<const double> x, std::span<double> y) {
  check_sizes(w.size(), rows * cols, "gemv");
  check_sizes(x.size(), cols, "gemv");
  check_sizes(y.size(), rows, "gemv");
  const Table* t = current().load(std::memory_order_acquire);
  for (std::size_t r = 0; r < rows; ++r) y[r] += t->dot(w.data() + r * cols, x.data(), cols);
}

void gemv_t(std::span<const double> w, std::size_t rows, std::size_t cols,
            std::span<const double> x, std::span<double> y) {
  check_sizes(w.size(), rows * cols, "gemv_t");
  check_sizes(x.size(), rows, "gemv_t");
  check_sizes(y.size(), cols, "gemv_t");
  const Table* t = current().load(std::memory_order_acquire);
  for (std::size_t r = 0; r < rows; ++r) {
    if (x[r] != 0.0) t->axpy(x[r], w.data() + r * cols, y.data(), cols);
  }
}

void ger(std::span<const double> x, std::span<const double> v, std::span<double> w) {
  check_sizes(w.size(), x.size() * v.size(), "ger");
  const Table* t = current().load(std::memory_order_acquire);
  const std::size_t cols = v.size();
  for (std::size_t r = 0; r < x.size(); ++r) {
    if (x[r] != 0.0) t->axpy(x[r], v.data(), w.data() + r * cols, cols);
  }
}

#if !HANDOVER_HAVE_AVX2
namespace avx2 {
double dot(const double*, const double*, std::size_t) { throw SpecError("avx2 backend not built"); }
void axpy(double, const double*, double*, std::size_t) { throw SpecError("avx2 backend not built"); }
void dot2(const double*, const double*, const double*, std::size_t, double*, double*) {
  throw SpecError("avx2 backend not built");
}
}  // namespace avx2
#endif

#if !HANDOVER_HAVE_NEON
namespace neon {
double dot(const double*, const double*, std::size_t) { throw SpecError("neon backend not built"); }
void axpy(double, const double*, double*, std::size_t) { throw SpecError("neon backend not built"); }
void dot2(const double*, const double*, const double*, std::size_t, double*, double*) {
  throw SpecError("neon backend not built");
}
}  // namespace neon
#endif

}  // namespace handover::simd
