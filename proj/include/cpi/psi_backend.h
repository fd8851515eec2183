#ifndef CPI_PSI_BACKEND_H_
#define CPI_PSI_BACKEND_H_

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cpi/core_model.h"
#include "cpi/error.h"

namespace cpi {

// A replay grid has no recording for the requested point.
class MissingGridPoint : public Error {
 public:
  explicit MissingGridPoint(const NetPoint& point);
  const NetPoint& point() const { return point_; }

 private:
  NetPoint point_;
};

// The external measurement command failed: nonzero exit, timeout, or
// output whose last line is not a positive number.
class CommandFailure : public Error {
 public:
  CommandFailure(const std::string& what, std::string stderr_text);
  const std::string& stderr_text() const { return stderr_text_; }

 private:
  std::string stderr_text_;
};

enum class BackendKind { kSynthetic, kReplay, kExternal };

std::string_view ToString(BackendKind kind);

struct BackendDescriptor {
  BackendKind kind = BackendKind::kSynthetic;
  // Whether two Measure() calls may run at the same time without changing
  // results.
  bool concurrency_safe = true;
  int trials_default = 7;
};

// Produces PSI samples for points on the latency/bandwidth plane.
class PsiBackend {
 public:
  virtual ~PsiBackend() = default;

  virtual BackendDescriptor Descriptor() const = 0;

  // Measures |point| |trials| times. Throws the backend's documented Error
  // subclass on failure.
  virtual PsiSample Measure(const NetPoint& point, int trials) = 0;
};

// Closed-form stand-in for a real page load:
//   psi = base + lat_coeff * latency_ms + bw_coeff / bandwidth_kbps
// plus optional Gaussian noise.
struct SyntheticSurface {
  double base = 0.0;
  double lat_coeff = 5.0;
  double bw_coeff = 200000.0;
  double noise_stddev = 0.0;
  uint64_t seed = 0;

  double Evaluate(const NetPoint& point) const;
};

class SyntheticBackend : public PsiBackend {
 public:
  explicit SyntheticBackend(const SyntheticSurface& surface);

  // Noisy surfaces draw from one sequential stream, so only the noiseless
  // surface is safe to measure concurrently.
  BackendDescriptor Descriptor() const override;
  PsiSample Measure(const NetPoint& point, int trials) override;

  const SyntheticSurface& surface() const { return surface_; }

 private:
  const SyntheticSurface surface_;
  std::mutex mutex_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> noise_;
};

// Recorded PSI samples keyed by exact grid coordinates.
struct ReplayGrid {
  using Key = std::pair<double, double>;  // (latency_ms, bandwidth_kbps)

  std::string site_id;
  // Samples for each key, in ascending trial order.
  std::map<Key, std::vector<double>> entries;

  // Reads the `latency_ms,bandwidth_kbps,trial,psi` CSV format.
  static ReplayGrid Parse(std::string_view csv_text, std::string site_id = {});
  static ReplayGrid ReadFile(const std::string& path, std::string site_id = {});
};

class ReplayBackend : public PsiBackend {
 public:
  explicit ReplayBackend(ReplayGrid grid);

  BackendDescriptor Descriptor() const override;
  // Returns the first |trials| recorded samples, or all of them when fewer
  // were recorded. Throws MissingGridPoint for an unrecorded point.
  PsiSample Measure(const NetPoint& point, int trials) override;

 private:
  const ReplayGrid grid_;
};

inline constexpr std::chrono::duration<double> kDefaultCommandTimeout{300.0};

// Runs |command_template| through /bin/sh with CPI_LATENCY_MS and
// CPI_BANDWIDTH_KBPS set for |point| and returns the PSI printed on the
// last non-blank line of its standard output.
double InvokeExternal(const NetPoint& point,
                      const std::string& command_template,
                      std::chrono::duration<double> timeout);

class ExternalBackend : public PsiBackend {
 public:
  ExternalBackend(std::string command_template,
                  std::chrono::duration<double> timeout = kDefaultCommandTimeout,
                  bool concurrency_safe = false);

  BackendDescriptor Descriptor() const override;
  // Invokes the command once per trial. Invocations are serialized unless
  // the backend was declared concurrency safe.
  PsiSample Measure(const NetPoint& point, int trials) override;

 private:
  const std::string command_template_;
  const std::chrono::duration<double> timeout_;
  const bool concurrency_safe_;
  std::mutex mutex_;
};

}  // namespace cpi

#endif  // CPI_PSI_BACKEND_H_
