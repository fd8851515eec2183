#ifndef CPI_PATH_IO_H_
#define CPI_PATH_IO_H_

#include <string>
#include <string_view>

#include "cpi/core_model.h"
#include "cpi/error.h"

namespace cpi {

class PathFileError : public Error {
 public:
  using Error::Error;
};

// JSON document with keys in a fixed order:
//   {"site_id", "start": {latency_ms, bandwidth_kbps},
//    "schedule": {latency_step_ms, doubling_ceiling_kbps, linear_step_kbps,
//                 latency_floor_ms, bandwidth_ceiling_kbps},
//    "points": [{latency_ms, bandwidth_kbps, psi_samples, psi_mean}, ...]}
std::string SerializeCpiPath(const CpiPath& path);

// Inverse of SerializeCpiPath. Recomputes each mean from its samples and
// throws PathFileError if the stored mean disagrees or the staircase is
// broken.
CpiPath ParseCpiPath(std::string_view text);

CpiPath ReadCpiPathFile(const std::string& file);
void WriteCpiPathFile(const std::string& file, const CpiPath& path);

}  // namespace cpi

#endif  // CPI_PATH_IO_H_
