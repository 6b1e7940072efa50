#ifndef SEEDSTABLE_CSV_HPP
#define SEEDSTABLE_CSV_HPP

#include <string>

#include "seedstable/core.hpp"

namespace seedstable {

// Dataset CSV: header row, feature columns first, then optional column `a`
// (treatment), then column `y` (outcome).
Dataset read_dataset_csv(const std::string& path);
void write_dataset_csv(const Dataset& data, const std::string& path);

// 17-significant-digit formatting used in every emitted file, so outputs
// round-trip and reproduce byte for byte.
std::string format_double(double v);

}  // namespace seedstable

#endif
