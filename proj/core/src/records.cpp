#include "qio/records.hpp"

#include <cmath>

#include "qio/error.hpp"

namespace qio {

void DiffusiveRecord::validate() const {
  require(dt > 0.0 && std::isfinite(dt), "diffusive record needs dt > 0");
  require(!increments.empty(), "diffusive record needs at least one increment");
  for (double v : increments) require(std::isfinite(v), "diffusive record has a non-finite increment");
}

void CountingRecord::validate() const {
  require(horizon > 0.0 && std::isfinite(horizon), "counting record needs horizon > 0");
  double prev = 0.0;
  for (double t : jumps) {
    require(std::isfinite(t) && t > prev, "jump times must be strictly increasing and positive");
    require(t <= horizon, "jump time beyond the record horizon");
    prev = t;
  }
}

void validate(const MeasurementRecord& record) {
  std::visit([](const auto& r) { r.validate(); }, record);
}

double horizon(const MeasurementRecord& record) {
  if (const auto* d = std::get_if<DiffusiveRecord>(&record)) return d->horizon();
  return std::get<CountingRecord>(record).horizon;
}

}  // namespace qio
