#pragma once

// Request builder for the FIRMS area CSV service. The map key is read from
// the environment so it never lands in reports or shell history.

#include <cstdlib>
#include <optional>
#include <string>

#include "firmsaudit/error.hpp"

namespace firmsaudit::firms {

inline constexpr const char* kMapKeyVariable = "FIRMS_MAP_KEY";
inline constexpr const char* kHost = "https://firms.modaps.eosdis.nasa.gov";

struct AreaRequest {
  /// e.g. VIIRS_SNPP_SP, VIIRS_NOAA20_NRT
  std::string source = "VIIRS_SNPP_SP";
  /// "world" or "west,south,east,north"
  std::string area = "world";
  /// 1..10 per request
  int day_range = 1;
  /// YYYY-MM-DD; empty means the most recent days.
  std::string date;
};

inline std::optional<std::string> map_key_from_env() {
  const char* v = std::getenv(kMapKeyVariable);
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::string(v);
}

/// Path component (without host) of an area CSV request.
inline std::string area_path(const AreaRequest& req, const std::string& map_key) {
  if (map_key.empty()) throw AuditError(ErrorCode::InvalidArgument, "empty FIRMS map key");
  if (req.day_range < 1 || req.day_range > 10) {
    throw AuditError(ErrorCode::InvalidArgument, "day range must lie in [1, 10]");
  }
  std::string p = "/api/area/csv/" + map_key + "/" + req.source + "/" + req.area + "/" + std::to_string(req.day_range);
  if (!req.date.empty()) p += "/" + req.date;
  return p;
}

inline std::string area_url(const AreaRequest& req, const std::string& map_key) {
  return std::string(kHost) + area_path(req, map_key);
}

}  // namespace firmsaudit::firms
