#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "wifico/config.hpp"
#include "wifico/model.hpp"
#include "wifico/segmentation.hpp"

namespace fixture {

inline wifico::Instant base() { return wifico::PipelineConfig{}.first_week_start(); }
inline wifico::Instant at(std::int64_t s) { return base() + wifico::Duration{s}; }
inline wifico::TimeInterval span(std::int64_t a, std::int64_t b) { return {at(a), at(b)}; }

inline std::string mac(unsigned n) {
  char buf[18];
  std::snprintf(buf, sizeof buf, "02:00:00:00:%02x:%02x", (n >> 8) & 0xff, n & 0xff);
  return buf;
}

struct Room {
  std::string building;
  std::string room;
  wifico::BuildingCategory category;
};

// One access point per room; AP ids are mac(index).
inline wifico::ApRegistry registry(const std::vector<Room>& rooms) {
  wifico::ApRegistry r;
  for (unsigned i = 0; i < rooms.size(); ++i) {
    r.add({mac(i), rooms[i].building, rooms[i].room, rooms[i].category});
  }
  return r;
}

inline wifico::DwellSegment dwell(const std::string& user, wifico::RoomId room, std::int64_t a,
                                  std::int64_t b,
                                  wifico::DwellStatus status = wifico::DwellStatus::Dwelling) {
  return {user, room, span(a, b), status, status == wifico::DwellStatus::Dwelling ? 1u : 0u, {}};
}

// Fresh directory under the system temp dir, removed by the destructor.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("wifico-" + tag + "-" + std::to_string(std::random_device{}()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace fixture
