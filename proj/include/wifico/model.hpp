#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "wifico/interval.hpp"
#include "wifico/time.hpp"

namespace wifico {

enum class UpdateType { SnmpUpdate, SnmpPoll };

std::string_view to_string(UpdateType t);
UpdateType parse_update_type(std::string_view text);

enum class BuildingCategory { Academic, Dining, GreenSpace, Recreation, Residential, Other };

inline constexpr BuildingCategory kAllCategories[] = {
    BuildingCategory::Academic,   BuildingCategory::Dining,      BuildingCategory::GreenSpace,
    BuildingCategory::Recreation, BuildingCategory::Residential, BuildingCategory::Other};

std::string_view to_string(BuildingCategory c);
BuildingCategory parse_category(std::string_view text);

// (building_id, room_id); all access points of one room share a key.
struct RoomKey {
  std::string building;
  std::string room;

  std::string label() const { return building + "-" + room; }
  friend auto operator<=>(const RoomKey&, const RoomKey&) = default;
};

// Splits a "building-room" label at the first '-'.
RoomKey parse_ap_label(std::string_view label);

struct AssociationEvent {
  Instant timestamp{};
  UpdateType update_type = UpdateType::SnmpUpdate;
  std::string user_id;
  std::string device_id;
  std::string ap_id;
  std::string ap_label;

  friend bool operator==(const AssociationEvent&, const AssociationEvent&) = default;
};

struct AccessPoint {
  std::string ap_id;
  std::string building_id;
  std::string room_id;
  BuildingCategory category = BuildingCategory::Other;

  friend bool operator==(const AccessPoint&, const AccessPoint&) = default;
};

RoomKey room_key(const AccessPoint& ap);

// Dense index of a room key inside one registry.
struct RoomId {
  std::uint32_t value = 0;
  friend auto operator<=>(const RoomId&, const RoomId&) = default;
};

class ApRegistry {
 public:
  // Throws Error on a conflicting re-registration of the same ap_id or when
  // one building is given two categories.
  void add(AccessPoint ap);

  bool contains(std::string_view ap_id) const;
  const AccessPoint& at(std::string_view ap_id) const;  // RegistryMissError
  RoomKey room_key(std::string_view ap_id) const;       // RegistryMissError
  RoomId room_id_of_ap(std::string_view ap_id) const;   // RegistryMissError

  std::optional<RoomId> find_room(const RoomKey& key) const;
  RoomId room_id(const RoomKey& key) const;  // Error when unknown
  const RoomKey& room(RoomId id) const { return rooms_.at(id.value); }
  BuildingCategory room_category(RoomId id) const { return room_categories_.at(id.value); }
  BuildingCategory building_category(const std::string& building) const;
  bool has_building(const std::string& building) const { return buildings_.contains(building); }

  std::size_t room_count() const { return rooms_.size(); }
  std::size_t ap_count() const { return aps_.size(); }

  // Registration order.
  const std::vector<AccessPoint>& access_points() const { return aps_; }
  std::vector<std::string> aps_in_room(RoomId id) const;

 private:
  std::vector<AccessPoint> aps_;
  std::unordered_map<std::string, std::size_t> ap_index_;
  std::vector<RoomKey> rooms_;
  std::vector<BuildingCategory> room_categories_;
  std::map<RoomKey, RoomId> room_index_;
  std::map<std::string, BuildingCategory> buildings_;
  std::vector<RoomId> ap_room_;
};

struct Roster {
  std::vector<std::string> users;  // sorted, unique
  std::map<std::string, std::string> group_of;
  std::map<std::string, std::string> section_of;
  std::map<std::string, std::string> instructor_of;  // section -> instructor

  // Throws Error on duplicate user or a section assigned two instructors.
  void add(const std::string& user, const std::string& group, const std::string& section,
           const std::string& instructor);

  bool contains(const std::string& user) const { return group_of.contains(user); }
  const std::string& group(const std::string& user) const;
  const std::string& section(const std::string& user) const;
  const std::string& instructor(const std::string& user) const;

  std::vector<std::string> groups() const;
  std::vector<std::string> sections() const;
  std::vector<std::string> members(const std::string& group) const;
};

struct Lecture {
  std::string section_id;
  TimeInterval interval;
  RoomKey room;

  friend bool operator==(const Lecture&, const Lecture&) = default;
};

struct Meeting {
  std::string group_id;
  TimeInterval interval;
  std::optional<std::vector<std::string>> buildings;  // nullopt = anywhere

  bool allows_building(const std::string& building) const;
  friend bool operator==(const Meeting&, const Meeting&) = default;
};

struct Schedule {
  std::vector<Lecture> lectures;  // lecture index = position
  std::vector<Meeting> meetings;

  std::vector<std::size_t> lectures_of_section(const std::string& section) const;
  std::vector<TimeInterval> lecture_intervals_of_section(const std::string& section) const;
  std::vector<const Meeting*> meetings_of_group(const std::string& group) const;
};

using AttendanceKey = std::pair<std::string, std::size_t>;  // (user, lecture index)

struct AttendanceRecord {
  std::map<AttendanceKey, bool> present;
};

}  // namespace wifico
