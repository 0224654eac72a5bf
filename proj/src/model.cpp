#include "wifico/model.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "wifico/error.hpp"

namespace wifico {
namespace {

std::string lower(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == ' ' || c == '_' || c == '-') continue;
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

}  // namespace

std::string_view to_string(UpdateType t) {
  return t == UpdateType::SnmpPoll ? "snmppoll" : "snmpupdate";
}

UpdateType parse_update_type(std::string_view text) {
  auto s = lower(text);
  if (s == "snmpupdate") return UpdateType::SnmpUpdate;
  if (s == "snmppoll") return UpdateType::SnmpPoll;
  throw Error("unknown update type: '" + std::string(text) + "'");
}

std::string_view to_string(BuildingCategory c) {
  switch (c) {
    case BuildingCategory::Academic: return "academic";
    case BuildingCategory::Dining: return "dining";
    case BuildingCategory::GreenSpace: return "greenspace";
    case BuildingCategory::Recreation: return "recreation";
    case BuildingCategory::Residential: return "residential";
    case BuildingCategory::Other: return "other";
  }
  return "other";
}

BuildingCategory parse_category(std::string_view text) {
  auto s = lower(text);
  if (s == "academic") return BuildingCategory::Academic;
  if (s == "dining") return BuildingCategory::Dining;
  if (s == "greenspace" || s == "green" || s == "greenspaces") return BuildingCategory::GreenSpace;
  if (s == "recreation" || s == "recreational") return BuildingCategory::Recreation;
  if (s == "residential") return BuildingCategory::Residential;
  if (s == "other") return BuildingCategory::Other;
  throw Error("unknown building category: '" + std::string(text) + "'");
}

RoomKey parse_ap_label(std::string_view label) {
  auto dash = label.find('-');
  if (dash == std::string_view::npos || dash == 0 || dash + 1 == label.size()) {
    throw Error("AP label must be 'building-room': '" + std::string(label) + "'");
  }
  return {std::string(label.substr(0, dash)), std::string(label.substr(dash + 1))};
}

RoomKey room_key(const AccessPoint& ap) { return {ap.building_id, ap.room_id}; }

void ApRegistry::add(AccessPoint ap) {
  if (ap.ap_id.empty() || ap.building_id.empty() || ap.room_id.empty()) {
    throw Error("access point needs non-empty ap_id, building_id and room_id");
  }
  if (auto it = ap_index_.find(ap.ap_id); it != ap_index_.end()) {
    if (aps_[it->second] == ap) return;
    throw Error("access point registered twice with different data: " + ap.ap_id);
  }
  if (auto b = buildings_.find(ap.building_id); b != buildings_.end() && b->second != ap.category) {
    throw Error("building " + ap.building_id + " registered with two categories");
  }
  buildings_.emplace(ap.building_id, ap.category);
  RoomKey key = wifico::room_key(ap);
  auto [slot, inserted] = room_index_.emplace(key, RoomId{static_cast<std::uint32_t>(rooms_.size())});
  if (inserted) {
    rooms_.push_back(key);
    room_categories_.push_back(ap.category);
  }
  ap_index_.emplace(ap.ap_id, aps_.size());
  ap_room_.push_back(slot->second);
  aps_.push_back(std::move(ap));
}

bool ApRegistry::contains(std::string_view ap_id) const {
  return ap_index_.contains(std::string(ap_id));
}

const AccessPoint& ApRegistry::at(std::string_view ap_id) const {
  auto it = ap_index_.find(std::string(ap_id));
  if (it == ap_index_.end()) throw RegistryMissError(std::string(ap_id));
  return aps_[it->second];
}

RoomKey ApRegistry::room_key(std::string_view ap_id) const { return wifico::room_key(at(ap_id)); }

RoomId ApRegistry::room_id_of_ap(std::string_view ap_id) const {
  auto it = ap_index_.find(std::string(ap_id));
  if (it == ap_index_.end()) throw RegistryMissError(std::string(ap_id));
  return ap_room_[it->second];
}

std::optional<RoomId> ApRegistry::find_room(const RoomKey& key) const {
  auto it = room_index_.find(key);
  if (it == room_index_.end()) return std::nullopt;
  return it->second;
}

RoomId ApRegistry::room_id(const RoomKey& key) const {
  auto id = find_room(key);
  if (!id) throw Error("room not registered: " + key.label());
  return *id;
}

BuildingCategory ApRegistry::building_category(const std::string& building) const {
  auto it = buildings_.find(building);
  if (it == buildings_.end()) throw Error("building not registered: " + building);
  return it->second;
}

std::vector<std::string> ApRegistry::aps_in_room(RoomId id) const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < aps_.size(); ++i) {
    if (ap_room_[i] == id) out.push_back(aps_[i].ap_id);
  }
  return out;
}

void Roster::add(const std::string& user, const std::string& group, const std::string& section,
                 const std::string& instructor) {
  if (user.empty() || group.empty() || section.empty()) {
    throw Error("roster entry needs user, group and section");
  }
  if (group_of.contains(user)) throw Error("user listed twice in roster: " + user);
  if (auto it = instructor_of.find(section); it != instructor_of.end() && it->second != instructor) {
    throw Error("section " + section + " has two instructors");
  }
  group_of.emplace(user, group);
  section_of.emplace(user, section);
  instructor_of.emplace(section, instructor);
  users.insert(std::upper_bound(users.begin(), users.end(), user), user);
}

const std::string& Roster::group(const std::string& user) const {
  auto it = group_of.find(user);
  if (it == group_of.end()) throw Error("user not in roster: " + user);
  return it->second;
}

const std::string& Roster::section(const std::string& user) const {
  auto it = section_of.find(user);
  if (it == section_of.end()) throw Error("user not in roster: " + user);
  return it->second;
}

const std::string& Roster::instructor(const std::string& user) const {
  return instructor_of.at(section(user));
}

std::vector<std::string> Roster::groups() const {
  std::set<std::string> s;
  for (const auto& [u, g] : group_of) s.insert(g);
  return {s.begin(), s.end()};
}

std::vector<std::string> Roster::sections() const {
  std::set<std::string> s;
  for (const auto& [u, sec] : section_of) s.insert(sec);
  return {s.begin(), s.end()};
}

std::vector<std::string> Roster::members(const std::string& group) const {
  std::vector<std::string> out;
  for (const auto& u : users) {
    if (group_of.at(u) == group) out.push_back(u);
  }
  return out;
}

bool Meeting::allows_building(const std::string& building) const {
  if (!buildings) return true;
  return std::find(buildings->begin(), buildings->end(), building) != buildings->end();
}

std::vector<std::size_t> Schedule::lectures_of_section(const std::string& section) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < lectures.size(); ++i) {
    if (lectures[i].section_id == section) out.push_back(i);
  }
  return out;
}

std::vector<TimeInterval> Schedule::lecture_intervals_of_section(const std::string& section) const {
  std::vector<TimeInterval> out;
  for (const auto& l : lectures) {
    if (l.section_id == section) out.push_back(l.interval);
  }
  return merge_intervals(std::move(out));
}

std::vector<const Meeting*> Schedule::meetings_of_group(const std::string& group) const {
  std::vector<const Meeting*> out;
  for (const auto& m : meetings) {
    if (m.group_id == group) out.push_back(&m);
  }
  return out;
}

}  // namespace wifico
