#include "cello/ingest.hpp"

#include <fstream>

#include "cello/error.hpp"

namespace cello {

namespace {

[[noreturn]] void malformed(const std::string& detail) {
  throw Error(ErrorCode::MalformedRecord, detail);
}

double read_number(const Json& value, const char* what) {
  if (!value.is_number()) malformed(std::string(what) + " must be a number");
  return value.get<double>();
}

double read_coordinate(const Json& value, const char* what) {
  const double v = read_number(value, what);
  if (!(v >= kMinCoordinate && v <= kMaxCoordinate)) {
    throw Error(ErrorCode::OutOfRange,
                std::string(what) + " coordinate " + std::to_string(v) + " outside [-0.5, 1.5]");
  }
  return v;
}

Vec2 read_point2(const Json& value) {
  if (!value.is_array() || value.size() != 2) malformed("hand landmark must be [x, y]");
  return {read_coordinate(value[0], "hand"), read_coordinate(value[1], "hand")};
}

Vec3 read_point3(const Json& object, const char* key) {
  const auto it = object.find(key);
  if (it == object.end()) malformed(std::string("pose is missing ") + key);
  if (!it->is_array() || it->size() != 3) malformed(std::string("pose ") + key + " must be [x, y, z]");
  return {read_coordinate((*it)[0], key), read_coordinate((*it)[1], key),
          read_coordinate((*it)[2], key)};
}

HandLandmarks read_hand(const Json& value) {
  if (!value.is_array()) malformed("hand must be an array of landmarks");
  if (value.size() != kHandLandmarkCount) {
    malformed("hand must have 21 landmarks, got " + std::to_string(value.size()));
  }
  HandLandmarks hand;
  for (std::size_t i = 0; i < kHandLandmarkCount; ++i) hand[i] = read_point2(value[i]);
  return hand;
}

PoseTriplet read_pose(const Json& value) {
  if (!value.is_object()) malformed("pose must be an object");
  for (const auto& [key, _] : value.items()) {
    if (key != "shoulder" && key != "elbow" && key != "wrist") malformed("unknown pose key " + key);
  }
  return {read_point3(value, "shoulder"), read_point3(value, "elbow"), read_point3(value, "wrist")};
}

Json point_array(std::initializer_list<double> values) {
  Json out = Json::array();
  for (double v : values) out.push_back(v);
  return out;
}

}  // namespace

OrientedBox box_from_json(const Json& value) {
  if (!value.is_object()) malformed("box must be an object");
  static constexpr const char* kKeys[] = {"cx", "cy", "w", "h", "theta_deg"};
  for (const auto& [key, _] : value.items()) {
    if (std::find_if(std::begin(kKeys), std::end(kKeys), [&](const char* k) { return key == k; }) ==
        std::end(kKeys)) {
      malformed("unknown box key " + key);
    }
  }
  auto field = [&](const char* key) -> const Json& {
    const auto it = value.find(key);
    if (it == value.end()) malformed(std::string("box is missing ") + key);
    return *it;
  };
  const double cx = read_coordinate(field("cx"), "box center");
  const double cy = read_coordinate(field("cy"), "box center");
  const double w = read_number(field("w"), "box w");
  const double h = read_number(field("h"), "box h");
  const double theta = read_number(field("theta_deg"), "box theta_deg");
  try {
    return OrientedBox::make(cx, cy, w, h, theta);
  } catch (const Error& e) {
    malformed(e.what());
  }
}

Json box_to_json(const OrientedBox& box) {
  return Json{{"cx", box.cx()}, {"cy", box.cy()}, {"w", box.w()}, {"h", box.h()},
              {"theta_deg", box.theta_deg()}};
}

FramePacket parse_frame(const Json& record) {
  if (!record.is_object()) malformed("frame record must be an object");
  for (const auto& [key, _] : record.items()) {
    if (key != "t_ms" && key != "hand" && key != "pose" && key != "bow" && key != "strings") {
      malformed("unknown frame key " + key);
    }
  }

  FramePacket packet;
  const auto t = record.find("t_ms");
  if (t == record.end()) malformed("frame is missing t_ms");
  if (!t->is_number_integer()) malformed("t_ms must be an integer");
  if (t->is_number_unsigned()) {
    const auto raw = t->get<std::uint64_t>();
    if (raw > static_cast<std::uint64_t>(INT64_MAX)) malformed("t_ms too large");
    packet.t_ms = static_cast<std::int64_t>(raw);
  } else {
    packet.t_ms = t->get<std::int64_t>();
  }
  if (packet.t_ms < 0) malformed("t_ms must be non-negative");

  auto present = [&](const char* key) -> const Json* {
    const auto it = record.find(key);
    return (it == record.end() || it->is_null()) ? nullptr : &*it;
  };
  if (const Json* v = present("hand")) packet.hand = read_hand(*v);
  if (const Json* v = present("pose")) packet.pose = read_pose(*v);
  if (const Json* v = present("bow")) packet.bow = box_from_json(*v);
  if (const Json* v = present("strings")) packet.strings = box_from_json(*v);
  return packet;
}

FramePacket parse_frame_line(std::string_view line) {
  Json record;
  try {
    record = Json::parse(line.begin(), line.end());
  } catch (const Json::parse_error& e) {
    malformed(std::string("invalid JSON: ") + e.what());
  }
  return parse_frame(record);
}

Json frame_to_json(const FramePacket& packet) {
  Json out;
  out["t_ms"] = packet.t_ms;
  if (packet.hand) {
    Json hand = Json::array();
    for (const Vec2& p : *packet.hand) hand.push_back(point_array({p.x, p.y}));
    out["hand"] = std::move(hand);
  } else {
    out["hand"] = nullptr;
  }
  if (packet.pose) {
    const PoseTriplet& pose = *packet.pose;
    out["pose"] = Json{{"shoulder", point_array({pose.shoulder.x, pose.shoulder.y, pose.shoulder.z})},
                       {"elbow", point_array({pose.elbow.x, pose.elbow.y, pose.elbow.z})},
                       {"wrist", point_array({pose.wrist.x, pose.wrist.y, pose.wrist.z})}};
  } else {
    out["pose"] = nullptr;
  }
  out["bow"] = packet.bow ? box_to_json(*packet.bow) : Json(nullptr);
  out["strings"] = packet.strings ? box_to_json(*packet.strings) : Json(nullptr);
  return out;
}

std::string serialize_frame(const FramePacket& packet) { return frame_to_json(packet).dump(); }

std::optional<FramePacket> StreamReader::next() {
  if (failed_) return std::nullopt;
  std::string line;
  while (std::getline(in_, line)) {
    ++line_;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      FramePacket packet = parse_frame_line(line);
      if (last_t_ && packet.t_ms <= *last_t_) {
        throw Error(ErrorCode::NonMonotonicTimestamp,
                    "t_ms " + std::to_string(packet.t_ms) + " does not increase past " +
                        std::to_string(*last_t_));
      }
      last_t_ = packet.t_ms;
      return packet;
    } catch (const Error& e) {
      failed_ = true;
      throw StreamError(e.code(), line_, e.what());
    }
  }
  return std::nullopt;
}

std::vector<FramePacket> read_stream(std::istream& in) {
  StreamReader reader(in);
  std::vector<FramePacket> packets;
  while (auto packet = reader.next()) packets.push_back(std::move(*packet));
  return packets;
}

std::vector<FramePacket> read_stream(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open stream " + path.string());
  return read_stream(in);
}

}  // namespace cello
