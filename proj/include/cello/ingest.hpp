#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cello/geometry.hpp"
#include "cello/json.hpp"
#include "cello/types.hpp"

namespace cello {

// Accepted coordinate range; detectors extrapolate slightly past the frame.
inline constexpr double kMinCoordinate = -0.5;
inline constexpr double kMaxCoordinate = 1.5;

// One timestamped observation from the upstream detectors. Absent
// detections are empty optionals.
struct FramePacket {
  std::int64_t t_ms = 0;
  std::optional<HandLandmarks> hand;
  std::optional<PoseTriplet> pose;
  std::optional<OrientedBox> bow;
  std::optional<OrientedBox> strings;

  friend bool operator==(const FramePacket&, const FramePacket&) = default;
};

// Record form:
//   {"t_ms": int, "hand": [[x,y] x21] | null,
//    "pose": {"shoulder":[x,y,z], "elbow":[x,y,z], "wrist":[x,y,z]} | null,
//    "bow": {"cx","cy","w","h","theta_deg"} | null, "strings": {...} | null}
// Missing detection keys read as null; unknown keys are rejected.
// Throws Error(MalformedRecord) or Error(OutOfRange).
FramePacket parse_frame(const Json& record);
FramePacket parse_frame_line(std::string_view line);

Json box_to_json(const OrientedBox& box);
OrientedBox box_from_json(const Json& value);

Json frame_to_json(const FramePacket& packet);
// Canonical single-line form, without trailing newline.
std::string serialize_frame(const FramePacket& packet);

// Single-consumer reader over a line-delimited stream. Blank lines are
// skipped. Once an error has been thrown the reader yields nothing more.
class StreamReader {
 public:
  explicit StreamReader(std::istream& in) : in_(in) {}

  // Next packet, or nullopt at end of input. Throws StreamError.
  std::optional<FramePacket> next();

  std::size_t line_number() const { return line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
  std::optional<std::int64_t> last_t_;
  bool failed_ = false;
};

std::vector<FramePacket> read_stream(std::istream& in);
// Throws Error(IoError) if the file cannot be opened.
std::vector<FramePacket> read_stream(const std::filesystem::path& path);

}  // namespace cello
