#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cello/classify.hpp"
#include "cello/json.hpp"

namespace cello {

enum class SummarySection { BowHeight, BowAngle, HandPosture, ElbowPosture };

inline constexpr std::array<SummarySection, 4> kSummarySections = {
    SummarySection::BowHeight, SummarySection::BowAngle, SummarySection::HandPosture,
    SummarySection::ElbowPosture};

const char* to_string(SummarySection section);

// Class names of a section. The last entry is the "no verdict" class
// (undetected / not_applicable) and is excluded from normalization.
const std::vector<std::string>& section_classes(SummarySection section);

// Index into section_classes() for one frame.
std::size_t section_class(const FrameResult& result, SummarySection section);

/**
 * Per-session frame tallies. Per section it keeps class counts, the current
 * run of identical verdicts, and the longest run seen per class (earliest
 * wins ties).
 */
class SessionAccumulator {
 public:
  struct Run {
    std::size_t first_frame = 0;  // index into timestamps()
    std::size_t length = 0;

    friend bool operator==(const Run&, const Run&) = default;
  };

  struct SectionTally {
    std::vector<std::uint64_t> counts;
    std::vector<std::optional<Run>> best_runs;
    std::size_t current_class = 0;
    Run current_run;

    friend bool operator==(const SectionTally&, const SectionTally&) = default;
  };

  SessionAccumulator();

  // Throws Error(NonMonotonicTime) and leaves the tallies unchanged when
  // t_ms does not increase.
  void accumulate(const FrameResult& result);

  std::uint64_t total_frames() const { return timestamps_.size(); }
  std::span<const std::int64_t> timestamps() const { return timestamps_; }
  const SectionTally& section(SummarySection s) const {
    return sections_[static_cast<std::size_t>(s)];
  }

  friend bool operator==(const SessionAccumulator&, const SessionAccumulator&) = default;

 private:
  std::array<SectionTally, kSummarySections.size()> sections_;
  std::vector<std::int64_t> timestamps_;
};

struct ClassBreakdown {
  std::string name;
  std::uint64_t count = 0;
  double raw_percent = 0.0;                        // of all frames
  std::optional<double> normalized_percent;        // of detected frames in the section
  std::optional<std::int64_t> representative_t_ms; // middle frame of the longest run

  friend bool operator==(const ClassBreakdown&, const ClassBreakdown&) = default;
};

struct SectionSummary {
  std::string name;
  std::uint64_t detected_frames = 0;
  std::vector<ClassBreakdown> classes;

  friend bool operator==(const SectionSummary&, const SectionSummary&) = default;
};

struct SessionSummary {
  std::uint64_t total_frames = 0;
  std::int64_t first_t_ms = 0;
  std::int64_t duration_ms = 0;
  std::vector<SectionSummary> sections;

  friend bool operator==(const SessionSummary&, const SessionSummary&) = default;
};

// Throws Error(EmptySession) when no frames were accumulated.
SessionSummary summarize(const SessionAccumulator& acc);

Json summary_to_json(const SessionSummary& summary);
SessionSummary summary_from_json(const Json& doc);

inline constexpr int kSessionRecordVersion = 1;

struct SessionRecord {
  std::string session_id;
  std::string user_id;
  std::string started_at;  // ISO-8601 UTC
  Json config;             // configuration snapshot
  std::string wrist_model_digest;
  std::string elbow_model_digest;
  std::string stream_digest;
  SessionSummary summary;

  friend bool operator==(const SessionRecord&, const SessionRecord&) = default;
};

Json record_to_json(const SessionRecord& record);
// Throws Error(VersionMismatch) or Error(CorruptFile).
SessionRecord record_from_json(const Json& doc);

// Current wall-clock time as YYYY-MM-DDTHH:MM:SS.mmmZ.
std::string iso8601_now();

// Letters, digits, '_', '-', '.'; 1-64 characters; no leading '.'.
bool is_valid_identifier(std::string_view id);

/**
 * Session history on disk: <root>/<user>/<session_id>.json. Operations on
 * one user directory are serialized; different users proceed in parallel.
 */
class SessionStore {
 public:
  // Throws Error(StoreUnavailable) if the root cannot be created.
  explicit SessionStore(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }

  // Throws Error(StoreUnavailable) or Error(BadRequest) for invalid ids.
  void persist(const SessionRecord& record);
  // Oldest first.
  std::vector<SessionRecord> list_history(const std::string& user_id);
  // Throws Error(UnknownSession).
  SessionRecord load(const std::string& session_id);

 private:
  std::mutex& user_mutex(const std::string& user_id);

  std::filesystem::path root_;
  std::mutex map_mutex_;
  std::map<std::string, std::mutex> user_mutexes_;
};

}  // namespace cello
