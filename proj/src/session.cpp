#include "cello/session.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <system_error>

#include "cello/error.hpp"

namespace cello {

namespace fs = std::filesystem;

namespace {

const std::array<std::vector<std::string>, 4>& all_section_classes() {
  static const std::array<std::vector<std::string>, 4> classes = {{
      {"ok", "too_high", "too_low", "out_of_zone", "undetected"},
      {"correct", "incorrect", "not_applicable"},
      {"normal", "supinated", "over_pronated", "undetected"},
      {"normal", "too_low", "too_high", "undetected"},
  }};
  return classes;
}

template <typename T>
Json optional_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

template <typename T>
std::optional<T> optional_from(const Json& v) {
  if (v.is_null()) return std::nullopt;
  return v.get<T>();
}

[[noreturn]] void store_error(const std::string& detail) {
  throw Error(ErrorCode::StoreUnavailable, detail);
}

}  // namespace

const char* to_string(SummarySection section) {
  switch (section) {
    case SummarySection::BowHeight: return "bow_height";
    case SummarySection::BowAngle: return "bow_angle";
    case SummarySection::HandPosture: return "hand_posture";
    case SummarySection::ElbowPosture: return "elbow_posture";
  }
  return "unknown";
}

const std::vector<std::string>& section_classes(SummarySection section) {
  return all_section_classes()[static_cast<std::size_t>(section)];
}

std::size_t section_class(const FrameResult& r, SummarySection section) {
  switch (section) {
    case SummarySection::BowHeight:
      if (!(r.detected.bow && r.detected.strings)) return 4;
      if (!r.bow.in_zone) return 3;
      switch (r.bow.height) {
        case BowHeight::Ok: return 0;
        case BowHeight::TooHigh: return 1;
        case BowHeight::TooLow: return 2;
        case BowHeight::NotApplicable: break;
      }
      throw std::logic_error("in-zone bow assessment without a height verdict");
    case SummarySection::BowAngle:
      if (!r.bow.in_zone) return 2;
      return r.bow.angle == BowAngle::Correct ? 0 : 1;
    case SummarySection::HandPosture: return static_cast<std::size_t>(r.wrist.cls);
    case SummarySection::ElbowPosture: return static_cast<std::size_t>(r.elbow.cls);
  }
  throw std::logic_error("unknown summary section");
}

SessionAccumulator::SessionAccumulator() {
  for (SummarySection s : kSummarySections) {
    SectionTally& tally = sections_[static_cast<std::size_t>(s)];
    tally.counts.assign(section_classes(s).size(), 0);
    tally.best_runs.assign(section_classes(s).size(), std::nullopt);
  }
}

void SessionAccumulator::accumulate(const FrameResult& result) {
  if (!timestamps_.empty() && result.t_ms <= timestamps_.back()) {
    throw Error(ErrorCode::NonMonotonicTime,
                "frame at " + std::to_string(result.t_ms) + " ms does not follow " +
                    std::to_string(timestamps_.back()) + " ms");
  }
  const std::size_t frame = timestamps_.size();
  timestamps_.push_back(result.t_ms);

  for (SummarySection s : kSummarySections) {
    SectionTally& tally = sections_[static_cast<std::size_t>(s)];
    const std::size_t cls = section_class(result, s);
    ++tally.counts[cls];
    if (tally.current_run.length > 0 && tally.current_class == cls) {
      ++tally.current_run.length;
    } else {
      tally.current_class = cls;
      tally.current_run = {frame, 1};
    }
    auto& best = tally.best_runs[cls];
    if (!best || tally.current_run.length > best->length) best = tally.current_run;
  }
}

SessionSummary summarize(const SessionAccumulator& acc) {
  if (acc.total_frames() == 0) throw Error(ErrorCode::EmptySession, "session has no frames");
  const auto ts = acc.timestamps();
  const double total = static_cast<double>(acc.total_frames());

  SessionSummary out;
  out.total_frames = acc.total_frames();
  out.first_t_ms = ts.front();
  out.duration_ms = ts.back() - ts.front();
  for (SummarySection s : kSummarySections) {
    const auto& tally = acc.section(s);
    const auto& names = section_classes(s);
    const std::size_t no_verdict = names.size() - 1;

    SectionSummary section;
    section.name = to_string(s);
    section.detected_frames = acc.total_frames() - tally.counts[no_verdict];
    const double detected = static_cast<double>(section.detected_frames);
    for (std::size_t c = 0; c < names.size(); ++c) {
      ClassBreakdown b;
      b.name = names[c];
      b.count = tally.counts[c];
      b.raw_percent = 100.0 * static_cast<double>(b.count) / total;
      if (c != no_verdict && section.detected_frames > 0) {
        b.normalized_percent = 100.0 * static_cast<double>(b.count) / detected;
      }
      if (const auto& run = tally.best_runs[c]) {
        b.representative_t_ms = ts[run->first_frame + (run->length - 1) / 2];
      }
      section.classes.push_back(std::move(b));
    }
    out.sections.push_back(std::move(section));
  }
  return out;
}

Json summary_to_json(const SessionSummary& summary) {
  Json sections = Json::array();
  for (const SectionSummary& s : summary.sections) {
    Json classes = Json::array();
    for (const ClassBreakdown& c : s.classes) {
      classes.push_back(Json{{"name", c.name},
                             {"count", c.count},
                             {"raw_percent", c.raw_percent},
                             {"normalized_percent", optional_json(c.normalized_percent)},
                             {"representative_t_ms", optional_json(c.representative_t_ms)}});
    }
    sections.push_back(Json{{"section", s.name},
                            {"detected_frames", s.detected_frames},
                            {"classes", std::move(classes)}});
  }
  return Json{{"total_frames", summary.total_frames},
              {"first_t_ms", summary.first_t_ms},
              {"duration_ms", summary.duration_ms},
              {"sections", std::move(sections)}};
}

SessionSummary summary_from_json(const Json& doc) {
  SessionSummary out;
  out.total_frames = doc.at("total_frames").get<std::uint64_t>();
  out.first_t_ms = doc.at("first_t_ms").get<std::int64_t>();
  out.duration_ms = doc.at("duration_ms").get<std::int64_t>();
  for (const Json& s : doc.at("sections")) {
    SectionSummary section;
    section.name = s.at("section").get<std::string>();
    section.detected_frames = s.at("detected_frames").get<std::uint64_t>();
    for (const Json& c : s.at("classes")) {
      ClassBreakdown b;
      b.name = c.at("name").get<std::string>();
      b.count = c.at("count").get<std::uint64_t>();
      b.raw_percent = c.at("raw_percent").get<double>();
      b.normalized_percent = optional_from<double>(c.at("normalized_percent"));
      b.representative_t_ms = optional_from<std::int64_t>(c.at("representative_t_ms"));
      section.classes.push_back(std::move(b));
    }
    out.sections.push_back(std::move(section));
  }
  return out;
}

Json record_to_json(const SessionRecord& r) {
  return Json{{"version", kSessionRecordVersion},
              {"session_id", r.session_id},
              {"user_id", r.user_id},
              {"started_at", r.started_at},
              {"config", r.config},
              {"digests", {{"wrist_model", r.wrist_model_digest},
                           {"elbow_model", r.elbow_model_digest},
                           {"stream", r.stream_digest}}},
              {"summary", summary_to_json(r.summary)}};
}

SessionRecord record_from_json(const Json& doc) {
  if (!doc.is_object() || !doc.contains("version") || !doc["version"].is_number_integer()) {
    throw Error(ErrorCode::CorruptFile, "session record has no version");
  }
  if (doc["version"].get<int>() != kSessionRecordVersion) {
    throw Error(ErrorCode::VersionMismatch, "unsupported session record version");
  }
  try {
    SessionRecord r;
    r.session_id = doc.at("session_id").get<std::string>();
    r.user_id = doc.at("user_id").get<std::string>();
    r.started_at = doc.at("started_at").get<std::string>();
    r.config = doc.at("config");
    const Json& digests = doc.at("digests");
    r.wrist_model_digest = digests.at("wrist_model").get<std::string>();
    r.elbow_model_digest = digests.at("elbow_model").get<std::string>();
    r.stream_digest = digests.at("stream").get<std::string>();
    r.summary = summary_from_json(doc.at("summary"));
    return r;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::CorruptFile, std::string("session record: ") + e.what());
  }
}

std::string iso8601_now() {
  using namespace std::chrono;
  const auto now = system_clock::now();
  const std::time_t secs = system_clock::to_time_t(now);
  const auto millis = duration_cast<milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm utc{};
  gmtime_r(&secs, &utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &utc);
  char out[40];
  std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(millis));
  return out;
}

bool is_valid_identifier(std::string_view id) {
  if (id.empty() || id.size() > 64 || id.front() == '.') return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '_' || c == '-' || c == '.';
  });
}

SessionStore::SessionStore(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec || !fs::is_directory(root_)) store_error("cannot use store directory " + root_.string());
}

std::mutex& SessionStore::user_mutex(const std::string& user_id) {
  std::lock_guard lock(map_mutex_);
  return user_mutexes_[user_id];
}

void SessionStore::persist(const SessionRecord& record) {
  if (!is_valid_identifier(record.user_id) || !is_valid_identifier(record.session_id)) {
    throw Error(ErrorCode::BadRequest, "user and session ids must be simple identifiers");
  }
  std::lock_guard lock(user_mutex(record.user_id));
  const fs::path dir = root_ / record.user_id;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) store_error("cannot create " + dir.string() + ": " + ec.message());

  const fs::path final_path = dir / (record.session_id + ".json");
  const fs::path tmp_path = dir / (record.session_id + ".json.tmp");
  {
    std::ofstream out(tmp_path, std::ios::binary);
    if (!out) store_error("cannot write " + tmp_path.string());
    out << record_to_json(record).dump(2) << '\n';
    if (!out) store_error("failed writing " + tmp_path.string());
  }
  fs::rename(tmp_path, final_path, ec);
  if (ec) store_error("cannot finalize " + final_path.string() + ": " + ec.message());
}

std::vector<SessionRecord> SessionStore::list_history(const std::string& user_id) {
  if (!is_valid_identifier(user_id)) throw Error(ErrorCode::BadRequest, "invalid user id");
  std::lock_guard lock(user_mutex(user_id));
  std::vector<SessionRecord> records;
  const fs::path dir = root_ / user_id;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) return records;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (entry.path().extension() != ".json") continue;
    std::ifstream in(entry.path());
    if (!in) store_error("cannot read " + entry.path().string());
    try {
      records.push_back(record_from_json(Json::parse(in)));
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::CorruptFile, entry.path().string() + ": " + e.what());
    }
  }
  if (ec) store_error("cannot list " + dir.string() + ": " + ec.message());
  std::sort(records.begin(), records.end(), [](const SessionRecord& a, const SessionRecord& b) {
    return a.started_at != b.started_at ? a.started_at < b.started_at : a.session_id < b.session_id;
  });
  return records;
}

SessionRecord SessionStore::load(const std::string& session_id) {
  if (!is_valid_identifier(session_id)) {
    throw Error(ErrorCode::UnknownSession, "no session " + session_id);
  }
  std::error_code ec;
  for (const auto& user_dir : fs::directory_iterator(root_, ec)) {
    if (!user_dir.is_directory()) continue;
    const fs::path candidate = user_dir.path() / (session_id + ".json");
    if (!fs::exists(candidate)) continue;
    std::lock_guard lock(user_mutex(user_dir.path().filename().string()));
    std::ifstream in(candidate);
    if (!in) store_error("cannot read " + candidate.string());
    try {
      return record_from_json(Json::parse(in));
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::CorruptFile, candidate.string() + ": " + e.what());
    }
  }
  if (ec) store_error("cannot list " + root_.string() + ": " + ec.message());
  throw Error(ErrorCode::UnknownSession, "no session " + session_id);
}

}  // namespace cello
