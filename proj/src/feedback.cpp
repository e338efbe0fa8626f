#include "cello/feedback.hpp"

#include <algorithm>
#include <fstream>

#include "cello/error.hpp"

namespace cello {

namespace {

constexpr std::array<const char*, kErrorCategoryCount> kCategoryNames = {
    "wrist_supinated", "wrist_over_pronated", "elbow_too_low", "elbow_too_high",
    "bow_too_high",    "bow_too_low",         "bow_angle_off", "bow_out_of_zone",
};

}  // namespace

const char* to_string(ErrorCategory category) {
  return kCategoryNames[static_cast<std::size_t>(category)];
}

std::optional<ErrorCategory> category_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kErrorCategoryCount; ++i) {
    if (name == kCategoryNames[i]) return static_cast<ErrorCategory>(i);
  }
  return std::nullopt;
}

ActiveErrors active_errors(const FrameResult& r) {
  ActiveErrors set;
  auto mark = [&set](ErrorCategory c) { set.set(static_cast<std::size_t>(c)); };
  if (r.wrist.cls == WristClass::Supinated) mark(ErrorCategory::WristSupinated);
  if (r.wrist.cls == WristClass::OverPronated) mark(ErrorCategory::WristOverPronated);
  if (r.elbow.cls == ElbowClass::TooLow) mark(ErrorCategory::ElbowTooLow);
  if (r.elbow.cls == ElbowClass::TooHigh) mark(ErrorCategory::ElbowTooHigh);
  if (r.bow_out_of_zone()) {
    mark(ErrorCategory::BowOutOfZone);
  } else if (r.bow.in_zone) {
    if (r.bow.height == BowHeight::TooHigh) mark(ErrorCategory::BowTooHigh);
    if (r.bow.height == BowHeight::TooLow) mark(ErrorCategory::BowTooLow);
    if (r.bow.angle == BowAngle::Incorrect) mark(ErrorCategory::BowAngleOff);
  }
  return set;
}

InstructionCatalog InstructionCatalog::from_json(const Json& doc) {
  if (!doc.is_object() || !doc.contains("instructions") || !doc["instructions"].is_object()) {
    throw Error(ErrorCode::BadConfig, "instruction catalog needs an 'instructions' object");
  }
  InstructionCatalog catalog;
  std::array<bool, kErrorCategoryCount> seen{};
  for (const auto& [key, value] : doc["instructions"].items()) {
    const auto category = category_from_string(key);
    if (!category) throw Error(ErrorCode::BadConfig, "unknown instruction category " + key);
    if (!value.is_string() || value.get<std::string>().empty()) {
      throw Error(ErrorCode::BadConfig, "instruction text for " + key + " must be a non-empty string");
    }
    catalog.texts_[static_cast<std::size_t>(*category)] = value.get<std::string>();
    seen[static_cast<std::size_t>(*category)] = true;
  }
  for (std::size_t i = 0; i < kErrorCategoryCount; ++i) {
    if (!seen[i]) {
      throw Error(ErrorCode::BadConfig,
                  std::string("instruction catalog is missing ") + kCategoryNames[i]);
    }
  }
  return catalog;
}

InstructionCatalog InstructionCatalog::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open instruction catalog " + path.string());
  try {
    return from_json(Json::parse(in));
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::BadConfig, "instruction catalog " + path.string() + ": " + e.what());
  }
}

void FeedbackConfig::validate() const {
  if (persistence_ms < 0 || min_display_ms < 0 || flicker_allowance_ms <= 0) {
    throw Error(ErrorCode::BadConfig,
                "feedback timings must be non-negative and the flicker allowance positive");
  }
}

FeedbackTracker::FeedbackTracker(FeedbackConfig cfg, InstructionCatalog catalog)
    : cfg_(cfg), catalog_(std::move(catalog)) {
  cfg_.validate();
}

const std::vector<Instruction>& FeedbackTracker::update(std::int64_t t, const ActiveErrors& active) {
  if (state_.last_t_ms && t <= *state_.last_t_ms) {
    throw Error(ErrorCode::NonMonotonicTime,
                "feedback update at " + std::to_string(t) + " ms does not follow " +
                    std::to_string(*state_.last_t_ms) + " ms");
  }
  state_.last_t_ms = t;

  for (std::size_t c = 0; c < kErrorCategoryCount; ++c) {
    CategoryState& cs = state_.categories[c];
    const bool within_allowance =
        cs.last_active_ms && t - *cs.last_active_ms < cfg_.flicker_allowance_ms;
    if (active.test(c)) {
      if (!cs.streak_start_ms || !within_allowance) cs.streak_start_ms = t;
      cs.last_active_ms = t;
      ++cs.error_frames;
    } else if (cs.streak_start_ms && !within_allowance) {
      cs.streak_start_ms.reset();
    }
  }

  auto& shown = state_.displayed;
  std::erase_if(shown, [&](const Instruction& ins) {
    const CategoryState& cs = state_.categories[static_cast<std::size_t>(ins.category)];
    return t - ins.shown_since_ms >= cfg_.min_display_ms && !cs.streak_start_ms;
  });

  auto ranks_before = [&](std::size_t a, std::size_t b) {
    const auto fa = state_.categories[a].error_frames;
    const auto fb = state_.categories[b].error_frames;
    return fa != fb ? fa > fb : a < b;
  };

  if (shown.size() < FeedbackConfig::kMaxDisplayed) {
    std::vector<std::size_t> eligible;
    for (std::size_t c = 0; c < kErrorCategoryCount; ++c) {
      const CategoryState& cs = state_.categories[c];
      const bool is_shown = std::any_of(shown.begin(), shown.end(), [&](const Instruction& ins) {
        return static_cast<std::size_t>(ins.category) == c;
      });
      if (!is_shown && active.test(c) && cs.streak_start_ms &&
          t - *cs.streak_start_ms >= cfg_.persistence_ms) {
        eligible.push_back(c);
      }
    }
    std::sort(eligible.begin(), eligible.end(), ranks_before);
    for (std::size_t c : eligible) {
      if (shown.size() == FeedbackConfig::kMaxDisplayed) break;
      const auto category = static_cast<ErrorCategory>(c);
      shown.push_back({category, catalog_.text(category), t});
    }
  }

  return shown;
}

Json instructions_to_json(const std::vector<Instruction>& instructions) {
  Json out = Json::array();
  for (const Instruction& ins : instructions) {
    out.push_back(Json{{"category", to_string(ins.category)}, {"text", ins.text}});
  }
  return out;
}

}  // namespace cello
