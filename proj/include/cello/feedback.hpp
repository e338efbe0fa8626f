#pragma once

#include <array>
#include <bitset>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cello/classify.hpp"
#include "cello/json.hpp"

namespace cello {

// Declaration order is the tie-break order for ranking.
enum class ErrorCategory : std::uint8_t {
  WristSupinated,
  WristOverPronated,
  ElbowTooLow,
  ElbowTooHigh,
  BowTooHigh,
  BowTooLow,
  BowAngleOff,
  BowOutOfZone,
};

inline constexpr std::size_t kErrorCategoryCount = 8;

const char* to_string(ErrorCategory category);
std::optional<ErrorCategory> category_from_string(std::string_view name);

using ActiveErrors = std::bitset<kErrorCategoryCount>;

inline bool has(const ActiveErrors& set, ErrorCategory c) {
  return set.test(static_cast<std::size_t>(c));
}

// Errors present in one frame: at most one per aspect (wrist, elbow, bow
// placement, bow angle). Out-of-zone frames carry no height or angle error.
ActiveErrors active_errors(const FrameResult& result);

// Instruction texts keyed by category; every category must be present.
class InstructionCatalog {
 public:
  // Throws Error(BadConfig) on missing or unknown categories.
  static InstructionCatalog from_json(const Json& doc);
  // Throws Error(IoError) or Error(BadConfig).
  static InstructionCatalog load(const std::filesystem::path& path);

  const std::string& text(ErrorCategory category) const {
    return texts_[static_cast<std::size_t>(category)];
  }

 private:
  std::array<std::string, kErrorCategoryCount> texts_;
};

struct FeedbackConfig {
  std::int64_t persistence_ms = 5000;   // error must persist this long before display
  std::int64_t min_display_ms = 3000;   // shown instructions stay at least this long
  std::int64_t flicker_allowance_ms = 500;  // shorter gaps do not break a streak
  static constexpr std::size_t kMaxDisplayed = 2;

  // Throws Error(BadConfig).
  void validate() const;

  friend bool operator==(const FeedbackConfig&, const FeedbackConfig&) = default;
};

struct Instruction {
  ErrorCategory category{};
  std::string text;
  std::int64_t shown_since_ms = 0;

  friend bool operator==(const Instruction&, const Instruction&) = default;
};

struct CategoryState {
  std::optional<std::int64_t> streak_start_ms;  // set while a streak is alive
  std::optional<std::int64_t> last_active_ms;
  std::uint64_t error_frames = 0;  // cumulative over the session

  friend bool operator==(const CategoryState&, const CategoryState&) = default;
};

struct FeedbackState {
  std::array<CategoryState, kErrorCategoryCount> categories{};
  std::vector<Instruction> displayed;  // display order, at most kMaxDisplayed
  std::optional<std::int64_t> last_t_ms;

  friend bool operator==(const FeedbackState&, const FeedbackState&) = default;
};

/**
 * Instruction display state machine.
 *
 * A streak is a run of frames where the category is active, allowing gaps
 * (time between consecutive active frames) shorter than the flicker
 * allowance. On each update, in order:
 *   1. counts and streaks advance with the frame's active set; a streak
 *      whose last active frame is flicker_allowance_ms or more in the past
 *      has ended;
 *   2. a displayed instruction leaves once it has been shown for at least
 *      min_display_ms and its streak has ended;
 *   3. categories active in this frame whose streak began at least
 *      persistence_ms ago become eligible; free slots are filled by
 *      cumulative error frames, descending, ties in category order;
 *   4. displayed instructions keep their slot and position until they
 *      leave; newly shown ones are appended in rank order.
 */
class FeedbackTracker {
 public:
  // Throws Error(BadConfig).
  FeedbackTracker(FeedbackConfig cfg, InstructionCatalog catalog);

  // Throws Error(NonMonotonicTime) and leaves the state untouched when t_ms
  // does not increase.
  const std::vector<Instruction>& update(std::int64_t t_ms, const ActiveErrors& active);
  const std::vector<Instruction>& update(const FrameResult& result) {
    return update(result.t_ms, active_errors(result));
  }

  const FeedbackState& state() const { return state_; }
  const std::vector<Instruction>& displayed() const { return state_.displayed; }
  const FeedbackConfig& config() const { return cfg_; }

 private:
  FeedbackConfig cfg_;
  InstructionCatalog catalog_;
  FeedbackState state_;
};

Json instructions_to_json(const std::vector<Instruction>& instructions);

}  // namespace cello
