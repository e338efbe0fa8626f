#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "cello/ingest.hpp"
#include "cello/neuralnet.hpp"
#include "cello/types.hpp"

namespace cello {

enum class SynthTask { Wrist, Elbow };

const char* to_string(SynthTask task);

struct SynthSpec {
  SynthTask task = SynthTask::Wrist;
  std::size_t n_per_class = 1000;
  // Isotropic landmark noise, in units of the hand radius (wrist task) or
  // the upper-arm length (elbow task).
  double noise_sigma = 0.03;
  std::uint64_t seed = 0;

  // Throws Error(BadConfig).
  void validate() const;
};

// Inclusive range in degrees.
struct AngleBand {
  double lo_deg = 0.0;
  double hi_deg = 0.0;
};

// Generating parameter ranges per class. These are invented configuration:
// the classes are only defined qualitatively. Wrist bands are planar hand
// rotations about the origin landmark (counterclockwise on screen);
// elbow bands are the upper-arm elevation above horizontal.
struct SynthBands {
  AngleBand wrist_normal{-10.0, 10.0};
  AngleBand wrist_supinated{25.0, 45.0};
  AngleBand wrist_over_pronated{-45.0, -25.0};
  AngleBand elbow_normal{-10.0, 10.0};
  AngleBand elbow_too_low{-40.0, -20.0};
  AngleBand elbow_too_high{20.0, 40.0};

  // Bands in class-label order for the task.
  std::vector<AngleBand> for_task(SynthTask task) const;
};

// Class label order used by the generators and the default models.
const std::vector<std::string>& wrist_class_labels();  // normal, supinated, over_pronated
const std::vector<std::string>& elbow_class_labels();  // normal, too_low, too_high

// Canonical right-hand template, wrist base at the origin, image axes.
const HandLandmarks& canonical_hand_template();

// Smallest single-hidden-layer nets in the expected budgets: 42-24-3 (1107
// parameters) and 9-34-3 (445 parameters).
std::vector<std::size_t> default_layer_sizes(SynthTask task);
const std::vector<std::string>& class_labels(SynthTask task);

// Rotates about the origin landmark, counterclockwise on screen.
HandLandmarks rotate_hand(const HandLandmarks& hand, double angle_deg);

// n_per_class samples of every class, grouped by class. Labels are the
// generating class.
LabeledDataset generate(const SynthSpec& spec, const SynthBands& bands = {});

// Scripted practice session used for fixtures and benchmarks: posture
// states change every few seconds and detections occasionally drop out.
struct StreamSpec {
  std::uint64_t seed = 0;
  std::int64_t duration_ms = 40000;
  std::int64_t frame_interval_ms = 40;
  double dropout_probability = 0.03;
  double noise_sigma = 0.01;
  // Landmark coordinates are rounded to this many decimals, like a detector
  // emitting single-precision output.
  int decimals = 5;
};

std::vector<FramePacket> generate_stream(const StreamSpec& spec, const SynthBands& bands = {});

}  // namespace cello
