#pragma once

#include <json.hpp>

namespace cello {

// Insertion-ordered so every emitted record has a stable field order.
using Json = nlohmann::ordered_json;

}  // namespace cello
