#pragma once

// Versioned model container. Doubles round-trip bitwise through the JSON
// layer (shortest-round-trip serialization), so a saved model reproduces
// predictions exactly.

#include <string>

#include "mrgp/state.hpp"

namespace mrgp {

std::string model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const std::string& text);

void save_model(const TrainedModel& model, const std::string& path);
TrainedModel load_model(const std::string& path);

}  // namespace mrgp
