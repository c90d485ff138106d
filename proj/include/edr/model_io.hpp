#ifndef EDR_MODEL_IO_HPP
#define EDR_MODEL_IO_HPP

#include <string>

#include "edr/classifier.hpp"
#include "edr/transforms.hpp"

namespace edr {

/// Versioned JSON snapshot of a fitted transform. All arrays are stored
/// row-major and survive a round-trip bit for bit (the writer emits the
/// shortest decimal that parses back to the same double).
std::string model_to_json(const AnyModel& model);
AnyModel model_from_json(const std::string& json_text);

void save_model(const AnyModel& model, const std::string& path);
AnyModel load_model(const std::string& path);

/// Same scheme for the probe classifier.
std::string logistic_model_to_json(const LogisticModel& model);
LogisticModel logistic_model_from_json(const std::string& json_text);

}  // namespace edr

#endif  // EDR_MODEL_IO_HPP
