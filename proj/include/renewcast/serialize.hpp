#pragma once

// JSON views of the domain types that land in manifests and checkpoints.

#include <json.hpp>

#include "renewcast/features.hpp"
#include "renewcast/models.hpp"
#include "renewcast/nn.hpp"
#include "renewcast/stats.hpp"

namespace renewcast {

using Json = nlohmann::ordered_json;

Json to_json(const models::ModelSpec& spec);
models::ModelSpec model_spec_from_json(const Json& j);

Json to_json(const nn::TrainConfig& config);
Json to_json(const nn::EpochMetrics& m);
Json to_json(const stats::PcaModel& pca);
Json to_json(const features::TransformPlan& plan);
Json to_json(const stats::StationarityReport& r);
Json to_json(const stats::FriedmanResult& r);

}  // namespace renewcast
