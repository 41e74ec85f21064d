#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "paced/config.hpp"
#include "paced/training.hpp"

namespace paced {

inline constexpr int kCheckpointVersion = 1;

// Everything needed to resume a run bit-for-bit or to score its best model.
struct Checkpoint {
    RunConfig config;
    std::string manifest_digest;
    TrainRunState state;
};

nlohmann::json to_json(const EpochReport& report);
EpochReport epoch_report_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Checkpoint& checkpoint);
Checkpoint checkpoint_from_json(const nlohmann::json& j);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace paced
