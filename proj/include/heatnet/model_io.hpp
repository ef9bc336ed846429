#pragma once

#include <string>

#include "heatnet/trainer.hpp"

namespace heatnet {

/// Self-describing model container, format version 1.
///
/// Layout: a "heatnet-model v1" magic line, `key = value` text lines carrying
/// the full configuration echo (problem parameters, train config, sampler,
/// seed, RNG identifier, fingerprint), a "---" separator, then one
///   array <name> <count>\n<count * 8 bytes little-endian float64>\n
/// record per sample block plus the weight vector. Loading rebuilds the bank
/// from the stored blocks (never by re-sampling), so predictions round-trip
/// bit-exactly. Only benchmark problems are persistable.
void save_model(const TrainedModel& m, const std::string& path);

TrainedModel load_model(const std::string& path);

/// Format identifier written to / expected in the header.
inline constexpr const char* model_magic = "heatnet-model v1";
/// Generator identity recorded in every model so replays are exact.
inline constexpr const char* rng_id = "mt19937_64+splitmix64-streams+acklam-halley-invnorm";

}  // namespace heatnet
