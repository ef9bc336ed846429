#pragma once

#include <iosfwd>

#include "heatnet/run_config.hpp"

namespace heatnet {

/// Stable 64-bit FNV-1a hash over the little-endian bytes of the doubles;
/// used to address high-dimensional points in CSV output.
std::uint64_t point_hash(ConstVec v);
std::string point_hash_hex(ConstVec v);

/// Trains one model and saves it to cfg.out (which must be a file path).
/// Progress goes to `log`.
void cmd_train(const RunConfig& cfg, std::ostream& log);

/// Trains/evaluates `repeat` seeds, writing one CSV row per seed to `csv`
/// (flushed as rows complete) plus percentile summary rows when repeat > 1.
std::vector<ErrorReport> cmd_bench(const RunConfig& cfg, std::ostream& csv, std::ostream& log);

/// Evaluates a saved model on a grid spec, a points file, or the default
/// test grid, writing predictions (and exact values when available) as CSV.
void cmd_eval(const RunConfig& cfg, std::ostream& csv, std::ostream& log);

/// Pointwise Monte Carlo estimates of the solution at the configured points.
void cmd_mc(const RunConfig& cfg, std::ostream& csv, std::ostream& log);

}  // namespace heatnet
